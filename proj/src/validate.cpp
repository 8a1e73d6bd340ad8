#include "weakval/validate.hpp"

#include <Eigen/Eigenvalues>

namespace weakval {

namespace {

void add(ValidationReport& r, std::string name, double residual, double tolerance) {
    bool ok = residual <= tolerance;
    r.items.push_back({std::move(name), residual, tolerance, ok});
    r.pass = r.pass && ok;
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

ValidationReport validate_state(const QuantumState& state, const Tolerances& tol) {
    ValidationReport r;
    if (state.dim() < 1) throw DimensionError("state: dimension must be >= 1");
    if (state.is_pure()) {
        add(r, "state.norm", std::abs(state.psi.norm() - 1.0), tol.norm);
    } else {
        add(r, "state.trace", std::abs(state.rho.trace().real() - 1.0) +
                                  std::abs(state.rho.trace().imag()),
            tol.norm);
        add(r, "state.hermitian", (state.rho - state.rho.adjoint()).cwiseAbs().maxCoeff(),
            tol.herm);
        double lam = min_eigenvalue(0.5 * (state.rho + state.rho.adjoint()));
        add(r, "state.positive", std::max(0.0, -lam), tol.psd);
    }
    return r;
}

ValidationReport validate_measurement(const Measurement& meas, const Tolerances& tol) {
    ValidationReport r;
    const Eigen::Index d = meas.dim();
    if (d < 1) throw DimensionError("measurement: dimension must be >= 1");
    if (meas.is_projective()) {
        if (meas.basis.cols() != d)
            throw DimensionError("measurement: projective basis must have d vectors");
        Matrix gram = meas.basis.adjoint() * meas.basis;
        add(r, "measurement.orthonormal",
            (gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), tol.norm);
    } else {
        if (meas.effects.empty()) throw DimensionError("measurement: POVM has no effects");
        double herm_res = 0.0;
        double psd_res = 0.0;
        Matrix sum = Matrix::Zero(d, d);
        for (const auto& e : meas.effects) {
            require_same_dim(e.rows(), d, "povm effect");
            require_same_dim(e.cols(), d, "povm effect");
            herm_res = std::max(herm_res, (e - e.adjoint()).cwiseAbs().maxCoeff());
            psd_res = std::max(psd_res,
                               std::max(0.0, -min_eigenvalue(0.5 * (e + e.adjoint()))));
            sum += e;
        }
        add(r, "measurement.effect_hermitian", herm_res, tol.herm);
        add(r, "measurement.effect_positive", psd_res, tol.psd);
        add(r, "measurement.completeness",
            (sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), tol.norm);
    }
    return r;
}

ValidationReport validate(const Scenario& scenario, const Tolerances& tol) {
    const Eigen::Index d = scenario.generator.dim();
    if (d < 1) throw DimensionError("generator: dimension must be >= 1");
    if (scenario.generator.mat.cols() != d)
        throw DimensionError("generator: matrix must be square");
    require_same_dim(scenario.state.dim(), d, "state vs generator");
    require_same_dim(scenario.measurement.dim(), d, "measurement vs generator");

    ValidationReport r;
    add(r, "generator.hermitian", scenario.generator.hermiticity_residual(), tol.herm);
    for (auto& part : {validate_state(scenario.state, tol),
                       validate_measurement(scenario.measurement, tol)}) {
        for (const auto& item : part.items) r.items.push_back(item);
        r.pass = r.pass && part.pass;
    }
    return r;
}

}  // namespace weakval
