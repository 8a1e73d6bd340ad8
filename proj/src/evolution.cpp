#include "weakval/evolution.hpp"

#include <Eigen/Eigenvalues>

namespace weakval {

namespace {

const Complex kI{0.0, 1.0};

void require_hermitian(const HermitianOperator& a, const Tolerances& tol) {
    double res = a.hermiticity_residual();
    if (res > tol.herm)
        throw InvalidOperator("generator is not Hermitian (residual " +
                              std::to_string(res) + ")");
}

}  // namespace

PhasePropagator::PhasePropagator(const HermitianOperator& a, const Tolerances& tol) {
    require_hermitian(a, tol);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat);
    if (es.info() != Eigen::Success)
        throw InvalidOperator("eigendecomposition of the generator failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

Matrix PhasePropagator::matrix(double phi) const {
    Vector phases = (-kI * phi * evals_.cast<Complex>().array()).exp();
    return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

Vector PhasePropagator::apply(const Vector& psi, double phi) const {
    require_same_dim(psi.size(), dim(), "evolve");
    Vector phases = (-kI * phi * evals_.cast<Complex>().array()).exp();
    return evecs_ * (phases.asDiagonal() * (evecs_.adjoint() * psi));
}

Matrix PhasePropagator::apply_density(const Matrix& rho, double phi) const {
    require_same_dim(rho.rows(), dim(), "evolve");
    Matrix u = matrix(phi);
    return u * rho * u.adjoint();
}

Matrix phase_unitary(const HermitianOperator& a, double phi, const Tolerances& tol) {
    return PhasePropagator(a, tol).matrix(phi);
}

QuantumState evolve(const QuantumState& state, const HermitianOperator& a, double phi,
                    const Tolerances& tol) {
    PhasePropagator prop(a, tol);
    if (state.is_pure()) return QuantumState::pure(prop.apply(state.psi, phi));
    return QuantumState::mixed(prop.apply_density(state.rho, phi));
}

RealVector outcome_probabilities(const QuantumState& state, const Measurement& meas,
                                 const HermitianOperator& a, double phi,
                                 const Tolerances& tol) {
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(meas.dim(), a.dim(), "measurement vs generator");

    QuantumState out = (phi == 0.0) ? state : evolve(state, a, phi, tol);
    const Eigen::Index k = meas.outcome_count();
    RealVector p(k);

    if (out.is_pure() && meas.is_projective()) {
        p = (meas.basis.adjoint() * out.psi).cwiseAbs2();
    } else {
        Matrix rho = out.density();
        for (Eigen::Index m = 0; m < k; ++m) {
            Complex tr = (meas.effect(m) * rho).trace();
            p(m) = tr.real();
        }
    }

    for (Eigen::Index m = 0; m < k; ++m) {
        if (p(m) < -tol.norm || p(m) > 1.0 + tol.norm)
            throw ValidationError("probability",
                                  "outcome probability out of range: " + std::to_string(p(m)));
        p(m) = std::min(1.0, std::max(0.0, p(m)));
    }
    double total = p.sum();
    if (std::abs(total - 1.0) > tol.norm)
        throw ValidationError("probability.sum",
                              "outcome probabilities sum to " + std::to_string(total));
    return p;
}

}  // namespace weakval
