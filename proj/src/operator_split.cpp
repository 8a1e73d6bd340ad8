#include "weakval/operator_split.hpp"

namespace weakval {

SubspaceDimensions subspace_dimensions(int d) {
    if (d < 1) throw ParameterError("dimension must be >= 1");
    return {d * (d - 1) / 2, d * (d + 1) / 2};
}

OperatorSplit split_operator(const QuantumState& state, const Measurement& meas,
                             const HermitianOperator& a, const Tolerances& tol) {
    if (!state.is_pure() || !meas.is_projective())
        throw UnsupportedForIdentity(
            "operator split requires a pure state and a projective basis");
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(meas.dim(), a.dim(), "measurement vs generator");

    GammaBasis gb = gamma_basis(state, meas, tol);
    Matrix g = gb.vectors.adjoint() * a.mat * gb.vectors;

    // Real part of the matrix in the phase-adjusted basis, symmetrized so S
    // is exactly Hermitian; K = A - S keeps the sum exact.
    Eigen::MatrixXd re = 0.5 * (g.real() + g.real().transpose());
    Matrix s = gb.vectors * re.cast<Complex>() * gb.vectors.adjoint();
    s = 0.5 * (s + s.adjoint()).eval();

    OperatorSplit split;
    split.symmetric_part = HermitianOperator(s);
    split.generator_part = HermitianOperator(a.mat - s);
    split.basis = gb;
    split.degenerate = gb.degenerate;
    return split;
}

bool is_measurement_insensitive(const QuantumState& state, const Measurement& meas,
                                const HermitianOperator& a, const Tolerances& tol) {
    if (!state.is_pure() || !meas.is_projective())
        throw UnsupportedForIdentity(
            "phase insensitivity test requires a pure state and a projective basis");

    constexpr double kThreshold = 1e-9;
    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    double mean = state.psi.dot(a.mat * state.psi).real();
    Vector centered = meas.basis.adjoint() * (a.mat * state.psi - mean * state.psi);

    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) >= tol.prob) {
            if (std::abs(mom.numer(m).imag() / mom.prob(m)) > kThreshold) return false;
        } else {
            if (std::abs(centered(m)) > kThreshold) return false;
        }
    }
    return true;
}

}  // namespace weakval
