#include "weakval/weak_values.hpp"

namespace weakval {

namespace {

double clamp_probability(double p, const Tolerances& tol) {
    if (p < -tol.norm || p > 1.0 + tol.norm)
        throw ValidationError("probability",
                              "outcome probability out of range: " + std::to_string(p));
    return std::min(1.0, std::max(0.0, p));
}

void require_pure_projective(const QuantumState& state, const Measurement& meas,
                             const char* what) {
    if (!state.is_pure() || !meas.is_projective())
        throw UnsupportedForIdentity(std::string(what) +
                                     " requires a pure state and a projective basis");
}

}  // namespace

OutcomeMoments outcome_moments(const QuantumState& state, const Measurement& meas,
                               const HermitianOperator& a, const Tolerances& tol) {
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(meas.dim(), a.dim(), "measurement vs generator");

    const Eigen::Index k = meas.outcome_count();
    OutcomeMoments mom;
    mom.prob.resize(k);
    mom.numer.resize(k);

    if (state.is_pure() && meas.is_projective()) {
        Vector overlaps = meas.basis.adjoint() * state.psi;         // <m|psi>
        Vector transitions = meas.basis.adjoint() * (a.mat * state.psi);  // <m|A|psi>
        for (Eigen::Index m = 0; m < k; ++m) {
            mom.prob(m) = clamp_probability(std::norm(overlaps(m)), tol);
            mom.numer(m) = transitions(m) * std::conj(overlaps(m));
        }
        return mom;
    }

    Matrix rho = state.density();
    Matrix a_rho = a.mat * rho;
    for (Eigen::Index m = 0; m < k; ++m) {
        Matrix eff = meas.effect(m);
        mom.prob(m) = clamp_probability((eff * rho).trace().real(), tol);
        mom.numer(m) = (eff * a_rho).trace();
    }
    return mom;
}

std::optional<Complex> weak_value(const QuantumState& state, const Matrix& effect,
                                  const HermitianOperator& a, const Tolerances& tol) {
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(effect.rows(), a.dim(), "effect vs generator");

    Matrix rho = state.density();
    double p = clamp_probability((effect * rho).trace().real(), tol);
    if (p < tol.prob) return std::nullopt;
    Complex numer = (effect * (a.mat * rho)).trace();
    return numer / p;
}

std::optional<Complex> weak_value(const QuantumState& state, const Vector& post_state,
                                  const HermitianOperator& a, const Tolerances& tol) {
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(post_state.size(), a.dim(), "post-selected state vs generator");

    if (state.is_pure()) {
        Complex overlap = post_state.dot(state.psi);              // <m|psi>
        Complex transition = post_state.dot(a.mat * state.psi);   // <m|A|psi>
        double p = clamp_probability(std::norm(overlap), tol);
        if (p < tol.prob) return std::nullopt;
        return transition * std::conj(overlap) / p;
    }
    return weak_value(state, Matrix(post_state * post_state.adjoint()), a, tol);
}

WeakValueProfile weak_value_profile(const QuantumState& state, const Measurement& meas,
                                    const HermitianOperator& a, const Tolerances& tol) {
    OutcomeMoments mom = outcome_moments(state, meas, a, tol);

    WeakValueProfile profile;
    if (state.is_pure()) {
        profile.mean_a = state.psi.dot(a.mat * state.psi).real();
        profile.second_moment = (a.mat * state.psi).squaredNorm();
    } else {
        profile.mean_a = (a.mat * state.rho).trace().real();
        profile.second_moment = (a.mat * a.mat * state.rho).trace().real();
    }
    profile.var_in = profile.second_moment - profile.mean_a * profile.mean_a;

    const Eigen::Index k = mom.prob.size();
    profile.outcomes.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index m = 0; m < k; ++m) {
        WeakOutcome out;
        out.index = m;
        out.probability = mom.prob(m);
        out.numerator = mom.numer(m);
        if (mom.prob(m) >= tol.prob) out.weak_value = mom.numer(m) / mom.prob(m);
        profile.outcomes.push_back(out);
    }
    return profile;
}

VarianceIdentity weak_variance_identity(const QuantumState& state, const Measurement& meas,
                                        const HermitianOperator& a, const Tolerances&) {
    require_pure_projective(state, meas, "weak_variance_identity");
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(meas.dim(), a.dim(), "measurement vs generator");

    double mean = state.psi.dot(a.mat * state.psi).real();
    Vector centered = a.mat * state.psi - mean * state.psi;  // (A - <A>)|psi>
    VarianceIdentity id;
    id.lhs = (meas.basis.adjoint() * centered).squaredNorm();
    id.rhs = centered.squaredNorm();
    return id;
}

GammaBasis gamma_basis(const QuantumState& state, const Measurement& meas,
                       const Tolerances& tol) {
    require_pure_projective(state, meas, "gamma_basis");
    require_same_dim(state.dim(), meas.dim(), "state vs measurement");

    const Eigen::Index d = meas.dim();
    Vector overlaps = meas.basis.adjoint() * state.psi;

    GammaBasis gb;
    gb.vectors = meas.basis;
    gb.amplitudes.resize(d);
    for (Eigen::Index m = 0; m < d; ++m) {
        double amp = std::abs(overlaps(m));
        gb.amplitudes(m) = amp;
        if (amp * amp >= tol.prob) {
            gb.vectors.col(m) *= overlaps(m) / amp;
        } else {
            gb.degenerate = true;  // phase convention 1
        }
    }
    return gb;
}

GammaWeakValue weak_value_via_gamma(const QuantumState& state, const Measurement& meas,
                                    const HermitianOperator& a, Eigen::Index m,
                                    const Tolerances& tol) {
    require_pure_projective(state, meas, "weak_value_via_gamma");
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    if (m < 0 || m >= meas.outcome_count())
        throw ParameterError("outcome index out of range");

    GammaBasis gb = gamma_basis(state, meas, tol);
    double amp_m = gb.amplitudes(m);
    if (amp_m * amp_m < tol.prob)
        throw UndefinedWeakValue("weak value undefined: outcome probability below cutoff");

    // Row m of the generator in the phase-adjusted basis.
    Vector row = (gb.vectors.col(m).adjoint() * a.mat * gb.vectors).transpose();

    GammaWeakValue result{Complex(0, 0), Complex(0, 0), Complex(0, 0)};
    for (Eigen::Index j = 0; j < gb.amplitudes.size(); ++j) {
        double weight = gb.amplitudes(j) / amp_m;
        result.symmetric_part += Complex(row(j).real(), 0.0) * weight;
        result.antisymmetric_part += Complex(0.0, row(j).imag()) * weight;
    }
    result.value = result.symmetric_part + result.antisymmetric_part;
    return result;
}

}  // namespace weakval
