#include "weakval/metrology.hpp"

#include "weakval/evolution.hpp"

#include <cmath>

namespace weakval {

namespace {

struct InitialMoments {
    double mean;
    double second;
    double variance;
};

InitialMoments initial_moments(const QuantumState& state, const HermitianOperator& a) {
    InitialMoments im{};
    if (state.is_pure()) {
        im.mean = state.psi.dot(a.mat * state.psi).real();
        im.second = (a.mat * state.psi).squaredNorm();
    } else {
        im.mean = (a.mat * state.rho).trace().real();
        im.second = (a.mat * a.mat * state.rho).trace().real();
    }
    im.variance = im.second - im.mean * im.mean;
    return im;
}

/// phi -> 0 limit of the Fisher contribution of a vanishing-probability
/// outcome of a pure state: 4 <psi|(A - <A>) Pi_m (A - <A>)|psi>.
double limit_fisher_term(const QuantumState& state, const Measurement& meas,
                         const HermitianOperator& a, double mean, Eigen::Index m) {
    Vector centered = a.mat * state.psi - mean * state.psi;
    if (meas.is_projective()) {
        Complex amp = meas.basis.col(m).dot(centered);
        return 4.0 * std::norm(amp);
    }
    return 4.0 * centered.dot(meas.effect(m) * centered).real();
}

void check_residual(CheckPolicy policy, double residual, double tolerance,
                    const char* identity) {
    if (policy == CheckPolicy::Throw && residual > tolerance)
        throw IdentityViolation(std::string(identity) + " violated: residual " +
                                std::to_string(residual) + " > " + std::to_string(tolerance));
}

}  // namespace

double log_derivative(const QuantumState& state, const Measurement& meas,
                      const HermitianOperator& a, Eigen::Index m, const Tolerances& tol) {
    if (m < 0 || m >= meas.outcome_count())
        throw ParameterError("outcome index out of range");
    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    if (mom.prob(m) < tol.prob)
        throw UndefinedLogDerivative("log derivative undefined at vanishing probability");
    return 2.0 * mom.numer(m).imag() / mom.prob(m);
}

double log_derivative_fd(const QuantumState& state, const Measurement& meas,
                         const HermitianOperator& a, Eigen::Index m, double h,
                         const Tolerances& tol) {
    if (h <= 0.0) throw ParameterError("finite-difference step must be positive");
    RealVector p_plus = outcome_probabilities(state, meas, a, +h, tol);
    RealVector p_minus = outcome_probabilities(state, meas, a, -h, tol);
    if (p_plus(m) < tol.prob || p_minus(m) < tol.prob)
        throw StepTooLarge("probability vanishes within the finite-difference stencil");
    return (std::log(p_plus(m)) - std::log(p_minus(m))) / (2.0 * h);
}

double fisher_information(const QuantumState& state, const Measurement& meas,
                          const HermitianOperator& a, ZeroProbMode mode,
                          const Tolerances& tol) {
    if (mode == ZeroProbMode::LimitCorrect && !state.is_pure())
        throw UnsupportedMode("limit-corrected mode is defined for pure states only");

    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    double mean = initial_moments(state, a).mean;

    double fisher = 0.0;
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) >= tol.prob) {
            double im = mom.numer(m).imag();
            fisher += 4.0 * im * im / mom.prob(m);
        } else if (mode == ZeroProbMode::LimitCorrect) {
            fisher += limit_fisher_term(state, meas, a, mean, m);
        }
    }
    return fisher;
}

SensitivityDecomposition pure_sensitivity_decomposition(
    const QuantumState& state, const Measurement& meas, const HermitianOperator& a,
    CheckPolicy policy, const Tolerances& tol) {
    if (!state.is_pure() || !meas.is_projective())
        throw UnsupportedForIdentity(
            "sensitivity decomposition requires a pure state and a projective basis");

    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    InitialMoments init = initial_moments(state, a);

    double re_var = 0.0;
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < tol.prob) continue;
        double re_centered = mom.numer(m).real() - init.mean * mom.prob(m);
        re_var += re_centered * re_centered / mom.prob(m);
    }

    SensitivityDecomposition dec;
    dec.fisher = fisher_information(state, meas, a, ZeroProbMode::LimitCorrect, tol);
    dec.four_var_in = 4.0 * init.variance;
    dec.four_re_variance = 4.0 * re_var;
    check_residual(policy, std::abs(dec.fisher - (dec.four_var_in - dec.four_re_variance)),
                   1e-9, "sensitivity decomposition");
    return dec;
}

double estimate_uncertainty(const QuantumState& state, const Measurement& meas,
                            const HermitianOperator& a, CheckPolicy policy,
                            const Tolerances& tol) {
    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    InitialMoments init = initial_moments(state, a);

    double explained = 0.0;
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < tol.prob) continue;
        double re = mom.numer(m).real();
        explained += re * re / mom.prob(m);
    }
    double est = init.second - explained;

    if (state.is_pure() && meas.is_projective()) {
        // Outcome-resolved route: sum_m |<m|(A - Re[A_w(m)])|psi>|^2, with
        // the estimate irrelevant on vanishing outcomes.
        Vector overlaps = meas.basis.adjoint() * state.psi;
        Vector transitions = meas.basis.adjoint() * (a.mat * state.psi);
        double resolved = 0.0;
        for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
            Complex residual = transitions(m);
            if (mom.prob(m) >= tol.prob)
                residual -= (mom.numer(m).real() / mom.prob(m)) * overlaps(m);
            resolved += std::norm(residual);
        }
        check_residual(policy, std::abs(est - resolved), 1e-9, "estimate uncertainty");
    }
    return est;
}

MetrologyReport bound_check(const QuantumState& state, const Measurement& meas,
                            const HermitianOperator& a, ZeroProbMode mode,
                            CheckPolicy policy, const Tolerances& tol) {
    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    InitialMoments init = initial_moments(state, a);

    MetrologyReport rep;
    rep.zero_prob_mode = mode;
    rep.four_var_in = 4.0 * init.variance;
    rep.fisher = fisher_information(state, meas, a, rep.zero_prob_mode, tol);
    rep.est_variance = estimate_uncertainty(state, meas, a, policy, tol);

    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        OutcomeSensitivity row;
        row.index = m;
        row.probability = mom.prob(m);
        if (mom.prob(m) >= tol.prob) {
            Complex w = mom.numer(m) / mom.prob(m);
            row.weak_value = w;
            row.log_derivative = 2.0 * w.imag();
            double re_centered = mom.numer(m).real() - init.mean * mom.prob(m);
            rep.re_variance += re_centered * re_centered / mom.prob(m);
            rep.im_second_moment += mom.numer(m).imag() * mom.numer(m).imag() / mom.prob(m);
        }
        rep.per_outcome.push_back(row);
    }

    rep.bound_slack = 4.0 * rep.est_variance - rep.fisher;
    check_residual(policy, std::max(0.0, -rep.bound_slack), 1e-9, "sensitivity bound");
    if (state.is_pure() && meas.is_projective() && mode == ZeroProbMode::LimitCorrect)
        check_residual(policy, std::abs(rep.bound_slack), 1e-9,
                       "sensitivity bound equality");
    return rep;
}

MetrologyReport bound_check(const QuantumState& state, const Measurement& meas,
                            const HermitianOperator& a, CheckPolicy policy,
                            const Tolerances& tol) {
    return bound_check(state, meas, a, default_zero_prob_mode(state), policy, tol);
}

CauchySchwarzGap cauchy_schwarz_gap(const QuantumState& state, const Measurement& meas,
                                    const HermitianOperator& a, const Tolerances& tol) {
    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    CauchySchwarzGap gap;
    gap.lhs = 0.0;
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < tol.prob) continue;  // 0/0 -> 0
        gap.lhs += std::norm(mom.numer(m)) / mom.prob(m);
    }
    gap.rhs = initial_moments(state, a).second;
    gap.gap = gap.rhs - gap.lhs;
    return gap;
}

std::optional<double> min_phase_error(double fisher, const Tolerances& tol) {
    if (fisher <= tol.prob) return std::nullopt;
    return 1.0 / std::sqrt(fisher);
}

}  // namespace weakval
