#pragma once

#include "weakval/weak_values.hpp"

#include <optional>

namespace weakval {

/// Handling of outcomes whose probability is below the cutoff when summing
/// Fisher information. Exclude drops them; LimitCorrect (pure states only)
/// adds the phi -> 0 limit of their contribution,
/// 4 <psi|(A - <A>) Pi_m (A - <A>)|psi>, so the sensitivity is continuous
/// in the phase. Default: LimitCorrect for pure states, Exclude for mixed.
enum class ZeroProbMode { Exclude, LimitCorrect };

inline ZeroProbMode default_zero_prob_mode(const QuantumState& s) {
    return s.is_pure() ? ZeroProbMode::LimitCorrect : ZeroProbMode::Exclude;
}

struct OutcomeSensitivity {
    Eigen::Index index = 0;
    double probability = 0.0;
    std::optional<Complex> weak_value;
    std::optional<double> log_derivative;  // 2 Im of the weak value
};

struct MetrologyReport {
    double fisher = 0.0;             // 1/dphi^2, radians^-2
    double four_var_in = 0.0;        // 4 * initial variance of A
    double re_variance = 0.0;        // sum (Re[A_w] - <A>)^2 p
    double im_second_moment = 0.0;   // sum Im[A_w]^2 p
    double est_variance = 0.0;       // generator uncertainty after the measurement
    double bound_slack = 0.0;        // 4 * est_variance - fisher
    std::vector<OutcomeSensitivity> per_outcome;
    ZeroProbMode zero_prob_mode = ZeroProbMode::Exclude;
};

/// d/dphi ln p(m) at phi = 0, i.e. 2 Im of the weak value of the generator.
/// Throws UndefinedLogDerivative when p(m) is below the cutoff.
double log_derivative(const QuantumState& state, const Measurement& meas,
                      const HermitianOperator& a, Eigen::Index m,
                      const Tolerances& tol = {});

/// Independent central-difference check of log_derivative:
/// [ln p(m; +h) - ln p(m; -h)] / (2h). Throws StepTooLarge when the
/// probability vanishes at either evaluation point.
double log_derivative_fd(const QuantumState& state, const Measurement& meas,
                         const HermitianOperator& a, Eigen::Index m, double h,
                         const Tolerances& tol = {});

/// Phase sensitivity 1/dphi^2 of the measurement at phi = 0:
/// 4 sum_m Im[A_w(m)]^2 p(m), in cancelled form Im[numerator]^2 / p.
/// Throws UnsupportedMode if LimitCorrect is requested for a mixed state.
double fisher_information(const QuantumState& state, const Measurement& meas,
                          const HermitianOperator& a, ZeroProbMode mode,
                          const Tolerances& tol = {});

struct SensitivityDecomposition {
    double fisher;
    double four_var_in;
    double four_re_variance;
};

/// fisher = four_var_in - four_re_variance for pure states and projective
/// bases (LimitCorrect). With CheckPolicy::Throw an out-of-tolerance
/// residual raises IdentityViolation.
SensitivityDecomposition pure_sensitivity_decomposition(
    const QuantumState& state, const Measurement& meas, const HermitianOperator& a,
    CheckPolicy policy = CheckPolicy::Throw, const Tolerances& tol = {});

/// Generator uncertainty left after estimating A from the outcome:
/// Tr{A^2 rho} - sum_m Re[A_w(m)]^2 p(m). For pure projective inputs the
/// equivalent outcome-resolved form sum_m |<m|(A - Re[A_w(m)])|psi>|^2 is
/// evaluated as a cross-check.
double estimate_uncertainty(const QuantumState& state, const Measurement& meas,
                            const HermitianOperator& a,
                            CheckPolicy policy = CheckPolicy::Throw,
                            const Tolerances& tol = {});

/// Full sensitivity report. Checks fisher <= 4 est_variance (+1e-9), with
/// equality for pure projective scenarios in limit-corrected mode.
MetrologyReport bound_check(const QuantumState& state, const Measurement& meas,
                            const HermitianOperator& a, ZeroProbMode mode,
                            CheckPolicy policy = CheckPolicy::Throw,
                            const Tolerances& tol = {});

/// Same with the default mode for the state kind.
MetrologyReport bound_check(const QuantumState& state, const Measurement& meas,
                            const HermitianOperator& a,
                            CheckPolicy policy = CheckPolicy::Throw,
                            const Tolerances& tol = {});

struct CauchySchwarzGap {
    double lhs;  // sum |Tr{Pi A rho}|^2 / Tr{Pi rho}
    double rhs;  // Tr{A^2 rho}
    double gap;  // rhs - lhs, >= 0 up to rounding
};

CauchySchwarzGap cauchy_schwarz_gap(const QuantumState& state, const Measurement& meas,
                                    const HermitianOperator& a, const Tolerances& tol = {});

/// 1/sqrt(F), or nullopt when the scenario is phase-insensitive (F below
/// the probability cutoff).
std::optional<double> min_phase_error(double fisher, const Tolerances& tol = {});

}  // namespace weakval
