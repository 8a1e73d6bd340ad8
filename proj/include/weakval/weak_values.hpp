#pragma once

#include "weakval/types.hpp"

#include <optional>

namespace weakval {

/// One measurement outcome: its probability, the conditioned value of the
/// generator between preparation and that outcome, and the raw transition
/// moment Tr{Pi_m A rho} the value is built from. The weak value is
/// undefined (nullopt) exactly when the probability is below the cutoff.
struct WeakOutcome {
    Eigen::Index index = 0;
    double probability = 0.0;
    std::optional<Complex> weak_value;
    Complex numerator{0.0, 0.0};
};

struct WeakValueProfile {
    std::vector<WeakOutcome> outcomes;
    double mean_a = 0.0;         // <A> in the initial state
    double var_in = 0.0;         // initial variance of A
    double second_moment = 0.0;  // Tr{A^2 rho}
};

/// Measurement basis with each vector re-phased so its overlap with the
/// initial state is real and non-negative. Columns of `vectors` are the
/// re-phased states; `amplitudes[m]` = |<m|psi>|. Outcomes below the
/// probability cutoff keep phase 1 and set `degenerate`.
struct GammaBasis {
    Matrix vectors;
    Eigen::VectorXd amplitudes;
    bool degenerate = false;
};

/// Per-outcome transition moments for a full measurement:
/// numer[m] = Tr{Pi_m A rho}, prob[m] = Tr{Pi_m rho} (clamped to [0,1]).
/// This is the single kernel behind the profile, the sensitivity sums and
/// the bound checks; all aggregate sums divide numerators by probabilities
/// only in the cancelled form with 0/0 -> 0.
struct OutcomeMoments {
    RealVector prob;
    Vector numer;
};

OutcomeMoments outcome_moments(const QuantumState& state, const Measurement& meas,
                               const HermitianOperator& a, const Tolerances& tol = {});

/// Tr{Pi A rho} / Tr{Pi rho}; nullopt when Tr{Pi rho} is below the cutoff.
std::optional<Complex> weak_value(const QuantumState& state, const Matrix& effect,
                                  const HermitianOperator& a, const Tolerances& tol = {});

/// Same for a rank-1 projector given as the post-selected state vector;
/// reduces to <m|A|psi> / <m|psi> for pure states.
std::optional<Complex> weak_value(const QuantumState& state, const Vector& post_state,
                                  const HermitianOperator& a, const Tolerances& tol = {});

WeakValueProfile weak_value_profile(const QuantumState& state, const Measurement& meas,
                                    const HermitianOperator& a, const Tolerances& tol = {});

struct VarianceIdentity {
    double lhs;  // spread of the conditioned values over outcomes
    double rhs;  // initial variance of A
};

/// Both sides of the outcome-variance identity for a pure state and a
/// projective basis. lhs is evaluated as sum_m |<m|(A - <A>)|psi>|^2, never
/// dividing by p(m). Throws UnsupportedForIdentity for mixed states or
/// POVMs (the equality holds only in the pure projective case; use
/// cauchy_schwarz_gap for the inequality form).
VarianceIdentity weak_variance_identity(const QuantumState& state, const Measurement& meas,
                                        const HermitianOperator& a, const Tolerances& tol = {});

GammaBasis gamma_basis(const QuantumState& state, const Measurement& meas,
                       const Tolerances& tol = {});

/// Weak value reconstructed in the phase-adjusted basis, split into the
/// contribution of the real-symmetric matrix part (real) and the
/// imaginary-antisymmetric part (purely imaginary). value = sym + antisym.
struct GammaWeakValue {
    Complex value;
    Complex symmetric_part;
    Complex antisymmetric_part;
};

/// Evaluates sum_m' <gamma(m)|A|gamma(m')> |<m'|psi>| / |<m|psi>|.
/// Agrees with weak_value on every defined outcome; throws
/// UndefinedWeakValue when p(m) is below the cutoff.
GammaWeakValue weak_value_via_gamma(const QuantumState& state, const Measurement& meas,
                                    const HermitianOperator& a, Eigen::Index m,
                                    const Tolerances& tol = {});

}  // namespace weakval
