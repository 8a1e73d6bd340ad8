#pragma once

#include "weakval/metrology.hpp"

#include <cstdint>

namespace weakval {

struct OptimizeOptions {
    int max_iters = 2000;
    int restarts = 5;
    double fd_step = 1e-5;    // central-difference step for the gradient
    double tol = 1e-7;        // convergence: gradient norm or ceiling gap below this
    double initial_step = 0.5;
    std::uint64_t seed = 0;
};

struct TracePoint {
    int iteration;
    double objective;
};

struct OptimizationResult {
    Matrix best_basis;        // columns, gauge-fixed
    double best_fisher = 0.0;
    double ceiling = 0.0;     // 4 * variance of A in the input state
    double gap = 0.0;         // ceiling - best_fisher
    std::vector<TracePoint> trace;  // accepted steps of the winning restart
    bool converged = false;
};

/// Gradient ascent of the Fisher information over projective bases
/// B = exp(-i H(theta)) B0, H Hermitian with d^2 real parameters, with
/// random restarts. The search objective excludes vanishing outcomes; for
/// pure states the final value is re-scored with the limit-corrected mode.
/// Restarts use independent substreams and the best objective wins
/// (ties -> lowest restart index), so results are thread-count independent.
OptimizationResult optimize_measurement(const QuantumState& state, const HermitianOperator& a,
                                        const OptimizeOptions& opts = {},
                                        const Tolerances& tol = {});

struct OptimalityCertificate {
    double re_deviation;  // max_m |Re[A_w(m)] - <A>| over defined outcomes
    double gap;           // 4 var_in - fisher
};

/// Optimality witness for a pure state: the ceiling is attained exactly
/// when all real weak values equal the initial expectation value.
OptimalityCertificate certify_optimum(const QuantumState& state, const HermitianOperator& a,
                                      const Measurement& meas, const Tolerances& tol = {});

}  // namespace weakval
