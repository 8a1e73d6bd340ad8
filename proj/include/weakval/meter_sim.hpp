#pragma once

#include "weakval/types.hpp"

#include <cstdint>

namespace weakval {

/// Monte Carlo model of the weak system-meter coupling exp(-i lambda p A)
/// with a Gaussian meter, <x^2> = sigma_x^2 and sigma_p = 1/(2 sigma_x).
/// Position readout estimates Re of the weak values, momentum readout Im.
struct MeterConfig {
    double sigma_x = 1.0;
    double coupling = 0.05;  // lambda = g * dt
    std::int64_t samples = 100000;
    int grid_points = 1 << 14;
    double grid_halfwidth = 0.0;  // 0 -> 8 sigma_x + |lambda| max|eig| + 2 sigma_x
    std::uint64_t seed = 0;
};

/// Sampling is partitioned into fixed-size chunks, each drawing from a
/// substream derived from (seed, chunk index) and merged in chunk order, so
/// serial and OpenMP execution produce identical results.
enum class ExecutionPolicy { Serial, Parallel };

enum class ReadoutMode { Position, Momentum };

struct OutcomeReadout {
    std::int64_t count = 0;
    double mean = 0.0;       // meter units (x or p)
    double std_error = 0.0;  // sample std / sqrt(count)
    double implied_weak_part = 0.0;
    double implied_std_error = 0.0;
};

struct MeterReadout {
    ReadoutMode mode = ReadoutMode::Position;
    double coupling = 0.0;
    std::vector<OutcomeReadout> outcomes;

    std::int64_t total_count() const {
        std::int64_t n = 0;
        for (const auto& o : outcomes) n += o.count;
        return n;
    }
};

/// Exact post-selected meter densities on the grid, before any sampling.
/// density(m, j) = |phi_m(x_j)|^2 with
/// phi_m(x) = sum_a <m|a><a|psi> G(x - lambda a); outcome_prob integrates
/// each row by the trapezoid rule. cdf rows are normalized piecewise-linear
/// cumulative distributions (the exact law the sampler draws from).
struct PositionDensity {
    Eigen::VectorXd grid;
    Eigen::MatrixXd density;       // outcomes x grid points
    Eigen::MatrixXd cdf;           // outcomes x grid points
    Eigen::VectorXd outcome_prob;  // integral of each density row
};

PositionDensity position_readout_density(const QuantumState& state, const Measurement& meas,
                                         const HermitianOperator& a, const MeterConfig& cfg);

/// Draws (m, x) pairs from the exact post-selected meter density and
/// reports mean(x|m); implied_weak_part = mean / lambda converges to
/// Re[A_w(m)] as lambda -> 0 (exactly, for eigenstate inputs).
/// Throws GridError when more than 1e-9 of the density mass falls outside
/// the grid.
MeterReadout simulate_position_readout(const QuantumState& state, const Measurement& meas,
                                       const HermitianOperator& a, const MeterConfig& cfg,
                                       ExecutionPolicy policy = ExecutionPolicy::Parallel);

/// The raw draws behind the position readout, in sample order. Same chunk
/// substreams as simulate_position_readout, so entry-by-entry identical
/// values feed the aggregate.
struct PositionSamples {
    std::vector<Eigen::Index> outcome;
    std::vector<double> x;
};

PositionSamples sample_position_readout(const QuantumState& state, const Measurement& meas,
                                        const HermitianOperator& a, const MeterConfig& cfg,
                                        ExecutionPolicy policy = ExecutionPolicy::Parallel);

/// Momentum readout: p is drawn from the meter's Gaussian momentum
/// distribution and acts as a classical random phase phi = lambda p on the
/// system; the outcome is then drawn from p(m; phi).
/// implied_weak_part = mean(p|m) / (2 lambda sigma_p^2) converges to
/// Im[A_w(m)] as lambda -> 0.
MeterReadout simulate_momentum_readout(const QuantumState& state, const Measurement& meas,
                                       const HermitianOperator& a, const MeterConfig& cfg,
                                       ExecutionPolicy policy = ExecutionPolicy::Parallel);

/// Outcome probabilities of the momentum readout marginalized over p,
/// integral p(m; lambda p) N(p; 0, sigma_p^2) dp by quadrature. Used to
/// check the sampled outcome frequencies.
Eigen::VectorXd momentum_outcome_marginal(const QuantumState& state, const Measurement& meas,
                                          const HermitianOperator& a, const MeterConfig& cfg);

struct ConvergencePoint {
    double coupling;
    double bias;       // max over defined outcomes of |implied - exact|
    double std_error;  // implied-scale std error at that outcome
};

struct ConvergenceStudy {
    std::vector<ConvergencePoint> points;  // sorted by descending coupling
    /// True when the bias shrinks at least quadratically: with c fitted at
    /// the largest coupling, bias <= c lambda^2 + 3 std_error at every
    /// smaller coupling.
    bool quadratic_trend = false;
};

ConvergenceStudy convergence_study(const QuantumState& state, const Measurement& meas,
                                   const HermitianOperator& a, const MeterConfig& cfg,
                                   std::vector<double> couplings,
                                   ReadoutMode mode = ReadoutMode::Momentum,
                                   ExecutionPolicy policy = ExecutionPolicy::Parallel);

}  // namespace weakval
