#include "weakval/meter_sim.hpp"

#include "weakval/evolution.hpp"
#include "weakval/rng.hpp"
#include "weakval/weak_values.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace weakval {

namespace {

constexpr std::int64_t kChunkSamples = 1 << 15;

void require_config(const MeterConfig& cfg) {
    if (cfg.sigma_x <= 0.0) throw ParameterError("sigma_x must be positive");
    if (cfg.coupling == 0.0) throw ParameterError("coupling must be nonzero");
    if (cfg.samples < 1) throw ParameterError("samples must be >= 1");
    if (cfg.grid_points < 2) throw ParameterError("grid_points must be >= 2");
}

void require_pure_projective(const QuantumState& state, const Measurement& meas) {
    if (!state.is_pure() || !meas.is_projective())
        throw UnsupportedForIdentity(
            "meter simulation requires a pure state and a projective basis");
}

struct Accumulator {
    Eigen::VectorXd count;
    Eigen::VectorXd sum;
    Eigen::VectorXd sumsq;

    explicit Accumulator(Eigen::Index k)
        : count(Eigen::VectorXd::Zero(k)),
          sum(Eigen::VectorXd::Zero(k)),
          sumsq(Eigen::VectorXd::Zero(k)) {}

    void record(Eigen::Index m, double value) {
        count(m) += 1.0;
        sum(m) += value;
        sumsq(m) += value * value;
    }

    void merge(const Accumulator& other) {
        count += other.count;
        sum += other.sum;
        sumsq += other.sumsq;
    }
};

/// Runs fn once per fixed-size chunk, each with its own derived substream;
/// chunks are merged in index order, so the result does not depend on the
/// execution policy or thread count.
template <typename ChunkFn>
Accumulator run_chunks(Eigen::Index outcomes, const MeterConfig& cfg,
                       ExecutionPolicy policy, ChunkFn&& fn) {
    const std::int64_t n_chunks = (cfg.samples + kChunkSamples - 1) / kChunkSamples;
    std::vector<Accumulator> partial(static_cast<std::size_t>(n_chunks),
                                     Accumulator(outcomes));
    const bool parallel = policy == ExecutionPolicy::Parallel;

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        std::int64_t n = std::min(kChunkSamples, cfg.samples - c * kChunkSamples);
        RngStream rng = RngStream::substream(cfg.seed, static_cast<std::uint64_t>(c));
        fn(partial[static_cast<std::size_t>(c)], rng, n);
    }

    Accumulator total(outcomes);
    for (const auto& p : partial) total.merge(p);
    return total;
}

MeterReadout build_readout(ReadoutMode mode, const MeterConfig& cfg,
                           const Accumulator& acc, double implied_scale) {
    MeterReadout out;
    out.mode = mode;
    out.coupling = cfg.coupling;
    for (Eigen::Index m = 0; m < acc.count.size(); ++m) {
        OutcomeReadout o;
        o.count = static_cast<std::int64_t>(acc.count(m));
        if (o.count > 0) {
            o.mean = acc.sum(m) / acc.count(m);
            if (o.count > 1) {
                double var = (acc.sumsq(m) - acc.count(m) * o.mean * o.mean) /
                             (acc.count(m) - 1.0);
                o.std_error = std::sqrt(std::max(0.0, var) / acc.count(m));
            }
            o.implied_weak_part = o.mean / implied_scale;
            o.implied_std_error = o.std_error / std::abs(implied_scale);
        }
        out.outcomes.push_back(o);
    }
    return out;
}

double grid_halfwidth(const MeterConfig& cfg, double max_abs_eig) {
    if (cfg.grid_halfwidth > 0.0) return cfg.grid_halfwidth;
    return 10.0 * cfg.sigma_x + std::abs(cfg.coupling) * max_abs_eig;
}

Eigen::Index draw_outcome(const Eigen::VectorXd& cumulative, double u) {
    // u is uniform on [0, total); the last bucket absorbs rounding.
    Eigen::Index k = cumulative.size();
    for (Eigen::Index m = 0; m + 1 < k; ++m)
        if (u < cumulative(m)) return m;
    return k - 1;
}

}  // namespace

PositionDensity position_readout_density(const QuantumState& state, const Measurement& meas,
                                         const HermitianOperator& a, const MeterConfig& cfg) {
    require_config(cfg);
    require_pure_projective(state, meas);
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(meas.dim(), a.dim(), "measurement vs generator");

    PhasePropagator prop(a);
    const Eigen::Index d = a.dim();
    Matrix overlap = meas.basis.adjoint() * prop.eigenvectors();  // <m|a_i>
    Vector weights = prop.eigenvectors().adjoint() * state.psi;   // <a_i|psi>

    const int n = cfg.grid_points;
    const double L = grid_halfwidth(cfg, prop.eigenvalues().cwiseAbs().maxCoeff());
    const double dx = 2.0 * L / (n - 1);
    const double sigma2 = cfg.sigma_x * cfg.sigma_x;
    const double gauss_norm = std::pow(2.0 * M_PI * sigma2, -0.25);

    PositionDensity pd;
    pd.grid.resize(n);
    for (int j = 0; j < n; ++j) pd.grid(j) = -L + j * dx;

    pd.density.resize(d, n);
    for (int j = 0; j < n; ++j) {
        Vector gauss(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            double u = pd.grid(j) - cfg.coupling * prop.eigenvalues()(i);
            gauss(i) = gauss_norm * std::exp(-u * u / (4.0 * sigma2)) * weights(i);
        }
        Vector amp = overlap * gauss;  // phi_m(x_j)
        for (Eigen::Index m = 0; m < d; ++m) pd.density(m, j) = std::norm(amp(m));
    }

    pd.cdf.resize(d, n);
    pd.outcome_prob.resize(d);
    for (Eigen::Index m = 0; m < d; ++m) {
        pd.cdf(m, 0) = 0.0;
        for (int j = 1; j < n; ++j)
            pd.cdf(m, j) = pd.cdf(m, j - 1) +
                           0.5 * (pd.density(m, j - 1) + pd.density(m, j)) * dx;
        pd.outcome_prob(m) = pd.cdf(m, n - 1);
        if (pd.outcome_prob(m) > 0.0) pd.cdf.row(m) /= pd.outcome_prob(m);
    }

    double mass_outside = 1.0 - pd.outcome_prob.sum();
    if (mass_outside > 1e-9)
        throw GridError("meter grid too small: " + std::to_string(mass_outside) +
                        " of the density mass lies outside");
    return pd;
}

namespace {

struct PreparedPosition {
    Eigen::VectorXd cumulative;
    double total = 0.0;
    std::vector<std::vector<double>> cdf_rows;
    double x0 = 0.0;
    double dx = 0.0;
};

PreparedPosition prepare_position(const PositionDensity& pd, int grid_points) {
    PreparedPosition prep;
    const Eigen::Index d = pd.outcome_prob.size();
    prep.cumulative.resize(d);
    double running = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
        running += pd.outcome_prob(m);
        prep.cumulative(m) = running;
    }
    prep.total = running;

    prep.cdf_rows.resize(static_cast<std::size_t>(d));
    for (Eigen::Index m = 0; m < d; ++m) {
        prep.cdf_rows[static_cast<std::size_t>(m)].assign(
            static_cast<std::size_t>(grid_points), 0.0);
        for (int j = 0; j < grid_points; ++j)
            prep.cdf_rows[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)] =
                pd.cdf(m, j);
    }
    prep.x0 = pd.grid(0);
    prep.dx = pd.grid(1) - pd.grid(0);
    return prep;
}

template <typename Emit>
void position_chunk(const PreparedPosition& prep, RngStream& rng, std::int64_t count,
                    Emit&& emit) {
    for (std::int64_t s = 0; s < count; ++s) {
        Eigen::Index m = draw_outcome(prep.cumulative, rng.uniform() * prep.total);
        const auto& cdf = prep.cdf_rows[static_cast<std::size_t>(m)];
        double t = rng.uniform();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), t);
        std::size_t hi =
            std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        if (hi == 0) hi = 1;
        double c_lo = cdf[hi - 1];
        double c_hi = cdf[hi];
        double frac = c_hi > c_lo ? (t - c_lo) / (c_hi - c_lo) : 0.0;
        emit(m, prep.x0 + (static_cast<double>(hi - 1) + frac) * prep.dx);
    }
}

}  // namespace

MeterReadout simulate_position_readout(const QuantumState& state, const Measurement& meas,
                                       const HermitianOperator& a, const MeterConfig& cfg,
                                       ExecutionPolicy policy) {
    PositionDensity pd = position_readout_density(state, meas, a, cfg);
    PreparedPosition prep = prepare_position(pd, cfg.grid_points);

    Accumulator acc = run_chunks(
        pd.outcome_prob.size(), cfg, policy,
        [&](Accumulator& chunk, RngStream& rng, std::int64_t count) {
            position_chunk(prep, rng, count,
                           [&](Eigen::Index m, double x) { chunk.record(m, x); });
        });

    return build_readout(ReadoutMode::Position, cfg, acc, cfg.coupling);
}

PositionSamples sample_position_readout(const QuantumState& state, const Measurement& meas,
                                        const HermitianOperator& a, const MeterConfig& cfg,
                                        ExecutionPolicy policy) {
    PositionDensity pd = position_readout_density(state, meas, a, cfg);
    PreparedPosition prep = prepare_position(pd, cfg.grid_points);

    PositionSamples samples;
    samples.outcome.resize(static_cast<std::size_t>(cfg.samples));
    samples.x.resize(static_cast<std::size_t>(cfg.samples));

    const std::int64_t n_chunks = (cfg.samples + kChunkSamples - 1) / kChunkSamples;
    const bool parallel = policy == ExecutionPolicy::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        std::int64_t base = c * kChunkSamples;
        std::int64_t n = std::min(kChunkSamples, cfg.samples - base);
        RngStream rng = RngStream::substream(cfg.seed, static_cast<std::uint64_t>(c));
        std::int64_t offset = base;
        position_chunk(prep, rng, n, [&](Eigen::Index m, double x) {
            samples.outcome[static_cast<std::size_t>(offset)] = m;
            samples.x[static_cast<std::size_t>(offset)] = x;
            ++offset;
        });
    }
    return samples;
}

MeterReadout simulate_momentum_readout(const QuantumState& state, const Measurement& meas,
                                       const HermitianOperator& a, const MeterConfig& cfg,
                                       ExecutionPolicy policy) {
    require_config(cfg);
    require_pure_projective(state, meas);
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    require_same_dim(meas.dim(), a.dim(), "measurement vs generator");

    PhasePropagator prop(a);
    const Eigen::Index d = a.dim();
    Matrix overlap = meas.basis.adjoint() * prop.eigenvectors();
    Vector weights = prop.eigenvectors().adjoint() * state.psi;
    const Eigen::VectorXd evals = prop.eigenvalues();
    const double sigma_p = 1.0 / (2.0 * cfg.sigma_x);

    Accumulator acc = run_chunks(
        d, cfg, policy, [&](Accumulator& chunk, RngStream& rng, std::int64_t count) {
            Vector rotated(d);
            Vector amp(d);
            for (std::int64_t s = 0; s < count; ++s) {
                double p = sigma_p * rng.normal();
                double phi = cfg.coupling * p;
                for (Eigen::Index i = 0; i < d; ++i)
                    rotated(i) = std::polar(1.0, -phi * evals(i)) * weights(i);
                amp.noalias() = overlap * rotated;
                double total = amp.squaredNorm();
                double u = rng.uniform() * total;
                double running = 0.0;
                Eigen::Index m = d - 1;
                for (Eigen::Index j = 0; j < d; ++j) {
                    running += std::norm(amp(j));
                    if (u < running) {
                        m = j;
                        break;
                    }
                }
                chunk.record(m, p);
            }
        });

    return build_readout(ReadoutMode::Momentum, cfg, acc,
                         2.0 * cfg.coupling * sigma_p * sigma_p);
}

Eigen::VectorXd momentum_outcome_marginal(const QuantumState& state, const Measurement& meas,
                                          const HermitianOperator& a, const MeterConfig& cfg) {
    require_config(cfg);
    require_pure_projective(state, meas);

    PhasePropagator prop(a);
    const Eigen::Index d = a.dim();
    Matrix overlap = meas.basis.adjoint() * prop.eigenvectors();
    Vector weights = prop.eigenvectors().adjoint() * state.psi;
    const double sigma_p = 1.0 / (2.0 * cfg.sigma_x);

    const int n = 1 << 13;
    const double span = 10.0 * sigma_p;
    const double dp = 2.0 * span / (n - 1);

    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < n; ++j) {
        double p = -span + j * dp;
        double gauss = std::exp(-p * p / (2.0 * sigma_p * sigma_p)) /
                       (sigma_p * std::sqrt(2.0 * M_PI));
        Vector rotated(d);
        for (Eigen::Index i = 0; i < d; ++i)
            rotated(i) = std::polar(1.0, -cfg.coupling * p * prop.eigenvalues()(i)) *
                         weights(i);
        Vector amp = overlap * rotated;
        double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;  // trapezoid
        marginal += w * gauss * dp * amp.cwiseAbs2();
    }
    return marginal;
}

ConvergenceStudy convergence_study(const QuantumState& state, const Measurement& meas,
                                   const HermitianOperator& a, const MeterConfig& cfg,
                                   std::vector<double> couplings, ReadoutMode mode,
                                   ExecutionPolicy policy) {
    if (couplings.empty()) throw ParameterError("convergence study needs couplings");
    std::sort(couplings.begin(), couplings.end(), std::greater<double>());

    WeakValueProfile profile = weak_value_profile(state, meas, a);

    ConvergenceStudy study;
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        MeterConfig run = cfg;
        run.coupling = couplings[i];
        run.grid_halfwidth = 0.0;  // re-derive for each coupling
        run.seed = RngStream::mix64(cfg.seed + 0x9E3779B97F4A7C15ull * (i + 1));

        MeterReadout readout = mode == ReadoutMode::Position
                                   ? simulate_position_readout(state, meas, a, run, policy)
                                   : simulate_momentum_readout(state, meas, a, run, policy);

        ConvergencePoint point{couplings[i], 0.0, 0.0};
        for (std::size_t m = 0; m < readout.outcomes.size(); ++m) {
            const auto& wo = profile.outcomes[m];
            if (!wo.weak_value || readout.outcomes[m].count == 0) continue;
            double exact = mode == ReadoutMode::Position ? wo.weak_value->real()
                                                         : wo.weak_value->imag();
            double bias = std::abs(readout.outcomes[m].implied_weak_part - exact);
            if (bias >= point.bias) {
                point.bias = bias;
                point.std_error = readout.outcomes[m].implied_std_error;
            }
        }
        study.points.push_back(point);
    }

    // Quadratic-trend gate: calibrate c at the largest coupling, then every
    // smaller coupling must satisfy bias <= c lambda^2 + 3 std_error.
    const auto& head = study.points.front();
    double c = (head.bias + 3.0 * head.std_error) / (head.coupling * head.coupling);
    study.quadratic_trend = true;
    for (const auto& pt : study.points)
        if (pt.bias > c * pt.coupling * pt.coupling + 3.0 * pt.std_error)
            study.quadratic_trend = false;
    return study;
}

}  // namespace weakval
