#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "weakval/evolution.hpp"
#include "weakval/meter_sim.hpp"
#include "weakval/weak_values.hpp"

#include "test_helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace weakval;
using namespace testutil;

namespace {

MeterConfig base_config() {
    MeterConfig cfg;
    cfg.sigma_x = 0.5;
    cfg.coupling = 0.05;
    cfg.samples = 200000;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("position readout: eigenstate shifts are exact at any coupling") {
    // A|0> = (1/2)|0>: the meter is a single Gaussian centred at lambda/2
    // for every outcome, so the implied Re equals 1/2 up to sampling noise.
    QuantumState eigen = QuantumState::pure(ket0());
    for (double lambda : {0.05, 0.5, 1.5}) {
        MeterConfig cfg = base_config();
        cfg.coupling = lambda;
        cfg.samples = 100000;
        MeterReadout r = simulate_position_readout(eigen, Measurement::projective(basis_y()),
                                                   half_sigma_z(), cfg);
        for (const auto& o : r.outcomes) {
            REQUIRE(o.count > 1000);
            CHECK(std::abs(o.implied_weak_part - 0.5) <= 3.0 * o.implied_std_error);
        }
    }
}

TEST_CASE("position readout reproduces the real parts of the weak values") {
    QuantumState plus = QuantumState::pure(ket_plus());
    MeterConfig cfg = base_config();

    SUBCASE("eigenbasis measurement: Re = +-1/2") {
        MeterReadout r = simulate_position_readout(plus, Measurement::projective(basis_z()),
                                                   half_sigma_z(), cfg);
        CHECK(std::abs(r.outcomes[0].implied_weak_part - 0.5) <=
              3.0 * r.outcomes[0].implied_std_error);
        CHECK(std::abs(r.outcomes[1].implied_weak_part + 0.5) <=
              3.0 * r.outcomes[1].implied_std_error);
        CHECK(r.total_count() == cfg.samples);
    }

    SUBCASE("sigma_y basis: Re = 0") {
        MeterReadout r = simulate_position_readout(plus, Measurement::projective(basis_y()),
                                                   half_sigma_z(), cfg);
        for (const auto& o : r.outcomes)
            CHECK(std::abs(o.implied_weak_part) <= 3.0 * o.implied_std_error);
    }
}

TEST_CASE("momentum readout reproduces the imaginary parts of the weak values") {
    QuantumState plus = QuantumState::pure(ket_plus());
    MeterConfig cfg = base_config();

    SUBCASE("sigma_y basis: Im = +-1/2") {
        MeterReadout r = simulate_momentum_readout(plus, Measurement::projective(basis_y()),
                                                   half_sigma_z(), cfg);
        CHECK(std::abs(r.outcomes[0].implied_weak_part - 0.5) <=
              3.0 * r.outcomes[0].implied_std_error + 0.002);  // O(lambda^2) estimator bias
        CHECK(std::abs(r.outcomes[1].implied_weak_part + 0.5) <=
              3.0 * r.outcomes[1].implied_std_error + 0.002);
    }

    SUBCASE("phase-blind scenarios imply zero") {
        MeterReadout r = simulate_momentum_readout(plus, Measurement::projective(basis_z()),
                                                   half_sigma_z(), cfg);
        for (const auto& o : r.outcomes)
            CHECK(std::abs(o.implied_weak_part) <= 3.0 * o.implied_std_error);

        r = simulate_momentum_readout(plus, Measurement::projective(basis_y()),
                                      identity_op(2), cfg);
        for (const auto& o : r.outcomes)
            CHECK(std::abs(o.implied_weak_part) <= 3.0 * o.implied_std_error);
    }
}

TEST_CASE("identical seed and config reproduce the readout exactly") {
    QuantumState plus = QuantumState::pure(ket_plus());
    MeterConfig cfg = base_config();
    cfg.samples = 50000;
    Measurement y = Measurement::projective(basis_y());

    MeterReadout a = simulate_momentum_readout(plus, y, half_sigma_z(), cfg);
    MeterReadout b = simulate_momentum_readout(plus, y, half_sigma_z(), cfg);
    for (std::size_t m = 0; m < a.outcomes.size(); ++m) {
        CHECK(a.outcomes[m].count == b.outcomes[m].count);
        CHECK(a.outcomes[m].mean == b.outcomes[m].mean);
        CHECK(a.outcomes[m].std_error == b.outcomes[m].std_error);
    }
}

TEST_CASE("post-selection probabilities match the phi = 0 outcome probabilities") {
    QuantumState plus = QuantumState::pure(ket_plus());
    Measurement y = Measurement::projective(basis_y());

    // quadrature check: as lambda -> 0 the meter densities integrate to the
    // undisturbed outcome probabilities
    MeterConfig cfg = base_config();
    cfg.coupling = 1e-4;
    PositionDensity pd = position_readout_density(plus, y, half_sigma_z(), cfg);
    RealVector p = outcome_probabilities(plus, y, half_sigma_z(), 0.0);
    for (Eigen::Index m = 0; m < p.size(); ++m)
        CHECK(std::abs(pd.outcome_prob(m) - p(m)) < 1e-8);

    // at finite lambda the correction is O(lambda^2)
    cfg.coupling = 0.1;
    PositionDensity pd2 = position_readout_density(plus, y, half_sigma_z(), cfg);
    for (Eigen::Index m = 0; m < p.size(); ++m)
        CHECK(std::abs(pd2.outcome_prob(m) - p(m)) < 0.05 * cfg.coupling * cfg.coupling + 1e-8);
}

TEST_CASE("momentum outcome frequencies match the quadrature marginal") {
    QuantumState plus = QuantumState::pure(ket_plus());
    Measurement y = Measurement::projective(basis_y());
    MeterConfig cfg = base_config();
    cfg.coupling = 0.3;  // strong enough to pull the marginal off 1/2
    cfg.samples = 200000;

    Eigen::VectorXd marginal = momentum_outcome_marginal(plus, y, half_sigma_z(), cfg);
    CHECK(std::abs(marginal.sum() - 1.0) < 1e-9);

    MeterReadout r = simulate_momentum_readout(plus, y, half_sigma_z(), cfg);
    for (std::size_t m = 0; m < r.outcomes.size(); ++m) {
        double freq = static_cast<double>(r.outcomes[m].count) / cfg.samples;
        double expect = marginal(static_cast<Eigen::Index>(m));
        double sigma = std::sqrt(expect * (1.0 - expect) / cfg.samples);
        CHECK(std::abs(freq - expect) <= 3.0 * sigma);
    }
}

TEST_CASE("sampled positions follow the grid law (Kolmogorov-Smirnov)") {
    QuantumState plus = QuantumState::pure(ket_plus());
    MeterConfig cfg = base_config();
    cfg.samples = 100000;
    cfg.coupling = 0.4;  // visible interference structure
    Measurement y = Measurement::projective(basis_y());

    PositionDensity pd = position_readout_density(plus, y, half_sigma_z(), cfg);
    PositionSamples samples = sample_position_readout(plus, y, half_sigma_z(), cfg);

    const double dx = pd.grid(1) - pd.grid(0);
    for (Eigen::Index m = 0; m < pd.outcome_prob.size(); ++m) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < samples.x.size(); ++i)
            if (samples.outcome[i] == m) xs.push_back(samples.x[i]);
        REQUIRE(xs.size() > 10000);
        std::sort(xs.begin(), xs.end());

        // piecewise-linear CDF of the grid law, evaluated at each sample
        auto grid_cdf = [&](double x) {
            double pos = (x - pd.grid(0)) / dx;
            Eigen::Index j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(pos), 0,
                                                      pd.grid.size() - 2);
            double frac = pos - static_cast<double>(j);
            return pd.cdf(m, j) + frac * (pd.cdf(m, j + 1) - pd.cdf(m, j));
        };
        double ks = 0.0;
        const double n = static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double c = grid_cdf(xs[i]);
            ks = std::max(ks, std::abs(c - static_cast<double>(i) / n));
            ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - c));
        }
        CHECK(ks < 1.628 / std::sqrt(n));  // 1% critical value
    }
}

TEST_CASE("convergence study") {
    QuantumState plus = QuantumState::pure(ket_plus());
    Measurement y = Measurement::projective(basis_y());

    SUBCASE("momentum estimator bias shrinks quadratically (S2)") {
        MeterConfig cfg;
        cfg.sigma_x = 0.25;
        cfg.samples = 400000;
        cfg.seed = 11;
        ConvergenceStudy study = convergence_study(plus, y, half_sigma_z(), cfg,
                                                   {0.4, 0.2, 0.1, 0.05},
                                                   ReadoutMode::Momentum);
        CHECK(study.quadratic_trend);
        CHECK(study.points.front().bias > 0.05);  // visibly biased at 0.4
    }

    SUBCASE("eigenstate position readout is unbiased at every coupling") {
        MeterConfig cfg = base_config();
        cfg.samples = 50000;
        ConvergenceStudy study =
            convergence_study(QuantumState::pure(ket0()), y, half_sigma_z(), cfg,
                              {0.4, 0.2, 0.1}, ReadoutMode::Position);
        for (const auto& pt : study.points) CHECK(pt.bias <= 4.0 * pt.std_error);
    }

    SUBCASE("standard error shrinks like 1/sqrt(N)") {
        MeterConfig small = base_config();
        small.samples = 1000;
        MeterConfig large = base_config();
        large.samples = 100000;
        MeterReadout rs = simulate_momentum_readout(plus, y, half_sigma_z(), small);
        MeterReadout rl = simulate_momentum_readout(plus, y, half_sigma_z(), large);
        double ratio = rs.outcomes[0].std_error / rl.outcomes[0].std_error;
        CHECK(ratio > 6.0);
        CHECK(ratio < 16.0);
    }
}

TEST_CASE("configuration errors") {
    QuantumState plus = QuantumState::pure(ket_plus());
    Measurement y = Measurement::projective(basis_y());

    MeterConfig cfg = base_config();
    cfg.sigma_x = 0.0;
    CHECK_THROWS_AS(simulate_position_readout(plus, y, half_sigma_z(), cfg), ParameterError);

    cfg = base_config();
    cfg.coupling = 0.0;
    CHECK_THROWS_AS(simulate_position_readout(plus, y, half_sigma_z(), cfg), ParameterError);

    cfg = base_config();
    cfg.grid_halfwidth = 2.0 * cfg.sigma_x;  // clips visible mass
    CHECK_THROWS_AS(simulate_position_readout(plus, y, half_sigma_z(), cfg), GridError);

    cfg = base_config();
    CHECK_THROWS_AS(
        simulate_position_readout(QuantumState::mixed(maximally_mixed(2)), y,
                                  half_sigma_z(), cfg),
        UnsupportedForIdentity);
}
