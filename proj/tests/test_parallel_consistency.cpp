// The parallel kernels must be bit-identical to their serial references:
// work is chunked with per-chunk substreams and merged in chunk order, so
// the thread count can never change a result.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "weakval/ensembles.hpp"
#include "weakval/meter_sim.hpp"
#include "weakval/optimizer.hpp"
#include "weakval/verify.hpp"

#include "test_helpers.hpp"

using namespace weakval;
using namespace testutil;

namespace {

void check_identical(const MeterReadout& a, const MeterReadout& b) {
    REQUIRE(a.outcomes.size() == b.outcomes.size());
    for (std::size_t m = 0; m < a.outcomes.size(); ++m) {
        CHECK(a.outcomes[m].count == b.outcomes[m].count);
        CHECK(a.outcomes[m].mean == b.outcomes[m].mean);
        CHECK(a.outcomes[m].std_error == b.outcomes[m].std_error);
        CHECK(a.outcomes[m].implied_weak_part == b.outcomes[m].implied_weak_part);
    }
}

}  // namespace

TEST_CASE("position readout: serial reference equals the OpenMP kernel") {
    RngStream rng(101);
    for (int trial = 0; trial < 3; ++trial) {
        int d = 2 + trial;
        Scenario s = random_scenario(d, StateFlavor::Pure, MeasurementFlavor::Projective, rng);
        MeterConfig cfg;
        cfg.sigma_x = 0.5;
        cfg.coupling = 0.1;
        cfg.samples = 150000;  // spans several chunks
        cfg.seed = 400 + static_cast<std::uint64_t>(trial);

        MeterReadout serial = simulate_position_readout(s.state, s.measurement, s.generator,
                                                        cfg, ExecutionPolicy::Serial);
        MeterReadout parallel = simulate_position_readout(s.state, s.measurement, s.generator,
                                                          cfg, ExecutionPolicy::Parallel);
        check_identical(serial, parallel);
    }
}

TEST_CASE("momentum readout: serial reference equals the OpenMP kernel") {
    RngStream rng(103);
    Scenario s = random_scenario(3, StateFlavor::Pure, MeasurementFlavor::Projective, rng);
    MeterConfig cfg;
    cfg.sigma_x = 0.25;
    cfg.coupling = 0.05;
    cfg.samples = 200001;  // odd count exercises the short trailing chunk
    cfg.seed = 17;

    MeterReadout serial = simulate_momentum_readout(s.state, s.measurement, s.generator, cfg,
                                                    ExecutionPolicy::Serial);
    MeterReadout parallel = simulate_momentum_readout(s.state, s.measurement, s.generator,
                                                      cfg, ExecutionPolicy::Parallel);
    check_identical(serial, parallel);
}

TEST_CASE("raw draws equal the aggregated draws entry by entry") {
    QuantumState plus = QuantumState::pure(ket_plus());
    Measurement y = Measurement::projective(basis_y());
    MeterConfig cfg;
    cfg.samples = 70000;
    cfg.seed = 3;

    PositionSamples serial =
        sample_position_readout(plus, y, half_sigma_z(), cfg, ExecutionPolicy::Serial);
    PositionSamples parallel =
        sample_position_readout(plus, y, half_sigma_z(), cfg, ExecutionPolicy::Parallel);
    CHECK(serial.x == parallel.x);
    CHECK(serial.outcome == parallel.outcome);

    // and the aggregate readout is exactly the mean of the raw draws
    MeterReadout readout = simulate_position_readout(plus, y, half_sigma_z(), cfg);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(2);
    for (std::size_t i = 0; i < serial.x.size(); ++i) {
        sum(serial.outcome[i]) += serial.x[i];
        count(serial.outcome[i]) += 1.0;
    }
    for (int m = 0; m < 2; ++m) {
        CHECK(readout.outcomes[static_cast<std::size_t>(m)].count ==
              static_cast<std::int64_t>(count(m)));
        CHECK(readout.outcomes[static_cast<std::size_t>(m)].mean ==
              doctest::Approx(sum(m) / count(m)).epsilon(1e-15));
    }
}

TEST_CASE("verification sweep: serial and parallel agree row by row") {
    VerifyOptions serial_opts;
    serial_opts.dims = {2, 3, 4};
    serial_opts.trials = 60;
    serial_opts.seed = 7;
    serial_opts.parallel = false;

    VerifyOptions parallel_opts = serial_opts;
    parallel_opts.parallel = true;

    VerifyResult a = run_verification(serial_opts);
    VerifyResult b = run_verification(parallel_opts);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].name == b.rows[i].name);
        CHECK(a.rows[i].cases == b.rows[i].cases);
        CHECK(a.rows[i].max_residual == b.rows[i].max_residual);
        CHECK(a.rows[i].max_ratio == b.rows[i].max_ratio);
        CHECK(a.rows[i].pass == b.rows[i].pass);
    }
}

TEST_CASE("optimizer restarts reduce deterministically") {
    QuantumState plus = QuantumState::pure(ket_plus());
    OptimizeOptions opts;
    opts.seed = 12;
    opts.restarts = 4;

    OptimizationResult a = optimize_measurement(plus, half_sigma_z(), opts);
    OptimizationResult b = optimize_measurement(plus, half_sigma_z(), opts);
    CHECK(a.best_fisher == b.best_fisher);
    CHECK((a.best_basis - b.best_basis).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        CHECK(a.trace[i].objective == b.trace[i].objective);
}
