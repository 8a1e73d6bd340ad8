#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "weakval/ensembles.hpp"
#include "weakval/metrology.hpp"
#include "weakval/optimizer.hpp"

#include "test_helpers.hpp"

using namespace weakval;
using namespace testutil;

TEST_CASE("qubit optimum: |+> with A = sigma_z/2 reaches Fisher 1") {
    QuantumState plus = QuantumState::pure(ket_plus());
    OptimizeOptions opts;
    opts.seed = 3;
    OptimizationResult r = optimize_measurement(plus, half_sigma_z(), opts);

    CHECK(r.ceiling == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.best_fisher == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.gap < 1e-6);
    CHECK(r.converged);

    // optimality certificate: all real weak values sit at <A> = 0
    OptimalityCertificate cert =
        certify_optimum(plus, half_sigma_z(), Measurement::projective(r.best_basis));
    CHECK(cert.re_deviation < 1e-4);
    CHECK(cert.gap < 1e-6);

    // trace is non-decreasing over accepted steps
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i].objective >= r.trace[i - 1].objective);
}

TEST_CASE("eigenstate input: ceiling and optimum are both zero") {
    OptimizationResult r =
        optimize_measurement(QuantumState::pure(ket0()), half_sigma_z(), {});
    CHECK(r.ceiling == doctest::Approx(0.0));
    CHECK(r.best_fisher <= 1e-9);
    CHECK(r.converged);
}

TEST_CASE("maximally mixed input cannot see any phase") {
    OptimizationResult r = optimize_measurement(
        QuantumState::mixed(maximally_mixed(2)), half_sigma_z(), {});
    CHECK(r.best_fisher <= 1e-9);
}

TEST_CASE("certificates of the named qubit bases") {
    QuantumState plus = QuantumState::pure(ket_plus());

    OptimalityCertificate best =
        certify_optimum(plus, half_sigma_z(), Measurement::projective(basis_y()));
    CHECK(best.re_deviation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(best.gap == doctest::Approx(0.0).epsilon(1e-12));

    OptimalityCertificate worst =
        certify_optimum(plus, half_sigma_z(), Measurement::projective(basis_z()));
    CHECK(worst.re_deviation == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(worst.gap == doctest::Approx(1.0).epsilon(1e-12));

    OptimalityCertificate trivial =
        certify_optimum(plus, identity_op(2), Measurement::projective(basis_z()));
    CHECK(trivial.re_deviation == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(trivial.gap == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("random pure states reach the ceiling, d in 2..4") {
    RngStream rng(83);
    for (int trial = 0; trial < 12; ++trial) {
        int d = 2 + trial % 3;
        QuantumState psi = QuantumState::pure(haar_pure_state(d, rng));
        HermitianOperator a = random_generator(d, rng);

        OptimizeOptions opts;
        opts.seed = 1000 + static_cast<std::uint64_t>(trial);
        OptimizationResult r = optimize_measurement(psi, a, opts);

        CHECK(r.best_fisher <= r.ceiling + 1e-9);
        CHECK(r.gap <= 1e-5 * (1.0 + r.ceiling));
    }
}

TEST_CASE("objective is invariant under outcome permutation and re-phasing") {
    QuantumState plus = QuantumState::pure(ket_plus());
    Matrix b = basis_y();
    double f0 = fisher_information(plus, Measurement::projective(b), half_sigma_z(),
                                   ZeroProbMode::LimitCorrect);

    Matrix permuted(2, 2);
    permuted.col(0) = b.col(1);
    permuted.col(1) = b.col(0);
    double f1 = fisher_information(plus, Measurement::projective(permuted), half_sigma_z(),
                                   ZeroProbMode::LimitCorrect);

    Matrix rephased = b;
    rephased.col(0) *= std::polar(1.0, 0.91);
    rephased.col(1) *= std::polar(1.0, -2.3);
    double f2 = fisher_information(plus, Measurement::projective(rephased), half_sigma_z(),
                                   ZeroProbMode::LimitCorrect);

    CHECK(f0 == doctest::Approx(f1).epsilon(1e-12));
    CHECK(f0 == doctest::Approx(f2).epsilon(1e-12));
}

TEST_CASE("depolarization can only lower the attainable Fisher information") {
    RngStream rng(89);
    QuantumState psi = QuantumState::pure(haar_pure_state(3, rng));
    HermitianOperator a = random_generator(3, rng);

    double previous = std::numeric_limits<double>::infinity();
    for (double v : {1.0, 0.7, 0.4, 0.1}) {
        Matrix rho = v * (psi.psi * psi.psi.adjoint()) + (1.0 - v) * maximally_mixed(3);
        OptimizeOptions opts;
        opts.seed = 5;
        opts.restarts = 3;
        OptimizationResult r = optimize_measurement(
            v < 1.0 ? QuantumState::mixed(rho) : psi, a, opts);
        CHECK(r.best_fisher <= previous + 1e-6);
        previous = r.best_fisher;
    }
}
