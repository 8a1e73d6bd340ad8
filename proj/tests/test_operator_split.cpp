#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "weakval/ensembles.hpp"
#include "weakval/metrology.hpp"
#include "weakval/operator_split.hpp"

#include "test_helpers.hpp"

using namespace weakval;
using namespace testutil;

namespace {

Scenario random_pure_projective(int d, RngStream& rng) {
    return random_scenario(d, StateFlavor::Pure, MeasurementFlavor::Projective, rng);
}

}  // namespace

TEST_CASE("subspace dimension counts") {
    auto d2 = subspace_dimensions(2);
    CHECK(d2.generators == 1);
    CHECK(d2.observables == 3);

    auto d1 = subspace_dimensions(1);
    CHECK(d1.generators == 0);
    CHECK(d1.observables == 1);

    auto d5 = subspace_dimensions(5);
    CHECK(d5.generators == 10);
    CHECK(d5.observables == 15);

    for (int d = 1; d <= 12; ++d) {
        auto dims = subspace_dimensions(d);
        CHECK(dims.generators + dims.observables == d * d);
    }
    CHECK_THROWS_AS(subspace_dimensions(0), ParameterError);
}

TEST_CASE("qubit splits") {
    QuantumState plus = QuantumState::pure(ket_plus());

    SUBCASE("sigma_z/2 is purely antisymmetric relative to the sigma_y basis") {
        OperatorSplit split =
            split_operator(plus, Measurement::projective(basis_y()), half_sigma_z());
        CHECK(split.symmetric_part.mat.cwiseAbs().maxCoeff() < 1e-12);
        CHECK((split.generator_part.mat - half_sigma_z().mat).cwiseAbs().maxCoeff() < 1e-12);
        CHECK_FALSE(split.degenerate);
    }

    SUBCASE("a generator diagonal in the measurement basis is purely symmetric") {
        OperatorSplit split =
            split_operator(plus, Measurement::projective(basis_z()), half_sigma_z());
        CHECK((split.symmetric_part.mat - half_sigma_z().mat).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(split.generator_part.mat.cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("identity splits into itself") {
        OperatorSplit split =
            split_operator(plus, Measurement::projective(basis_y()), identity_op(2));
        CHECK((split.symmetric_part.mat - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
              1e-12);
        CHECK(split.generator_part.mat.cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("vanishing overlap is flagged, sum still exact") {
        OperatorSplit split =
            split_operator(plus, Measurement::projective(basis_x()), half_sigma_z());
        CHECK(split.degenerate);
        CHECK((split.symmetric_part.mat + split.generator_part.mat - half_sigma_z().mat)
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
    }
}

TEST_CASE("split invariants over random scenarios") {
    RngStream rng(67);
    for (int trial = 0; trial < 60; ++trial) {
        int d = 2 + trial % 3;
        Scenario s = random_pure_projective(d, rng);
        OperatorSplit split = split_operator(s.state, s.measurement, s.generator);

        // exact reassembly and Hermiticity of both parts
        CHECK((s.generator.mat - split.symmetric_part.mat - split.generator_part.mat)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
        CHECK(split.symmetric_part.hermiticity_residual() < 1e-12);
        CHECK(split.generator_part.hermiticity_residual() < 1e-12);

        // in the phase-adjusted basis: S real symmetric, K imaginary antisymmetric
        Matrix gs = split.basis.vectors.adjoint() * split.symmetric_part.mat *
                    split.basis.vectors;
        Matrix gk = split.basis.vectors.adjoint() * split.generator_part.mat *
                    split.basis.vectors;
        CHECK(gs.imag().cwiseAbs().maxCoeff() < 1e-10);
        CHECK((gs.real() - gs.real().transpose()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(gk.real().cwiseAbs().maxCoeff() < 1e-10);
        CHECK((gk.imag() + gk.imag().transpose()).cwiseAbs().maxCoeff() < 1e-10);

        // the symmetric part is invisible, the antisymmetric part carries
        // the full sensitivity
        double f_a = fisher_information(s.state, s.measurement, s.generator,
                                        ZeroProbMode::LimitCorrect);
        double f_s = fisher_information(s.state, s.measurement, split.symmetric_part,
                                        ZeroProbMode::LimitCorrect);
        double f_k = fisher_information(s.state, s.measurement, split.generator_part,
                                        ZeroProbMode::LimitCorrect);
        CHECK(f_s <= 1e-9);
        CHECK(std::abs(f_a - f_k) <= 1e-9);
        CHECK(is_measurement_insensitive(s.state, s.measurement, split.symmetric_part));

        // per-outcome: Im parts agree between A and K
        OutcomeMoments mom_a = outcome_moments(s.state, s.measurement, s.generator);
        OutcomeMoments mom_k = outcome_moments(s.state, s.measurement, split.generator_part);
        OutcomeMoments mom_s = outcome_moments(s.state, s.measurement, split.symmetric_part);
        for (Eigen::Index m = 0; m < mom_a.prob.size(); ++m) {
            if (mom_a.prob(m) < 1e-12) continue;
            Complex wa = mom_a.numer(m) / mom_a.prob(m);
            Complex wk = mom_k.numer(m) / mom_k.prob(m);
            Complex ws = mom_s.numer(m) / mom_s.prob(m);
            CHECK(std::abs(wa.imag() - wk.imag()) <= 1e-10);
            CHECK(std::abs(wa.real() - ws.real() - wk.real()) <= 1e-10);
            CHECK(std::abs(ws.imag()) <= 1e-10);
        }
    }
}

TEST_CASE("split is additive") {
    RngStream rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 2 + trial % 3;
        Scenario s = random_pure_projective(d, rng);
        HermitianOperator b = random_generator(d, rng);
        HermitianOperator sum(s.generator.mat + b.mat);

        OperatorSplit split_a = split_operator(s.state, s.measurement, s.generator);
        OperatorSplit split_b = split_operator(s.state, s.measurement, b);
        OperatorSplit split_sum = split_operator(s.state, s.measurement, sum);

        CHECK((split_sum.symmetric_part.mat - split_a.symmetric_part.mat -
               split_b.symmetric_part.mat)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
        CHECK((split_sum.generator_part.mat - split_a.generator_part.mat -
               split_b.generator_part.mat)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
    }
}

TEST_CASE("explicit operator bases of the two subspaces") {
    RngStream rng(73);
    for (int d : {2, 3, 4}) {
        Scenario s = random_pure_projective(d, rng);
        GammaBasis gb = gamma_basis(s.state, s.measurement);
        auto dims = subspace_dimensions(d);

        // antisymmetric basis: i(|g_j><g_k| - |g_k><g_j|), j < k
        std::vector<Matrix> generators;
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                Matrix e = Complex(0, 1) * (gb.vectors.col(j) * gb.vectors.col(k).adjoint() -
                                            gb.vectors.col(k) * gb.vectors.col(j).adjoint());
                generators.push_back(e);
            }
        CHECK(static_cast<int>(generators.size()) == dims.generators);
        for (const auto& e : generators) {
            double f = fisher_information(s.state, s.measurement, HermitianOperator(e),
                                          ZeroProbMode::LimitCorrect);
            CHECK(f > 1e-6);  // visible phase generator
            CHECK_FALSE(
                is_measurement_insensitive(s.state, s.measurement, HermitianOperator(e)));
        }

        // symmetric basis: diagonals and |g_j><g_k| + |g_k><g_j|
        std::vector<Matrix> observables;
        for (int j = 0; j < d; ++j)
            observables.push_back(gb.vectors.col(j) * gb.vectors.col(j).adjoint());
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                observables.push_back(gb.vectors.col(j) * gb.vectors.col(k).adjoint() +
                                      gb.vectors.col(k) * gb.vectors.col(j).adjoint());
        CHECK(static_cast<int>(observables.size()) == dims.observables);
        for (const auto& e : observables)
            CHECK(is_measurement_insensitive(s.state, s.measurement, HermitianOperator(e)));

        // linear independence: stack as vectors and check the rank
        Eigen::MatrixXcd stacked(d * d, dims.generators + dims.observables);
        int col = 0;
        for (const auto& e : generators)
            stacked.col(col++) = Eigen::Map<const Eigen::VectorXcd>(e.data(), d * d);
        for (const auto& e : observables)
            stacked.col(col++) = Eigen::Map<const Eigen::VectorXcd>(e.data(), d * d);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(stacked);
        CHECK(qr.rank() == d * d);
    }
}

TEST_CASE("insensitivity examples") {
    QuantumState plus = QuantumState::pure(ket_plus());
    CHECK_FALSE(is_measurement_insensitive(plus, Measurement::projective(basis_y()),
                                           half_sigma_z()));
    CHECK(is_measurement_insensitive(plus, Measurement::projective(basis_y()),
                                     identity_op(2)));
    // zero-probability outcome with a nonzero transition amplitude counts
    // as sensitive even though no defined weak value is complex
    CHECK_FALSE(is_measurement_insensitive(plus, Measurement::projective(basis_x()),
                                           half_sigma_z()));
}
