#include "weakval/verify.hpp"

#include "weakval/ensembles.hpp"
#include "weakval/evolution.hpp"
#include "weakval/metrology.hpp"
#include "weakval/operator_split.hpp"
#include "weakval/weak_values.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace weakval {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdProbCutoff = 1e-6;  // below this the stencil is unreliable

enum RowIndex : std::size_t {
    kEq2 = 0,
    kEq4,
    kEq5,
    kEq7,
    kEq11,
    kEq13,
    kSplit,
    kRowCount
};

const std::array<const char*, kRowCount> kRowNames = {
    "eq2-log-derivative-vs-fd", "eq4-outcome-variance",
    "eq5-sensitivity-decomposition", "eq7-uncertainty-bound",
    "eq11-cauchy-schwarz", "eq13-gamma-expansion",
    "operator-split-fisher"};

struct Entry {
    double residual = 0.0;
    double tolerance = 0.0;
    double ratio = 0.0;
    long cases = 0;

    void record(double res, double tol) {
        ++cases;
        double r = tol > 0 ? res / tol : (res > 0 ? 1e30 : 0.0);
        if (r >= ratio) {
            ratio = r;
            residual = res;
            tolerance = tol;
        }
    }

    void merge(const Entry& o) {
        cases += o.cases;
        if (o.ratio >= ratio) {
            ratio = o.ratio;
            residual = o.residual;
            tolerance = o.tolerance;
        }
    }
};

using TrialEntries = std::array<Entry, kRowCount>;

void run_trial(const Scenario& s, TrialEntries& out) {
    const Tolerances tol;
    const bool pure_projective =
        s.state.is_pure() && s.measurement.is_projective();

    OutcomeMoments mom = outcome_moments(s.state, s.measurement, s.generator, tol);

    // Analytic log derivative against the central-difference oracle; the
    // oracle's truncation error grows with the weak value, hence the
    // adaptive tolerance 10 h^2 (1 + |A_w|^3).
    RealVector p_plus = outcome_probabilities(s.state, s.measurement, s.generator, +kFdStep);
    RealVector p_minus = outcome_probabilities(s.state, s.measurement, s.generator, -kFdStep);
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < kFdProbCutoff) continue;
        Complex w = mom.numer(m) / mom.prob(m);
        double analytic = 2.0 * w.imag();
        double fd = (std::log(p_plus(m)) - std::log(p_minus(m))) / (2.0 * kFdStep);
        double scale = 1.0 + std::pow(std::abs(w), 3.0);
        out[kEq2].record(std::abs(analytic - fd), 10.0 * kFdStep * kFdStep * scale);
    }

    MetrologyReport rep =
        bound_check(s.state, s.measurement, s.generator, CheckPolicy::Record, tol);
    out[kEq7].record(std::max(0.0, -rep.bound_slack), 1e-9);
    if (pure_projective) out[kEq7].record(std::abs(rep.bound_slack), 1e-9);

    CauchySchwarzGap cs = cauchy_schwarz_gap(s.state, s.measurement, s.generator, tol);
    out[kEq11].record(std::max(0.0, -cs.gap), 1e-9);
    if (pure_projective) out[kEq11].record(std::abs(cs.gap), 1e-9);

    if (!pure_projective) return;

    VarianceIdentity vi = weak_variance_identity(s.state, s.measurement, s.generator, tol);
    out[kEq4].record(std::abs(vi.lhs - vi.rhs), 1e-10);

    SensitivityDecomposition dec = pure_sensitivity_decomposition(
        s.state, s.measurement, s.generator, CheckPolicy::Record, tol);
    out[kEq5].record(std::abs(dec.fisher - (dec.four_var_in - dec.four_re_variance)), 1e-9);

    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < tol.prob) continue;
        Complex direct = mom.numer(m) / mom.prob(m);
        GammaWeakValue gamma = weak_value_via_gamma(s.state, s.measurement, s.generator, m, tol);
        out[kEq13].record(std::abs(gamma.value - direct), 1e-10);
    }

    OperatorSplit split = split_operator(s.state, s.measurement, s.generator, tol);
    double sum_residual = (s.generator.mat - split.symmetric_part.mat -
                           split.generator_part.mat)
                              .cwiseAbs()
                              .maxCoeff();
    out[kSplit].record(sum_residual, 1e-12);
    double f_a = fisher_information(s.state, s.measurement, s.generator,
                                    ZeroProbMode::LimitCorrect, tol);
    double f_s = fisher_information(s.state, s.measurement, split.symmetric_part,
                                    ZeroProbMode::LimitCorrect, tol);
    double f_k = fisher_information(s.state, s.measurement, split.generator_part,
                                    ZeroProbMode::LimitCorrect, tol);
    out[kSplit].record(f_s, 1e-9);
    out[kSplit].record(std::abs(f_a - f_k), 1e-9);
}

}  // namespace

VerifyResult run_verification(const VerifyOptions& opts) {
    if (opts.trials < 1) throw ParameterError("trials must be >= 1");
    if (opts.dims.empty()) throw ParameterError("dims must not be empty");
    for (int d : opts.dims)
        if (d < 1) throw ParameterError("dims must be positive");

    std::vector<TrialEntries> trials(static_cast<std::size_t>(opts.trials));

#pragma omp parallel for schedule(dynamic) if (opts.parallel)
    for (int t = 0; t < opts.trials; ++t) {
        RngStream rng = RngStream::substream(opts.seed, static_cast<std::uint64_t>(t));
        StateFlavor sf = (t % 2 == 0) ? StateFlavor::Pure : StateFlavor::Mixed;
        MeasurementFlavor mf =
            ((t / 2) % 2 == 0) ? MeasurementFlavor::Projective : MeasurementFlavor::Povm;
        int dim = opts.dims[static_cast<std::size_t>(t) % opts.dims.size()];
        Scenario s = random_scenario(dim, sf, mf, rng);
        run_trial(s, trials[static_cast<std::size_t>(t)]);
    }

    VerifyResult result;
    for (std::size_t row = 0; row < kRowCount; ++row) {
        Entry merged;
        for (const auto& t : trials) merged.merge(t[row]);
        IdentityRow out;
        out.name = kRowNames[row];
        out.cases = merged.cases;
        out.max_residual = merged.residual;
        out.tolerance = merged.tolerance;
        out.max_ratio = merged.ratio;
        out.pass = merged.cases > 0 && merged.ratio <= 1.0;
        result.rows.push_back(out);
        result.pass = result.pass && out.pass;
    }
    return result;
}

void print_verify_matrix(std::ostream& os, const VerifyResult& r) {
    os << std::left << std::setw(32) << "identity" << std::right << std::setw(8) << "cases"
       << std::setw(15) << "max residual" << std::setw(13) << "tolerance" << std::setw(8)
       << "status" << '\n';
    for (const auto& row : r.rows) {
        os << std::left << std::setw(32) << row.name << std::right << std::setw(8)
           << row.cases << std::setw(15) << std::scientific << std::setprecision(2)
           << row.max_residual << std::setw(13) << row.tolerance << std::defaultfloat
           << std::setw(8) << (row.pass ? "PASS" : "FAIL") << '\n';
    }
    os << (r.pass ? "all identities hold" : "IDENTITY FAILURE") << '\n';
}

}  // namespace weakval
