#include "weakval/ensembles.hpp"
#include "weakval/evolution.hpp"
#include "weakval/meter_sim.hpp"
#include "weakval/metrology.hpp"
#include "weakval/operator_split.hpp"
#include "weakval/optimizer.hpp"
#include "weakval/scenario_io.hpp"
#include "weakval/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace weakval;
using nlohmann::json;

struct CommonArgs {
    std::string scenario_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool strict = false;
};

/// Scenario analysis happens at small shifts around the configured phase:
/// a nonzero phase rotates the input state before anything else runs.
Scenario load_scenario(const std::string& path) {
    Scenario s = parse_scenario(path);
    if (s.phase != 0.0) {
        s.state = evolve(s.state, s.generator, s.phase);
        s.phase = 0.0;
    }
    return s;
}

void write_output(const std::string& path, const json& doc,
                  const std::function<void(std::ostream&)>& csv_writer) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        csv_writer(out);
    } else {
        out << doc.dump(2) << '\n';
    }
}

json check_entry(const std::string& name, double residual, double tolerance) {
    return {{"name", name},
            {"residual", residual},
            {"tolerance", tolerance},
            {"pass", residual <= tolerance}};
}

/// Every identity evaluated on the one scenario at hand (the randomized
/// matrix lives under `verify`). Inequalities record the amount of
/// violation, so 0 means satisfied.
json scenario_checks(const Scenario& s, ZeroProbMode mode, bool* all_pass) {
    const Tolerances tol;
    json checks = json::array();
    const bool pure_projective = s.state.is_pure() && s.measurement.is_projective();

    OutcomeMoments mom = outcome_moments(s.state, s.measurement, s.generator, tol);
    constexpr double h = 1e-5;
    RealVector p_plus = outcome_probabilities(s.state, s.measurement, s.generator, +h);
    RealVector p_minus = outcome_probabilities(s.state, s.measurement, s.generator, -h);
    double fd_res = 0.0, fd_tol = 1e-9;
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < 1e-6) continue;
        Complex w = mom.numer(m) / mom.prob(m);
        double fd = (std::log(p_plus(m)) - std::log(p_minus(m))) / (2.0 * h);
        double res = std::abs(2.0 * w.imag() - fd);
        double t = 10.0 * h * h * (1.0 + std::pow(std::abs(w), 3.0));
        if (fd_tol > 0 && res / t > fd_res / fd_tol) {
            fd_res = res;
            fd_tol = t;
        }
    }
    checks.push_back(check_entry("eq2-log-derivative-vs-fd", fd_res, fd_tol));

    MetrologyReport rep = bound_check(s.state, s.measurement, s.generator, mode,
                                      CheckPolicy::Record, tol);
    checks.push_back(
        check_entry("eq7-uncertainty-bound", std::max(0.0, -rep.bound_slack), 1e-9));

    CauchySchwarzGap cs = cauchy_schwarz_gap(s.state, s.measurement, s.generator, tol);
    checks.push_back(check_entry("eq11-cauchy-schwarz", std::max(0.0, -cs.gap), 1e-9));

    if (pure_projective) {
        VarianceIdentity vi =
            weak_variance_identity(s.state, s.measurement, s.generator, tol);
        checks.push_back(check_entry("eq4-outcome-variance", std::abs(vi.lhs - vi.rhs), 1e-10));

        SensitivityDecomposition dec = pure_sensitivity_decomposition(
            s.state, s.measurement, s.generator, CheckPolicy::Record, tol);
        checks.push_back(check_entry(
            "eq5-sensitivity-decomposition",
            std::abs(dec.fisher - (dec.four_var_in - dec.four_re_variance)), 1e-9));
        if (mode == ZeroProbMode::LimitCorrect)
            checks.push_back(check_entry("eq7-bound-equality", std::abs(rep.bound_slack), 1e-9));

        double gamma_res = 0.0;
        for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
            if (mom.prob(m) < tol.prob) continue;
            GammaWeakValue g =
                weak_value_via_gamma(s.state, s.measurement, s.generator, m, tol);
            gamma_res = std::max(gamma_res,
                                 std::abs(g.value - mom.numer(m) / mom.prob(m)));
        }
        checks.push_back(check_entry("eq13-gamma-expansion", gamma_res, 1e-10));
    }

    *all_pass = true;
    for (const auto& c : checks) *all_pass = *all_pass && c["pass"].get<bool>();
    return checks;
}

int cmd_analyze(const CommonArgs& args, const std::string& mode_flag) {
    Scenario s = load_scenario(args.scenario_path);
    ZeroProbMode mode = default_zero_prob_mode(s.state);
    if (mode_flag == "exclude") mode = ZeroProbMode::Exclude;
    if (mode_flag == "limit") mode = ZeroProbMode::LimitCorrect;

    CheckPolicy policy = args.strict ? CheckPolicy::Throw : CheckPolicy::Record;
    WeakValueProfile profile = weak_value_profile(s.state, s.measurement, s.generator);
    MetrologyReport rep = bound_check(s.state, s.measurement, s.generator, mode, policy);

    bool checks_pass = false;
    json doc;
    doc["scenario"] = scenario_to_json(s);
    doc["validation"] = to_json(validate(s));
    doc["profile"] = to_json(profile);
    doc["metrology"] = to_json(rep);
    doc["checks"] = scenario_checks(s, mode, &checks_pass);
    doc["pass"] = checks_pass;

    print_metrology_table(std::cout, profile, rep);
    write_output(args.out_path, doc, [&](std::ostream& os) { write_outcome_csv(os, rep); });

    if (!checks_pass) {
        for (const auto& c : doc["checks"])
            if (!c["pass"].get<bool>())
                std::cerr << "check failed: " << c["name"].get<std::string>()
                          << " (residual " << c["residual"].get<double>() << ")\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const CommonArgs& args, const std::vector<int>& dims, int trials) {
    VerifyOptions opts;
    if (!dims.empty()) opts.dims = dims;
    opts.trials = trials;
    opts.seed = args.seed;
    VerifyResult result = run_verification(opts);
    print_verify_matrix(std::cout, result);
    write_output(args.out_path, to_json(result), [&](std::ostream& os) {
        os << "identity,cases,max_residual,tolerance,pass\n";
        for (const auto& row : result.rows)
            os << row.name << ',' << row.cases << ',' << row.max_residual << ','
               << row.tolerance << ',' << (row.pass ? 1 : 0) << '\n';
    });
    return result.pass ? 0 : 1;
}

int cmd_simulate_meter(const CommonArgs& args, double lambda, std::int64_t samples) {
    Scenario s = load_scenario(args.scenario_path);
    MeterConfig cfg;
    cfg.coupling = lambda;
    cfg.samples = samples;
    cfg.seed = args.seed;

    MeterReadout position = simulate_position_readout(s.state, s.measurement, s.generator, cfg);
    MeterReadout momentum = simulate_momentum_readout(s.state, s.measurement, s.generator, cfg);
    WeakValueProfile profile = weak_value_profile(s.state, s.measurement, s.generator);

    json doc;
    doc["scenario"] = scenario_to_json(s);
    doc["config"] = {{"sigma_x", cfg.sigma_x},
                     {"coupling", cfg.coupling},
                     {"samples", cfg.samples},
                     {"seed", cfg.seed}};
    doc["position"] = to_json(position);
    doc["momentum"] = to_json(momentum);
    doc["weak_values"] = to_json(profile);

    std::cout << "outcome  exact Re      implied Re    exact Im      implied Im\n";
    for (std::size_t m = 0; m < position.outcomes.size(); ++m) {
        const auto& wo = profile.outcomes[m];
        std::cout << std::setw(7) << m << "  ";
        if (wo.weak_value)
            std::cout << std::setw(12) << wo.weak_value->real() << "  " << std::setw(12)
                      << position.outcomes[m].implied_weak_part << "  " << std::setw(12)
                      << wo.weak_value->imag() << "  " << std::setw(12)
                      << momentum.outcomes[m].implied_weak_part << '\n';
        else
            std::cout << " (undefined weak value)\n";
    }
    write_output(args.out_path, doc, [&](std::ostream& os) {
        os << "outcome,mode,count,mean,std_error,implied_weak_part,implied_std_error\n";
        for (const auto* r : {&position, &momentum})
            for (std::size_t m = 0; m < r->outcomes.size(); ++m) {
                const auto& o = r->outcomes[m];
                os << m << ',' << (r->mode == ReadoutMode::Position ? "position" : "momentum")
                   << ',' << o.count << ',' << o.mean << ',' << o.std_error << ','
                   << o.implied_weak_part << ',' << o.implied_std_error << '\n';
            }
    });
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    Scenario s = load_scenario(args.scenario_path);
    OptimizeOptions opts;
    opts.seed = args.seed;
    OptimizationResult result = optimize_measurement(s.state, s.generator, opts);

    std::cout << "best fisher = " << result.best_fisher << " rad^-2, ceiling = "
              << result.ceiling << ", gap = " << result.gap
              << (result.converged ? " (converged)" : " (not converged)") << '\n';
    if (s.state.is_pure()) {
        OptimalityCertificate cert = certify_optimum(
            s.state, s.generator, Measurement::projective(result.best_basis));
        std::cout << "certificate: max |Re[A_w] - <A>| = " << cert.re_deviation << '\n';
    }
    write_output(args.out_path, to_json(result), [&](std::ostream& os) {
        os << "iteration,objective\n";
        for (const auto& t : result.trace) os << t.iteration << ',' << t.objective << '\n';
    });
    return 0;
}

int cmd_decompose(const CommonArgs& args) {
    Scenario s = load_scenario(args.scenario_path);
    OperatorSplit split = split_operator(s.state, s.measurement, s.generator);

    double sum_res = (s.generator.mat - split.symmetric_part.mat - split.generator_part.mat)
                         .cwiseAbs()
                         .maxCoeff();
    double f_a = fisher_information(s.state, s.measurement, s.generator,
                                    ZeroProbMode::LimitCorrect);
    double f_s = fisher_information(s.state, s.measurement, split.symmetric_part,
                                    ZeroProbMode::LimitCorrect);
    double f_k = fisher_information(s.state, s.measurement, split.generator_part,
                                    ZeroProbMode::LimitCorrect);
    auto dims = subspace_dimensions(static_cast<int>(s.generator.dim()));

    json doc = to_json(split);
    doc["subspace_dimensions"] = {{"generators", dims.generators},
                                  {"observables", dims.observables}};
    doc["checks"] = json::array({check_entry("split-sum", sum_res, 1e-12),
                                 check_entry("split-symmetric-fisher", f_s, 1e-9),
                                 check_entry("split-fisher-invariance",
                                             std::abs(f_a - f_k), 1e-9)});

    std::cout << "fisher(A) = " << f_a << ", fisher(S) = " << f_s << ", fisher(K) = " << f_k
              << (split.degenerate ? "  [degenerate overlaps]" : "") << '\n';
    std::cout << "operator space: " << dims.generators << " phase generators, "
              << dims.observables << " measurement observables\n";
    write_output(args.out_path, doc, [&](std::ostream& os) {
        os << "check,residual,tolerance\n";
        for (const auto& c : doc["checks"])
            os << c["name"].get<std::string>() << ',' << c["residual"].get<double>() << ','
               << c["tolerance"].get<double>() << '\n';
    });

    bool pass = true;
    for (const auto& c : doc["checks"]) pass = pass && c["pass"].get<bool>();
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakval: weak-value phase estimation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::vector<int> dims;
    int trials = 200;
    double lambda = 0.05;
    std::int64_t samples = 100000;
    std::string mode_flag;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", args.scenario_path, "scenario JSON file")
                ->required();
        cmd->add_option("--out", args.out_path,
                        "output file (.json for the full report, .csv for tables)");
        cmd->add_option("--seed", args.seed, "random seed");
        cmd->add_flag("--strict", args.strict, "make identity violations fatal");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "weak-value and sensitivity report");
    add_common(analyze, true);
    analyze->add_option("--mode", mode_flag, "zero-probability handling")
        ->check(CLI::IsMember({"exclude", "limit"}));

    CLI::App* verify = app.add_subcommand("verify", "randomized identity verification");
    add_common(verify, false);
    verify->add_option("--dims", dims, "dimensions, e.g. 2,3,4")->delimiter(',');
    verify->add_option("--trials", trials, "number of random scenarios");

    CLI::App* meter = app.add_subcommand("simulate-meter", "Monte Carlo meter readout");
    add_common(meter, true);
    meter->add_option("--lambda", lambda, "meter coupling strength");
    meter->add_option("--samples", samples, "Monte Carlo samples");

    CLI::App* optimize = app.add_subcommand("optimize", "measurement basis optimization");
    add_common(optimize, true);

    CLI::App* decompose = app.add_subcommand("decompose", "symmetric/antisymmetric split");
    add_common(decompose, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(args, mode_flag);
        if (app.got_subcommand(verify)) return cmd_verify(args, dims, trials);
        if (app.got_subcommand(meter)) return cmd_simulate_meter(args, lambda, samples);
        if (app.got_subcommand(optimize)) return cmd_optimize(args);
        if (app.got_subcommand(decompose)) return cmd_decompose(args);
    } catch (const weakval::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
