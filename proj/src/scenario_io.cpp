#include "weakval/scenario_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace weakval {

using nlohmann::json;

namespace {

Complex parse_complex(const json& node, const std::string& context) {
    if (!node.is_array() || node.size() != 2 || !node[0].is_number() ||
        !node[1].is_number())
        throw ParseError(context + ": complex numbers are two-element arrays [re, im]");
    return {node[0].get<double>(), node[1].get<double>()};
}

Vector parse_vector(const json& node, Eigen::Index dim, const std::string& context) {
    if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != dim)
        throw ParseError(context + ": expected a vector of length " + std::to_string(dim));
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = parse_complex(node[static_cast<std::size_t>(i)],
                             context + "[" + std::to_string(i) + "]");
    return v;
}

Matrix parse_matrix(const json& node, Eigen::Index dim, const std::string& context) {
    if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != dim)
        throw ParseError(context + ": expected a " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " matrix (list of rows)");
    Matrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        const json& row = node[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
            throw ParseError(context + ": row " + std::to_string(r) + " has wrong length");
        for (Eigen::Index c = 0; c < dim; ++c)
            m(r, c) = parse_complex(row[static_cast<std::size_t>(c)],
                                    context + "[" + std::to_string(r) + "][" +
                                        std::to_string(c) + "]");
    }
    return m;
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        out.push_back(row);
    }
    return out;
}

const json& require_key(const json& doc, const char* key, const std::string& context) {
    auto it = doc.find(key);
    if (it == doc.end())
        throw ParseError(context + ": missing required key '" + key + "'");
    return *it;
}

void write_full_precision(std::ostream& os, double x) {
    os << std::setprecision(17) << x;
}

}  // namespace

Scenario scenario_from_json(const json& doc, const Tolerances& tol) {
    if (!doc.is_object()) throw ParseError("scenario: document root must be an object");

    const json& jdim = require_key(doc, "dimension", "scenario");
    if (!jdim.is_number_integer() || jdim.get<int>() < 1)
        throw ParseError("scenario.dimension: must be a positive integer");
    const Eigen::Index d = jdim.get<Eigen::Index>();

    Scenario s;

    const json& jstate = require_key(doc, "state", "scenario");
    std::string state_type = require_key(jstate, "type", "scenario.state").get<std::string>();
    const json& jstate_data = require_key(jstate, "data", "scenario.state");
    if (state_type == "pure") {
        s.state = QuantumState::pure(parse_vector(jstate_data, d, "scenario.state.data"));
    } else if (state_type == "mixed") {
        s.state = QuantumState::mixed(parse_matrix(jstate_data, d, "scenario.state.data"));
    } else {
        throw ParseError("scenario.state.type: must be 'pure' or 'mixed'");
    }

    const json& jmeas = require_key(doc, "measurement", "scenario");
    std::string meas_type =
        require_key(jmeas, "type", "scenario.measurement").get<std::string>();
    const json& jmeas_data = require_key(jmeas, "data", "scenario.measurement");
    if (!jmeas_data.is_array() || jmeas_data.empty())
        throw ParseError("scenario.measurement.data: expected a non-empty list");
    if (meas_type == "basis") {
        if (static_cast<Eigen::Index>(jmeas_data.size()) != d)
            throw ParseError("scenario.measurement.data: a basis needs exactly " +
                             std::to_string(d) + " vectors");
        Matrix b(d, d);
        for (Eigen::Index m = 0; m < d; ++m)
            b.col(m) = parse_vector(jmeas_data[static_cast<std::size_t>(m)], d,
                                    "scenario.measurement.data[" + std::to_string(m) + "]");
        s.measurement = Measurement::projective(std::move(b));
    } else if (meas_type == "povm") {
        std::vector<Matrix> effects;
        for (std::size_t k = 0; k < jmeas_data.size(); ++k)
            effects.push_back(parse_matrix(
                jmeas_data[k], d, "scenario.measurement.data[" + std::to_string(k) + "]"));
        s.measurement = Measurement::povm(std::move(effects));
    } else {
        throw ParseError("scenario.measurement.type: must be 'basis' or 'povm'");
    }

    s.generator =
        HermitianOperator(parse_matrix(require_key(doc, "generator", "scenario"), d,
                                       "scenario.generator"));

    if (auto it = doc.find("phase"); it != doc.end()) {
        if (!it->is_number()) throw ParseError("scenario.phase: must be a number");
        s.phase = it->get<double>();
    }

    ValidationReport report = validate(s, tol);
    if (!report.pass) {
        for (const auto& item : report.items)
            if (!item.pass)
                throw ValidationError(item.name,
                                      "scenario invariant '" + item.name +
                                          "' violated (residual " +
                                          std::to_string(item.residual) + ", tolerance " +
                                          std::to_string(item.tolerance) + ")");
    }
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path, const Tolerances& tol) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed scenario file " + path.string() + ": " + e.what());
    }
    return scenario_from_json(doc, tol);
}

json scenario_to_json(const Scenario& s) {
    json doc;
    doc["dimension"] = s.state.dim();
    if (s.state.is_pure()) {
        doc["state"] = {{"type", "pure"}, {"data", vector_to_json(s.state.psi)}};
    } else {
        doc["state"] = {{"type", "mixed"}, {"data", matrix_to_json(s.state.rho)}};
    }
    if (s.measurement.is_projective()) {
        json vectors = json::array();
        for (Eigen::Index m = 0; m < s.measurement.basis.cols(); ++m)
            vectors.push_back(vector_to_json(s.measurement.basis.col(m)));
        doc["measurement"] = {{"type", "basis"}, {"data", vectors}};
    } else {
        json effects = json::array();
        for (const auto& e : s.measurement.effects) effects.push_back(matrix_to_json(e));
        doc["measurement"] = {{"type", "povm"}, {"data", effects}};
    }
    doc["generator"] = matrix_to_json(s.generator.mat);
    doc["phase"] = s.phase;
    return doc;
}

json to_json(const ValidationReport& r) {
    json items = json::array();
    for (const auto& it : r.items)
        items.push_back({{"name", it.name},
                         {"residual", it.residual},
                         {"tolerance", it.tolerance},
                         {"pass", it.pass}});
    return {{"pass", r.pass}, {"items", items}};
}

json to_json(const WeakValueProfile& p) {
    json outcomes = json::array();
    for (const auto& o : p.outcomes) {
        json row = {{"outcome", o.index},
                    {"probability", o.probability},
                    {"numerator", complex_to_json(o.numerator)}};
        row["weak_value"] = o.weak_value ? complex_to_json(*o.weak_value) : json(nullptr);
        outcomes.push_back(row);
    }
    return {{"outcomes", outcomes},
            {"mean_a", p.mean_a},
            {"var_in", p.var_in},
            {"second_moment", p.second_moment}};
}

json to_json(const MetrologyReport& r, const Tolerances& tol) {
    json per_outcome = json::array();
    for (const auto& o : r.per_outcome) {
        json row = {{"outcome", o.index}, {"probability", o.probability}};
        row["weak_value"] = o.weak_value ? complex_to_json(*o.weak_value) : json(nullptr);
        row["log_derivative"] = o.log_derivative ? json(*o.log_derivative) : json(nullptr);
        per_outcome.push_back(row);
    }
    auto dphi = min_phase_error(r.fisher, tol);
    return {{"fisher", r.fisher},
            {"four_var_in", r.four_var_in},
            {"re_variance", r.re_variance},
            {"im_second_moment", r.im_second_moment},
            {"est_variance", r.est_variance},
            {"bound_slack", r.bound_slack},
            {"min_phase_error", dphi ? json(*dphi) : json("insensitive")},
            {"zero_prob_mode",
             r.zero_prob_mode == ZeroProbMode::LimitCorrect ? "limit" : "exclude"},
            {"per_outcome", per_outcome}};
}

json to_json(const OperatorSplit& s) {
    return {{"symmetric_part", matrix_to_json(s.symmetric_part.mat)},
            {"generator_part", matrix_to_json(s.generator_part.mat)},
            {"gamma_basis", matrix_to_json(s.basis.vectors)},
            {"amplitudes", std::vector<double>(s.basis.amplitudes.begin(),
                                               s.basis.amplitudes.end())},
            {"degenerate", s.degenerate}};
}

json to_json(const MeterReadout& r) {
    json outcomes = json::array();
    for (std::size_t m = 0; m < r.outcomes.size(); ++m) {
        const auto& o = r.outcomes[m];
        outcomes.push_back({{"outcome", m},
                            {"count", o.count},
                            {"mean", o.mean},
                            {"std_error", o.std_error},
                            {"implied_weak_part", o.implied_weak_part},
                            {"implied_std_error", o.implied_std_error}});
    }
    return {{"mode", r.mode == ReadoutMode::Position ? "position" : "momentum"},
            {"coupling", r.coupling},
            {"outcomes", outcomes}};
}

json to_json(const ConvergenceStudy& s) {
    json points = json::array();
    for (const auto& p : s.points)
        points.push_back(
            {{"coupling", p.coupling}, {"bias", p.bias}, {"std_error", p.std_error}});
    return {{"points", points}, {"quadratic_trend", s.quadratic_trend}};
}

json to_json(const OptimizationResult& r) {
    json trace = json::array();
    for (const auto& t : r.trace)
        trace.push_back({{"iteration", t.iteration}, {"objective", t.objective}});
    return {{"best_basis", matrix_to_json(r.best_basis)},
            {"best_fisher", r.best_fisher},
            {"ceiling", r.ceiling},
            {"gap", r.gap},
            {"converged", r.converged},
            {"trace", trace}};
}

json to_json(const VerifyResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"name", row.name},
                        {"cases", row.cases},
                        {"max_residual", row.max_residual},
                        {"tolerance", row.tolerance},
                        {"max_ratio", row.max_ratio},
                        {"pass", row.pass}});
    return {{"pass", r.pass}, {"identities", rows}};
}

void write_outcome_csv(std::ostream& os, const MetrologyReport& r) {
    os << "outcome,probability,re_weak,im_weak,log_derivative\n";
    for (const auto& o : r.per_outcome) {
        os << o.index << ',';
        write_full_precision(os, o.probability);
        os << ',';
        if (o.weak_value) {
            write_full_precision(os, o.weak_value->real());
            os << ',';
            write_full_precision(os, o.weak_value->imag());
        } else {
            os << ',';
        }
        os << ',';
        if (o.log_derivative) write_full_precision(os, *o.log_derivative);
        os << '\n';
    }
}

void write_convergence_csv(std::ostream& os, const ConvergenceStudy& s) {
    os << "coupling,bias,std_error\n";
    for (const auto& p : s.points) {
        write_full_precision(os, p.coupling);
        os << ',';
        write_full_precision(os, p.bias);
        os << ',';
        write_full_precision(os, p.std_error);
        os << '\n';
    }
}

void print_metrology_table(std::ostream& os, const WeakValueProfile& p,
                           const MetrologyReport& r) {
    auto fmt = [](double x) {
        std::ostringstream ss;
        ss << std::setprecision(6) << x;
        return ss.str();
    };
    os << "outcome  probability   Re[A_w]       Im[A_w]       dln(p)/dphi\n";
    for (const auto& o : r.per_outcome) {
        os << std::setw(7) << o.index << "  " << std::setw(11) << fmt(o.probability) << "  ";
        if (o.weak_value) {
            os << std::setw(12) << fmt(o.weak_value->real()) << "  " << std::setw(12)
               << fmt(o.weak_value->imag()) << "  " << std::setw(12)
               << fmt(*o.log_derivative);
        } else {
            os << "   (undefined: vanishing probability)";
        }
        os << '\n';
    }
    os << "mean <A> = " << fmt(p.mean_a) << ", initial variance = " << fmt(p.var_in)
       << ", Tr{A^2 rho} = " << fmt(p.second_moment) << '\n';
    os << "fisher = " << fmt(r.fisher) << " rad^-2, est_variance = " << fmt(r.est_variance)
       << ", bound slack = " << fmt(r.bound_slack) << '\n';
    auto dphi = min_phase_error(r.fisher);
    os << "min phase error = " << (dphi ? fmt(*dphi) + " rad" : std::string("insensitive"))
       << '\n';
}

}  // namespace weakval
