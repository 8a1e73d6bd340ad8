#pragma once

#include "weakval/meter_sim.hpp"
#include "weakval/metrology.hpp"
#include "weakval/operator_split.hpp"
#include "weakval/optimizer.hpp"
#include "weakval/validate.hpp"
#include "weakval/verify.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <iosfwd>

namespace weakval {

/// Scenario document: JSON with keys
///   dimension   integer
///   state       {"type": "pure"|"mixed", "data": vector | matrix}
///   measurement {"type": "basis"|"povm", "data": [vector...] | [matrix...]}
///   generator   matrix
///   phase       number, optional (default 0)
/// Complex numbers are two-element arrays [re, im]; a matrix is a list of
/// rows. parse_scenario validates the result and throws ParseError (with
/// key context) or ValidationError (naming the violated invariant).
Scenario parse_scenario(const std::filesystem::path& path, const Tolerances& tol = {});
Scenario scenario_from_json(const nlohmann::json& doc, const Tolerances& tol = {});
nlohmann::json scenario_to_json(const Scenario& s);

nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const WeakValueProfile& p);
nlohmann::json to_json(const MetrologyReport& r, const Tolerances& tol = {});
nlohmann::json to_json(const OperatorSplit& s);
nlohmann::json to_json(const MeterReadout& r);
nlohmann::json to_json(const ConvergenceStudy& s);
nlohmann::json to_json(const OptimizationResult& r);
nlohmann::json to_json(const VerifyResult& r);

/// Per-outcome table, header `outcome,probability,re_weak,im_weak,log_derivative`.
/// Undefined entries are left empty. Numbers are full precision.
void write_outcome_csv(std::ostream& os, const MetrologyReport& r);
void write_convergence_csv(std::ostream& os, const ConvergenceStudy& s);

/// Human-readable rendering of the same numbers (display rounded; the JSON
/// document is the machine record).
void print_metrology_table(std::ostream& os, const WeakValueProfile& p,
                           const MetrologyReport& r);

}  // namespace weakval
