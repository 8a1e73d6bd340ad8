#pragma once

#include "weakval/types.hpp"

namespace weakval {

struct CheckItem {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct ValidationReport {
    std::vector<CheckItem> items;
    bool pass = true;

    const CheckItem* find(const std::string& name) const {
        for (const auto& it : items)
            if (it.name == name) return &it;
        return nullptr;
    }
};

/// Checks every structural invariant of the scenario and reports measured
/// residuals. Throws DimensionError if the component dimensions disagree;
/// all other violations are reported, not thrown.
ValidationReport validate(const Scenario& scenario, const Tolerances& tol = {});

ValidationReport validate_state(const QuantumState& state, const Tolerances& tol = {});
ValidationReport validate_measurement(const Measurement& meas, const Tolerances& tol = {});

}  // namespace weakval
