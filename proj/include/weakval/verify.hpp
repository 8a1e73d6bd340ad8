#pragma once

#include "weakval/types.hpp"

#include <cstdint>
#include <iosfwd>

namespace weakval {

/// One row of the randomized verification matrix: an identity checked over
/// every applicable trial, with the worst residual relative to its
/// tolerance. For the finite-difference row the tolerance adapts to the
/// weak-value magnitude (the oracle's truncation error grows as |A_w|^3),
/// so `max_residual` is reported alongside `max_ratio` = residual/tolerance.
struct IdentityRow {
    std::string name;
    long cases = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;  // tolerance at the worst case
    double max_ratio = 0.0;
    bool pass = true;
};

struct VerifyOptions {
    std::vector<int> dims = {2, 3, 4};
    int trials = 200;
    std::uint64_t seed = 0;
    bool parallel = true;
};

struct VerifyResult {
    std::vector<IdentityRow> rows;
    bool pass = true;
};

/// Runs every identity over `trials` random scenarios (flavors cycle
/// through pure/mixed x projective/POVM, dimensions cycle through `dims`).
/// Trials draw from per-index substreams and may run concurrently; the
/// aggregation order is by trial index.
VerifyResult run_verification(const VerifyOptions& opts);

void print_verify_matrix(std::ostream& os, const VerifyResult& r);

}  // namespace weakval
