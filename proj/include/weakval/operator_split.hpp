#pragma once

#include "weakval/weak_values.hpp"

namespace weakval {

struct SubspaceDimensions {
    int generators;   // d(d-1)/2
    int observables;  // d(d+1)/2
};

/// Dimension counts of the two operator subspaces a preparation-measurement
/// pair induces: antisymmetric generators of visible phase shifts and
/// symmetric observables the measurement is insensitive to.
SubspaceDimensions subspace_dimensions(int d);

/// A = S + K relative to (psi, basis): in the phase-adjusted basis the
/// matrix of S is real symmetric and the matrix of K purely imaginary
/// antisymmetric. K carries all of the phase sensitivity, S none.
struct OperatorSplit {
    HermitianOperator symmetric_part;  // S
    HermitianOperator generator_part;  // K
    GammaBasis basis;
    bool degenerate = false;  // some outcome had vanishing overlap
};

/// Requires a pure state and a projective basis. If some <m|psi> vanishes
/// the split is still computed with phase convention 1 and flagged.
OperatorSplit split_operator(const QuantumState& state, const Measurement& meas,
                             const HermitianOperator& a, const Tolerances& tol = {});

/// True iff no outcome responds to phase shifts generated by A:
/// every defined weak value is real (|Im| <= 1e-9) and every
/// zero-probability outcome has |<m|(A - <A>)|psi>| <= 1e-9.
bool is_measurement_insensitive(const QuantumState& state, const Measurement& meas,
                                const HermitianOperator& a, const Tolerances& tol = {});

}  // namespace weakval
