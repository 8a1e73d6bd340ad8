#pragma once

#include "weakval/rng.hpp"
#include "weakval/types.hpp"

namespace weakval {

/// Normalized complex-Gaussian vector (Haar on the unit sphere).
Vector haar_pure_state(int dim, RngStream& rng);

/// Haar-random orthonormal basis: QR of a complex-Gaussian matrix with the
/// R diagonal phases folded into Q.
Matrix haar_basis(int dim, RngStream& rng);

/// G G^dag / Tr{G G^dag} with G a dim x rank complex-Gaussian matrix
/// (Hilbert-Schmidt ensemble on rank-limited density matrices).
Matrix hs_density_matrix(int dim, int rank, RngStream& rng);

/// Haar basis projectors mixed with white noise:
/// Pi_m = v |m><m| + (1-v) I/d. Completeness is exact for any v.
std::vector<Matrix> noisy_povm(int dim, double visibility, RngStream& rng);

/// GUE-style Hermitian matrix scaled to O(1) spectral norm, used to draw
/// test generators.
HermitianOperator random_generator(int dim, RngStream& rng);

// Seeded one-shot conveniences.
Vector haar_pure_state(int dim, std::uint64_t seed);
Matrix haar_basis(int dim, std::uint64_t seed);
Matrix hs_density_matrix(int dim, int rank, std::uint64_t seed);
std::vector<Matrix> noisy_povm(int dim, double visibility, std::uint64_t seed);

enum class StateFlavor { Pure, Mixed };
enum class MeasurementFlavor { Projective, Povm };

/// Random scenario at phase 0 for the verification sweeps. Mixed states are
/// HS-random with a random rank in [1, dim]; POVMs are noisy with a random
/// visibility in [0.2, 0.95].
Scenario random_scenario(int dim, StateFlavor sf, MeasurementFlavor mf, RngStream& rng);

}  // namespace weakval
