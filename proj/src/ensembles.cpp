#include "weakval/ensembles.hpp"

#include <Eigen/QR>

namespace weakval {

namespace {

Matrix gaussian_matrix(int rows, int cols, RngStream& rng) {
    Matrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = rng.cnormal();
    return g;
}

void require_dim(int dim) {
    if (dim < 1) throw ParameterError("dimension must be >= 1");
}

}  // namespace

Vector haar_pure_state(int dim, RngStream& rng) {
    require_dim(dim);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.cnormal();
    return v / v.norm();
}

Matrix haar_basis(int dim, RngStream& rng) {
    require_dim(dim);
    Matrix g = gaussian_matrix(dim, dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fold the R diagonal phases into Q so the distribution is Haar.
    for (int j = 0; j < dim; ++j) {
        Complex rjj = r(j, j);
        Complex phase = std::abs(rjj) > 0 ? rjj / std::abs(rjj) : Complex(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

Matrix hs_density_matrix(int dim, int rank, RngStream& rng) {
    require_dim(dim);
    if (rank < 1 || rank > dim)
        throw ParameterError("density matrix rank must be in [1, dim]");
    Matrix g = gaussian_matrix(dim, rank, rng);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

std::vector<Matrix> noisy_povm(int dim, double visibility, RngStream& rng) {
    require_dim(dim);
    if (visibility < 0.0 || visibility > 1.0)
        throw ParameterError("visibility must be in [0, 1]");
    Matrix b = haar_basis(dim, rng);
    Matrix floor_term = (1.0 - visibility) / dim * Matrix::Identity(dim, dim);
    std::vector<Matrix> effects;
    effects.reserve(static_cast<std::size_t>(dim));
    for (int m = 0; m < dim; ++m)
        effects.push_back(visibility * (b.col(m) * b.col(m).adjoint()) + floor_term);
    return effects;
}

HermitianOperator random_generator(int dim, RngStream& rng) {
    require_dim(dim);
    Matrix g = gaussian_matrix(dim, dim, rng);
    Matrix h = (g + g.adjoint()) / (2.0 * std::sqrt(static_cast<double>(dim)));
    return HermitianOperator(std::move(h));
}

Vector haar_pure_state(int dim, std::uint64_t seed) {
    RngStream rng(seed);
    return haar_pure_state(dim, rng);
}

Matrix haar_basis(int dim, std::uint64_t seed) {
    RngStream rng(seed);
    return haar_basis(dim, rng);
}

Matrix hs_density_matrix(int dim, int rank, std::uint64_t seed) {
    RngStream rng(seed);
    return hs_density_matrix(dim, rank, rng);
}

std::vector<Matrix> noisy_povm(int dim, double visibility, std::uint64_t seed) {
    RngStream rng(seed);
    return noisy_povm(dim, visibility, rng);
}

Scenario random_scenario(int dim, StateFlavor sf, MeasurementFlavor mf, RngStream& rng) {
    Scenario s;
    if (sf == StateFlavor::Pure) {
        s.state = QuantumState::pure(haar_pure_state(dim, rng));
    } else {
        int rank = 1 + static_cast<int>(rng.uniform() * dim);
        rank = std::min(rank, dim);
        s.state = QuantumState::mixed(hs_density_matrix(dim, rank, rng));
    }
    if (mf == MeasurementFlavor::Projective) {
        s.measurement = Measurement::projective(haar_basis(dim, rng));
    } else {
        double v = 0.2 + 0.75 * rng.uniform();
        s.measurement = Measurement::povm(noisy_povm(dim, v, rng));
    }
    s.generator = random_generator(dim, rng);
    return s;
}

}  // namespace weakval
