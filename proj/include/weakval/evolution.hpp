#pragma once

#include "weakval/types.hpp"

namespace weakval {

/// Spectral decomposition of a Hermitian generator, reused to apply
/// exp(-i phi A) for many phase values without re-diagonalizing.
class PhasePropagator {
  public:
    PhasePropagator(const HermitianOperator& a, const Tolerances& tol = {});

    Eigen::Index dim() const { return evecs_.rows(); }
    const Eigen::VectorXd& eigenvalues() const { return evals_; }
    const Matrix& eigenvectors() const { return evecs_; }

    /// exp(-i phi A) as a dense matrix.
    Matrix matrix(double phi) const;

    Vector apply(const Vector& psi, double phi) const;
    Matrix apply_density(const Matrix& rho, double phi) const;

  private:
    Eigen::VectorXd evals_;
    Matrix evecs_;
};

/// exp(-i phi A) computed by spectral decomposition.
Matrix phase_unitary(const HermitianOperator& a, double phi, const Tolerances& tol = {});

/// U psi (pure) or U rho U^dag (mixed), U = exp(-i phi A).
QuantumState evolve(const QuantumState& state, const HermitianOperator& a, double phi,
                    const Tolerances& tol = {});

/// p(m; phi) for every outcome. Values within tolerance of [0,1] are
/// clamped; values farther out raise ValidationError.
RealVector outcome_probabilities(const QuantumState& state, const Measurement& meas,
                                 const HermitianOperator& a, double phi,
                                 const Tolerances& tol = {});

}  // namespace weakval
