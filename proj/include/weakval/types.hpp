#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace weakval {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Numerical tolerances shared by validation and the identity checks.
/// `prob` is the cutoff below which an outcome counts as zero-probability
/// and its weak value is undefined.
struct Tolerances {
    double herm = 1e-10;
    double norm = 1e-10;
    double psd = 1e-9;
    double prob = 1e-12;
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class InvalidOperator : public Error {
  public:
    using Error::Error;
};

class ParameterError : public Error {
  public:
    using Error::Error;
};

class ValidationError : public Error {
  public:
    ValidationError(std::string invariant, const std::string& what)
        : Error(what), invariant_(std::move(invariant)) {}
    const std::string& invariant() const { return invariant_; }

  private:
    std::string invariant_;
};

class UnsupportedForIdentity : public Error {
  public:
    using Error::Error;
};

class UnsupportedMode : public Error {
  public:
    using Error::Error;
};

class UndefinedWeakValue : public Error {
  public:
    using Error::Error;
};

class UndefinedLogDerivative : public Error {
  public:
    using Error::Error;
};

class StepTooLarge : public Error {
  public:
    using Error::Error;
};

class GridError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

/// Thrown by strict-mode operations when a built-in identity check fails.
class IdentityViolation : public Error {
  public:
    using Error::Error;
};

/// Whether an operation's built-in identity checks throw or are left to the
/// caller to inspect. Tests run strict; report generation records instead.
enum class CheckPolicy { Throw, Record };

/// Generator of the phase shift: a d x d complex Hermitian matrix.
struct HermitianOperator {
    Matrix mat;

    HermitianOperator() = default;
    explicit HermitianOperator(Matrix m) : mat(std::move(m)) {}

    Eigen::Index dim() const { return mat.rows(); }

    /// max |M[j,k] - conj(M[k,j])|
    double hermiticity_residual() const {
        return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
    }
};

/// Pure state vector or density matrix.
struct QuantumState {
    enum class Kind { Pure, Mixed };

    Kind kind = Kind::Pure;
    Vector psi;  // Pure only
    Matrix rho;  // Mixed only

    static QuantumState pure(Vector v) {
        QuantumState s;
        s.kind = Kind::Pure;
        s.psi = std::move(v);
        return s;
    }

    static QuantumState mixed(Matrix m) {
        QuantumState s;
        s.kind = Kind::Mixed;
        s.rho = std::move(m);
        return s;
    }

    bool is_pure() const { return kind == Kind::Pure; }

    Eigen::Index dim() const { return is_pure() ? psi.size() : rho.rows(); }

    Matrix density() const {
        return is_pure() ? Matrix(psi * psi.adjoint()) : rho;
    }
};

/// Projective basis (columns are the basis vectors) or a POVM given as a
/// list of effects.
struct Measurement {
    enum class Kind { ProjectiveBasis, Povm };

    Kind kind = Kind::ProjectiveBasis;
    Matrix basis;                 // ProjectiveBasis only; column m is |m>
    std::vector<Matrix> effects;  // Povm only

    static Measurement projective(Matrix b) {
        Measurement m;
        m.kind = Kind::ProjectiveBasis;
        m.basis = std::move(b);
        return m;
    }

    static Measurement povm(std::vector<Matrix> e) {
        Measurement m;
        m.kind = Kind::Povm;
        m.effects = std::move(e);
        return m;
    }

    bool is_projective() const { return kind == Kind::ProjectiveBasis; }

    Eigen::Index dim() const {
        return is_projective() ? basis.rows()
                               : (effects.empty() ? 0 : effects[0].rows());
    }

    Eigen::Index outcome_count() const {
        return is_projective() ? basis.cols()
                               : static_cast<Eigen::Index>(effects.size());
    }

    /// Effect operator for outcome m (rank-1 projector for a basis).
    Matrix effect(Eigen::Index m) const {
        if (is_projective()) return basis.col(m) * basis.col(m).adjoint();
        return effects.at(static_cast<std::size_t>(m));
    }
};

/// A complete estimation setup: input state, final measurement, generator,
/// and the working phase point (analysis happens at small shifts around it).
struct Scenario {
    QuantumState state;
    Measurement measurement;
    HermitianOperator generator;
    double phase = 0.0;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace weakval
