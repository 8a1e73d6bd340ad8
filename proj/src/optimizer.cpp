#include "weakval/optimizer.hpp"

#include "weakval/ensembles.hpp"
#include "weakval/evolution.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace weakval {

namespace {

const Complex kI{0.0, 1.0};
constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Hermitian coordinate directions: d diagonal units, then for each pair
/// j < k a symmetric and an antisymmetric unit (orthonormal in the
/// Hilbert-Schmidt inner product).
struct Direction {
    enum class Kind { Diag, SymPair, AntiPair };
    Kind kind;
    Eigen::Index j, k;
};

std::vector<Direction> parameter_directions(Eigen::Index d) {
    std::vector<Direction> dirs;
    dirs.reserve(static_cast<std::size_t>(d * d));
    for (Eigen::Index j = 0; j < d; ++j) dirs.push_back({Direction::Kind::Diag, j, j});
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = j + 1; k < d; ++k) {
            dirs.push_back({Direction::Kind::SymPair, j, k});
            dirs.push_back({Direction::Kind::AntiPair, j, k});
        }
    return dirs;
}

/// B <- exp(-i theta E) B for a single coordinate direction, applied in
/// closed form (a phase or a 2x2 block rotation on two rows).
void apply_direction(Matrix& b, const Direction& dir, double theta) {
    if (dir.kind == Direction::Kind::Diag) {
        b.row(dir.j) *= std::polar(1.0, -theta);
        return;
    }
    double alpha = theta * kInvSqrt2;
    double c = std::cos(alpha);
    double s = std::sin(alpha);
    Eigen::RowVectorXcd row_j = b.row(dir.j);
    Eigen::RowVectorXcd row_k = b.row(dir.k);
    if (dir.kind == Direction::Kind::SymPair) {
        b.row(dir.j) = c * row_j - kI * s * row_k;
        b.row(dir.k) = -kI * s * row_j + c * row_k;
    } else {
        b.row(dir.j) = c * row_j - s * row_k;
        b.row(dir.k) = s * row_j + c * row_k;
    }
}

/// exp(-i H(theta)) B with H assembled from all coordinate directions.
Matrix apply_step(const Matrix& b, const std::vector<Direction>& dirs,
                  const Eigen::VectorXd& theta) {
    const Eigen::Index d = b.rows();
    Matrix h = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        double v = theta(static_cast<Eigen::Index>(i));
        const auto& dir = dirs[i];
        switch (dir.kind) {
            case Direction::Kind::Diag:
                h(dir.j, dir.j) += v;
                break;
            case Direction::Kind::SymPair:
                h(dir.j, dir.k) += v * kInvSqrt2;
                h(dir.k, dir.j) += v * kInvSqrt2;
                break;
            case Direction::Kind::AntiPair:
                h(dir.j, dir.k) += -kI * v * kInvSqrt2;
                h(dir.k, dir.j) += kI * v * kInvSqrt2;
                break;
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Vector phases = (-kI * es.eigenvalues().cast<Complex>().array()).exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * b;
}

/// Search objective: Fisher information with vanishing outcomes excluded.
class FisherObjective {
  public:
    FisherObjective(const QuantumState& state, const HermitianOperator& a,
                    const Tolerances& tol)
        : pure_(state.is_pure()), eps_(tol.prob) {
        if (pure_) {
            psi_ = state.psi;
            a_psi_ = a.mat * psi_;
        } else {
            rho_ = state.rho;
            a_rho_ = a.mat * rho_;
        }
    }

    double operator()(const Matrix& basis) const {
        const Eigen::Index d = basis.cols();
        double fisher = 0.0;
        if (pure_) {
            Vector s = basis.adjoint() * psi_;
            Vector t = basis.adjoint() * a_psi_;
            for (Eigen::Index m = 0; m < d; ++m) {
                double p = std::norm(s(m));
                if (p < eps_) continue;
                double im = (t(m) * std::conj(s(m))).imag();
                fisher += 4.0 * im * im / p;
            }
        } else {
            for (Eigen::Index m = 0; m < d; ++m) {
                Vector col = basis.col(m);
                double p = col.dot(rho_ * col).real();
                if (p < eps_) continue;
                double im = col.dot(a_rho_ * col).imag();
                fisher += 4.0 * im * im / p;
            }
        }
        return fisher;
    }

  private:
    bool pure_;
    double eps_;
    Vector psi_, a_psi_;
    Matrix rho_, a_rho_;
};

struct RestartResult {
    Matrix basis;
    double objective = 0.0;
    std::vector<TracePoint> trace;
    bool converged = false;
};

RestartResult run_restart(const FisherObjective& objective, Eigen::Index d, double ceiling,
                          const OptimizeOptions& opts, std::uint64_t substream_index) {
    RngStream rng = RngStream::substream(opts.seed, substream_index);
    RestartResult res;
    res.basis = haar_basis(static_cast<int>(d), rng);
    res.objective = objective(res.basis);
    res.trace.push_back({0, res.objective});

    const auto dirs = parameter_directions(d);
    Eigen::VectorXd grad(static_cast<Eigen::Index>(dirs.size()));
    double eta = opts.initial_step;

    for (int it = 1; it <= opts.max_iters; ++it) {
        if (ceiling - res.objective < opts.tol) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            Matrix plus = res.basis;
            apply_direction(plus, dirs[i], +opts.fd_step);
            Matrix minus = res.basis;
            apply_direction(minus, dirs[i], -opts.fd_step);
            grad(static_cast<Eigen::Index>(i)) =
                (objective(plus) - objective(minus)) / (2.0 * opts.fd_step);
        }
        if (grad.norm() < opts.tol) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        while (eta >= 1e-12) {
            Matrix candidate = apply_step(res.basis, dirs, eta * grad);
            double value = objective(candidate);
            if (value > res.objective) {
                res.basis = std::move(candidate);
                res.objective = value;
                res.trace.push_back({it, value});
                eta = std::min(eta * 1.5, 2.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break;  // stationary to within rounding
    }
    return res;
}

void gauge_fix(Matrix& basis) {
    for (Eigen::Index m = 0; m < basis.cols(); ++m) {
        Eigen::Index imax = 0;
        basis.col(m).cwiseAbs().maxCoeff(&imax);
        Complex z = basis(imax, m);
        if (std::abs(z) > 0) basis.col(m) *= std::conj(z) / std::abs(z);
    }
}

}  // namespace

OptimizationResult optimize_measurement(const QuantumState& state, const HermitianOperator& a,
                                        const OptimizeOptions& opts, const Tolerances& tol) {
    require_same_dim(state.dim(), a.dim(), "state vs generator");
    if (opts.restarts < 1 || opts.max_iters < 1)
        throw ParameterError("restarts and max_iters must be >= 1");

    const Eigen::Index d = a.dim();
    FisherObjective objective(state, a, tol);

    double mean, second;
    if (state.is_pure()) {
        mean = state.psi.dot(a.mat * state.psi).real();
        second = (a.mat * state.psi).squaredNorm();
    } else {
        mean = (a.mat * state.rho).trace().real();
        second = (a.mat * a.mat * state.rho).trace().real();
    }
    const double ceiling = 4.0 * (second - mean * mean);

    std::vector<RestartResult> restarts(static_cast<std::size_t>(opts.restarts));
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < opts.restarts; ++r)
        restarts[static_cast<std::size_t>(r)] =
            run_restart(objective, d, ceiling, opts, static_cast<std::uint64_t>(r));

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts.size(); ++r)
        if (restarts[r].objective > restarts[best].objective) best = r;

    OptimizationResult result;
    result.best_basis = restarts[best].basis;
    gauge_fix(result.best_basis);
    result.ceiling = ceiling;
    result.trace = std::move(restarts[best].trace);
    result.converged = restarts[best].converged;

    // Final score: limit-corrected for pure states, as-searched otherwise.
    Measurement final_meas = Measurement::projective(result.best_basis);
    result.best_fisher = state.is_pure()
                             ? fisher_information(state, final_meas, a,
                                                  ZeroProbMode::LimitCorrect, tol)
                             : restarts[best].objective;
    result.gap = result.ceiling - result.best_fisher;
    return result;
}

OptimalityCertificate certify_optimum(const QuantumState& state, const HermitianOperator& a,
                                      const Measurement& meas, const Tolerances& tol) {
    if (!state.is_pure())
        throw UnsupportedForIdentity("optimality certificate requires a pure state");

    OutcomeMoments mom = outcome_moments(state, meas, a, tol);
    double mean = state.psi.dot(a.mat * state.psi).real();
    double var = (a.mat * state.psi).squaredNorm() - mean * mean;

    OptimalityCertificate cert{0.0, 0.0};
    for (Eigen::Index m = 0; m < mom.prob.size(); ++m) {
        if (mom.prob(m) < tol.prob) continue;
        double re = mom.numer(m).real() / mom.prob(m);
        cert.re_deviation = std::max(cert.re_deviation, std::abs(re - mean));
    }
    cert.gap = 4.0 * var -
               fisher_information(state, meas, a, ZeroProbMode::LimitCorrect, tol);
    return cert;
}

}  // namespace weakval
