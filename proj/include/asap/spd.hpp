#pragma once

// Geometry of symmetric positive definite matrices under the affine-invariant
// metric: validation, distance, and the iterative geometric (Karcher) mean.

#include "asap/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace asap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultSpdTol = 1e-10;

class SpdMatrix;
SpdMatrix validate_spd(const Matrix& matrix, double tol = kDefaultSpdTol);

// Immutable SPD matrix. Only obtainable through validate_spd or through
// operations that preserve positive definiteness.
class SpdMatrix {
public:
  Eigen::Index order() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  static SpdMatrix identity(Eigen::Index order) { return SpdMatrix(Matrix::Identity(order, order)); }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) {
    return a.order() == b.order() && a.m_ == b.m_;
  }

private:
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {}

  friend SpdMatrix validate_spd(const Matrix&, double);
  friend struct detail_access;

  Matrix m_;
};

// Internal constructor for results that are SPD by construction (e.g. V exp(D) V^T).
struct detail_access {
  static SpdMatrix make(Matrix m) {
    Matrix sym = 0.5 * (m + m.transpose());
    return SpdMatrix(std::move(sym));
  }
};

inline SpdMatrix validate_spd(const Matrix& matrix, double tol) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorCode::NotSquare, "matrix is " + std::to_string(matrix.rows()) + "x" +
                                          std::to_string(matrix.cols()));
  }
  if (!matrix.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");

  const double scale = matrix.cwiseAbs().maxCoeff();
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * std::max(scale, std::numeric_limits<double>::min())) {
    throw Error(ErrorCode::NotSymmetric, "relative asymmetry " + std::to_string(asym / scale));
  }

  Matrix sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double floor = tol * sym.trace() / static_cast<double>(sym.rows());
  if (!(min_eig > floor) || !(min_eig > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "minimum eigenvalue " + std::to_string(min_eig) + " <= " + std::to_string(floor));
  }
  return SpdMatrix(std::move(sym));
}

namespace spd {

// Applies f to the eigenvalues of a symmetric matrix: V f(D) V^T.
template <typename F>
Matrix eigen_apply(const Matrix& sym, F&& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector d = eig.eigenvalues().unaryExpr(std::forward<F>(f));
  Matrix out = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline Matrix sqrtm(const Matrix& sym) {
  return eigen_apply(sym, [](double x) { return std::sqrt(x); });
}
inline Matrix invsqrtm(const Matrix& sym) {
  return eigen_apply(sym, [](double x) { return 1.0 / std::sqrt(x); });
}
inline Matrix logm(const Matrix& sym) {
  return eigen_apply(sym, [](double x) { return std::log(x); });
}
inline Matrix expm(const Matrix& sym) {
  return eigen_apply(sym, [](double x) { return std::exp(x); });
}

// B' = A^{-1/2} B A^{-1/2}, symmetrized.
inline Matrix whiten(const Matrix& a_invsqrt, const Matrix& b) {
  Matrix w = a_invsqrt * b * a_invsqrt;
  return 0.5 * (w + w.transpose());
}

}  // namespace spd

inline void require_same_order(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.order() != b.order()) {
    throw Error(ErrorCode::DimensionMismatch,
                "orders " + std::to_string(a.order()) + " and " + std::to_string(b.order()));
  }
}

// Squared affine-invariant distance: sum of log^2 of the eigenvalues of A^{-1/2} B A^{-1/2}.
inline double affine_distance_sq(const SpdMatrix& a, const SpdMatrix& b) {
  require_same_order(a, b);
  if (a == b) return 0.0;
  const Matrix w = spd::whiten(spd::invsqrtm(a.matrix()), b.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().array().log().square().sum();
}

inline double affine_distance(const SpdMatrix& a, const SpdMatrix& b) {
  return std::sqrt(affine_distance_sq(a, b));
}

// Log map at `base`, expressed in the whitened frame: log(base^{-1/2} x base^{-1/2}).
inline Matrix whitened_log(const Matrix& base_invsqrt, const SpdMatrix& x) {
  return spd::logm(spd::whiten(base_invsqrt, x.matrix()));
}

struct KarcherOptions {
  double tol = 1e-8;
  int max_iter = 50;
};

struct KarcherResult {
  SpdMatrix mean;
  int iterations = 0;
  // Frobenius norm of the mean whitened log at `mean`.
  double gradient_norm = 0.0;
  bool converged = false;
};

class KarcherNoConvergence : public Error {
public:
  explicit KarcherNoConvergence(KarcherResult best)
      : Error(ErrorCode::NoConvergence,
              "gradient norm " + std::to_string(best.gradient_norm) + " after " +
                  std::to_string(best.iterations) + " iterations"),
        best_(std::move(best)) {}

  const KarcherResult& best() const noexcept { return best_; }

private:
  KarcherResult best_;
};

// Fixed-point gradient iteration. The estimate starts at the arithmetic mean;
// each step maps the samples to the tangent space at the current estimate,
// averages them and maps back with unit step, halving the step whenever the
// sum of squared distances would increase. Never throws on non-convergence;
// inspect `converged`.
inline KarcherResult karcher_mean_detailed(std::span<const SpdMatrix> samples,
                                           const KarcherOptions& opt = {}) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples for Karcher mean");
  if (!(opt.tol > 0.0) || opt.max_iter < 1) throw Error(ErrorCode::BadArgument, "bad Karcher options");
  const Eigen::Index n = samples.front().order();
  for (const auto& s : samples) require_same_order(samples.front(), s);

  const double inv_count = 1.0 / static_cast<double>(samples.size());

  auto tangent_mean = [&](const Matrix& invsqrt) {
    Matrix t = Matrix::Zero(n, n);
    for (const auto& s : samples) t += whitened_log(invsqrt, s);
    return Matrix(t * inv_count);
  };
  auto objective = [&](const Matrix& invsqrt) {
    double j = 0.0;
    for (const auto& s : samples) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(spd::whiten(invsqrt, s.matrix()), Eigen::EigenvaluesOnly);
      j += eig.eigenvalues().array().log().square().sum();
    }
    return j;
  };

  Matrix mean = Matrix::Zero(n, n);
  for (const auto& s : samples) mean += s.matrix();
  mean *= inv_count;

  Matrix invsqrt = spd::invsqrtm(mean);
  Matrix grad = tangent_mean(invsqrt);
  double grad_norm = grad.norm();
  double obj = objective(invsqrt);
  double step = 1.0;
  int iter = 0;

  while (grad_norm > opt.tol && iter < opt.max_iter) {
    ++iter;
    const Matrix sqrt_mean = spd::sqrtm(mean);
    Matrix candidate;
    Matrix cand_invsqrt;
    double cand_obj = 0.0;
    for (int halving = 0;; ++halving) {
      candidate = sqrt_mean * spd::expm(step * grad) * sqrt_mean;
      candidate = 0.5 * (candidate + candidate.transpose());
      cand_invsqrt = spd::invsqrtm(candidate);
      cand_obj = objective(cand_invsqrt);
      // Relative slack absorbs rounding once the objective has flattened out.
      if (cand_obj <= obj * (1.0 + 1e-12) || halving >= 30) break;
      step *= 0.5;
    }
    mean = std::move(candidate);
    invsqrt = std::move(cand_invsqrt);
    obj = cand_obj;
    grad = tangent_mean(invsqrt);
    grad_norm = grad.norm();
    step = std::min(1.0, 2.0 * step);
  }

  return KarcherResult{detail_access::make(std::move(mean)), iter, grad_norm, grad_norm <= opt.tol};
}

inline SpdMatrix karcher_mean(std::span<const SpdMatrix> samples, const KarcherOptions& opt = {}) {
  // A single sample, or a set of identical samples, is its own mean.
  bool all_equal = !samples.empty();
  for (const auto& s : samples) {
    if (!(s == samples.front())) {
      all_equal = false;
      break;
    }
  }
  if (all_equal) return samples.front();

  KarcherResult result = karcher_mean_detailed(samples, opt);
  if (!result.converged) throw KarcherNoConvergence(std::move(result));
  return std::move(result.mean);
}

}  // namespace asap
