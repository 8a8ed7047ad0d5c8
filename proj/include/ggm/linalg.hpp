#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ggm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(const std::string& what)
      : std::runtime_error(what) {}
};

class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument(what) {}
};

class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what)
      : std::invalid_argument(what) {}
};

// Lower-triangular Cholesky factor L with L * L^T equal to the source
// matrix and strictly positive diagonal.
struct CholeskyFactor {
  Matrix lower;

  Eigen::Index order() const { return lower.rows(); }

  // log det of the factored matrix, computed in log space.
  double log_det() const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lower.rows(); ++i) {
      acc += std::log(lower(i, i));
    }
    return 2.0 * acc;
  }

  // Solves A x = b where A = L L^T.
  Vector solve(const Vector& b) const {
    Vector y = lower.triangularView<Eigen::Lower>().solve(b);
    return lower.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  Matrix solve(const Matrix& b) const {
    Matrix y = lower.triangularView<Eigen::Lower>().solve(b);
    return lower.transpose().triangularView<Eigen::Upper>().solve(y);
  }
};

// Dense lower Cholesky with breakdown detection. A pivot at or below
// 1e-12 times the largest diagonal entry of the input counts as
// breakdown and raises NotPositiveDefinite; this is the library's
// positive-definiteness test (no eigendecomposition involved).
inline CholeskyFactor cholesky(const Matrix& m) {
  const Eigen::Index p = m.rows();
  if (p < 1 || m.cols() != p) {
    throw InvalidInput("cholesky: matrix must be square with order >= 1");
  }
  const double pivot_floor = 1e-12 * m.diagonal().maxCoeff();
  Matrix lower = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > pivot_floor) || !std::isfinite(d)) {
      throw NotPositiveDefinite("cholesky: non-positive pivot at index " +
                                std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return CholeskyFactor{std::move(lower)};
}

inline bool is_spd(const Matrix& m) {
  try {
    cholesky(m);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

// Natural log of det(m) for SPD m. Determinants are never materialized
// outside log space.
inline double log_det(const Matrix& m) { return cholesky(m).log_det(); }

// Inverse of an SPD matrix through its Cholesky factor; the result is
// symmetrized exactly.
inline Matrix spd_inverse(const Matrix& m) {
  const CholeskyFactor f = cholesky(m);
  const Matrix identity = Matrix::Identity(m.rows(), m.rows());
  Matrix inv = f.solve(identity);
  inv = ((inv + inv.transpose()) * 0.5).eval();
  return inv;
}

inline void require_symmetric(const Matrix& m, const char* where,
                              double tol = 1e-12) {
  if (m.rows() != m.cols()) {
    throw InvalidInput(std::string(where) + ": matrix not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw InvalidInput(std::string(where) + ": matrix not symmetric");
  }
}

}  // namespace ggm
