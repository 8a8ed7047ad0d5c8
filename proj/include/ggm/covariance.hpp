#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ggm/linalg.hpp"

namespace ggm {

class ZeroVariance : public std::runtime_error {
 public:
  explicit ZeroVariance(const std::string& what) : std::runtime_error(what) {}
};

// Samples-by-variables data, rows are observations.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> variable_names;  // optional, empty or size p

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }

  void validate() const {
    if (n() < 2 || p() < 1) {
      throw InvalidInput("DataMatrix: need n >= 2 and p >= 1");
    }
    if (!values.allFinite()) {
      throw InvalidInput("DataMatrix: non-finite values");
    }
    if (!variable_names.empty() &&
        static_cast<Eigen::Index>(variable_names.size()) != p()) {
      throw InvalidInput("DataMatrix: label count does not match p");
    }
  }
};

struct CovarianceMatrix {
  Matrix matrix;
  Eigen::Index n_samples = 0;

  Eigen::Index order() const { return matrix.rows(); }
};

// Detrend (per-column least-squares line in sample index) and/or
// standardize (center, unit population variance), in that order.
inline DataMatrix preprocess(const DataMatrix& x, bool detrend,
                             bool standardize) {
  x.validate();
  const Eigen::Index n = x.n();
  const Eigen::Index p = x.p();
  if (detrend && n < 3) {
    throw InvalidInput("preprocess: detrend needs n >= 3");
  }
  Matrix v = x.values;
  if (detrend) {
    // Regress each column on t = 0..n-1 and subtract the fitted line.
    Vector t = Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1));
    const double t_mean = t.mean();
    Vector tc = t.array() - t_mean;
    const double stt = tc.squaredNorm();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double y_mean = v.col(j).mean();
      const double slope = tc.dot(v.col(j)) / stt;
      v.col(j).array() -= y_mean + slope * tc.array();
    }
  }
  if (standardize) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = v.col(j).mean();
      v.col(j).array() -= mean;
      const double var = v.col(j).squaredNorm() / static_cast<double>(n);
      if (var <= 1e-30) {
        throw ZeroVariance("preprocess: column " + std::to_string(j) +
                           " has zero variance");
      }
      v.col(j) /= std::sqrt(var);
    }
  }
  return DataMatrix{std::move(v), x.variable_names};
}

// Sample covariance (1/n) X^T X. Columns are centered first unless
// assume_centered is set.
inline CovarianceMatrix sample_covariance(const DataMatrix& x,
                                          bool assume_centered = false) {
  x.validate();
  Matrix v = x.values;
  if (!assume_centered) {
    v.rowwise() -= v.colwise().mean();
  }
  Matrix cov = (v.transpose() * v) / static_cast<double>(x.n());
  cov = ((cov + cov.transpose()) * 0.5).eval();
  return CovarianceMatrix{std::move(cov), x.n()};
}

// Ridge (squared-l2) precision: inverse of the covariance plus lambda
// on the diagonal. lambda = 0 is the plain SPD inverse and fails on
// singular covariances.
inline Matrix ridge_precision(const CovarianceMatrix& cov, double lambda) {
  if (lambda < 0.0) throw InvalidInput("ridge_precision: lambda < 0");
  Matrix shifted = cov.matrix;
  shifted.diagonal().array() += lambda;
  return spd_inverse(shifted);
}

struct LedoitWolfResult {
  CovarianceMatrix covariance;
  double shrinkage = 0.0;  // rho in [0, 1]
};

// Ledoit-Wolf well-conditioned estimator: (1 - rho) * S + rho * mu * I
// with target scale mu = trace(S)/p and analytic intensity
// rho = min(d2, b2bar) / d2, where d2 = ||S - mu I||_F^2 and
// b2bar = (1/n^2) sum_t ||x_t x_t^T - S||_F^2. Input rows are treated
// as centered.
inline LedoitWolfResult ledoit_wolf(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 1 || p < 1) throw InvalidInput("ledoit_wolf: empty input");
  Matrix s = (x.transpose() * x) / static_cast<double>(n);
  s = ((s + s.transpose()) * 0.5).eval();
  const double mu = s.trace() / static_cast<double>(p);
  Matrix centered_target = s;
  centered_target.diagonal().array() -= mu;
  const double d2 = centered_target.squaredNorm();

  double b2bar = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Vector row = x.row(t).transpose();
    b2bar += (row * row.transpose() - s).squaredNorm();
  }
  b2bar /= static_cast<double>(n) * static_cast<double>(n);

  const double b2 = std::min(b2bar, d2);
  const double rho = d2 > 0.0 ? b2 / d2 : 0.0;

  Matrix shrunk = (1.0 - rho) * s;
  shrunk.diagonal().array() += rho * mu;
  return LedoitWolfResult{CovarianceMatrix{std::move(shrunk), n}, rho};
}

inline LedoitWolfResult ledoit_wolf(const DataMatrix& x) {
  x.validate();
  return ledoit_wolf(x.values);
}

}  // namespace ggm
