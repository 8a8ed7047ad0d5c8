#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "ggm/covariance.hpp"
#include "ggm/linalg.hpp"
#include "ggm/model_selection.hpp"
#include "ggm/rng.hpp"

namespace ggm {

class InvalidSpec : public std::invalid_argument {
 public:
  explicit InvalidSpec(const std::string& what)
      : std::invalid_argument(what) {}
};

struct CohortSpec {
  int subjects = 5;
  int variables = 20;
  int samples_per_session = 40;
  double support_density = 0.1;        // fraction of possible edges
  double coefficient_jitter = 0.3;     // per-subject multiplicative noise
  std::uint64_t seed = 0;

  void validate() const {
    if (subjects < 1) throw InvalidSpec("CohortSpec: subjects < 1");
    if (variables < 2) throw InvalidSpec("CohortSpec: variables < 2");
    if (samples_per_session < 2) throw InvalidSpec("CohortSpec: n < 2");
    if (support_density <= 0.0 || support_density > 1.0) {
      throw InvalidSpec("CohortSpec: density must be in (0, 1]");
    }
    if (coefficient_jitter < 0.0) throw InvalidSpec("CohortSpec: jitter < 0");
    const double max_edges =
        variables * (variables - 1) / 2.0;
    if (support_density * max_edges < 1.0) {
      throw InvalidSpec("CohortSpec: density too low for any edge");
    }
  }
};

struct SyntheticCohort {
  std::vector<Matrix> true_precisions;  // one per subject
  SubjectCohort sessions;               // two sessions per subject
  std::vector<std::pair<int, int>> support;  // shared, pairs i < j
};

// Draws n rows i.i.d. N(0, K^{-1}) by solving L^T z = eps with L the
// Cholesky factor of K and eps standard normal; deterministic per rng
// state.
inline Matrix gaussian_sample(const Matrix& precision, int n, Rng& rng) {
  const CholeskyFactor factor = cholesky(precision);
  const Eigen::Index p = precision.rows();
  Matrix out(n, p);
  Vector eps(p);
  for (int r = 0; r < n; ++r) {
    for (Eigen::Index i = 0; i < p; ++i) eps(i) = rng.normal();
    out.row(r) = factor.lower.transpose()
                     .triangularView<Eigen::Upper>()
                     .solve(eps)
                     .transpose();
  }
  return out;
}

inline DataMatrix gaussian_sampler(const Matrix& precision, int n,
                                   std::uint64_t seed) {
  Rng rng(seed);
  return DataMatrix{gaussian_sample(precision, n, rng), {}};
}

// Ground-truth cohort: a shared random support, per-subject jittered
// coefficients, SPD projection by diagonal dominance, rescaling so the
// implied covariance has unit diagonal, then two sessions of Gaussian
// samples per subject.
inline SyntheticCohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int p = spec.variables;

  // Shared support: a deterministic shuffle of all pairs.
  std::vector<std::pair<int, int>> all_pairs;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) all_pairs.emplace_back(i, j);
  }
  for (std::size_t i = all_pairs.size(); i > 1; --i) {
    std::swap(all_pairs[i - 1], all_pairs[rng.below(i)]);
  }
  const auto n_edges = static_cast<std::size_t>(
      spec.support_density * static_cast<double>(all_pairs.size()) + 0.5);
  std::vector<std::pair<int, int>> support(
      all_pairs.begin(), all_pairs.begin() + std::max<std::size_t>(n_edges, 1));
  std::sort(support.begin(), support.end());

  // Base coefficients: uniform magnitude in [0.2, 0.6], random sign.
  std::vector<double> base(support.size());
  for (auto& b : base) {
    const double magnitude = rng.uniform(0.2, 0.6);
    b = rng.uniform01() < 0.5 ? -magnitude : magnitude;
  }

  SyntheticCohort out;
  out.support = support;
  for (int s = 0; s < spec.subjects; ++s) {
    Matrix k = Matrix::Zero(p, p);
    for (std::size_t e = 0; e < support.size(); ++e) {
      // Multiplicative jitter, clamped so the sign never flips.
      const double u = rng.uniform(-1.0, 1.0);
      const double factor =
          std::max(1.0 + spec.coefficient_jitter * u, 0.05);
      const auto [i, j] = support[e];
      k(i, j) = base[e] * factor;
      k(j, i) = k(i, j);
    }
    // SPD by diagonal dominance; preserves the planted support.
    for (int i = 0; i < p; ++i) {
      k(i, i) = k.row(i).cwiseAbs().sum() + 0.1;
    }
    // Rescale so the implied covariance has unit diagonal.
    const Matrix cov = spd_inverse(k);
    const Vector scale = cov.diagonal().cwiseSqrt();
    k = (scale.asDiagonal() * k * scale.asDiagonal()).eval();
    k = ((k + k.transpose()) * 0.5).eval();
    out.true_precisions.push_back(k);
  }
  for (int s = 0; s < spec.subjects; ++s) {
    SubjectSessions sessions;
    sessions.train = DataMatrix{
        gaussian_sample(out.true_precisions[s], spec.samples_per_session, rng),
        {}};
    sessions.test = DataMatrix{
        gaussian_sample(out.true_precisions[s], spec.samples_per_session, rng),
        {}};
    out.sessions.push_back(std::move(sessions));
  }
  return out;
}

}  // namespace ggm
