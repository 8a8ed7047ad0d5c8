#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ggm/covariance.hpp"
#include "ggm/linalg.hpp"

namespace ggm {

enum class PenaltyMode { L1, L21 };

struct PenaltyConfig {
  double lambda = 0.1;          // regularization strength
  double smoothing_eps = 1e-8;  // floor for the majorization denominator
  int max_iterations = 500;     // full coordinate sweeps
  double gap_tolerance = -1.0;  // <= 0 means the default 1e-5 * p
  double zero_threshold = 1e-6; // relative hard-threshold for the support

  double effective_gap_tolerance(Eigen::Index p) const {
    return gap_tolerance > 0.0 ? gap_tolerance
                               : 1e-5 * static_cast<double>(p);
  }

  void validate() const {
    if (lambda <= 0.0) throw InvalidInput("PenaltyConfig: lambda must be > 0");
    if (smoothing_eps <= 0.0) {
      throw InvalidInput("PenaltyConfig: smoothing_eps must be > 0");
    }
    if (max_iterations < 1) {
      throw InvalidInput("PenaltyConfig: max_iterations must be >= 1");
    }
    if (zero_threshold < 0.0) {
      throw InvalidInput("PenaltyConfig: zero_threshold must be >= 0");
    }
  }
};

struct PenalizedFit {
  std::vector<Matrix> precisions;  // one per input covariance
  double objective = 0.0;
  double duality_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  // Shared off-diagonal support after hard thresholding, pairs i < j.
  std::vector<std::pair<int, int>> support;
};

namespace detail {

inline void check_cov_inputs(const std::vector<CovarianceMatrix>& covs) {
  if (covs.empty()) throw InvalidInput("solver: no input covariances");
  const Eigen::Index p = covs.front().order();
  for (const auto& c : covs) {
    require_symmetric(c.matrix, "solver input covariance", 1e-9);
    if (c.order() != p) {
      throw DimensionMismatch("solver: covariances differ in order");
    }
    if (c.matrix.diagonal().minCoeff() <= 0.0) {
      throw InvalidInput("solver: covariance has a non-positive diagonal");
    }
  }
}

// Group l2 norm of the off-diagonal pair {i,j} across subjects.
inline double group_norm(const std::vector<Matrix>& ks, Eigen::Index i,
                         Eigen::Index j) {
  double acc = 0.0;
  for (const auto& k : ks) acc += k(i, j) * k(i, j);
  return std::sqrt(acc);
}

// Exact minimizer of the 1-D restriction of the majorized objective to
// the symmetric pair update K -> K + delta * (e_i e_j^T + e_j e_i^T):
//   f(delta) = 2 s_ij delta - log g(delta) + c (t0 + delta)^2,
//   g(delta) = 1 + 2 w_ij delta + (w_ij^2 - w_ii w_jj) delta^2,
// where w_* are entries of the current inverse. g > 0 delimits the
// positive-definite interval; f is strictly convex there with f' going
// to -inf / +inf at the endpoints, so the safeguarded Newton iteration
// always has a bracketed root.
inline double offdiag_step(double s_ij, double w_ii, double w_jj, double w_ij,
                           double t0, double c) {
  const double a = w_ij * w_ij - w_ii * w_jj;  // < 0 for SPD inverse
  const double r = std::sqrt(w_ii * w_jj);
  double lo = (-w_ij + r) / a;
  double hi = (-w_ij - r) / a;
  const double span = hi - lo;
  lo += 1e-12 * span;
  hi -= 1e-12 * span;

  const auto fprime = [&](double d) {
    const double g = 1.0 + 2.0 * w_ij * d + a * d * d;
    const double gp = 2.0 * w_ij + 2.0 * a * d;
    return 2.0 * s_ij - gp / g + 2.0 * c * (t0 + d);
  };
  const auto fsecond = [&](double d) {
    const double g = 1.0 + 2.0 * w_ij * d + a * d * d;
    const double gp = 2.0 * w_ij + 2.0 * a * d;
    return (gp * gp - 2.0 * a * g) / (g * g) + 2.0 * c;
  };

  if (fprime(lo) >= 0.0) return lo;
  if (fprime(hi) <= 0.0) return hi;

  double x = 0.0;
  for (int it = 0; it < 128; ++it) {
    const double fp = fprime(x);
    if (fp > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double next = x - fp / fsecond(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-14 * (1.0 + std::abs(next))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

// Symmetric rank-two update of the inverse after
// K -> K + delta * (e_i e_j^T + e_j e_i^T) (Woodbury identity).
inline void rank2_inverse_update(Matrix& w, Eigen::Index i, Eigen::Index j,
                                 double delta) {
  const double w_ii = w(i, i);
  const double w_jj = w(j, j);
  const double w_ij = w(i, j);
  const double off = w_ij + 1.0 / delta;
  const double det = w_ii * w_jj - off * off;  // = -g(delta)/delta^2 != 0
  const double a11 = w_jj / det;
  const double a12 = -off / det;
  const double a22 = w_ii / det;
  const Vector u = w.col(i);
  const Vector v = w.col(j);
  w.noalias() -= a11 * (u * u.transpose());
  w.noalias() -= a22 * (v * v.transpose());
  w.noalias() -= a12 * (u * v.transpose() + v * u.transpose());
}

// Rank-one update of the inverse after K -> K + delta * e_i e_i^T.
inline void rank1_inverse_update(Matrix& w, Eigen::Index i, double delta) {
  const double scale = delta / (1.0 + delta * w(i, i));
  const Vector u = w.col(i);
  w.noalias() -= scale * (u * u.transpose());
}

}  // namespace detail

// Value of the primal objective
//   sum_s [ tr(K^s Sigma^s) - log det K^s ] + lambda sum_{i != j} ||K_ij||_2
// (the penalty runs over ordered pairs, i.e. each unordered pair twice,
// matching the printed problem; diagonals are unpenalized).
inline double primal_objective(const std::vector<CovarianceMatrix>& covs,
                               const std::vector<Matrix>& ks, double lambda) {
  const Eigen::Index p = covs.front().order();
  double value = 0.0;
  for (std::size_t s = 0; s < covs.size(); ++s) {
    value += (ks[s].array() * covs[s].matrix.array()).sum();
    value -= log_det(ks[s]);
  }
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      penalty += detail::group_norm(ks, i, j);
    }
  }
  return value + 2.0 * lambda * penalty;
}

// Duality gap at the candidate precisions. The dual point is built from
// W^s = (K^s)^{-1}: diagonals are reset to the covariance diagonal and
// off-diagonal deviations from the covariance are clipped (L1) or
// group-rescaled (L21) onto the dual-feasible set; the dual value is
// then sum_s [ p + log det W-hat^s ]. Infinity is returned when the
// projected dual point is not positive definite.
inline double duality_gap(const std::vector<CovarianceMatrix>& covs,
                          const std::vector<Matrix>& ks, double lambda,
                          PenaltyMode mode) {
  detail::check_cov_inputs(covs);
  const Eigen::Index p = covs.front().order();
  const std::size_t n_subj = covs.size();

  std::vector<Matrix> residuals(n_subj);
  for (std::size_t s = 0; s < n_subj; ++s) {
    residuals[s] = spd_inverse(ks[s]) - covs[s].matrix;
  }

  double dual = 0.0;
  for (std::size_t s = 0; s < n_subj; ++s) {
    Matrix w_hat = covs[s].matrix;
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        double r = residuals[s](i, j);
        if (mode == PenaltyMode::L1) {
          r = std::clamp(r, -lambda, lambda);
        } else {
          double gnorm = 0.0;
          for (std::size_t t = 0; t < n_subj; ++t) {
            gnorm += residuals[t](i, j) * residuals[t](i, j);
          }
          gnorm = std::sqrt(gnorm);
          if (gnorm > lambda) r *= lambda / gnorm;
        }
        w_hat(i, j) = covs[s].matrix(i, j) + r;
        w_hat(j, i) = w_hat(i, j);
      }
    }
    try {
      dual += static_cast<double>(p) + log_det(w_hat);
    } catch (const NotPositiveDefinite&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  const double gap = primal_objective(covs, ks, lambda) - dual;
  return std::max(gap, 0.0);
}

// Smallest lambda that makes the all-diagonal model optimal: the
// largest off-diagonal group norm of the input covariances.
inline double lambda_max(const std::vector<CovarianceMatrix>& covs) {
  detail::check_cov_inputs(covs);
  const Eigen::Index p = covs.front().order();
  double best = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      double acc = 0.0;
      for (const auto& c : covs) acc += c.matrix(i, j) * c.matrix(i, j);
      best = std::max(best, std::sqrt(acc));
    }
  }
  return best;
}

// Solver state across majorize-minimize sweeps. `inverses` tracks the
// exact inverse of each precision via low-rank updates and is refreshed
// from a full factorization at the start of every sweep.
struct MmState {
  std::vector<CovarianceMatrix> covs;
  std::vector<Matrix> precisions;
  std::vector<Matrix> inverses;
  PenaltyConfig cfg;

  Eigen::Index order() const { return covs.front().order(); }
  std::size_t subjects() const { return covs.size(); }
};

// One MM sweep: majorize the group penalty at the current iterate
// (per-pair weight = max(group norm, smoothing_eps), fixed for the
// sweep), then one pass of exact coordinate minimization over every
// diagonal and off-diagonal entry of every subject. Cost O(S p^3); the
// objective never increases.
inline void mm_iteration(MmState& state) {
  const Eigen::Index p = state.order();
  const std::size_t n_subj = state.subjects();
  const double lambda = state.cfg.lambda;

  for (std::size_t s = 0; s < n_subj; ++s) {
    state.inverses[s] = spd_inverse(state.precisions[s]);
  }

  // Majorization weights, fixed at the sweep-start iterate.
  Matrix weights = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      weights(i, j) = std::max(detail::group_norm(state.precisions, i, j),
                               state.cfg.smoothing_eps);
    }
  }

  // Diagonal pass; the diagonal is unpenalized so the exact coordinate
  // minimizer is closed form: K_ii such that (K^{-1})_ii = Sigma_ii.
  for (std::size_t s = 0; s < n_subj; ++s) {
    Matrix& k = state.precisions[s];
    Matrix& w = state.inverses[s];
    const Matrix& sigma = state.covs[s].matrix;
    for (Eigen::Index i = 0; i < p; ++i) {
      const double delta = 1.0 / sigma(i, i) - 1.0 / w(i, i);
      if (std::abs(delta) < 1e-16 * (1.0 + std::abs(k(i, i)))) continue;
      k(i, i) += delta;
      detail::rank1_inverse_update(w, i, delta);
    }
  }

  // Off-diagonal pass. Each pair is first tested for exact group
  // optimality at zero (the group-soft-threshold condition of the
  // unsmoothed objective); when it holds the whole group is snapped to
  // an exact zero, otherwise subjects decouple under the frozen weight
  // and take the smoothed coordinate step.
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      // Inverse entry (i,j) of the matrix with the pair zeroed, per
      // subject, via the rank-two Woodbury correction in its stable
      // (delta -> 0) parameterization. Feasibility of the zeroed matrix
      // requires g(delta) > 0.
      bool zero_feasible = true;
      double zero_grad_sq = 0.0;
      for (std::size_t s = 0; s < n_subj && zero_feasible; ++s) {
        const Matrix& w = state.inverses[s];
        const double d = -state.precisions[s](i, j);
        const double w_ii = w(i, i);
        const double w_jj = w(j, j);
        const double w_ij = w(i, j);
        const double g = (1.0 + d * w_ij) * (1.0 + d * w_ij) -
                         d * d * w_ii * w_jj;
        if (g <= 0.0) {
          zero_feasible = false;
          break;
        }
        const double a11 = -d * d * w_jj / g;
        const double a22 = -d * d * w_ii / g;
        const double a12 = d * (d * w_ij + 1.0) / g;
        const double w_zero =
            w_ij - a11 * w_ii * w_ij - a22 * w_ij * w_jj -
            a12 * (w_ii * w_jj + w_ij * w_ij);
        const double resid = state.covs[s].matrix(i, j) - w_zero;
        zero_grad_sq += resid * resid;
      }
      if (zero_feasible && std::sqrt(zero_grad_sq) <= lambda) {
        for (std::size_t s = 0; s < n_subj; ++s) {
          Matrix& k = state.precisions[s];
          const double t0 = k(i, j);
          if (t0 != 0.0) {
            if (std::abs(t0) > 1e-150) {
              detail::rank2_inverse_update(state.inverses[s], i, j, -t0);
            }
            k(i, j) = 0.0;
            k(j, i) = 0.0;
          }
        }
        continue;
      }

      const double c = lambda / weights(i, j);
      for (std::size_t s = 0; s < n_subj; ++s) {
        Matrix& k = state.precisions[s];
        Matrix& w = state.inverses[s];
        const double delta =
            detail::offdiag_step(state.covs[s].matrix(i, j), w(i, i), w(j, j),
                                 w(i, j), k(i, j), c);
        if (std::abs(delta) < 1e-16 * (1.0 + std::abs(k(i, j)))) continue;
        k(i, j) += delta;
        k(j, i) = k(i, j);
        detail::rank2_inverse_update(w, i, j, delta);
      }
    }
  }
}

namespace detail {

inline PenalizedFit solve_group(const std::vector<CovarianceMatrix>& covs,
                                const PenaltyConfig& cfg, PenaltyMode mode,
                                const std::vector<Matrix>& init) {
  cfg.validate();
  check_cov_inputs(covs);
  const Eigen::Index p = covs.front().order();
  const std::size_t n_subj = covs.size();
  const double gap_tol = cfg.effective_gap_tolerance(p);

  MmState state;
  state.covs = covs;
  state.cfg = cfg;
  state.precisions.resize(n_subj);
  state.inverses.resize(n_subj);
  if (!init.empty()) {
    if (init.size() != n_subj) {
      throw DimensionMismatch("solver: warm start count mismatch");
    }
    for (std::size_t s = 0; s < n_subj; ++s) {
      if (init[s].rows() != p || init[s].cols() != p) {
        throw DimensionMismatch("solver: warm start order mismatch");
      }
      state.precisions[s] = ((init[s] + init[s].transpose()) * 0.5).eval();
    }
  } else {
    for (std::size_t s = 0; s < n_subj; ++s) {
      const double lambda_init =
          1e-2 * covs[s].matrix.trace() / static_cast<double>(p);
      state.precisions[s] = ridge_precision(covs[s], lambda_init);
    }
  }
  for (std::size_t s = 0; s < n_subj; ++s) {
    state.inverses[s] = spd_inverse(state.precisions[s]);
  }

  PenalizedFit fit;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    mm_iteration(state);
    fit.iterations = it;
    fit.duality_gap = duality_gap(covs, state.precisions, cfg.lambda, mode);
    if (fit.duality_gap <= gap_tol) {
      fit.converged = true;
      break;
    }
  }
  fit.objective = primal_objective(covs, state.precisions, cfg.lambda);

  // Hard-threshold to a shared exact support: MM never produces exact
  // zeros, so groups below zero_threshold (relative to the largest
  // group norm) are jointly zeroed across subjects.
  // The scale includes the diagonal groups so that near-diagonal
  // solutions (where every off-diagonal is numerical noise) still land
  // on the exact empty support.
  double max_group = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      max_group = std::max(max_group, group_norm(state.precisions, i, j));
    }
  }
  const double threshold = cfg.zero_threshold * max_group;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (group_norm(state.precisions, i, j) <= threshold) {
        for (std::size_t s = 0; s < n_subj; ++s) {
          state.precisions[s](i, j) = 0.0;
          state.precisions[s](j, i) = 0.0;
        }
      } else {
        fit.support.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  fit.precisions = std::move(state.precisions);
  return fit;
}

}  // namespace detail

// l1-penalized precision estimation (off-diagonal penalty only).
inline PenalizedFit glasso_l1(const CovarianceMatrix& cov,
                              const PenaltyConfig& cfg,
                              const std::vector<Matrix>& init = {}) {
  return detail::solve_group({cov}, cfg, PenaltyMode::L1, init);
}

// Joint l21 (group-penalized) estimation over several covariances with
// a common sparsity support. With a single input this coincides with
// glasso_l1.
inline PenalizedFit glasso_l21(const std::vector<CovarianceMatrix>& covs,
                               const PenaltyConfig& cfg,
                               const std::vector<Matrix>& init = {}) {
  return detail::solve_group(covs, cfg, PenaltyMode::L21, init);
}

}  // namespace ggm
