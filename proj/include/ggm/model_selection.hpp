#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ggm/covariance.hpp"
#include "ggm/solvers.hpp"

namespace ggm {

// Held-out Gaussian log-likelihood score, up to constants:
//   log det K - tr(Sigma_test K).
// Only differences and orderings between scores are meaningful.
inline double gaussian_score(const Matrix& precision,
                             const CovarianceMatrix& test_cov) {
  if (precision.rows() != test_cov.order()) {
    throw DimensionMismatch("gaussian_score: order mismatch");
  }
  return log_det(precision) -
         (precision.array() * test_cov.matrix.array()).sum();
}

inline double gaussian_score(const Matrix& precision, const DataMatrix& test) {
  return gaussian_score(precision, sample_covariance(test));
}

// Fraction of the p(p-1)/2 possible off-diagonal pairs present in the
// support. The threshold is relative to the largest absolute entry.
inline double filling_factor(const Matrix& precision,
                             double zero_threshold = 1e-6) {
  const Eigen::Index p = precision.rows();
  if (p < 2) return 0.0;
  const double thr = zero_threshold * precision.cwiseAbs().maxCoeff();
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (std::abs(precision(i, j)) > thr) ++count;
    }
  }
  return static_cast<double>(count) /
         (static_cast<double>(p) * static_cast<double>(p - 1) / 2.0);
}

enum class Estimator {
  Mle,
  LedoitWolf,
  Ridge,
  L1,
  MlePooled,
  LedoitWolfPooled,
  RidgePooled,
  L1Pooled,
  L21,
};

inline const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Mle: return "mle";
    case Estimator::LedoitWolf: return "lw";
    case Estimator::Ridge: return "ridge";
    case Estimator::L1: return "l1";
    case Estimator::MlePooled: return "mle_pooled";
    case Estimator::LedoitWolfPooled: return "lw_pooled";
    case Estimator::RidgePooled: return "ridge_pooled";
    case Estimator::L1Pooled: return "l1_pooled";
    case Estimator::L21: return "l21";
  }
  return "?";
}

inline bool estimator_uses_lambda(Estimator e) {
  switch (e) {
    case Estimator::Ridge:
    case Estimator::L1:
    case Estimator::RidgePooled:
    case Estimator::L1Pooled:
    case Estimator::L21:
      return true;
    default:
      return false;
  }
}

inline bool estimator_is_pooled(Estimator e) {
  return e == Estimator::MlePooled || e == Estimator::LedoitWolfPooled ||
         e == Estimator::RidgePooled || e == Estimator::L1Pooled;
}

struct CVReport {
  std::string estimator_name;
  int subject = -1;
  std::vector<double> lambda_grid;  // descending
  Matrix per_fold_scores;           // folds x grid points
  double selected_lambda = 0.0;
  double generalization_score = -std::numeric_limits<double>::infinity();
  double filling_factor = 1.0;
  bool converged = true;
  std::string error;
  Matrix precision;  // refit model behind generalization_score
};

// Default lambda grid: `points` values, log-spaced downward from
// lambda_max over `decades` decades, descending.
inline std::vector<double> default_lambda_grid(double lmax, int points = 20,
                                               double decades = 3.0) {
  if (points < 1 || lmax <= 0.0) {
    throw InvalidInput("default_lambda_grid: need points >= 1, lmax > 0");
  }
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    const double frac =
        points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    grid[i] = lmax * std::pow(10.0, -decades * frac);
  }
  return grid;
}

struct SubjectSessions {
  DataMatrix train;
  DataMatrix test;
};

using SubjectCohort = std::vector<SubjectSessions>;

namespace detail {

struct SingleFit {
  Matrix precision;
  bool converged = true;
  double fill = 1.0;
};

// Fits one precision for a lambda-free or per-dataset estimator. For
// L21 pass the subject's covariance first and the population's after;
// the returned precision is the first subject's.
inline SingleFit fit_precision(Estimator est, const DataMatrix& train_data,
                               const std::vector<CovarianceMatrix>& covs,
                               double lambda, const PenaltyConfig& base,
                               std::vector<Matrix>* warm) {
  SingleFit out;
  switch (est) {
    case Estimator::Mle:
    case Estimator::MlePooled:
      out.precision = spd_inverse(covs.front().matrix);
      break;
    case Estimator::LedoitWolf:
    case Estimator::LedoitWolfPooled: {
      DataMatrix centered = train_data;
      centered.values.rowwise() -= centered.values.colwise().mean();
      out.precision = spd_inverse(ledoit_wolf(centered.values).covariance.matrix);
      break;
    }
    case Estimator::Ridge:
    case Estimator::RidgePooled:
      out.precision = ridge_precision(covs.front(), lambda);
      break;
    case Estimator::L1:
    case Estimator::L1Pooled:
    case Estimator::L21: {
      PenaltyConfig cfg = base;
      cfg.lambda = lambda;
      PenalizedFit fit = est == Estimator::L21
                             ? glasso_l21(covs, cfg, warm ? *warm : std::vector<Matrix>{})
                             : glasso_l1(covs.front(), cfg,
                                         warm ? *warm : std::vector<Matrix>{});
      if (warm) *warm = fit.precisions;
      out.converged = fit.converged;
      out.precision = fit.precisions.front();
      out.fill = filling_factor(out.precision);
      break;
    }
  }
  if (est == Estimator::Mle || est == Estimator::MlePooled ||
      est == Estimator::LedoitWolf || est == Estimator::LedoitWolfPooled ||
      est == Estimator::Ridge || est == Estimator::RidgePooled) {
    out.fill = filling_factor(out.precision);
  }
  return out;
}

inline DataMatrix take_rows(const DataMatrix& x, Eigen::Index begin,
                            Eigen::Index count) {
  return DataMatrix{x.values.middleRows(begin, count), x.variable_names};
}

inline DataMatrix drop_rows(const DataMatrix& x, Eigen::Index begin,
                            Eigen::Index count) {
  Matrix out(x.n() - count, x.p());
  out.topRows(begin) = x.values.topRows(begin);
  out.bottomRows(x.n() - begin - count) =
      x.values.bottomRows(x.n() - begin - count);
  return DataMatrix{std::move(out), x.variable_names};
}

inline DataMatrix vconcat(const std::vector<const DataMatrix*>& parts) {
  Eigen::Index total = 0;
  for (const auto* d : parts) total += d->n();
  Matrix out(total, parts.front()->p());
  Eigen::Index at = 0;
  for (const auto* d : parts) {
    out.middleRows(at, d->n()) = d->values;
    at += d->n();
  }
  return DataMatrix{std::move(out), parts.front()->variable_names};
}

}  // namespace detail

// Two-fold session cross-validation: for every lambda, fit on A and
// score on B and vice versa; the selected lambda maximizes the mean
// score, ties broken toward the larger (sparser) lambda. Sessions are
// detrended and standardized independently first unless
// preprocess_sessions is false.
inline CVReport two_fold_cv(const DataMatrix& session_a,
                            const DataMatrix& session_b, Estimator est,
                            std::vector<double> lambda_grid,
                            const PenaltyConfig& base = {},
                            bool preprocess_sessions = true) {
  if (lambda_grid.empty()) throw InvalidInput("two_fold_cv: empty grid");
  if (session_a.p() != session_b.p()) {
    throw DimensionMismatch("two_fold_cv: sessions differ in p");
  }
  std::sort(lambda_grid.begin(), lambda_grid.end(), std::greater<>());

  const DataMatrix a =
      preprocess_sessions ? preprocess(session_a, true, true) : session_a;
  const DataMatrix b =
      preprocess_sessions ? preprocess(session_b, true, true) : session_b;
  const CovarianceMatrix cov_a = sample_covariance(a);
  const CovarianceMatrix cov_b = sample_covariance(b);

  const int n_lambda = static_cast<int>(lambda_grid.size());
  CVReport report;
  report.estimator_name = estimator_name(est);
  report.lambda_grid = lambda_grid;
  report.per_fold_scores = Matrix::Constant(
      2, n_lambda, -std::numeric_limits<double>::infinity());

  std::vector<Matrix> warm_ab, warm_ba;
  Matrix fills = Matrix::Ones(2, n_lambda);
  const int effective = estimator_uses_lambda(est) ? n_lambda : 1;
  for (int li = 0; li < effective; ++li) {
    try {
      auto fit = detail::fit_precision(est, a, {cov_a}, lambda_grid[li], base,
                                       &warm_ab);
      report.per_fold_scores(0, li) = gaussian_score(fit.precision, cov_b);
      fills(0, li) = fit.fill;
    } catch (const std::exception&) {
    }
    try {
      auto fit = detail::fit_precision(est, b, {cov_b}, lambda_grid[li], base,
                                       &warm_ba);
      report.per_fold_scores(1, li) = gaussian_score(fit.precision, cov_a);
      fills(1, li) = fit.fill;
    } catch (const std::exception&) {
    }
  }
  if (!estimator_uses_lambda(est)) {
    for (int li = 1; li < n_lambda; ++li) {
      report.per_fold_scores.col(li) = report.per_fold_scores.col(0);
      fills.col(li) = fills.col(0);
    }
  }

  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int li = 0; li < n_lambda; ++li) {
    const double mean_score = report.per_fold_scores.col(li).mean();
    if (mean_score > best_score) {
      best_score = mean_score;
      best = li;  // grid is descending, so ties keep the larger lambda
    }
  }
  report.selected_lambda = lambda_grid[best];
  report.generalization_score = best_score;
  report.filling_factor = fills.col(best).mean();
  report.converged = std::isfinite(best_score);
  return report;
}

// Nested cross-validation over a cohort of per-subject session pairs.
// Outer split: train on session one, score on session two. The inner
// lambda search sees only training-side data: three contiguous blocks
// of the train session (time series, so blocks limit autocorrelation
// leakage), plus the other subjects' train sessions for pooled and L21
// modes. The final model is refit at the selected lambda and scored
// once on the untouched test session.
inline std::vector<CVReport> nested_cv_group(
    const SubjectCohort& cohort, Estimator est,
    std::vector<double> lambda_grid, const PenaltyConfig& base = {},
    int inner_folds = 3, bool preprocess_sessions = true) {
  if (cohort.empty()) throw InvalidInput("nested_cv_group: empty cohort");
  if (lambda_grid.empty()) throw InvalidInput("nested_cv_group: empty grid");
  if (inner_folds < 2) throw InvalidInput("nested_cv_group: inner_folds < 2");
  if ((estimator_is_pooled(est) || est == Estimator::L21) &&
      cohort.size() < 2 && est != Estimator::L21) {
    throw InvalidInput("nested_cv_group: pooled mode needs >= 2 subjects");
  }
  std::sort(lambda_grid.begin(), lambda_grid.end(), std::greater<>());
  const int n_lambda = static_cast<int>(lambda_grid.size());
  const int n_subjects = static_cast<int>(cohort.size());

  std::vector<DataMatrix> trains, tests;
  trains.reserve(n_subjects);
  tests.reserve(n_subjects);
  for (const auto& subj : cohort) {
    trains.push_back(preprocess_sessions ? preprocess(subj.train, true, true)
                                         : subj.train);
    tests.push_back(preprocess_sessions ? preprocess(subj.test, true, true)
                                        : subj.test);
  }
  std::vector<CovarianceMatrix> train_covs;
  train_covs.reserve(n_subjects);
  for (const auto& t : trains) train_covs.push_back(sample_covariance(t));

  const bool joint = est == Estimator::L21 && n_subjects > 1;
  const bool pooled = estimator_is_pooled(est);

  std::vector<CVReport> reports;
  for (int s0 = 0; s0 < n_subjects; ++s0) {
    CVReport report;
    report.estimator_name = estimator_name(est);
    report.subject = s0;
    report.lambda_grid = lambda_grid;
    report.per_fold_scores = Matrix::Constant(
        inner_folds, n_lambda, -std::numeric_limits<double>::infinity());

    const DataMatrix& train = trains[s0];
    const Eigen::Index n_train = train.n();
    const Eigen::Index block = n_train / inner_folds;

    for (int f = 0; f < inner_folds; ++f) {
      const Eigen::Index begin = f * block;
      const Eigen::Index count =
          f == inner_folds - 1 ? n_train - begin : block;
      const DataMatrix val = detail::take_rows(train, begin, count);
      const DataMatrix inner_train = detail::drop_rows(train, begin, count);
      const CovarianceMatrix cov_val = sample_covariance(val);

      DataMatrix fit_data = inner_train;
      std::vector<CovarianceMatrix> covs;
      if (pooled) {
        std::vector<const DataMatrix*> parts{&inner_train};
        for (int s = 0; s < n_subjects; ++s) {
          if (s != s0) parts.push_back(&trains[s]);
        }
        fit_data = detail::vconcat(parts);
        covs = {sample_covariance(fit_data)};
      } else if (joint) {
        covs.push_back(sample_covariance(inner_train));
        for (int s = 0; s < n_subjects; ++s) {
          if (s != s0) covs.push_back(train_covs[s]);
        }
      } else {
        covs = {sample_covariance(inner_train)};
      }

      std::vector<Matrix> warm;
      const int effective = estimator_uses_lambda(est) ? n_lambda : 1;
      for (int li = 0; li < effective; ++li) {
        try {
          auto fit = detail::fit_precision(est, fit_data, covs,
                                           lambda_grid[li], base, &warm);
          report.per_fold_scores(f, li) = gaussian_score(fit.precision, cov_val);
        } catch (const std::exception&) {
        }
      }
      if (!estimator_uses_lambda(est)) {
        for (int li = 1; li < n_lambda; ++li) {
          report.per_fold_scores(f, li) = report.per_fold_scores(f, 0);
        }
      }
    }

    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int li = 0; li < n_lambda; ++li) {
      const double mean_score = report.per_fold_scores.col(li).mean();
      if (mean_score > best_score) {
        best_score = mean_score;
        best = li;
      }
    }
    report.selected_lambda = lambda_grid[best];

    // Refit at the selected lambda on the full training side, then the
    // one and only read of the test session.
    try {
      DataMatrix fit_data = train;
      std::vector<CovarianceMatrix> covs;
      if (pooled) {
        std::vector<const DataMatrix*> parts{&trains[s0]};
        for (int s = 0; s < n_subjects; ++s) {
          if (s != s0) parts.push_back(&trains[s]);
        }
        fit_data = detail::vconcat(parts);
        covs = {sample_covariance(fit_data)};
      } else if (joint) {
        covs.push_back(train_covs[s0]);
        for (int s = 0; s < n_subjects; ++s) {
          if (s != s0) covs.push_back(train_covs[s]);
        }
      } else {
        covs = {train_covs[s0]};
      }
      auto fit = detail::fit_precision(est, fit_data, covs,
                                       report.selected_lambda, base, nullptr);
      report.generalization_score =
          gaussian_score(fit.precision, sample_covariance(tests[s0]));
      report.filling_factor = fit.fill;
      report.converged = fit.converged;
      report.precision = std::move(fit.precision);
    } catch (const std::exception& e) {
      report.converged = false;
      report.error = e.what();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace ggm
