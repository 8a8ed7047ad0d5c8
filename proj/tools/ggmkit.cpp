// ggmkit command-line front end: fit / cv / communities / integrate /
// simulate. See README.md for file formats and the report schema.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ggm/ggm.hpp"

namespace fs = std::filesystem;
using namespace ggm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitDimension = 3;
constexpr int kExitNotConverged = 4;
constexpr int kExitNumerical = 5;

struct CommonOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = ".";
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seed", opts.seed, "Random seed (all randomness derives from it)");
  cmd->add_option("--threads", opts.threads, "Worker thread budget");
  cmd->add_option("--output-dir", opts.output_dir, "Directory for output files");
}

// Every report opens with the same reproducibility block: version,
// echoed configuration, and input digests.
void write_preamble(io::ReportWriter& report, const std::string& command,
                    const CommonOptions& common,
                    const std::map<std::string, std::string>& config,
                    const std::vector<fs::path>& inputs) {
  report.section("run");
  report.field("artifact", std::string("ggmkit ") + kVersion);
  report.field("command", command);
  report.field("seed", static_cast<long long>(common.seed));
  report.field("threads", static_cast<long long>(common.threads));
  report.section("config");
  for (const auto& [key, value] : config) report.field(key, value);
  report.section("inputs");
  for (const auto& path : inputs) {
    report.field(path.filename().string(), io::file_digest(path));
  }
}

Estimator parse_estimator(const std::string& name) {
  static const std::map<std::string, Estimator> table = {
      {"mle", Estimator::Mle},
      {"lw", Estimator::LedoitWolf},
      {"ridge", Estimator::Ridge},
      {"l1", Estimator::L1},
      {"mle_pooled", Estimator::MlePooled},
      {"lw_pooled", Estimator::LedoitWolfPooled},
      {"ridge_pooled", Estimator::RidgePooled},
      {"l1_pooled", Estimator::L1Pooled},
      {"l21", Estimator::L21},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw InvalidInput("unknown estimator '" + name + "'");
  return it->second;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Singleton partition fallback for edgeless support graphs (fully
// diagonal precisions).
CommunityPartition singleton_partition(int nodes) {
  CommunityPartition part;
  part.labels.resize(nodes);
  for (int i = 0; i < nodes; ++i) part.labels[i] = i;
  part.k = nodes;
  part.modularity = 0.0;
  return part;
}

struct FitArgs {
  CommonOptions common;
  std::string estimator = "l1";
  double lambda = -1.0;
  int max_iterations = 500;
  double gap_tolerance = -1.0;
  bool no_detrend = false;
  bool no_standardize = false;
  std::vector<std::string> inputs;
};

int run_fit(const FitArgs& args) {
  const Estimator est = parse_estimator(args.estimator);
  if (estimator_is_pooled(est)) {
    throw InvalidInput("fit: pooled estimators are a cv-only mode");
  }
  const bool needs_lambda =
      est == Estimator::Ridge || est == Estimator::L1 || est == Estimator::L21;
  if (needs_lambda && args.lambda <= 0.0) {
    throw InvalidInput("fit: --lambda > 0 required for estimator " +
                       args.estimator);
  }

  std::vector<fs::path> paths(args.inputs.begin(), args.inputs.end());
  std::vector<DataMatrix> data;
  std::vector<CovarianceMatrix> covs;
  for (const auto& path : paths) {
    DataMatrix raw{io::read_csv_matrix(path), {}};
    const fs::path sidecar = fs::path(path).replace_extension(".labels");
    if (fs::exists(sidecar)) raw.variable_names = io::read_labels(sidecar);
    data.push_back(preprocess(raw, !args.no_detrend, !args.no_standardize));
  }
  for (std::size_t i = 1; i < data.size(); ++i) {
    if (data[i].p() != data[0].p()) {
      throw DimensionMismatch("fit: input " + paths[i].string() +
                              " has p=" + std::to_string(data[i].p()) +
                              ", expected " + std::to_string(data[0].p()));
    }
  }
  for (const auto& d : data) covs.push_back(sample_covariance(d));

  PenaltyConfig cfg;
  cfg.lambda = needs_lambda ? args.lambda : 1.0;
  cfg.max_iterations = args.max_iterations;
  cfg.gap_tolerance = args.gap_tolerance;

  io::ReportWriter report;
  write_preamble(report, "fit", args.common,
                 {{"estimator", args.estimator},
                  {"lambda", io::format_double(args.lambda)},
                  {"max_iterations", std::to_string(args.max_iterations)},
                  {"gap_tolerance", io::format_double(args.gap_tolerance)},
                  {"detrend", args.no_detrend ? "false" : "true"},
                  {"standardize", args.no_standardize ? "false" : "true"}},
                 paths);

  const fs::path out_dir(args.common.output_dir);
  fs::create_directories(out_dir);

  bool all_converged = true;
  std::vector<std::vector<std::string>> rows;
  auto emit = [&](std::size_t input_idx, const Matrix& precision,
                  double objective, double gap, int iterations,
                  bool converged) {
    const std::string stem = paths[input_idx].stem().string();
    const fs::path out = out_dir / ("precision_" + stem + ".csv");
    io::write_csv_matrix(out, precision);
    rows.push_back({stem, io::format_double(objective),
                    io::format_double(gap), std::to_string(iterations),
                    io::format_double(filling_factor(precision)),
                    converged ? "yes" : "no", out.filename().string()});
    all_converged = all_converged && converged;
  };

  try {
    switch (est) {
      case Estimator::Mle:
        for (std::size_t i = 0; i < covs.size(); ++i) {
          try {
            emit(i, spd_inverse(covs[i].matrix), 0.0, 0.0, 0, true);
          } catch (const NotPositiveDefinite&) {
            throw NotPositiveDefinite(
                "fit: sample covariance of " + paths[i].string() +
                " is singular (n < p?); mle needs an invertible covariance");
          }
        }
        break;
      case Estimator::LedoitWolf:
        for (std::size_t i = 0; i < covs.size(); ++i) {
          DataMatrix centered = data[i];
          centered.values.rowwise() -= centered.values.colwise().mean();
          const auto lw = ledoit_wolf(centered.values);
          emit(i, spd_inverse(lw.covariance.matrix), lw.shrinkage, 0.0, 0,
               true);
        }
        break;
      case Estimator::Ridge:
        for (std::size_t i = 0; i < covs.size(); ++i) {
          emit(i, ridge_precision(covs[i], args.lambda), 0.0, 0.0, 0, true);
        }
        break;
      case Estimator::L1:
        for (std::size_t i = 0; i < covs.size(); ++i) {
          const PenalizedFit fit = glasso_l1(covs[i], cfg);
          emit(i, fit.precisions[0], fit.objective, fit.duality_gap,
               fit.iterations, fit.converged);
        }
        break;
      case Estimator::L21: {
        const PenalizedFit fit = glasso_l21(covs, cfg);
        for (std::size_t i = 0; i < covs.size(); ++i) {
          emit(i, fit.precisions[i], fit.objective, fit.duality_gap,
               fit.iterations, fit.converged);
        }
        break;
      }
      default:
        break;
    }
  } catch (...) {
    report.section("result");
    report.field("status", std::string("failed"));
    report.write(out_dir / "fit_report.txt");
    throw;
  }

  report.section("result");
  report.field("status",
               std::string(all_converged ? "converged" : "not_converged"));
  report.table("fits",
               {"input", "objective", "duality_gap", "iterations",
                "filling_factor", "converged", "precision_file"},
               rows);
  report.write(out_dir / "fit_report.txt");
  return all_converged ? kExitOk : kExitNotConverged;
}

struct SimulateArgs {
  CommonOptions common;
  int subjects = 5;
  int variables = 20;
  int samples = 40;
  double density = 0.1;
  double jitter = 0.3;
};

int run_simulate(const SimulateArgs& args) {
  CohortSpec spec;
  spec.subjects = args.subjects;
  spec.variables = args.variables;
  spec.samples_per_session = args.samples;
  spec.support_density = args.density;
  spec.coefficient_jitter = args.jitter;
  spec.seed = args.common.seed;
  const SyntheticCohort cohort = generate_cohort(spec);

  const fs::path out_dir(args.common.output_dir);
  fs::create_directories(out_dir);

  io::Manifest manifest;
  manifest.header["subjects"] = std::to_string(spec.subjects);
  manifest.header["variables"] = std::to_string(spec.variables);
  manifest.header["samples_per_session"] =
      std::to_string(spec.samples_per_session);
  manifest.header["support_density"] = io::format_double(spec.support_density);
  manifest.header["coefficient_jitter"] =
      io::format_double(spec.coefficient_jitter);
  manifest.header["seed"] = std::to_string(spec.seed);

  for (int s = 0; s < spec.subjects; ++s) {
    char tag[16];
    std::snprintf(tag, sizeof(tag), "%02d", s);
    const std::string train = std::string("subject") + tag + "_session1.csv";
    const std::string test = std::string("subject") + tag + "_session2.csv";
    const std::string truth = std::string("truth") + tag + ".csv";
    io::write_csv_matrix(out_dir / train, cohort.sessions[s].train.values);
    io::write_csv_matrix(out_dir / test, cohort.sessions[s].test.values);
    io::write_csv_matrix(out_dir / truth, cohort.true_precisions[s]);
    manifest.subjects.push_back({train, test, truth});
  }
  io::atomic_write(out_dir / "manifest.txt", io::manifest_text(manifest));
  return kExitOk;
}

struct CvArgs {
  CommonOptions common;
  std::string manifest_path;
  std::string estimators = "mle,lw,ridge,l1,l21";
  int grid_points = 20;
  double grid_decades = 3.0;
  int inner_folds = 3;
  int max_iterations = 500;
  double gap_tolerance = -1.0;
  int k_max = 10;
  int restarts = 10;
};

int run_cv(const CvArgs& args) {
  if (args.grid_points < 1) throw InvalidInput("cv: empty lambda grid");
  const auto estimator_names = split_csv_list(args.estimators);
  if (estimator_names.empty()) throw InvalidInput("cv: no estimators");

  const fs::path manifest_path(args.manifest_path);
  const io::Manifest manifest = io::read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();

  SubjectCohort cohort;
  std::vector<fs::path> inputs{manifest_path};
  for (const auto& entry : manifest.subjects) {
    SubjectSessions subj;
    subj.train = DataMatrix{io::read_csv_matrix(base / entry.train_path), {}};
    subj.test = DataMatrix{io::read_csv_matrix(base / entry.test_path), {}};
    inputs.push_back(base / entry.train_path);
    inputs.push_back(base / entry.test_path);
    cohort.push_back(std::move(subj));
  }
  for (std::size_t s = 1; s < cohort.size(); ++s) {
    if (cohort[s].train.p() != cohort[0].train.p() ||
        cohort[s].test.p() != cohort[0].train.p()) {
      throw DimensionMismatch("cv: subject " + std::to_string(s) +
                              " has inconsistent variable count");
    }
  }

  PenaltyConfig base_cfg;
  base_cfg.max_iterations = args.max_iterations;
  base_cfg.gap_tolerance = args.gap_tolerance;

  // Lambda grids hang off the largest off-diagonal (group) norm of the
  // preprocessed training covariances.
  std::vector<CovarianceMatrix> train_covs;
  for (const auto& subj : cohort) {
    train_covs.push_back(sample_covariance(preprocess(subj.train, true, true)));
  }
  double lmax_single = 0.0;
  for (const auto& c : train_covs) lmax_single = std::max(lmax_single, lambda_max({c}));
  const double lmax_group = lambda_max(train_covs);

  const fs::path out_dir(args.common.output_dir);
  fs::create_directories(out_dir);

  io::ReportWriter summary;
  write_preamble(summary, "cv", args.common,
                 {{"estimators", args.estimators},
                  {"grid_points", std::to_string(args.grid_points)},
                  {"grid_decades", io::format_double(args.grid_decades)},
                  {"inner_folds", std::to_string(args.inner_folds)},
                  {"k_max", std::to_string(args.k_max)},
                  {"restarts", std::to_string(args.restarts)}},
                 inputs);

  std::vector<std::vector<std::string>> summary_rows;
  for (const auto& name : estimator_names) {
    const Estimator est = parse_estimator(name);
    if (est == Estimator::L21 && cohort.size() == 1) {
      std::cerr << "warning: l21 with a single subject behaves as l1\n";
    }
    const double lmax = est == Estimator::L21 ? lmax_group : lmax_single;
    const std::vector<double> grid =
        default_lambda_grid(lmax, args.grid_points, args.grid_decades);

    const std::vector<CVReport> reports =
        nested_cv_group(cohort, est, grid, base_cfg, args.inner_folds);

    double mean_score = 0.0, mean_fill = 0.0, mean_k = 0.0, mean_q = 0.0;
    int scored = 0;
    for (const auto& report : reports) {
      io::ReportWriter doc;
      write_preamble(doc, "cv", args.common,
                     {{"estimator", name},
                      {"subject", std::to_string(report.subject)}},
                     inputs);
      doc.section("selection");
      doc.field("selected_lambda", report.selected_lambda);
      doc.field("generalization_score", report.generalization_score);
      doc.field("filling_factor", report.filling_factor);
      doc.field("converged", std::string(report.converged ? "yes" : "no"));
      if (!report.error.empty()) doc.field("error", report.error);
      std::vector<std::vector<std::string>> score_rows;
      for (Eigen::Index f = 0; f < report.per_fold_scores.rows(); ++f) {
        std::vector<std::string> row{std::to_string(f)};
        for (Eigen::Index c = 0; c < report.per_fold_scores.cols(); ++c) {
          row.push_back(io::format_double(report.per_fold_scores(f, c)));
        }
        score_rows.push_back(std::move(row));
      }
      std::vector<std::string> cols{"fold"};
      for (double l : report.lambda_grid) cols.push_back(io::format_double(l));
      doc.table("inner_scores", cols, score_rows);
      char tag[16];
      std::snprintf(tag, sizeof(tag), "%02d", report.subject);
      doc.write(out_dir / ("cv_" + name + "_subject" + tag + ".txt"));

      if (!report.converged && report.precision.size() == 0) continue;
      ++scored;
      mean_score += report.generalization_score;
      mean_fill += report.filling_factor;
      const WeightedGraph g =
          support_graph(report.precision, WeightKind::BinarySupport);
      CommunityPartition part =
          g.edges.empty()
              ? singleton_partition(g.nodes)
              : detect_communities(g, args.k_max, args.restarts,
                                   args.common.seed);
      mean_k += part.k;
      mean_q += part.modularity;
    }
    if (scored > 0) {
      mean_score /= scored;
      mean_fill /= scored;
      mean_k /= scored;
      mean_q /= scored;
    }
    summary_rows.push_back({name, io::format_double(mean_score),
                            io::format_double(mean_fill),
                            io::format_double(mean_k),
                            io::format_double(mean_q),
                            std::to_string(scored)});
  }
  summary.section("summary");
  summary.table("estimators",
                {"estimator", "mean_generalization_score",
                 "mean_filling_factor", "mean_communities",
                 "mean_modularity", "subjects_scored"},
                summary_rows);
  summary.write(out_dir / "cv_summary.txt");
  return kExitOk;
}

struct CommunitiesArgs {
  CommonOptions common;
  std::string precision_path;
  std::string labels_path;
  int k_max = 10;
  int restarts = 10;
  std::string weight_kind = "binary";
  double zero_threshold = 1e-6;
};

int run_communities(const CommunitiesArgs& args) {
  const fs::path path(args.precision_path);
  const Matrix precision = io::read_csv_matrix(path);
  if (precision.rows() != precision.cols()) {
    throw DimensionMismatch("communities: precision matrix is not square");
  }
  std::vector<std::string> labels;
  if (!args.labels_path.empty()) {
    labels = io::read_labels(args.labels_path);
    if (static_cast<Eigen::Index>(labels.size()) != precision.rows()) {
      throw DimensionMismatch("communities: label count != matrix order");
    }
  }
  WeightKind kind;
  if (args.weight_kind == "binary") {
    kind = WeightKind::BinarySupport;
  } else if (args.weight_kind == "abspcorr") {
    kind = WeightKind::AbsPartialCorrelation;
  } else {
    throw InvalidInput("communities: weight kind must be binary or abspcorr");
  }

  const WeightedGraph g =
      support_graph(precision, kind, args.zero_threshold, labels);
  const CommunityPartition part =
      g.edges.empty() ? singleton_partition(g.nodes)
                      : detect_communities(g, args.k_max, args.restarts,
                                           args.common.seed);

  const fs::path out_dir(args.common.output_dir);
  fs::create_directories(out_dir);
  io::atomic_write(out_dir / "partition.tsv", to_partition_text(part, labels));
  io::atomic_write(out_dir / "graph_edges.tsv", to_edge_list(g));
  io::atomic_write(out_dir / "graph.dot", to_dot(g));

  io::ReportWriter report;
  write_preamble(report, "communities", args.common,
                 {{"k_max", std::to_string(args.k_max)},
                  {"restarts", std::to_string(args.restarts)},
                  {"weight_kind", args.weight_kind},
                  {"zero_threshold", io::format_double(args.zero_threshold)}},
                 {path});
  report.section("result");
  report.field("communities", static_cast<long long>(part.k));
  report.field("modularity", part.modularity);
  report.field("edges", static_cast<long long>(g.edges.size()));
  report.field("filling_factor", filling_factor(precision, args.zero_threshold));
  report.write(out_dir / "communities_report.txt");
  return kExitOk;
}

struct IntegrateArgs {
  CommonOptions common;
  std::string precision_path;
  std::string partition_path;
};

int run_integrate(const IntegrateArgs& args) {
  const fs::path precision_path(args.precision_path);
  const fs::path partition_path(args.partition_path);
  const Matrix precision = io::read_csv_matrix(precision_path);
  if (precision.rows() != precision.cols()) {
    throw DimensionMismatch("integrate: precision matrix is not square");
  }

  // Partition file: node <TAB> community_id, one line per node.
  CommunityPartition part;
  {
    std::istringstream in(io::read_file(partition_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw ParseError(partition_path.string() + ":" +
                         std::to_string(line_no) + ": expected node<TAB>id");
      }
      part.labels.push_back(std::stoi(line.substr(tab + 1)));
    }
  }
  if (static_cast<Eigen::Index>(part.labels.size()) != precision.rows()) {
    throw DimensionMismatch("integrate: partition covers " +
                            std::to_string(part.labels.size()) +
                            " nodes, precision has " +
                            std::to_string(precision.rows()));
  }
  part.k = *std::max_element(part.labels.begin(), part.labels.end()) + 1;

  const IntegrationGraph graph = integration_graph(precision, part);

  const fs::path out_dir(args.common.output_dir);
  fs::create_directories(out_dir);
  {
    std::ostringstream nodes;
    for (int c = 0; c < part.k; ++c) {
      nodes << c << '\t' << io::format_double(graph.node_integration[c])
            << '\n';
    }
    io::atomic_write(out_dir / "integration_nodes.tsv", nodes.str());
  }
  {
    std::ostringstream edges;
    for (const auto& e : graph.edges) {
      edges << e.c1 << '\t' << e.c2 << '\t'
            << io::format_double(e.mutual_information) << '\n';
    }
    io::atomic_write(out_dir / "integration_edges.tsv", edges.str());
  }
  {
    std::ostringstream dot;
    dot << "graph integration {\n";
    for (int c = 0; c < part.k; ++c) {
      dot << "  " << c << " [integration="
          << io::format_double(graph.node_integration[c]) << "];\n";
    }
    for (const auto& e : graph.edges) {
      dot << "  " << e.c1 << " -- " << e.c2 << " [mutual_information="
          << io::format_double(e.mutual_information) << "];\n";
    }
    dot << "}\n";
    io::atomic_write(out_dir / "integration_graph.dot", dot.str());
  }

  io::ReportWriter report;
  write_preamble(report, "integrate", args.common, {},
                 {precision_path, partition_path});
  report.section("result");
  report.field("communities", static_cast<long long>(part.k));
  report.field("integration_edges", static_cast<long long>(graph.edges.size()));
  report.write(out_dir / "integrate_report.txt");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Gaussian graphical model estimation and analysis"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Estimate precision matrices from data files");
  add_common(fit_cmd, fit_args.common);
  fit_cmd->add_option("--estimator", fit_args.estimator,
                      "mle | lw | ridge | l1 | l21");
  fit_cmd->add_option("--lambda", fit_args.lambda, "Regularization strength");
  fit_cmd->add_option("--max-iter", fit_args.max_iterations, "Sweep budget");
  fit_cmd->add_option("--gap-tol", fit_args.gap_tolerance,
                      "Duality-gap tolerance (default 1e-5 * p)");
  fit_cmd->add_flag("--no-detrend", fit_args.no_detrend, "Skip detrending");
  fit_cmd->add_flag("--no-standardize", fit_args.no_standardize,
                    "Skip variance normalization");
  fit_cmd->add_option("inputs", fit_args.inputs, "Data CSV files")
      ->required()
      ->expected(-1);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Generate a synthetic cohort with ground truth");
  add_common(sim_cmd, sim_args.common);
  sim_cmd->add_option("--subjects", sim_args.subjects, "Subject count");
  sim_cmd->add_option("--variables", sim_args.variables, "Variable count");
  sim_cmd->add_option("--samples", sim_args.samples, "Samples per session");
  sim_cmd->add_option("--density", sim_args.density, "Support density");
  sim_cmd->add_option("--jitter", sim_args.jitter, "Coefficient jitter");

  CvArgs cv_args;
  auto* cv_cmd = app.add_subcommand(
      "cv", "Nested cross-validation over a cohort manifest");
  add_common(cv_cmd, cv_args.common);
  cv_cmd->add_option("--manifest", cv_args.manifest_path, "Cohort manifest")
      ->required();
  cv_cmd->add_option("--estimators", cv_args.estimators,
                     "Comma list from mle,lw,ridge,l1,mle_pooled,lw_pooled,"
                     "ridge_pooled,l1_pooled,l21");
  cv_cmd->add_option("--grid-points", cv_args.grid_points, "Lambda grid size");
  cv_cmd->add_option("--grid-decades", cv_args.grid_decades,
                     "Lambda grid span in decades");
  cv_cmd->add_option("--inner-folds", cv_args.inner_folds,
                     "Contiguous inner folds");
  cv_cmd->add_option("--max-iter", cv_args.max_iterations, "Sweep budget");
  cv_cmd->add_option("--gap-tol", cv_args.gap_tolerance,
                     "Duality-gap tolerance");
  cv_cmd->add_option("--k-max", cv_args.k_max, "Community search bound");
  cv_cmd->add_option("--restarts", cv_args.restarts, "k-means restarts");

  CommunitiesArgs com_args;
  auto* com_cmd = app.add_subcommand(
      "communities", "Detect communities of a precision support graph");
  add_common(com_cmd, com_args.common);
  com_cmd->add_option("--precision", com_args.precision_path,
                      "Precision matrix CSV")
      ->required();
  com_cmd->add_option("--labels", com_args.labels_path, "Node label file");
  com_cmd->add_option("--k-max", com_args.k_max, "Community search bound");
  com_cmd->add_option("--restarts", com_args.restarts, "k-means restarts");
  com_cmd->add_option("--weight-kind", com_args.weight_kind,
                      "binary | abspcorr");
  com_cmd->add_option("--zero-threshold", com_args.zero_threshold,
                      "Relative support threshold");

  IntegrateArgs int_args;
  auto* int_cmd = app.add_subcommand(
      "integrate", "Integration / mutual-information graph of communities");
  add_common(int_cmd, int_args.common);
  int_cmd->add_option("--precision", int_args.precision_path,
                      "Precision matrix CSV")
      ->required();
  int_cmd->add_option("--partition", int_args.partition_path,
                      "Partition TSV from `communities`")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (cv_cmd->parsed()) return run_cv(cv_args);
    if (com_cmd->parsed()) return run_communities(com_args);
    if (int_cmd->parsed()) return run_integrate(int_args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
