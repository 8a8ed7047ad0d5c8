#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ggm/linalg.hpp"
#include "ggm/rng.hpp"

namespace ggm {

class EmptyGraph : public std::runtime_error {
 public:
  explicit EmptyGraph(const std::string& what) : std::runtime_error(what) {}
};

class EmptySubset : public std::invalid_argument {
 public:
  explicit EmptySubset(const std::string& what)
      : std::invalid_argument(what) {}
};

class OverlappingSubsets : public std::invalid_argument {
 public:
  explicit OverlappingSubsets(const std::string& what)
      : std::invalid_argument(what) {}
};

enum class WeightKind { BinarySupport, AbsPartialCorrelation };

struct GraphEdge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

struct WeightedGraph {
  int nodes = 0;
  std::vector<GraphEdge> edges;  // i < j, weight > 0, no self-loops
  WeightKind weight_kind = WeightKind::BinarySupport;
  std::vector<std::string> labels;  // optional

  Matrix adjacency() const {
    Matrix a = Matrix::Zero(nodes, nodes);
    for (const auto& e : edges) {
      a(e.i, e.j) = e.weight;
      a(e.j, e.i) = e.weight;
    }
    return a;
  }
};

struct CommunityPartition {
  std::vector<int> labels;  // node -> community id in 0..k-1
  int k = 0;
  double modularity = 0.0;
};

struct IntegrationEdge {
  int c1 = 0;
  int c2 = 0;
  double mutual_information = 0.0;
};

struct IntegrationGraph {
  std::vector<double> node_integration;  // per community, nats
  std::vector<IntegrationEdge> edges;
};

// Partial correlations R_ij = -K_ij / sqrt(K_ii K_jj), unit diagonal.
inline Matrix partial_correlations(const Matrix& precision) {
  require_symmetric(precision, "partial_correlations", 1e-9);
  const Eigen::Index p = precision.rows();
  Matrix r = Matrix::Identity(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j) {
        r(i, j) = -precision(i, j) /
                  std::sqrt(precision(i, i) * precision(j, j));
      }
    }
  }
  return r;
}

// Support graph of a precision matrix: one edge per off-diagonal pair
// above the (relative) zero threshold.
inline WeightedGraph support_graph(const Matrix& precision, WeightKind kind,
                                   double zero_threshold = 1e-6,
                                   std::vector<std::string> labels = {}) {
  const Eigen::Index p = precision.rows();
  const double thr = zero_threshold * precision.cwiseAbs().maxCoeff();
  WeightedGraph g;
  g.nodes = static_cast<int>(p);
  g.weight_kind = kind;
  g.labels = std::move(labels);
  Matrix pc;
  if (kind == WeightKind::AbsPartialCorrelation) {
    pc = partial_correlations(precision);
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (std::abs(precision(i, j)) > thr) {
        const double w = kind == WeightKind::BinarySupport
                             ? 1.0
                             : std::abs(pc(i, j));
        if (w > 0.0) {
          g.edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
        }
      }
    }
  }
  return g;
}

// Newman-Girvan modularity Q = sum_c (e_cc - a_c^2), with weights
// treated as generalized edge counts.
inline double modularity(const WeightedGraph& g,
                         const std::vector<int>& labels) {
  if (g.edges.empty()) throw EmptyGraph("modularity: graph has no edges");
  if (static_cast<int>(labels.size()) != g.nodes) {
    throw InvalidInput("modularity: partition does not cover all nodes");
  }
  int k = 0;
  for (int c : labels) {
    if (c < 0) throw InvalidInput("modularity: negative community id");
    k = std::max(k, c + 1);
  }
  double total = 0.0;
  std::vector<double> within(k, 0.0);
  std::vector<double> degree(k, 0.0);
  for (const auto& e : g.edges) {
    total += e.weight;
    degree[labels[e.i]] += e.weight;
    degree[labels[e.j]] += e.weight;
    if (labels[e.i] == labels[e.j]) within[labels[e.i]] += e.weight;
  }
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    const double a_c = degree[c] / (2.0 * total);
    q += within[c] / total - a_c * a_c;
  }
  return q;
}

inline double modularity(const WeightedGraph& g,
                         const CommunityPartition& part) {
  return modularity(g, part.labels);
}

namespace detail {

// k-means with greedy farthest-point initialization seeded by rng.
inline std::vector<int> kmeans(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> center_idx;
  center_idx.push_back(static_cast<Eigen::Index>(rng.below(n)));
  Vector min_dist = (points.rowwise() - points.row(center_idx[0]))
                        .rowwise()
                        .squaredNorm();
  while (static_cast<int>(center_idx.size()) < k) {
    Eigen::Index far = 0;
    min_dist.maxCoeff(&far);
    center_idx.push_back(far);
    Vector d = (points.rowwise() - points.row(far)).rowwise().squaredNorm();
    min_dist = min_dist.cwiseMin(d);
  }
  Matrix centers(k, points.cols());
  for (int c = 0; c < k; ++c) centers.row(c) = points.row(center_idx[c]);

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
      int count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (assign[i] == c) {
          mean += points.row(i);
          ++count;
        }
      }
      if (count > 0) centers.row(c) = mean / count;
    }
  }
  return assign;
}

inline std::vector<int> compact_labels(std::vector<int> labels) {
  std::map<int, int> remap;
  for (int& l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return labels;
}

}  // namespace detail

// Spectral community detection: embed the non-isolated nodes with the
// top k-1 eigenvectors of D^{-1/2} W D^{-1/2}, renormalize rows to unit
// length, cluster with k-means (greedy farthest-point init, `restarts`
// independent starts), and keep the partition with the best modularity
// over k in 2..k_max. Ties prefer smaller k, then the earlier restart.
// Isolated nodes become singleton communities appended at the end.
inline CommunityPartition detect_communities(const WeightedGraph& g,
                                             int k_max, int restarts = 10,
                                             std::uint64_t seed = 0) {
  if (g.edges.empty()) {
    throw EmptyGraph("detect_communities: graph has no edges");
  }
  if (k_max < 2) throw InvalidInput("detect_communities: k_max < 2");
  if (restarts < 1) throw InvalidInput("detect_communities: restarts < 1");

  const Matrix a = g.adjacency();
  const Vector degree = a.rowwise().sum();
  std::vector<int> active;  // non-isolated node indices
  for (int i = 0; i < g.nodes; ++i) {
    if (degree(i) > 0.0) active.push_back(i);
  }
  const int m = static_cast<int>(active.size());

  Matrix norm_adj(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      norm_adj(r, c) = a(active[r], active[c]) /
                       std::sqrt(degree(active[r]) * degree(active[c]));
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(norm_adj);
  // Eigenvalues come out ascending; the top ones sit at the back.

  std::vector<int> best_labels;
  double best_q = -std::numeric_limits<double>::infinity();
  const int k_top = std::min(k_max, m);
  for (int k = 2; k <= k_top; ++k) {
    // Top k-1 non-trivial eigenvectors: the dominant one is the
    // uninformative degree direction and is skipped.
    Matrix embed = eig.eigenvectors().middleCols(m - k, k - 1);
    for (int r = 0; r < m; ++r) {
      const double norm = embed.row(r).norm();
      if (norm > 0.0) embed.row(r) /= norm;
    }
    Rng rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(k)));
    for (int restart = 0; restart < restarts; ++restart) {
      std::vector<int> sub = detail::kmeans(embed, k, rng);
      std::vector<int> labels(g.nodes, -1);
      for (int r = 0; r < m; ++r) labels[active[r]] = sub[r];
      // Isolated nodes get their own communities.
      int next = *std::max_element(sub.begin(), sub.end()) + 1;
      for (int i = 0; i < g.nodes; ++i) {
        if (labels[i] < 0) labels[i] = next++;
      }
      labels = detail::compact_labels(std::move(labels));
      const double q = modularity(g, labels);
      if (q > best_q) {
        best_q = q;
        best_labels = labels;
      }
    }
  }

  CommunityPartition part;
  part.labels = std::move(best_labels);
  part.k = *std::max_element(part.labels.begin(), part.labels.end()) + 1;
  part.modularity = best_q;
  return part;
}

// Integration of a node subset: half the log determinant of the
// precision restricted to the subset (nats).
inline double integration(const Matrix& precision,
                          const std::vector<int>& subset) {
  if (subset.empty()) throw EmptySubset("integration: empty subset");
  const Eigen::Index m = static_cast<Eigen::Index>(subset.size());
  Matrix sub(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      sub(r, c) = precision(subset[r], subset[c]);
    }
  }
  return 0.5 * log_det(sub);
}

// Mutual information between two disjoint node sets:
// I(union) - I(s1) - I(s2).
inline double mutual_information(const Matrix& precision,
                                 const std::vector<int>& s1,
                                 const std::vector<int>& s2) {
  if (s1.empty() || s2.empty()) {
    throw EmptySubset("mutual_information: empty subset");
  }
  for (int a : s1) {
    for (int b : s2) {
      if (a == b) {
        throw OverlappingSubsets("mutual_information: subsets overlap");
      }
    }
  }
  std::vector<int> both = s1;
  both.insert(both.end(), s2.begin(), s2.end());
  return integration(precision, both) - integration(precision, s1) -
         integration(precision, s2);
}

// Between-community graph: node value = within-community integration,
// edge value = pairwise mutual information; near-zero edges omitted.
inline IntegrationGraph integration_graph(const Matrix& precision,
                                          const CommunityPartition& part) {
  if (static_cast<Eigen::Index>(part.labels.size()) != precision.rows()) {
    throw DimensionMismatch("integration_graph: partition order mismatch");
  }
  std::vector<std::vector<int>> members(part.k);
  for (int i = 0; i < static_cast<int>(part.labels.size()); ++i) {
    members[part.labels[i]].push_back(i);
  }
  IntegrationGraph out;
  out.node_integration.reserve(part.k);
  for (int c = 0; c < part.k; ++c) {
    if (members[c].empty()) {
      throw InvalidInput("integration_graph: empty community");
    }
    out.node_integration.push_back(integration(precision, members[c]));
  }
  for (int c1 = 0; c1 < part.k; ++c1) {
    for (int c2 = c1 + 1; c2 < part.k; ++c2) {
      const double mi = mutual_information(precision, members[c1], members[c2]);
      if (std::abs(mi) >= 1e-12) out.edges.push_back({c1, c2, mi});
    }
  }
  return out;
}

// Fraction of total edge weight on edges joining a node with its
// designated partner (pairing[i] = partner of i, or -1 for none).
inline double paired_edge_weight_fraction(const WeightedGraph& g,
                                          const std::vector<int>& pairing) {
  if (static_cast<int>(pairing.size()) != g.nodes) {
    throw DimensionMismatch("paired_edge_weight_fraction: pairing size");
  }
  double total = 0.0;
  double paired = 0.0;
  for (const auto& e : g.edges) {
    total += e.weight;
    if (pairing[e.i] == e.j) paired += e.weight;
  }
  if (total == 0.0) throw EmptyGraph("paired_edge_weight_fraction: no edges");
  return paired / total;
}

// Node order by the Fiedler vector of the graph Laplacian; a layout
// utility for exports.
inline std::vector<int> fiedler_order(const WeightedGraph& g) {
  if (g.nodes < 2) return std::vector<int>(g.nodes, 0);
  const Matrix a = g.adjacency();
  Matrix lap = Matrix(a.rowwise().sum().asDiagonal()) - a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
  const Vector fiedler = eig.eigenvectors().col(1);
  std::vector<int> order(g.nodes);
  for (int i = 0; i < g.nodes; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return fiedler(x) < fiedler(y); });
  return order;
}

namespace detail {

inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string node_name(const WeightedGraph& g, int i) {
  if (!g.labels.empty()) return g.labels[i];
  return std::to_string(i);
}

}  // namespace detail

// Tab-separated edge list: node_i <TAB> node_j <TAB> weight.
inline std::string to_edge_list(const WeightedGraph& g) {
  std::ostringstream out;
  for (const auto& e : g.edges) {
    out << detail::node_name(g, e.i) << '\t' << detail::node_name(g, e.j)
        << '\t' << detail::format_value(e.weight) << '\n';
  }
  return out.str();
}

inline std::string to_dot(const WeightedGraph& g,
                          const std::string& name = "connectivity") {
  std::ostringstream out;
  out << "graph " << name << " {\n";
  for (int i = 0; i < g.nodes; ++i) {
    out << "  \"" << detail::node_name(g, i) << "\";\n";
  }
  for (const auto& e : g.edges) {
    out << "  \"" << detail::node_name(g, e.i) << "\" -- \""
        << detail::node_name(g, e.j) << "\" [weight="
        << detail::format_value(e.weight) << "];\n";
  }
  out << "}\n";
  return out.str();
}

// Partition export: node <TAB> community_id.
inline std::string to_partition_text(const CommunityPartition& part,
                                     const std::vector<std::string>& labels = {}) {
  std::ostringstream out;
  for (int i = 0; i < static_cast<int>(part.labels.size()); ++i) {
    if (!labels.empty()) {
      out << labels[i];
    } else {
      out << i;
    }
    out << '\t' << part.labels[i] << '\n';
  }
  return out.str();
}

}  // namespace ggm
