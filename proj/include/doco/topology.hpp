#pragma once

// Communication graphs, Laplacians, gossip weight matrices and the spectral
// quantities that set the gossip acceleration and the block length.
//
// Nodes are 0-based in memory and 1-based in every text format.

#include <cmath>
#include <cstddef>
#include <istream>
#include <numbers>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "doco/errors.hpp"
#include "doco/linalg.hpp"

namespace doco {

enum class TopologyKind { complete, cycle, grid, custom };

inline std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::complete: return "complete";
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::grid: return "grid";
    case TopologyKind::custom: return "custom";
  }
  return "custom";
}

inline TopologyKind parse_topology(std::string_view name) {
  if (name == "complete") return TopologyKind::complete;
  if (name == "cycle") return TopologyKind::cycle;
  if (name == "grid") return TopologyKind::grid;
  if (name == "custom") return TopologyKind::custom;
  throw ConfigError("unknown topology '" + std::string(name) + "'");
}

struct Edge {
  std::size_t u;  // u < v
  std::size_t v;
  auto operator<=>(const Edge&) const = default;
};

// Connected undirected simple graph.
class Graph {
 public:
  Graph() = default;

  // Validates: endpoints in range, no self-loops, no duplicates, connected.
  Graph(std::size_t node_count, std::vector<Edge> edges, TopologyKind kind = TopologyKind::custom)
      : node_count_(node_count), kind_(kind) {
    if (node_count == 0) throw ConfigError("graph needs at least one node");
    std::set<Edge> seen;
    for (Edge e : edges) {
      if (e.u >= node_count || e.v >= node_count)
        throw ConfigError("edge endpoint out of range");
      if (e.u == e.v) throw ConfigError("self-loop on node " + std::to_string(e.u + 1));
      if (e.u > e.v) std::swap(e.u, e.v);
      if (!seen.insert(e).second)
        throw ConfigError("duplicate edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) + ")");
      edges_.push_back(e);
    }
    adjacency_.resize(node_count);
    for (const Edge& e : edges_) {
      adjacency_[e.u].push_back(e.v);
      adjacency_[e.v].push_back(e.u);
    }
    if (!connected()) throw ConfigError("graph is not connected");
  }

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  TopologyKind kind() const { return kind_; }
  const std::vector<std::size_t>& neighbors(std::size_t u) const { return adjacency_[u]; }
  std::size_t degree(std::size_t u) const { return adjacency_[u].size(); }

  bool has_edge(std::size_t u, std::size_t v) const {
    for (std::size_t w : adjacency_[u])
      if (w == v) return true;
    return false;
  }

 private:
  bool connected() const {
    std::vector<bool> seen(node_count_, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : adjacency_[u])
        if (!seen[v]) {
          seen[v] = true;
          ++reached;
          frontier.push(v);
        }
    }
    return reached == node_count_;
  }

  std::size_t node_count_ = 0;
  TopologyKind kind_ = TopologyKind::custom;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

inline std::size_t exact_square_root(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : 0;
}

// Complete graph, cycle 1-2-...-N-1, or non-wraparound 4-neighbor lattice.
inline Graph build_graph(TopologyKind kind, std::size_t n) {
  if (n < 2) throw ConfigError("topology needs N >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  switch (kind) {
    case TopologyKind::complete:
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) edges.push_back({u, v});
      break;
    case TopologyKind::cycle:
      for (std::size_t u = 0; u + 1 < n; ++u) edges.push_back({u, u + 1});
      // A 2-cycle would duplicate its single edge.
      if (n > 2) edges.push_back({0, n - 1});
      break;
    case TopologyKind::grid: {
      const std::size_t side = exact_square_root(n);
      if (side == 0) throw ConfigError("grid topology needs a perfect-square N, got " + std::to_string(n));
      for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
          const std::size_t u = r * side + c;
          if (c + 1 < side) edges.push_back({u, u + 1});
          if (r + 1 < side) edges.push_back({u, u + side});
        }
      break;
    }
    case TopologyKind::custom:
      throw ConfigError("custom topologies are loaded from an edge list");
  }
  return Graph(n, std::move(edges), kind);
}

inline Matrix laplacian(const Graph& g) {
  const std::size_t n = g.node_count();
  Matrix lap(n, n);
  for (std::size_t u = 0; u < n; ++u) lap(u, u) = static_cast<double>(g.degree(u));
  for (const Edge& e : g.edges()) {
    lap(e.u, e.v) = -1.0;
    lap(e.v, e.u) = -1.0;
  }
  return lap;
}

struct BlockParams {
  double theta;             // gossip acceleration coefficient
  std::size_t block_length; // B
  double contraction;       // b, per-step contraction base
};

// theta = 1 / (1 + sqrt(1 - sigma2^2)),
// B = ceil(sqrt2 ln(N sqrt(14N)) / ((sqrt2 - 1) sqrt(1 - sigma2))),
// b = 1 - (1 - 1/sqrt2) sqrt(1 - sigma2).
inline BlockParams block_params(double sigma2, std::size_t n) {
  if (!(sigma2 >= 0.0 && sigma2 < 1.0))
    throw ConfigError("block_params needs 0 <= sigma2 < 1, got " + std::to_string(sigma2));
  if (n == 0) throw ConfigError("block_params needs N >= 1");
  constexpr double sqrt2 = std::numbers::sqrt2;
  const double gap_root = std::sqrt(1.0 - sigma2);
  const double nn = static_cast<double>(n);
  BlockParams p{};
  p.theta = 1.0 / (1.0 + std::sqrt(1.0 - sigma2 * sigma2));
  const double raw = sqrt2 * std::log(nn * std::sqrt(14.0 * nn)) / ((sqrt2 - 1.0) * gap_root);
  p.block_length = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
  p.contraction = 1.0 - (1.0 - 1.0 / sqrt2) * gap_root;
  return p;
}

// Doubly-stochastic gossip matrix with its spectral data. `support[u]` lists
// the nodes whose values node u reads in a gossip step: itself and its graph
// neighbors.
struct CommMatrix {
  Matrix weights;
  double c = 0.0;
  double sigma2 = 0.0;
  double theta = 0.5;
  std::size_t block_length = 1;
  double contraction = 0.0;
  std::vector<std::vector<std::size_t>> support;

  std::size_t size() const { return weights.rows(); }
};

// Second-largest eigenvalue; 0 for a single node.
inline double second_eigenvalue(const SymmetricEigen& eig) {
  return eig.values.size() < 2 ? 0.0 : eig.values[1];
}

namespace detail {

inline CommMatrix finish_comm_matrix(const Graph& g, Matrix w, double c) {
  const std::size_t n = g.node_count();
  CommMatrix out;
  out.c = c;
  out.support.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    out.support[u].push_back(u);
    for (std::size_t v : g.neighbors(u)) out.support[u].push_back(v);
    std::sort(out.support[u].begin(), out.support[u].end());
  }
  const SymmetricEigen eig = jacobi_eigen(w);
  double s2 = second_eigenvalue(eig);
  // Rounding can leave a tiny negative value for W = 11^T/N.
  if (s2 < 0.0 && s2 > -1e-10) s2 = 0.0;
  if (s2 >= 1.0 - 1e-12) throw ConfigError("communication matrix has no spectral gap (graph disconnected?)");
  out.sigma2 = s2;
  const BlockParams bp = block_params(s2, n);
  out.theta = bp.theta;
  out.block_length = bp.block_length;
  out.contraction = bp.contraction;
  out.weights = std::move(w);
  return out;
}

}  // namespace detail

// Largest Laplacian eigenvalue.
inline double laplacian_spectral_radius(const Graph& g) {
  return jacobi_eigen(laplacian(g)).values.front();
}

// W = I - c Lap(G). `c` defaults to 1/N; it must satisfy 0 < c <= 1/sigma1(Lap).
inline CommMatrix comm_matrix(const Graph& g, std::optional<double> c = std::nullopt) {
  const std::size_t n = g.node_count();
  const double mix = c.value_or(1.0 / static_cast<double>(n));
  const Matrix lap = laplacian(g);
  const double sigma1 = n < 2 ? 0.0 : jacobi_eigen(lap).values.front();
  if (!(mix > 0.0)) throw ConfigError("mixing constant c must be positive");
  if (sigma1 > 0.0 && mix > (1.0 / sigma1) * (1.0 + 1e-10))
    throw ConfigError("mixing constant c=" + std::to_string(mix) + " exceeds 1/sigma1(Lap)=" +
                      std::to_string(1.0 / sigma1));
  Matrix w = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) -= mix * lap(i, j);
  return detail::finish_comm_matrix(g, std::move(w), mix);
}

// Checks the validity conditions of a gossip matrix for graph g: zero on
// non-edges, symmetric, non-negative, unit row sums, positive semi-definite.
// Returns an empty string when valid, otherwise the first violated condition.
inline std::string check_comm_matrix(const Graph& g, const Matrix& w, double tolerance = 1e-12) {
  const std::size_t n = g.node_count();
  if (w.rows() != n || w.cols() != n) return "shape does not match graph";
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !g.has_edge(i, j) && w(i, j) != 0.0) return "non-zero weight on a non-edge";
      if (w(i, j) < 0.0 || w(i, j) > 1.0) return "weight outside [0,1]";
      if (w(i, j) != w(j, i)) return "not symmetric";
      row_sum += w(i, j);
    }
    if (std::abs(row_sum - 1.0) > tolerance) return "row does not sum to 1";
  }
  if (jacobi_eigen(w).values.back() < -1e-10) return "not positive semi-definite";
  return {};
}

// Arbitrary valid gossip matrix supplied by the caller.
inline CommMatrix comm_matrix_from_weights(const Graph& g, Matrix w) {
  if (auto why = check_comm_matrix(g, w); !why.empty())
    throw ConfigError("invalid communication matrix: " + why);
  return detail::finish_comm_matrix(g, std::move(w), 0.0);
}

struct SpectralReport {
  double sigma2;
  double gap;
  double gap_quartic_inverse;  // (1 - sigma2)^(-1/4)
};

inline SpectralReport spectral_gap_report(const CommMatrix& w) {
  const double gap = 1.0 - w.sigma2;
  return {w.sigma2, gap, std::pow(gap, -0.25)};
}

// Edge-list text: first line N, then one "u v" pair per line (1-based).
inline std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.node_count() << '\n';
  for (const Edge& e : g.edges()) out << e.u + 1 << ' ' << e.v + 1 << '\n';
  return out.str();
}

inline Graph parse_edge_list(std::istream& in) {
  std::size_t n = 0;
  if (!(in >> n)) throw ConfigError("edge list: missing node count");
  std::vector<Edge> edges;
  long long u = 0;
  long long v = 0;
  while (in >> u >> v) {
    if (u < 1 || v < 1) throw ConfigError("edge list: node ids are 1-based");
    edges.push_back({static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1)});
  }
  if (!in.eof()) throw ConfigError("edge list: malformed line");
  return Graph(n, std::move(edges), TopologyKind::custom);
}

// One CSV row per node.
inline std::string to_csv(const CommMatrix& w) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) out << (j ? "," : "") << w.weights(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace doco
