#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doco/topology.hpp"
#include "support.hpp"

using namespace doco;

namespace {

constexpr double pi = std::numbers::pi;

// Closed-form sigma2 of W = I - c Lap for the three standard topologies.
double analytic_sigma2(TopologyKind kind, std::size_t n, double c) {
  switch (kind) {
    case TopologyKind::complete: return 1.0 - c * static_cast<double>(n);
    case TopologyKind::cycle: return 1.0 - c * (2.0 - 2.0 * std::cos(2.0 * pi / static_cast<double>(n)));
    case TopologyKind::grid: {
      const double k = std::sqrt(static_cast<double>(n));
      return 1.0 - c * (2.0 - 2.0 * std::cos(pi / k));
    }
    default: return NAN;
  }
}

}  // namespace

TEST(Topology, EdgeCounts) {
  EXPECT_EQ(build_graph(TopologyKind::complete, 36).edges().size(), 36u * 35 / 2);
  EXPECT_EQ(build_graph(TopologyKind::cycle, 36).edges().size(), 36u);
  EXPECT_EQ(build_graph(TopologyKind::grid, 36).edges().size(), 2u * 6 * 5);
  EXPECT_EQ(build_graph(TopologyKind::cycle, 2).edges().size(), 1u);
}

TEST(Topology, GridDegrees) {
  const Graph g = build_graph(TopologyKind::grid, 16);
  EXPECT_EQ(g.degree(0), 2u);   // corner
  EXPECT_EQ(g.degree(1), 3u);   // edge
  EXPECT_EQ(g.degree(5), 4u);   // interior
  EXPECT_TRUE(g.has_edge(5, 9));
  EXPECT_FALSE(g.has_edge(3, 4));  // no wrap-around between rows
}

TEST(Topology, RejectsInvalidGraphs) {
  EXPECT_THROW(build_graph(TopologyKind::grid, 35), ConfigError);
  EXPECT_THROW(build_graph(TopologyKind::complete, 1), ConfigError);
  EXPECT_THROW(Graph(3, {{0, 0}}), ConfigError);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), ConfigError);
  EXPECT_THROW(Graph(4, {{0, 1}, {2, 3}}), ConfigError);  // disconnected
  EXPECT_THROW(Graph(2, {{0, 2}}), ConfigError);
  EXPECT_THROW(parse_topology("torus"), ConfigError);
}

TEST(Topology, LaplacianRowsSumToZero) {
  for (auto kind : {TopologyKind::complete, TopologyKind::cycle, TopologyKind::grid}) {
    const Matrix lap = laplacian(build_graph(kind, 25 + (kind != TopologyKind::grid ? 1 : 0)));
    for (std::size_t i = 0; i < lap.rows(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < lap.cols(); ++j) s += lap(i, j);
      EXPECT_EQ(s, 0.0);
    }
  }
}

TEST(Topology, CommMatrixIsValidForStandardTopologies) {
  for (auto kind : {TopologyKind::complete, TopologyKind::cycle, TopologyKind::grid})
    for (std::size_t n : {4u, 9u, 16u, 36u}) {
      const Graph g = build_graph(kind, n);
      const CommMatrix w = comm_matrix(g);
      EXPECT_EQ(check_comm_matrix(g, w.weights), "") << to_string(kind) << " " << n;
      EXPECT_NEAR(w.sigma2, analytic_sigma2(kind, n, 1.0 / n), 1e-10) << to_string(kind) << " " << n;
    }
}

TEST(Topology, SpectrumMatchesEigenOracle) {
  for (auto kind : {TopologyKind::cycle, TopologyKind::grid}) {
    const CommMatrix w = comm_matrix(build_graph(kind, 36));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(test::to_eigen(w.weights));
    const auto& ev = ref.eigenvalues();  // ascending
    EXPECT_NEAR(w.sigma2, ev(ev.size() - 2), 1e-10);
    EXPECT_NEAR(ev(ev.size() - 1), 1.0, 1e-12);
  }
}

TEST(Topology, ReportedGapValues) {
  // (1 - sigma2)^(-1/4) for c = 1/36, N = 36.
  const double expected[] = {1.0, 3.40, 5.87};
  const TopologyKind kinds[] = {TopologyKind::complete, TopologyKind::grid, TopologyKind::cycle};
  for (int i = 0; i < 3; ++i) {
    const SpectralReport r = spectral_gap_report(comm_matrix(build_graph(kinds[i], 36), 1.0 / 36));
    EXPECT_NEAR(r.gap_quartic_inverse, expected[i], 0.01) << to_string(kinds[i]);
  }
}

TEST(Topology, BlockParametersAgainstHighPrecisionValues) {
  // Independent multi-precision evaluation of the block-length formula.
  EXPECT_EQ(comm_matrix(build_graph(TopologyKind::complete, 36)).block_length, 23u);
  EXPECT_EQ(comm_matrix(build_graph(TopologyKind::grid, 36)).block_length, 265u);
  EXPECT_EQ(comm_matrix(build_graph(TopologyKind::cycle, 36)).block_length, 787u);
  EXPECT_EQ(block_params(0.0, 1).block_length, 5u);
  EXPECT_NEAR(block_params(0.5, 10).contraction, 0.79289321881345247, 1e-15);
  EXPECT_NEAR(block_params(0.0, 10).theta, 0.5, 1e-15);
  EXPECT_THROW(block_params(1.0, 10), ConfigError);
  EXPECT_THROW(block_params(-0.1, 10), ConfigError);
}

TEST(Topology, ContractionOverOneBlockIsSmall) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.999999);
  for (int i = 0; i < 2000; ++i) {
    const double s2 = u(rng);
    const std::size_t n = 1 + rng() % 200;
    const BlockParams p = block_params(s2, n);
    const double nn = static_cast<double>(n);
    EXPECT_LE(std::pow(p.contraction, static_cast<double>(p.block_length)), 1.0 / (nn * std::sqrt(14.0 * nn)));
    EXPECT_GT(p.theta, 0.0);
    EXPECT_LE(p.theta, 1.0);
  }
}

TEST(Topology, MixingConstantBounds) {
  const Graph g = build_graph(TopologyKind::cycle, 10);
  EXPECT_NO_THROW(comm_matrix(g, 0.25));  // 1/sigma1 for an even cycle
  EXPECT_THROW(comm_matrix(g, 0.26), ConfigError);
  EXPECT_THROW(comm_matrix(g, 0.0), ConfigError);
  EXPECT_THROW(comm_matrix(g, -0.1), ConfigError);
  EXPECT_NEAR(laplacian_spectral_radius(g), 4.0, 1e-10);
}

TEST(Topology, CheckCommMatrixRejectsBadWeights) {
  const Graph g = build_graph(TopologyKind::cycle, 4);
  Matrix w = comm_matrix(g).weights;
  Matrix off = w;
  off(0, 2) = 0.1;
  off(2, 0) = 0.1;
  EXPECT_EQ(check_comm_matrix(g, off), "non-zero weight on a non-edge");
  Matrix asym = w;
  asym(0, 1) += 0.01;
  EXPECT_NE(check_comm_matrix(g, asym), "");
  EXPECT_THROW(comm_matrix_from_weights(g, asym), ConfigError);
  // Valid but not of the I - c Lap family.
  Matrix lazy = Matrix::identity(4);
  for (const Edge& e : g.edges()) {
    lazy(e.u, e.v) = lazy(e.v, e.u) = 0.2;
  }
  for (std::size_t i = 0; i < 4; ++i) lazy(i, i) = 0.6;
  EXPECT_EQ(check_comm_matrix(g, lazy), "");
  EXPECT_NEAR(comm_matrix_from_weights(g, lazy).sigma2, 0.6, 1e-12);
}

TEST(Topology, SupportIsSelfPlusNeighbors) {
  const CommMatrix w = comm_matrix(build_graph(TopologyKind::cycle, 6));
  EXPECT_EQ(w.support[0], (std::vector<std::size_t>{0, 1, 5}));
  for (std::size_t u = 0; u < 6; ++u)
    for (std::size_t v = 0; v < 6; ++v) {
      const bool in = std::find(w.support[u].begin(), w.support[u].end(), v) != w.support[u].end();
      if (!in) EXPECT_EQ(w.weights(u, v), 0.0);
    }
}

TEST(Topology, EdgeListRoundTrip) {
  const Graph g = build_graph(TopologyKind::grid, 9);
  std::istringstream in(to_edge_list(g));
  const Graph h = parse_edge_list(in);
  EXPECT_EQ(h.node_count(), 9u);
  EXPECT_EQ(h.edges(), g.edges());
  std::istringstream bad("3\n1 2\n2 x\n");
  EXPECT_THROW(parse_edge_list(bad), ConfigError);
}

TEST(Topology, SingleNodeGraph) {
  const Graph g(1, {});
  const CommMatrix w = comm_matrix(g);
  EXPECT_EQ(w.weights(0, 0), 1.0);
  EXPECT_EQ(w.sigma2, 0.0);
  EXPECT_EQ(w.block_length, 5u);
}
