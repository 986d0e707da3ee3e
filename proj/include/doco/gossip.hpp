#pragma once

// Accelerated (two-step) gossip:
//
//   x^{k+1}(u) = (1 + theta) sum_{v in N_u} W(u, v) x^k(v) - theta x^{k-1}(u)
//
// with x^0 = x^{-1} = the input payloads. Node u reads only the current values
// of the nodes in its support (itself and its graph neighbors) and its own
// previous value. The same engine carries vector payloads (gradient sums) and
// scalar payloads (missing-feedback counts, dimension 1).

#include <cstddef>
#include <span>
#include <vector>

#include "doco/errors.hpp"
#include "doco/linalg.hpp"
#include "doco/topology.hpp"

namespace doco {

struct GossipState {
  Matrix current;   // row u = x^k(u)
  Matrix previous;  // row u = x^{k-1}(u)
  std::size_t step = 0;

  std::size_t nodes() const { return current.rows(); }
  std::size_t dimension() const { return current.cols(); }
};

inline GossipState gossip_init(Matrix payloads) {
  GossipState s;
  s.previous = payloads;
  s.current = std::move(payloads);
  return s;
}

inline GossipState gossip_init(const std::vector<Vector>& payloads) {
  if (payloads.empty()) throw ConfigError("gossip needs at least one node");
  const std::size_t dim = payloads.front().size();
  Matrix m(payloads.size(), dim);
  for (std::size_t u = 0; u < payloads.size(); ++u) {
    if (payloads[u].size() != dim) throw ConfigError("gossip payload dimension mismatch at node " + std::to_string(u + 1));
    std::copy(payloads[u].begin(), payloads[u].end(), m.row(u).begin());
  }
  return gossip_init(std::move(m));
}

// One synchronous step: every node's new value is computed from the
// pre-step values only.
inline void gossip_step(GossipState& state, const CommMatrix& w) {
  const std::size_t n = state.nodes();
  const std::size_t dim = state.dimension();
  if (w.size() != n) throw ConfigError("gossip state does not match communication matrix");
  const double theta = w.theta;
  Matrix next(n, dim);
  for (std::size_t u = 0; u < n; ++u) {
    auto out = next.row(u);
    for (std::size_t v : w.support[u]) axpy(w.weights(u, v), state.current.row(v), out);
    const auto prev = state.previous.row(u);
    for (std::size_t i = 0; i < dim; ++i) out[i] = (1.0 + theta) * out[i] - theta * prev[i];
  }
  state.previous = std::move(state.current);
  state.current = std::move(next);
  ++state.step;
}

inline Matrix gossip_run(Matrix payloads, const CommMatrix& w, std::size_t steps) {
  GossipState s = gossip_init(std::move(payloads));
  for (std::size_t k = 0; k < steps; ++k) gossip_step(s, w);
  return std::move(s.current);
}

// Column means (the network average of each coordinate).
inline Vector node_mean(const Matrix& x) {
  Vector mean(x.cols(), 0.0);
  for (std::size_t u = 0; u < x.rows(); ++u) axpy(1.0, x.row(u), mean);
  for (double& v : mean) v /= static_cast<double>(x.rows());
  return mean;
}

// ||X - 1 xbar^T||_F
inline double consensus_deviation(const Matrix& x) {
  const Vector mean = node_mean(x);
  double acc = 0.0;
  for (std::size_t u = 0; u < x.rows(); ++u) {
    const auto r = x.row(u);
    for (std::size_t i = 0; i < x.cols(); ++i) acc += (r[i] - mean[i]) * (r[i] - mean[i]);
  }
  return std::sqrt(acc);
}

}  // namespace doco
