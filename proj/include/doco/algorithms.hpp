#pragma once

// Blocked, gossip-coupled FTRL learners for delayed anonymous feedback.
//
// Every agent keeps one decision per block of B rounds. During a block the
// agents run one accelerated-gossip step per round on their running gradient
// sums z; at the end of the block each agent solves
//
//   x_{s+1}(u) = argmin_{x in X} <z_s^B(u), x> + ||x||^2 / eta_{s+1}(u)
//
// and folds the gradients that arrived during the block, y_s(u), into the first
// two gossip iterates of the next block. Learning rates come from one of
//   - a fixed rate that knows the total delay,
//   - a second gossip channel carrying missing-feedback counts (adaptive),
//   - the strongly convex schedule 2/(alpha s B) with augmented sums
//     y+ = y - alpha B x_s.
// A delayed gossip-averaged projected gradient method is provided as a
// comparison baseline.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doco/errors.hpp"
#include "doco/gossip.hpp"
#include "doco/linalg.hpp"
#include "doco/losses.hpp"
#include "doco/topology.hpp"

namespace doco {

enum class Algorithm { adftrl_fixed, adftrl_adaptive, adftrl_sc, baseline_dogd };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::adftrl_fixed: return "adftrl_fixed";
    case Algorithm::adftrl_adaptive: return "adftrl_adaptive";
    case Algorithm::adftrl_sc: return "adftrl_sc";
    case Algorithm::baseline_dogd: return "baseline_dogd";
  }
  return "baseline_dogd";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "adftrl_fixed") return Algorithm::adftrl_fixed;
  if (name == "adftrl_adaptive") return Algorithm::adftrl_adaptive;
  if (name == "adftrl_sc") return Algorithm::adftrl_sc;
  if (name == "baseline_dogd") return Algorithm::baseline_dogd;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

inline bool uses_gradient_gossip(Algorithm a) { return a != Algorithm::baseline_dogd; }

// argmin_{x in dom} <z, x> + ||x||^2 / eta. The objective is
// ||x + eta z / 2||^2 / eta up to a constant, so the answer is the projection
// of -eta z / 2 for both balls and boxes.
inline Vector ftrl_argmin(std::span<const double> z, double eta, const Domain& dom) {
  if (!(eta > 0.0)) throw ConfigError("learning rate must be positive");
  return dom.project(scaled(z, -0.5 * eta));
}

// D / (L sqrt(D_total + B T))
inline double fixed_rate(double d_total, std::size_t block_length, std::size_t rounds, double diameter,
                         double lipschitz) {
  return diameter / (lipschitz * std::sqrt(d_total + static_cast<double>(block_length * rounds)));
}

// D / (L sqrt(B T + B zeta + 3 s B^2)); s = 0 with zeta = 0 is the initial rate
// D / (L sqrt(B T + 3 B^2)).
inline double adaptive_rate(double zeta, std::size_t block, std::size_t block_length, std::size_t rounds,
                            double diameter, double lipschitz) {
  const double b = static_cast<double>(block_length);
  const double s = static_cast<double>(std::max<std::size_t>(block, 1));
  const double inside = b * static_cast<double>(rounds) + b * zeta + 3.0 * s * b * b;
  return diameter / (lipschitz * std::sqrt(std::max(inside, 0.0)));
}

// 2 / (alpha s B)
inline double strongly_convex_rate(std::size_t block, std::size_t block_length, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("strongly convex rate needs alpha > 0");
  return 2.0 / (alpha * static_cast<double>(block * block_length));
}

// D / (L sqrt(s B)), baseline step size.
inline double baseline_rate(std::size_t block, std::size_t block_length, double diameter, double lipschitz) {
  return diameter / (lipschitz * std::sqrt(static_cast<double>(block * block_length)));
}

// Local state of one agent. The gossip payloads live in the network's
// GossipState rows; an agent owns its row.
struct AgentState {
  std::size_t id = 0;
  std::size_t block = 1;   // s
  Vector decision;         // x_s(u)
  double eta = 0.0;        // rate used for the next decision
  Vector received_sum;     // gradients delivered during the current block
  std::size_t played = 0;  // rounds played so far
  std::size_t received = 0;

  // Feedback the agent is still waiting for. Counts only: the agent knows how
  // many rounds it played and how many gradients arrived, never which ones.
  std::size_t missing() const { return played - received; }
};

// Row u of a gossip state: x^k(u) and x^{k-1}(u).
struct PayloadSlot {
  std::span<double> current;
  std::span<double> previous;

  static PayloadSlot of(GossipState& g, std::size_t u) { return {g.current.row(u), g.previous.row(u)}; }

  void add(std::span<const double> y) {
    axpy(1.0, y, current);
    axpy(1.0, y, previous);
  }
};

inline void reset_block(AgentState& a) {
  std::fill(a.received_sum.begin(), a.received_sum.end(), 0.0);
  ++a.block;
}

// Block end of the plain learner, after the block's B gossip steps.
// `a.eta` must already hold eta_{s+1}(u).
inline void adftrl_block(AgentState& a, PayloadSlot z, const Domain& dom) {
  a.decision = ftrl_argmin(z.current, a.eta, dom);
  z.add(a.received_sum);
  reset_block(a);
}

// Rate update of the adaptive learner: reads zeta_s^B(u), sets eta_{s+1}(u)
// and folds q_s(u) into the count channel. Runs before adftrl_block.
inline double adaptive_rate_block(AgentState& a, PayloadSlot zeta, std::size_t block_length, std::size_t rounds,
                                  double diameter, double lipschitz) {
  a.eta = adaptive_rate(zeta.current[0], a.block, block_length, rounds, diameter, lipschitz);
  const double q = static_cast<double>(a.missing());
  zeta.current[0] += q;
  zeta.previous[0] += q;
  return q;
}

// Block end of the strongly convex learner: rate 2/(alpha s B) and augmented
// sums y+ = y - alpha B x_s.
inline void adftrl_sc_block(AgentState& a, PayloadSlot z, const Domain& dom, double alpha,
                            std::size_t block_length) {
  if (!(alpha > 0.0)) throw ConfigError("strongly convex learner needs alpha > 0");
  a.eta = strongly_convex_rate(a.block, block_length, alpha);
  Vector augmented = a.received_sum;
  axpy(-alpha * static_cast<double>(block_length), a.decision, augmented);
  a.decision = ftrl_argmin(z.current, a.eta, dom);
  z.add(augmented);
  reset_block(a);
}

// Baseline block end: x_{s+1}(u) = P(sum_v W(u,v) x_s(v) - eta_s y_s(u)).
inline void baseline_dogd_block(AgentState& a, std::span<const double> mixed_decision, const Domain& dom,
                                double eta) {
  Vector step(mixed_decision.begin(), mixed_decision.end());
  axpy(-eta, a.received_sum, step);
  a.decision = dom.project(step);
  reset_block(a);
}

struct LearnerParams {
  Algorithm algorithm = Algorithm::adftrl_adaptive;
  std::size_t block_length = 1;
  std::size_t rounds = 1;
  double lipschitz = 1.0;
  double alpha = 0.0;    // strongly convex learner only
  double d_total = 0.0;  // fixed-rate learner only
};

// All agents of one network advancing in lockstep.
class NetworkLearner {
 public:
  NetworkLearner(const CommMatrix& w, Domain dom, LearnerParams p)
      : w_(w), dom_(std::move(dom)), p_(p) {
    const std::size_t n = w.size();
    const std::size_t dim = dom_.dimension();
    if (p_.block_length == 0) throw ConfigError("block length must be positive");
    if (!(p_.lipschitz > 0.0)) throw ConfigError("Lipschitz constant must be positive");
    if (p_.algorithm == Algorithm::adftrl_sc && !(p_.alpha > 0.0))
      throw ConfigError("adftrl_sc needs alpha > 0");
    const double diameter = dom_.diameter();
    double eta0 = 0.0;
    switch (p_.algorithm) {
      case Algorithm::adftrl_fixed:
        eta0 = fixed_rate(p_.d_total, p_.block_length, p_.rounds, diameter, p_.lipschitz);
        break;
      case Algorithm::adftrl_adaptive:
        eta0 = adaptive_rate(0.0, 1, p_.block_length, p_.rounds, diameter, p_.lipschitz);
        break;
      case Algorithm::adftrl_sc:
      case Algorithm::baseline_dogd:
        break;
    }
    agents_.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      agents_[u].id = u;
      agents_[u].decision.assign(dim, 0.0);
      agents_[u].received_sum.assign(dim, 0.0);
      agents_[u].eta = eta0;
    }
    z_ = gossip_init(Matrix(n, dim));
    zeta_ = gossip_init(Matrix(n, 1));
    last_sums_ = Matrix(n, dim);
    last_missing_.assign(n, 0);
  }

  std::size_t agents() const { return agents_.size(); }
  std::size_t block() const { return agents_.front().block; }
  const LearnerParams& params() const { return p_; }
  const Domain& domain() const { return dom_; }

  std::span<const double> decision(std::size_t u) const { return agents_[u].decision; }
  const AgentState& agent(std::size_t u) const { return agents_[u]; }

  // Anonymous delivery: a gradient vector and nothing else.
  void deliver(std::size_t u, std::span<const double> gradient) {
    axpy(1.0, gradient, agents_[u].received_sum);
    ++agents_[u].received;
  }

  // Closes one round: every agent has played, and one gossip step runs.
  void advance_round() {
    for (AgentState& a : agents_) ++a.played;
    if (!uses_gradient_gossip(p_.algorithm)) return;
    gossip_step(z_, w_);
    if (p_.algorithm == Algorithm::adftrl_adaptive) gossip_step(zeta_, w_);
  }

  // Block-end update for every agent.
  void end_block() {
    const std::size_t n = agents_.size();
    for (std::size_t u = 0; u < n; ++u) {
      const AgentState& a = agents_[u];
      std::copy(a.received_sum.begin(), a.received_sum.end(), last_sums_.row(u).begin());
      if (p_.algorithm == Algorithm::adftrl_sc)
        axpy(-p_.alpha * static_cast<double>(p_.block_length), a.decision, last_sums_.row(u));
      last_missing_[u] = a.missing();
    }
    const double diameter = dom_.diameter();
    switch (p_.algorithm) {
      case Algorithm::adftrl_fixed:
        for (std::size_t u = 0; u < n; ++u) adftrl_block(agents_[u], PayloadSlot::of(z_, u), dom_);
        break;
      case Algorithm::adftrl_adaptive:
        for (std::size_t u = 0; u < n; ++u) {
          adaptive_rate_block(agents_[u], PayloadSlot::of(zeta_, u), p_.block_length, p_.rounds, diameter,
                              p_.lipschitz);
          adftrl_block(agents_[u], PayloadSlot::of(z_, u), dom_);
        }
        break;
      case Algorithm::adftrl_sc:
        for (std::size_t u = 0; u < n; ++u)
          adftrl_sc_block(agents_[u], PayloadSlot::of(z_, u), dom_, p_.alpha, p_.block_length);
        break;
      case Algorithm::baseline_dogd: {
        std::vector<Vector> mixed(n, Vector(dom_.dimension(), 0.0));
        for (std::size_t u = 0; u < n; ++u)
          for (std::size_t v : w_.support[u]) axpy(w_.weights(u, v), agents_[v].decision, mixed[u]);
        const double eta = baseline_rate(block(), p_.block_length, diameter, p_.lipschitz);
        for (std::size_t u = 0; u < n; ++u) baseline_dogd_block(agents_[u], mixed[u], dom_, eta);
        break;
      }
    }
  }

  // Probes for invariant monitoring.
  const GossipState& gradient_channel() const { return z_; }
  const GossipState& count_channel() const { return zeta_; }
  // y_s(u) (y+_s(u) for the strongly convex learner) of the last closed block.
  const Matrix& last_block_sums() const { return last_sums_; }
  const std::vector<std::size_t>& last_block_missing() const { return last_missing_; }

 private:
  CommMatrix w_;
  Domain dom_;
  LearnerParams p_;
  std::vector<AgentState> agents_;
  GossipState z_;
  GossipState zeta_;
  Matrix last_sums_;
  std::vector<std::size_t> last_missing_;
};

}  // namespace doco
