#pragma once

// Adversarial instance on a cycle where half of the agents never see a loss.
//
// N = 2(M+1) agents on a cycle, all delays equal to d. Agents 1..M+1 have
// identically zero losses; agents M+2..N share phi_k(x) = eps_k L <w, x> on
// round window k = [(M+d)k + 1, (M+d)(k+1)]. Agent numbers in comments are
// 1-based; the code indexes agents from 0.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "doco/algorithms.hpp"
#include "doco/delay.hpp"
#include "doco/errors.hpp"
#include "doco/losses.hpp"
#include "doco/rng.hpp"
#include "doco/simulator.hpp"
#include "doco/topology.hpp"

namespace doco {

enum class SignMode { random, all_plus };

struct LowerBoundInstance {
  std::size_t m = 0;
  std::size_t delay = 0;
  double lipschitz = 0.0;
  double diameter = 0.0;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<int> signs;  // eps_k, k = 0..windows-1
  Vector direction;        // w = (x1 - x2) / ||x1 - x2||
  Graph graph;
  CommMatrix w;
  Domain domain;
  LossStream stream;
  DelaySchedule schedule;

  std::size_t agents() const { return 2 * (m + 1); }
  std::size_t window_length() const { return m + delay; }
  std::size_t windows() const { return signs.size(); }
  std::size_t window_of(std::size_t t) const { return (t - 1) / window_length(); }
  bool loss_bearing(std::size_t agent) const { return agent > m; }
  // Agent M/2+1, the zero-loss node farthest from the loss-bearing half.
  std::size_t probe_agent() const { return m / 2; }
};

// x1, x2 = +-R e_1 on a ball of radius D/2, so w = e_1.
inline LowerBoundInstance lower_bound_instance(std::size_t m, std::size_t delay, double lipschitz,
                                               double diameter, std::size_t rounds, std::uint64_t seed,
                                               SignMode mode = SignMode::random, std::size_t dimension = 2,
                                               std::uint64_t trial = 0) {
  if (m < 2 || m % 2 != 0) throw ConfigError("lower-bound instance needs an even M >= 2, got " + std::to_string(m));
  if (rounds < m + delay) throw ConfigError("lower-bound instance needs T >= M + d");
  if (!(lipschitz > 0.0) || !(diameter > 0.0)) throw ConfigError("lower-bound instance needs L > 0 and D > 0");
  if (dimension == 0) throw ConfigError("lower-bound instance needs dimension >= 1");

  LowerBoundInstance inst;
  inst.m = m;
  inst.delay = delay;
  inst.lipschitz = lipschitz;
  inst.diameter = diameter;
  inst.rounds = rounds;
  inst.seed = seed;

  const std::size_t n = 2 * (m + 1);
  const std::size_t len = m + delay;
  const std::size_t windows = (rounds + len - 1) / len;
  const CounterRng rng(seed, Stream::sign, trial);
  inst.signs.resize(windows);
  for (std::size_t k = 0; k < windows; ++k)
    inst.signs[k] = mode == SignMode::all_plus ? 1 : static_cast<int>(rng.rademacher(k));

  inst.direction.assign(dimension, 0.0);
  inst.direction[0] = 1.0;

  inst.graph = build_graph(TopologyKind::cycle, n);
  inst.w = comm_matrix(inst.graph, 1.0 / laplacian_spectral_radius(inst.graph));
  inst.domain = Domain::ball(dimension, diameter / 2.0);

  inst.stream = LossStream(n, rounds, dimension, LossStream::Form::linear, 0.0);
  for (std::size_t t = 1; t <= rounds; ++t) {
    const double scale = static_cast<double>(inst.signs[inst.window_of(t)]) * lipschitz;
    for (std::size_t v = m + 1; v < n; ++v) {
      auto f = inst.stream.feature(t, v);
      for (std::size_t i = 0; i < dimension; ++i) f[i] = scale * inst.direction[i];
    }
  }

  DelayParams p;
  p.kind = DelayKind::constant;
  p.constant = delay;
  inst.schedule = generate_schedule(p, n, rounds, seed, trial);
  return inst;
}

// Empty when every invariant holds, otherwise the first failure.
inline std::string check_instance(const LowerBoundInstance& inst) {
  const std::size_t n = inst.agents();
  const std::size_t dim = inst.domain.dimension();
  if (inst.stream.agents() != n || inst.graph.node_count() != n) return "agent count is not 2(M+1)";
  if (std::abs(inst.domain.diameter() - inst.diameter) > 1e-12 * inst.diameter) return "domain diameter differs from D";
  Vector origin(dim, 0.0);
  for (std::size_t t = 1; t <= inst.rounds; ++t) {
    for (std::size_t v = 0; v < n; ++v) {
      const auto f = inst.stream.feature(t, v);
      if (!inst.loss_bearing(v)) {
        for (double c : f)
          if (c != 0.0) return "zero-loss agent " + std::to_string(v + 1) + " has a loss at t=" + std::to_string(t);
        continue;
      }
      if (norm(f) != inst.lipschitz) return "gradient norm differs from L at t=" + std::to_string(t);
      const auto first = inst.stream.feature(inst.window_of(t) * inst.window_length() + 1, v);
      for (std::size_t i = 0; i < dim; ++i)
        if (f[i] != first[i]) return "loss changes inside a window at t=" + std::to_string(t);
      const auto peer = inst.stream.feature(t, inst.m + 1);
      for (std::size_t i = 0; i < dim; ++i)
        if (f[i] != peer[i]) return "loss-bearing agents disagree at t=" + std::to_string(t);
    }
    for (std::size_t u = 0; u < n; ++u)
      if (inst.schedule.delay(t, u) != std::min(inst.delay, inst.rounds - t)) return "delay is not constant";
  }
  return {};
}

struct LowerBoundResult {
  double probe_regret = 0.0;  // Reg_T(M/2+1)
  double max_regret = 0.0;    // max_u Reg_T(u)
  std::size_t block_length = 0;
  InvariantLog invariants;
};

inline LowerBoundResult lower_bound_eval(Algorithm algorithm, const LowerBoundInstance& inst) {
  if (algorithm == Algorithm::adftrl_sc) throw ConfigError("the lower-bound instance has linear losses; adftrl_sc does not apply");
  const Environment env{inst.graph, inst.w,         inst.domain,         inst.stream,
                        inst.schedule, inst.lipschitz, inst.w.block_length, true};
  const double d_total = delay_stats(inst.schedule, env.block_length).d_total;
  const SimulationOutput sim = simulate(env, learner_params(algorithm, env, 0.0, d_total));
  const OfflineOptimum opt = offline_optimum(inst.stream, inst.domain);
  const RegretReport rep = regret_curve(sim.trajectory, inst.stream, opt.x_star);
  LowerBoundResult r;
  r.probe_regret = rep.final_regret(inst.probe_agent());
  r.max_regret = rep.max_regret(inst.rounds);
  r.block_length = env.block_length;
  r.invariants = sim.invariants;
  return r;
}

}  // namespace doco
