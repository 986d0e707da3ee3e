#pragma once

// Lockstep simulation of a network of learners under delayed feedback, with
// exact regret accounting and multi-trial aggregation.
//
// Round t of block s:
//   1. every agent plays its block decision x_s(u);
//   2. the environment evaluates f_t(u, .) at the played point and queues the
//      gradient for delivery at the end of round t + d_t(u);
//   3. one gossip step runs;
//   4. feedback due at the end of round t is delivered (vector only);
//   5. at t = sB the block-end update runs.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "doco/algorithms.hpp"
#include "doco/delay.hpp"
#include "doco/errors.hpp"
#include "doco/gossip.hpp"
#include "doco/losses.hpp"
#include "doco/topology.hpp"

namespace doco {

struct SimConfig {
  TopologyKind topology = TopologyKind::complete;
  std::size_t agents = 36;
  std::optional<double> mixing;  // c; 1/N when unset
  Algorithm algorithm = Algorithm::adftrl_adaptive;
  LossRegime regime = LossRegime::convex;
  std::size_t dimension = 10;
  double radius = 2.0;
  std::optional<double> lipschitz;  // default_lipschitz() when unset
  double alpha = 1.0;               // strong convexity of the regularized losses
  DelayParams delay;
  std::size_t rounds = 1000;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  bool known_total_delay = true;            // fixed-rate learner is told D_total
  std::optional<std::size_t> block_length;  // overrides the spectral choice of B

  double loss_alpha() const { return regime == LossRegime::strongly_convex ? alpha : 0.0; }

  double resolved_lipschitz() const {
    return lipschitz.value_or(default_lipschitz(dimension, radius, loss_alpha()));
  }

  void validate() const {
    if (agents < 2) throw ConfigError("N must be at least 2");
    if (agents % 2 != 0) throw ConfigError("N must be even (labels split the agents in half)");
    if (topology == TopologyKind::grid && exact_square_root(agents) == 0)
      throw ConfigError("grid topology needs a perfect-square N");
    if (topology == TopologyKind::custom) throw ConfigError("custom topologies are not supported in SimConfig");
    if (dimension == 0) throw ConfigError("dimension n must be positive");
    if (!(radius > 0.0)) throw ConfigError("radius must be positive");
    if (lipschitz && !(*lipschitz > 0.0)) throw ConfigError("L must be positive");
    if (rounds == 0) throw ConfigError("T must be positive");
    if (trials == 0) throw ConfigError("trials must be positive");
    if (block_length && *block_length == 0) throw ConfigError("block length must be positive");
    if (regime == LossRegime::strongly_convex && !(alpha > 0.0))
      throw ConfigError("strongly convex regime needs alpha > 0");
    if (algorithm == Algorithm::adftrl_sc && regime != LossRegime::strongly_convex)
      throw ConfigError("adftrl_sc needs the strongly_convex loss regime");
    doco::validate(delay);
  }

  // Fields that define the environment; everything except the algorithm.
  bool same_environment(const SimConfig& o) const {
    return topology == o.topology && agents == o.agents && mixing == o.mixing && regime == o.regime &&
           dimension == o.dimension && radius == o.radius && lipschitz == o.lipschitz && alpha == o.alpha &&
           delay.kind == o.delay.kind && delay.max_delay == o.delay.max_delay &&
           delay.success_probability == o.delay.success_probability && delay.constant == o.delay.constant &&
           delay.geometric_offset == o.delay.geometric_offset && rounds == o.rounds && trials == o.trials &&
           seed == o.seed && known_total_delay == o.known_total_delay && block_length == o.block_length;
  }
};

// Everything a trial's learners and the regret accountant see.
struct Environment {
  Graph graph;
  CommMatrix w;
  Domain domain;
  LossStream stream;
  DelaySchedule schedule;
  double lipschitz;
  std::size_t block_length;
  bool spectral_block;  // B comes from the spectral formula (gossip bounds apply)
};

inline Environment make_environment(const SimConfig& cfg, std::size_t trial) {
  cfg.validate();
  Graph g = build_graph(cfg.topology, cfg.agents);
  CommMatrix w = comm_matrix(g, cfg.mixing);
  const std::size_t block = cfg.block_length.value_or(w.block_length);
  return Environment{std::move(g),
                     std::move(w),
                     Domain::ball(cfg.dimension, cfg.radius),
                     generate_stream(cfg.agents, cfg.rounds, cfg.dimension, cfg.seed, cfg.regime, cfg.alpha, trial),
                     generate_schedule(cfg.delay, cfg.agents, cfg.rounds, cfg.seed, trial),
                     cfg.resolved_lipschitz(),
                     block,
                     !cfg.block_length.has_value()};
}

// Runtime checks of the gossip-estimation bounds and of feasibility.
struct InvariantLog {
  std::size_t blocks_checked = 0;
  std::size_t infeasible_plays = 0;
  std::size_t deliveries = 0;
  // |zeta_s^B(u) - M_s| <= 3 s B, where M_s is the network-average cumulative
  // missing count over blocks 1..s-1 (what zeta_s^B tracks).
  std::size_t count_violations = 0;
  double count_worst_ratio = 0.0;
  // Same bound against the cumulative count over blocks 1..s.
  std::size_t count_inclusive_violations = 0;
  // ||z_s^B(u) - zbar_s|| <= 2/(N sqrt N) sum_{l<s} b^{(s-l-1)B} sqrt(sum_v ||y_l(v)||^2).
  std::size_t sum_violations = 0;
  double sum_worst_ratio = 0.0;

  void merge(const InvariantLog& o) {
    blocks_checked += o.blocks_checked;
    infeasible_plays += o.infeasible_plays;
    deliveries += o.deliveries;
    count_violations += o.count_violations;
    count_worst_ratio = std::max(count_worst_ratio, o.count_worst_ratio);
    count_inclusive_violations += o.count_inclusive_violations;
    sum_violations += o.sum_violations;
    sum_worst_ratio = std::max(sum_worst_ratio, o.sum_worst_ratio);
  }

  std::size_t violations() const {
    return infeasible_plays + count_violations + count_inclusive_violations + sum_violations;
  }
};

namespace detail {

// Tracks the exact network averages the gossip channels estimate.
class GossipMonitor {
 public:
  GossipMonitor(std::size_t agents, std::size_t dimension, double contraction, std::size_t block_length)
      : n_(agents), mean_sum_(dimension, 0.0), b_pow_B_(std::pow(contraction, static_cast<double>(block_length))),
        block_length_(block_length) {}

  // Called at the end of full block s, before the block-end update.
  void check(const NetworkLearner& learner, const MissingTable& missing, std::size_t s, InvariantLog& log) {
    const Algorithm alg = learner.params().algorithm;
    const double n = static_cast<double>(n_);
    const double scale = 2.0 / (n * std::sqrt(n));
    const double sB = static_cast<double>(s * block_length_);

    // Geometric weights b^{(s-l-1)B} for l = 1..s-1.
    double sum_bound = 0.0;
    double weight = 1.0;
    for (std::size_t i = spreads_.size(); i-- > 0;) {
      sum_bound += weight * spreads_[i];
      weight *= b_pow_B_;
    }
    sum_bound *= scale;

    if (alg == Algorithm::adftrl_adaptive) {
      double inclusive = cumulative_missing_;
      for (std::size_t v = 0; v < n_; ++v)
        inclusive += static_cast<double>(missing.missing(s * block_length_ + 1, v)) / n;
      for (std::size_t u = 0; u < n_; ++u) {
        const double zeta = learner.count_channel().current(u, 0);
        const double err = std::abs(zeta - cumulative_missing_);
        log.count_worst_ratio = std::max(log.count_worst_ratio, err / (3.0 * sB));
        if (err > 3.0 * sB) ++log.count_violations;
        if (std::abs(zeta - inclusive) > 3.0 * sB) ++log.count_inclusive_violations;
      }
    }
    if (uses_gradient_gossip(alg)) {
      const Matrix& z = learner.gradient_channel().current;
      for (std::size_t u = 0; u < n_; ++u) {
        const double err = distance(z.row(u), mean_sum_);
        const double bound = sum_bound + 1e-9 * (1.0 + norm(mean_sum_));
        if (bound > 0.0) log.sum_worst_ratio = std::max(log.sum_worst_ratio, err / bound);
        if (err > bound) ++log.sum_violations;
      }
    }
    ++log.blocks_checked;
  }

  // Called after the block-end update with the sums just folded in.
  void absorb(const NetworkLearner& learner) {
    const Matrix& y = learner.last_block_sums();
    double sq = 0.0;
    for (std::size_t v = 0; v < n_; ++v) {
      axpy(1.0 / static_cast<double>(n_), y.row(v), mean_sum_);
      sq += dot(y.row(v), y.row(v));
    }
    spreads_.push_back(std::sqrt(sq));
    for (std::size_t q : learner.last_block_missing())
      cumulative_missing_ += static_cast<double>(q) / static_cast<double>(n_);
  }

 private:
  std::size_t n_;
  Vector mean_sum_;             // zbar: (1/N) sum_{l<s} sum_v y_l(v)
  std::vector<double> spreads_; // sqrt(sum_v ||y_l(v)||^2), l = 1..s-1
  double cumulative_missing_ = 0.0;
  double b_pow_B_;
  std::size_t block_length_;
};

}  // namespace detail

struct SimulationOutput {
  Trajectory trajectory;
  InvariantLog invariants;
};

inline LearnerParams learner_params(Algorithm algorithm, const Environment& env, double alpha, double d_total) {
  LearnerParams p;
  p.algorithm = algorithm;
  p.block_length = env.block_length;
  p.rounds = env.stream.rounds();
  p.lipschitz = env.lipschitz;
  p.alpha = alpha;
  p.d_total = d_total;
  return p;
}

// Runs one algorithm on one environment and records every played decision.
inline SimulationOutput simulate(const Environment& env, const LearnerParams& params) {
  const std::size_t n = env.stream.agents();
  const std::size_t rounds = env.stream.rounds();
  const std::size_t dim = env.stream.dimension();
  const std::size_t block = params.block_length;
  if (env.schedule.agents() != n || env.schedule.rounds() != rounds || env.w.size() != n)
    throw ConfigError("environment components disagree on N or T");

  NetworkLearner learner(env.w, env.domain, params);
  const auto calendar = arrival_calendar(env.schedule);
  const MissingTable missing(env.schedule);
  detail::GossipMonitor monitor(n, dim, env.w.contraction, block);
  const bool check_gossip = env.spectral_block;

  SimulationOutput out{Trajectory(rounds, n, dim), {}};
  Trajectory gradients(rounds, n, dim);  // g_tau(u), evaluated at play time

  for (std::size_t t = 1; t <= rounds; ++t) {
    for (std::size_t u = 0; u < n; ++u) {
      const auto x = learner.decision(u);
      std::copy(x.begin(), x.end(), out.trajectory.at(t, u).begin());
      if (!env.domain.contains(x)) ++out.invariants.infeasible_plays;
      env.stream.gradient(t, u, x, gradients.at(t, u));
    }
    learner.advance_round();
    for (const Arrival& a : calendar[t]) {
      learner.deliver(a.agent, gradients.at(a.origin_round, a.agent));
      ++out.invariants.deliveries;
    }
    if (t % block == 0 && t < rounds) {
      const std::size_t s = t / block;
      if (check_gossip) monitor.check(learner, missing, s, out.invariants);
      learner.end_block();
      monitor.absorb(learner);
    } else if (t == rounds && t % block == 0 && check_gossip) {
      monitor.check(learner, missing, t / block, out.invariants);
    }
  }
  return out;
}

struct TrialResult {
  std::size_t trial = 0;
  RegretReport report;
  InvariantLog invariants;
};

// x_star is shared when several algorithms run on the same environment.
inline TrialResult evaluate(const Environment& env, Algorithm algorithm, const SimConfig& cfg,
                            std::size_t trial, std::span<const double> x_star) {
  const double d_total =
      cfg.known_total_delay ? delay_stats(env.schedule, env.block_length).d_total : 0.0;
  SimulationOutput sim = simulate(env, learner_params(algorithm, env, cfg.loss_alpha(), d_total));
  TrialResult r;
  r.trial = trial;
  r.report = regret_curve(sim.trajectory, env.stream, x_star);
  r.invariants = sim.invariants;
  return r;
}

inline TrialResult run_trial(const SimConfig& cfg, std::size_t trial) {
  const Environment env = make_environment(cfg, trial);
  const OfflineOptimum opt = offline_optimum(env.stream, env.domain);
  return evaluate(env, cfg.algorithm, cfg, trial, opt.x_star);
}

struct TrialSummary {
  std::size_t trial = 0;
  std::vector<double> max_curve;      // max_u Reg_t(u), t = 1..T
  std::vector<double> final_regrets;  // Reg_T(u) per agent
  InvariantLog invariants;
};

struct ExperimentResult {
  SimConfig config;
  std::size_t block_length = 0;
  double lipschitz = 0.0;
  double sigma2 = 0.0;
  double theta = 0.0;
  std::vector<double> mean_curve;  // pointwise over trials
  std::vector<double> std_curve;   // sample (n-1) convention, 0 for one trial
  std::vector<TrialSummary> trials;
  InvariantLog invariants;
  double wall_seconds = 0.0;

  double final_mean() const { return mean_curve.back(); }
};

inline void aggregate(ExperimentResult& r) {
  const std::size_t k = r.trials.size();
  const std::size_t rounds = r.trials.front().max_curve.size();
  r.mean_curve.assign(rounds, 0.0);
  r.std_curve.assign(rounds, 0.0);
  for (const TrialSummary& t : r.trials)
    for (std::size_t i = 0; i < rounds; ++i) r.mean_curve[i] += t.max_curve[i];
  for (double& m : r.mean_curve) m /= static_cast<double>(k);
  if (k > 1) {
    for (const TrialSummary& t : r.trials)
      for (std::size_t i = 0; i < rounds; ++i) {
        const double d = t.max_curve[i] - r.mean_curve[i];
        r.std_curve[i] += d * d;
      }
    for (double& s : r.std_curve) s = std::sqrt(s / static_cast<double>(k - 1));
  }
  for (const TrialSummary& t : r.trials) r.invariants.merge(t.invariants);
}

inline std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs `count` independent jobs on up to `threads` workers. Each job writes
// only its own output slot.
template <typename Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Runs configurations that differ only in the algorithm on identical
// per-trial environments (paired comparison).
inline std::vector<ExperimentResult> compare_algorithms(const std::vector<SimConfig>& cfgs,
                                                        std::size_t threads = default_threads()) {
  if (cfgs.empty()) return {};
  for (const SimConfig& c : cfgs) {
    c.validate();
    if (!c.same_environment(cfgs.front()))
      throw ConfigError("compare_algorithms: configurations differ in more than the algorithm");
  }
  const auto start = std::chrono::steady_clock::now();
  const SimConfig& base = cfgs.front();
  const std::size_t trials = base.trials;
  std::vector<ExperimentResult> results(cfgs.size());
  for (std::size_t a = 0; a < cfgs.size(); ++a) {
    results[a].config = cfgs[a];
    results[a].trials.resize(trials);
  }

  parallel_for(trials, threads, [&](std::size_t trial) {
    const Environment env = make_environment(base, trial);
    const OfflineOptimum opt = offline_optimum(env.stream, env.domain);
    for (std::size_t a = 0; a < cfgs.size(); ++a) {
      TrialResult r = evaluate(env, cfgs[a].algorithm, cfgs[a], trial, opt.x_star);
      TrialSummary& s = results[a].trials[trial];
      s.trial = trial;
      s.max_curve = r.report.max_curve();
      s.final_regrets.resize(r.report.agents);
      for (std::size_t u = 0; u < r.report.agents; ++u) s.final_regrets[u] = r.report.final_regret(u);
      s.invariants = r.invariants;
    }
  });

  const Graph g = build_graph(base.topology, base.agents);
  const CommMatrix w = comm_matrix(g, base.mixing);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (ExperimentResult& r : results) {
    r.block_length = base.block_length.value_or(w.block_length);
    r.lipschitz = base.resolved_lipschitz();
    r.sigma2 = w.sigma2;
    r.theta = w.theta;
    r.wall_seconds = seconds;
    aggregate(r);
  }
  return results;
}

inline ExperimentResult run_experiment(const SimConfig& cfg, std::size_t threads = default_threads()) {
  return std::move(compare_algorithms({cfg}, threads).front());
}

}  // namespace doco
