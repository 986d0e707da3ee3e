#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "doco/instances.hpp"

using namespace doco;

TEST(LowerBound, InvariantsHoldAcrossParameters) {
  for (std::size_t m : {2u, 4u, 8u})
    for (std::size_t d : {0u, 3u, 10u})
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto inst = lower_bound_instance(m, d, 1.5, 2.0, 120, seed);
        EXPECT_EQ(check_instance(inst), "") << "M=" << m << " d=" << d;
        EXPECT_EQ(inst.agents(), 2 * (m + 1));
        EXPECT_EQ(inst.windows(), (120 + m + d - 1) / (m + d));
      }
}

TEST(LowerBound, ZeroHalfAndLipschitz) {
  const auto inst = lower_bound_instance(4, 2, 3.0, 2.0, 60, 9);
  const Vector x{0.4, -0.7};
  for (std::size_t t = 1; t <= 60; ++t) {
    double zero_half = 0;
    for (std::size_t v = 0; v <= 4; ++v) zero_half += inst.stream.value(t, v, x);
    EXPECT_EQ(zero_half, 0.0);
    for (std::size_t v = 5; v < 10; ++v) {
      const Vector g = inst.stream.gradient(t, v, x);
      EXPECT_EQ(norm(g), 3.0);
      EXPECT_EQ(g, inst.stream.gradient(t, v, Vector{-0.9, 0.1}));  // constant in x
      EXPECT_EQ(g[0], 3.0 * inst.signs[inst.window_of(t)]);
    }
  }
}

TEST(LowerBound, SignsChangeOnlyAtWindowBoundaries) {
  const auto inst = lower_bound_instance(2, 3, 1.0, 2.0, 100, 4);
  for (std::size_t t = 2; t <= 100; ++t)
    if ((t - 1) % 5 != 0) EXPECT_EQ(inst.stream.feature(t, 3)[0], inst.stream.feature(t - 1, 3)[0]);
  std::size_t flips = 0;
  for (std::size_t k = 1; k < inst.windows(); ++k) flips += inst.signs[k] != inst.signs[k - 1];
  EXPECT_GT(flips, 0u);
}

TEST(LowerBound, GeometryAndGossipMatrix) {
  const auto inst = lower_bound_instance(8, 5, 1.0, 2.0, 200, 1);
  EXPECT_EQ(inst.agents(), 18u);
  EXPECT_NEAR(inst.w.c, 0.25, 1e-12);
  EXPECT_NEAR(inst.w.sigma2, 1.0 - (2.0 - 2.0 * std::cos(2.0 * 3.14159265358979323846 / 18)) / 4.0, 1e-12);
  EXPECT_LE(1.0 / (1.0 - inst.w.sigma2), 18.0 * 18.0 / 2.0);
  EXPECT_EQ(inst.direction, (Vector{1.0, 0.0}));
  EXPECT_DOUBLE_EQ(inst.domain.diameter(), 2.0);
  EXPECT_EQ(inst.probe_agent(), 4u);
}

TEST(LowerBound, AllPlusSignsGiveLinearRegretWithinAWindow) {
  const auto inst = lower_bound_instance(2, 2, 1.0, 2.0, 40, 1, SignMode::all_plus);
  for (int s : inst.signs) EXPECT_EQ(s, 1);
  // The comparator sits at -R e_1; an algorithm playing 0 loses M+1 agents x L R per round.
  const OfflineOptimum opt = offline_optimum(inst.stream, inst.domain);
  EXPECT_NEAR(opt.x_star[0], -1.0, 1e-15);
  Trajectory zero(40, inst.agents(), 2);
  const RegretReport r = regret_curve(zero, inst.stream, opt.x_star);
  for (std::size_t t = 1; t <= 4; ++t) EXPECT_NEAR(r.regret(t, 0), 3.0 * static_cast<double>(t), 1e-12);
}

TEST(LowerBound, EvaluationReportsProbeAndMax) {
  const auto inst = lower_bound_instance(4, 2, 1.0, 2.0, 300, 5);
  const LowerBoundResult r = lower_bound_eval(Algorithm::adftrl_fixed, inst);
  EXPECT_GE(r.max_regret, r.probe_regret);
  EXPECT_GT(r.block_length, 0u);
  EXPECT_EQ(r.invariants.violations(), 0u);
  EXPECT_THROW(lower_bound_eval(Algorithm::adftrl_sc, inst), ConfigError);
}

TEST(LowerBound, RejectsBadParameters) {
  EXPECT_THROW(lower_bound_instance(3, 1, 1.0, 2.0, 50, 1), ConfigError);
  EXPECT_THROW(lower_bound_instance(0, 1, 1.0, 2.0, 50, 1), ConfigError);
  EXPECT_THROW(lower_bound_instance(4, 10, 1.0, 2.0, 5, 1), ConfigError);
  EXPECT_THROW(lower_bound_instance(4, 1, 0.0, 2.0, 50, 1), ConfigError);
}

TEST(LowerBound, ExportsThroughLossCsv) {
  const auto inst = lower_bound_instance(2, 1, 1.0, 2.0, 12, 3);
  std::istringstream in(to_csv(inst.stream));
  EXPECT_EQ(load_stream_csv(in, inst.agents(), 12, LossStream::Form::linear, 0.0), inst.stream);
}
