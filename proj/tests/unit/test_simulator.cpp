#include <gtest/gtest.h>

#include <cmath>

#include "scalelaw/simulator.hpp"

using namespace scalelaw;

namespace {

Spectrum small_spec() { return power_law_spectrum(1.5, 1.0, 24); }

}  // namespace

TEST(Simulator, SameSeedSameCurve) {
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 12, 30, 0.2);
  OptimizerConfig opt;
  opt.eta = 0.3;
  opt.steps = 20;
  LossCurve a = simulate(s, sh, opt, 5), b = simulate(s, sh, opt, 5), c = simulate(s, sh, opt, 6);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train, b.train);
  EXPECT_NE(a.test, c.test);
}

TEST(Simulator, InitialLoss) {
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 12, 30, 0.2);
  OptimizerConfig opt;
  opt.steps = 2;
  LossCurve c = simulate(s, sh, opt, 1);
  EXPECT_NEAR(c.test[0], s.initial_loss() + 0.04, 1e-14);

  SystemShape np = SystemShape::counts(24, 12, 30, 0.2, Limit::nonproportional);
  LossCurve d = simulate(s, np, opt, 1);
  EXPECT_NEAR(d.test[0], 24 * s.initial_loss() + 0.04, 1e-12);
}

TEST(Simulator, FlowMatchesSmallStepDescent) {
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 16, 40, 0.3);
  Disorder d = draw_disorder(sh, s, 3);
  OptimizerConfig opt;
  opt.eta = 1e-3;
  opt.steps = 2001;
  LossCurve gd = run_discrete_gd(d, s, sh, opt);
  LossCurve fl = run_gradient_flow_exact(d, s, sh, {0.0, 1.0, 2.0});
  EXPECT_NEAR(fl.test[0], gd.test[0], 1e-14);
  EXPECT_NEAR(fl.train[0], gd.train[0], 1e-12);
  EXPECT_NEAR(fl.test[2], gd.test[2000], 2e-3 * fl.test[2]);
  EXPECT_NEAR(fl.train[2], gd.train[2000], 2e-3 * fl.train[2]);
}

TEST(Simulator, FlowLimitInterpolatesWhenUnderparameterizedData) {
  // P < N: the converged flow fits the training set exactly.
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 20, 10, 0.3);
  Disorder d = draw_disorder(sh, s, 2);
  LossCurve fl = run_gradient_flow_exact(d, s, sh, {kInf});
  EXPECT_LT(fl.train[0], 1e-18);
}

TEST(Simulator, DivergenceIsReported) {
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 12, 30, 0.0);
  OptimizerConfig opt;
  opt.eta = 50.0;
  opt.steps = 200;
  EXPECT_THROW(simulate(s, sh, opt, 1), Diverged);
}

TEST(Simulator, MemoryBudget) {
  Spectrum s = small_spec();
  std::size_t old = memory_budget();
  set_memory_budget(1000);
  EXPECT_THROW(draw_disorder(SystemShape::counts(24, 12, 30, 0.0), s, 1), ResourceError);
  set_memory_budget(old);
}

TEST(Simulator, MultiSeedStatistics) {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  LossCurve m = multi_seed(seeds, [](std::uint64_t sd) {
    LossCurve c;
    c.t = {0.0};
    c.test = {double(sd)};
    c.train = {2.0 * double(sd)};
    return c;
  });
  EXPECT_EQ(m.seeds, 3u);
  EXPECT_DOUBLE_EQ(m.test[0], 2.0);
  EXPECT_DOUBLE_EQ(m.std_test[0], 1.0);
  EXPECT_DOUBLE_EQ(m.std_train[0], 2.0);
}

TEST(Simulator, SgdBatchAverageOfTrainIsTestAtStart) {
  // Fresh batches: E[train(t)] = test(t) at every step; check the average at t = 0.
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 12, kInf, 0.2);
  OptimizerConfig opt;
  opt.kind = OptimizerKind::one_pass_sgd;
  opt.batch = 64;
  opt.eta = 0.2;
  opt.steps = 1;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 1; i <= 200; ++i) seeds.push_back(i);
  LossCurve m = multi_seed(seeds, [&](std::uint64_t sd) { return simulate(s, sh, opt, sd); });
  double se = m.std_train[0] / std::sqrt(200.0);
  EXPECT_NEAR(m.train[0], m.test[0], 4 * se);
}

TEST(Simulator, EnsembleOfOneIsPlainDescent) {
  Spectrum s = small_spec();
  SystemShape sh = SystemShape::counts(24, 12, 30, 0.2);
  OptimizerConfig opt;
  opt.eta = 0.3;
  opt.steps = 10;
  LossCurve e = run_ensemble_bag(s, sh, opt, 1, 1, 9);
  LossCurve g = simulate(s, sh, opt, 9);
  for (std::size_t t = 0; t < 10; ++t) EXPECT_NEAR(e.test[t], g.test[t], 1e-12);
}
