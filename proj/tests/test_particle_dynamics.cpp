#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "csrbm/errors.hpp"
#include "csrbm/initial.hpp"
#include "csrbm/particle_dynamics.hpp"

using namespace csrbm;

namespace {

Ensemble random_ensemble(int n, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, d), v(n, d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      x(i, c) = g(rng);
      v(i, c) = g(rng);
    }
  return {x, v};
}

StepperSpec rk4(double dt) {
  StepperSpec s;
  s.dt = dt;
  return s;
}

}  // namespace

TEST(CsRhs, FlockedVelocitiesAreFixed) {
  Ensemble e = random_ensemble(7, 2, 1);
  e.velocities.rowwise() = Eigen::RowVector2d(0.3, -0.4);
  const CsDerivative d = cs_rhs(e, KernelSpec::inverse_power(0.5));
  EXPECT_EQ(d.dv.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(d.dx, e.velocities);
}

TEST(CsRhs, TwoParticleHandValue) {
  Eigen::MatrixXd x(2, 1), v(2, 1);
  x << 0.0, 1.0;
  v << -1.0, 1.0;
  const CsDerivative d = cs_rhs({x, v}, KernelSpec::constant(1.0));
  EXPECT_EQ(d.dv(0, 0), 2.0);
  EXPECT_EQ(d.dv(1, 0), -2.0);
}

TEST(CsRhs, MatchesBruteForceAndSumsToZero) {
  const Ensemble e = random_ensemble(5, 3, 2);
  const KernelSpec k = KernelSpec::inverse_power(0.3, 1.7);
  const CsDerivative d = cs_rhs(e, k);
  for (int i = 0; i < 5; ++i)
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int j = 0; j < 5; ++j) {
        const double r = (e.positions.row(j) - e.positions.row(i)).norm();
        acc += std::pow(1.0 + r * r, -0.3) * (e.velocities(j, c) - e.velocities(i, c));
      }
      EXPECT_NEAR(d.dv(i, c), 1.7 / 4.0 * acc, 1e-14);
    }
  EXPECT_LE(d.dv.colwise().sum().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CsRhs, SingleParticleRejected) {
  EXPECT_THROW(cs_rhs(random_ensemble(1, 1, 3), KernelSpec::constant(1.0)), DomainError);
}

TEST(BatchPlan, PartitionProperties) {
  const BatchPlan plan = sample_batch_plan(12, 3, 5, 99);
  EXPECT_EQ(plan.batch_count(), 4);
  std::vector<int> seen(12, 0);
  for (int q = 0; q < 4; ++q) {
    auto b = plan.batch(q);
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    for (int i : b) {
      ++seen[i];
      EXPECT_EQ(plan.assignment[i], q);
    }
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(BatchPlan, SingleBatchWhenPEqualsN) {
  const BatchPlan plan = sample_batch_plan(4, 4, 0, 1);
  EXPECT_EQ(plan.members, (std::vector<int>{0, 1, 2, 3}));
}

TEST(BatchPlan, DeterministicInSeedAndStep) {
  EXPECT_EQ(sample_batch_plan(64, 2, 3, 7).members, sample_batch_plan(64, 2, 3, 7).members);
  EXPECT_NE(sample_batch_plan(64, 2, 3, 7).members, sample_batch_plan(64, 2, 4, 7).members);
}

TEST(BatchPlan, PairFrequencyIsOneThird) {
  // Of the 3 perfect matchings of {0,1,2,3}, one pairs 0 with 1.
  int together = 0;
  const int draws = 30000;
  for (int s = 0; s < draws; ++s) {
    const BatchPlan plan = sample_batch_plan(4, 2, s, 2024);
    together += plan.assignment[0] == plan.assignment[1];
  }
  EXPECT_NEAR(static_cast<double>(together) / draws, 1.0 / 3.0, 0.01);
}

TEST(BatchPlan, RejectsBadSizes) {
  EXPECT_THROW(sample_batch_plan(10, 3, 0, 1), ConfigError);
  EXPECT_THROW(sample_batch_plan(10, 1, 0, 1), ConfigError);
}

TEST(RbmStep, FlockedEnsembleTranslates) {
  Ensemble e = random_ensemble(8, 2, 4);
  e.velocities.rowwise() = Eigen::RowVector2d(1.0, 0.5);
  const Ensemble out = rbm_step(e, sample_batch_plan(8, 2, 0, 1), KernelSpec::inverse_power(0.2), rk4(0.1), 0.1);
  EXPECT_EQ(out.velocities, e.velocities);
  EXPECT_LE((out.positions - e.positions - 0.1 * e.velocities).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RbmStep, PerBatchMomentumConserved) {
  const Ensemble e = random_ensemble(64, 2, 5);
  const BatchPlan plan = sample_batch_plan(64, 2, 0, 11);
  const Ensemble out = rbm_step(e, plan, KernelSpec::inverse_power(0.5), rk4(1e-2), 1e-2);
  const Eigen::MatrixXd before = batch_momenta(e, plan), after = batch_momenta(out, plan);
  for (Eigen::Index q = 0; q < before.rows(); ++q)
    EXPECT_LE((after.row(q) - before.row(q)).norm(), 1e-12 * (1.0 + before.row(q).norm()));
}

TEST(RbmStep, FullBatchEqualsFullStep) {
  const Ensemble e = random_ensemble(16, 2, 6);
  const KernelSpec k = KernelSpec::inverse_power(0.4);
  const Ensemble a = rbm_step(e, sample_batch_plan(16, 16, 0, 3), k, rk4(1e-2), 1e-2);
  const Ensemble b = full_step(e, k, rk4(1e-2), 1e-2);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.velocities, b.velocities);
}

TEST(Diagnostics, Diameters) {
  Eigen::MatrixXd x(1, 2), v(1, 2);
  x << 1.0, 2.0;
  v << 3.0, 4.0;
  Diagnostics one = diagnostics({x, v});
  EXPECT_EQ(one.diam_x, 0.0);
  EXPECT_EQ(one.diam_v, 0.0);

  Eigen::MatrixXd x2(2, 1), v2(2, 1);
  x2 << 0.0, 3.0;
  v2 << 1.0, 1.0;
  Diagnostics two = diagnostics({x2, v2});
  EXPECT_EQ(two.diam_x, 3.0);
  EXPECT_EQ(two.diam_v, 0.0);
  EXPECT_EQ(two.kinetic_energy, 2.0);

  const Ensemble e = random_ensemble(100, 2, 7);
  double brute = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) brute = std::max(brute, (e.velocities.row(i) - e.velocities.row(j)).norm());
  const Diagnostics g = diagnostics(e);
  EXPECT_EQ(g.diam_v, brute);
  EXPECT_FALSE(g.approximate);
}

TEST(Diagnostics, SubsampledAboveLimit) {
  const Ensemble e = random_ensemble(300, 1, 8);
  const Diagnostics g = diagnostics(e, 100, 5);
  EXPECT_TRUE(g.approximate);
  EXPECT_LE(g.diam_v, diagnostics(e).diam_v);
}

TEST(Simulate, ZeroFinalTimeRecordsInitialOnly) {
  SimulationConfig cfg;
  cfg.kernel = KernelSpec::inverse_power(0.3);
  cfg.final_time = 0.0;
  const Trajectory t = simulate(random_ensemble(8, 1, 9), cfg);
  EXPECT_EQ(t.times.size(), 1u);
}

TEST(Simulate, ConfigErrorsBeforeStepping) {
  SimulationConfig cfg;
  cfg.batch_size = 3;
  EXPECT_THROW(simulate(random_ensemble(8, 1, 9), cfg), ConfigError);
}

TEST(Simulate, FullSystemVelocityDiameterDecays) {
  SimulationConfig cfg;
  cfg.mode = DynamicsMode::full;
  cfg.kernel = KernelSpec::inverse_power(0.1);
  cfg.final_time = 5.0;
  const Trajectory t = simulate(random_ensemble(64, 2, 10), cfg);
  double max_x = 0.0;
  for (std::size_t s = 1; s < t.times.size(); ++s) {
    EXPECT_LE(t.diagnostics[s].diam_v, t.diagnostics[s - 1].diam_v + 1e-12);
    max_x = std::max(max_x, t.diagnostics[s].diam_x);
  }
  // psi is bounded below by its value at the largest realized distance.
  const double psi0 = std::pow(1.0 + max_x * max_x, -0.1);
  const double slope = (std::log(t.diagnostics.back().diam_v) - std::log(t.diagnostics.front().diam_v)) / 5.0;
  EXPECT_LE(slope, -psi0 * 0.8);
}

TEST(Simulate, RbmKineticEnergyNonincreasing) {
  SimulationConfig cfg;
  cfg.kernel = KernelSpec::inverse_power(0.5);
  cfg.final_time = 1.0;
  cfg.seed = 12;
  const Trajectory t = simulate(random_ensemble(64, 1, 11), cfg);
  for (std::size_t s = 1; s < t.times.size(); ++s)
    EXPECT_LE(t.diagnostics[s].kinetic_energy, t.diagnostics[s - 1].kinetic_energy + 1e-10);
}

TEST(Simulate, SnapshotsAtRequestedTimes) {
  SimulationConfig cfg;
  cfg.kernel = KernelSpec::inverse_power(0.5);
  cfg.final_time = 0.1;
  cfg.snapshot_times = {0.0, 0.05, 0.1};
  const Trajectory t = simulate(random_ensemble(8, 1, 12), cfg);
  ASSERT_EQ(t.snapshots.size(), 3u);
  EXPECT_DOUBLE_EQ(t.snapshots[1].time, 0.05);
  EXPECT_EQ(t.snapshots[2].velocities, t.final_state.velocities);
}
