#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "csrbm/config.hpp"
#include "csrbm/csv_io.hpp"
#include "csrbm/errors.hpp"
#include "csrbm/experiments.hpp"
#include "csrbm/initial.hpp"
#include "csrbm/parallel.hpp"

using namespace csrbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("csrbm_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Sampler, HomogeneousBimodalMoments) {
  const int n = 100000;
  const Ensemble e = sample_initial(InitialDistribution::homogeneous_bimodal(), n, 1, 1);
  const double mean = e.velocities.mean();
  const double var = (e.velocities.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(0.35 / n));
  EXPECT_NEAR(var, 0.35, 0.05 * 0.35);
  EXPECT_EQ(e.positions.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sampler, AnnulusGeometry) {
  const Ensemble e = sample_initial(InitialDistribution::annulus(), 2000, 2, 2);
  for (int i = 0; i < e.size(); ++i) {
    const double r = e.positions.row(i).norm();
    EXPECT_GE(r, 0.5);
    EXPECT_LE(r, 1.0);
    EXPECT_NEAR(e.velocities.row(i).norm(), 1.0, 1e-12);
    EXPECT_NEAR(e.positions.row(i).dot(e.velocities.row(i)), 0.0, 1e-12);
    // Counterclockwise: x1 v2 - x2 v1 > 0.
    EXPECT_GT(e.positions(i, 0) * e.velocities(i, 1) - e.positions(i, 1) * e.velocities(i, 0), 0.0);
  }
}

TEST(Sampler, SeedDeterminesEnsemble) {
  const auto a = sample_initial(InitialDistribution::cs1d(), 50, 1, 9);
  const auto b = sample_initial(InitialDistribution::cs1d(), 50, 1, 9);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_NE(a.velocities, sample_initial(InitialDistribution::cs1d(), 50, 1, 10).velocities);
}

TEST(Sampler, DimensionMismatchRejected) {
  EXPECT_THROW(sample_initial(InitialDistribution::annulus(), 10, 1, 1), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  ScenarioConfig c = default_config(Scenario::cs2d);
  c.seed = 42;
  c.n = 512;
  c.p = 4;
  c.order = 2;
  c.snapshot_times = {0.0, 1.5};
  const ScenarioConfig back = apply_json(default_config(Scenario::homogeneous), to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(back.scenario, Scenario::cs2d);
  EXPECT_EQ(back.p, 4);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(apply_json(default_config(Scenario::cs1d), nlohmann::json::parse(R"({"Nparticles": 3})")),
               ConfigError);
  EXPECT_THROW(apply_json(default_config(Scenario::cs1d), nlohmann::json::parse(R"({"kernel": {"gama": 1}})")),
               ConfigError);
}

TEST(Config, ValidationCatchesBatchSize) {
  ScenarioConfig c = default_config(Scenario::cs1d);
  c.seed = 1;
  c.n = 100;
  c.p = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c.p = 4;
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SeedIsRequired) {
  ScenarioConfig c = default_config(Scenario::cs1d);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ScenarioNames) {
  for (Scenario s : {Scenario::homogeneous, Scenario::cs1d, Scenario::cs2d, Scenario::epsilon_scan,
                     Scenario::tau_scan, Scenario::n_scan, Scenario::p_scan, Scenario::dt_scan})
    EXPECT_EQ(scenario_from_string(to_string(s)), s);
  EXPECT_THROW(scenario_from_string("cs3d"), ConfigError);
}

TEST(Csv, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "a.csv", {"x", "n", "label"});
    w.row({0.25, 3LL, std::string("ok")});
  }
  EXPECT_EQ(slurp(dir / "a.csv"), "x,n,label\n0.25,3,ok\n");
  CsvWriter w(dir / "b.csv", {"x"});
  EXPECT_THROW(w.row_values({1.0, 2.0}), UsageError);
}

TEST(Csv, TimeTag) {
  EXPECT_EQ(time_tag(0.5), "t0.5");
  EXPECT_EQ(time_tag(2.0), "t2");
}

TEST(Experiments, ParticleRunWritesTables) {
  ScenarioConfig c = default_config(Scenario::cs1d);
  c.seed = 3;
  c.n = 64;
  c.final_time = 0.2;
  c.snapshot_times = {0.0, 0.2};
  const fs::path dir = scratch("particles");
  const Trajectory t = run_particles(c, DynamicsMode::rbm, 0.0, dir);
  EXPECT_EQ(t.times.size(), 21u);
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.json"));
}

TEST(Experiments, CsGpcConservesModeMomentum) {
  ScenarioConfig c = default_config(Scenario::cs2d);
  c.seed = 4;
  c.n = 64;
  c.order = 2;
  c.final_time = 0.5;
  c.snapshot_times = {};
  const CsResult r = run_cs(c);
  EXPECT_LE(r.max_momentum_drift, 1e-10);
  EXPECT_LT(r.diam_vT, r.diam_v0);
}

TEST(Experiments, OutputsIndependentOfWorkerCount) {
  ScenarioConfig c = default_config(Scenario::homogeneous);
  c.seed = 5;
  c.n = 64;
  c.n_replicates = 3;
  c.final_time = 0.1;
  c.snapshot_times = {0.1};
  c.grid.cells = 20;
  c.grid.dv = 0.02;
  const fs::path a = scratch("workers1"), b = scratch("workers3");
  set_default_workers(1);
  run_homogeneous(c, a);
  set_default_workers(3);
  run_homogeneous(c, b);
  set_default_workers(0);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 4);
}
