#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "csrbm/cleanliness.hpp"
#include "csrbm/config.hpp"
#include "csrbm/kinetic_reference.hpp"
#include "csrbm/meanfield_rbm.hpp"

namespace csrbm {

// Every driver writes its CSV tables and a config.json sidecar into `dir`;
// an empty path skips all file output.

/// One RBM-gPC run of the space-homogeneous problem.
struct HomogeneousRun {
  std::vector<double> times;
  std::vector<double> temperature;  // expected temperature at each time
  std::vector<Histogram> snapshots;  // expected velocity density at the config's snapshot times
  Histogram final_density;
};

/// N particles, batch size p, time step dt (a shorter last step lands exactly
/// on T). `grid` (velocity axis) enables density output.
HomogeneousRun homogeneous_replicate(const ScenarioConfig& cfg, int n, int p, double dt, std::uint64_t initial_seed,
                                     std::uint64_t batch_seed, const PhaseGrid* grid = nullptr);

/// Kinetic reference of the homogeneous problem: chaos-mode velocity density
/// from the finite-difference solver at T.
struct KineticReference {
  VelocityGrid grid;
  FgpcTrajectory trajectory;
  double temperature = 0.0;  // expected temperature at T
};
KineticReference homogeneous_kinetic_reference(const ScenarioConfig& cfg);

/// Zeroth-mode density of the kinetic reference averaged onto a coarser
/// histogram grid over the velocity axis.
Histogram coarsen_density(const KineticReference& ref, const PhaseGrid& grid);

struct HomogeneousResult {
  KineticReference reference;
  std::vector<double> final_temperature;  // one per replicate
  double mse = 0.0;
  double mse_stderr = 0.0;
  double err_tv = 0.0;
  double err_tv_stderr = 0.0;
};
HomogeneousResult run_homogeneous(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});

struct CsResult {
  std::vector<double> times;
  Eigen::MatrixXd mode_momentum_initial;  // (K+1) x d
  double max_momentum_drift = 0.0;        // max over steps and modes of |m_k(t) - m_k(0)|
  double diam_x0 = 0.0, diam_v0 = 0.0;    // mode-0 ensemble
  double diam_xT = 0.0, diam_vT = 0.0;
  GpcEnsemble final_state;
};
CsResult run_cs(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});

/// One row of an MSE_T scan.
struct ScanRow {
  int n = 0;
  int p = 0;
  double dt = 0.0;
  int replicates = 0;
  double mse = 0.0;
  double mse_stderr = 0.0;
  double err_tv = 0.0;  // n_scan only
  double err_tv_stderr = 0.0;
};

/// MSE_T against the kinetic reference for each N of scans.n_values.
std::vector<ScanRow> run_n_scan(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});
/// MSE_T against a p = N run from the same initial data, per replicate.
std::vector<ScanRow> run_p_scan(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});
/// MSE_T against a run at scans.anchor_dt (p = cfg.p, independent batches)
/// from the same initial data, per replicate.
std::vector<ScanRow> run_dt_scan(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});

struct EpsilonScan {
  std::vector<EpsilonEstimate> rows;
  double slope = 0.0;  // log eps_hat against log N
};
EpsilonScan run_epsilon_scan(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});

Theorem2Result run_tau_scan(const ScenarioConfig& cfg, const std::filesystem::path& dir = {});

/// Particle dynamics (full or RBM) of the scenario's initial data with the
/// kernel's random parameter frozen at `theta`.
Trajectory run_particles(const ScenarioConfig& cfg, DynamicsMode mode, double theta,
                         const std::filesystem::path& dir = {});

/// Dispatches on cfg.scenario.
void run_experiment(const ScenarioConfig& cfg, const std::filesystem::path& dir);

}  // namespace csrbm
