#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "csrbm/integrators.hpp"
#include "csrbm/kernels.hpp"

namespace csrbm {

/// Positions and velocities of N particles in d dimensions (rows are
/// particles).
struct Ensemble {
  Eigen::MatrixXd positions;
  Eigen::MatrixXd velocities;
  double time = 0.0;

  Ensemble() = default;
  Ensemble(Eigen::MatrixXd x, Eigen::MatrixXd v, double t = 0.0)
      : positions(std::move(x)), velocities(std::move(v)), time(t) {}

  int size() const { return static_cast<int>(positions.rows()); }
  int dim() const { return static_cast<int>(positions.cols()); }

  /// Throws ConfigError on empty, mismatched or non-finite data.
  void validate() const;
};

/// One random partition of {0..n-1} into n/p batches of size p.
/// Batch q occupies members[q*p, (q+1)*p), sorted ascending.
struct BatchPlan {
  int n = 0;
  int p = 0;
  long step_index = 0;
  std::vector<int> members;
  std::vector<int> assignment;  // batch index of each particle

  int batch_count() const { return p > 0 ? n / p : 0; }
  std::span<const int> batch(int q) const {
    return {members.data() + static_cast<std::size_t>(q) * static_cast<std::size_t>(p), static_cast<std::size_t>(p)};
  }

  /// The trivial plan with every particle in one batch (the full system).
  static BatchPlan single(int n, long step_index = 0);
};

/// Uniform random partition via a Fisher-Yates shuffle of 0..n-1, chunked
/// into consecutive blocks. Deterministic in (seed, step_index).
BatchPlan sample_batch_plan(int n, int p, long step_index, std::uint64_t seed);

struct CsDerivative {
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dv;
};

/// Right-hand side of the full N-particle system with prefactor kappa/(N-1).
CsDerivative cs_rhs(const Ensemble& ens, const KernelSpec& spec);

/// Derivative of a p-particle batch state laid out as
/// [X (p x d, row-major) | V (p x d, row-major)], prefactor kappa/(p-1).
/// `workers` > 1 splits rows i across threads.
void cs_batch_rhs(const KernelSpec& spec, int p, int d, std::span<const double> y, std::span<double> dy,
                  int workers = 1);

/// Evolves every batch of `plan` independently for time tau.
Ensemble rbm_step(const Ensemble& ens, const BatchPlan& plan, const KernelSpec& spec, const StepperSpec& stepper,
                  double tau);

/// One step of the full system; the same code path as rbm_step with the
/// single-batch plan.
Ensemble full_step(const Ensemble& ens, const KernelSpec& spec, const StepperSpec& stepper, double tau,
                   long step_index = 0);

struct Diagnostics {
  Eigen::VectorXd momentum;
  double kinetic_energy = 0.0;
  double diam_x = 0.0;
  double diam_v = 0.0;
  bool approximate = false;  // diameters from a random subsample
};

inline constexpr int kExactDiameterLimit = 4096;

/// Max pairwise distance of the rows of `points` by direct scan.
double diameter(const Eigen::MatrixXd& points);

/// Momentum, kinetic energy and diameters. Diameters are exact up to
/// `exact_limit` particles and estimated from a seeded subsample of that
/// size above it (flagged approximate).
Diagnostics diagnostics(const Ensemble& ens, int exact_limit = kExactDiameterLimit, std::uint64_t seed = 0);

/// Velocity sum of each batch of `plan`, one row per batch.
Eigen::MatrixXd batch_momenta(const Ensemble& ens, const BatchPlan& plan);

enum class DynamicsMode { full, rbm };

std::string to_string(DynamicsMode mode);
DynamicsMode dynamics_mode_from_string(const std::string& name);

struct SimulationConfig {
  DynamicsMode mode = DynamicsMode::rbm;
  KernelSpec kernel;
  StepperSpec stepper;
  double tau = 1e-2;
  double final_time = 1.0;
  int batch_size = 2;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times;

  /// Number of tau steps covering [0, final_time].
  long step_count() const;
  void validate(int n) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Diagnostics> diagnostics;
  std::vector<Ensemble> snapshots;
  Ensemble final_state;
};

/// Runs the full or RBM dynamics from t = 0 to final_time on the fixed tau
/// grid. Diagnostics are recorded every step; snapshots at the configured
/// times (rounded to the nearest step). RBM mode draws a fresh plan each
/// step from (seed, step_index).
Trajectory simulate(const Ensemble& initial, const SimulationConfig& config);

}  // namespace csrbm
