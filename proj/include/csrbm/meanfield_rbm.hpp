#pragma once

#include <cstdint>
#include <vector>

#include "csrbm/initial.hpp"
#include "csrbm/particle_dynamics.hpp"

namespace csrbm {

/// Samples (x, v) representing the one-particle law at time t_k; reuses the
/// ensemble layout (rows are samples).
using SamplePool = Ensemble;

enum class CompanionMode {
  bootstrap,  // p-1 companions drawn with replacement from the frozen pool
  whole_pool  // test-only: the whole pool is the batch (one full-system step)
};

/// One application of the RBM mean-field step to an empirical law: every
/// pool member is evolved together with p-1 companions drawn from the pool
/// at t_k for time tau (prefactor kappa/(p-1)); only the member's new state
/// is kept. Companion draws for member i come from
/// (seed, step_index, i), so the output does not depend on the worker count.
SamplePool qinf_step(const SamplePool& pool, int p, const KernelSpec& spec, const StepperSpec& stepper, double tau,
                     std::uint64_t seed, long step_index = 0, CompanionMode mode = CompanionMode::bootstrap);

/// Pool trajectory of repeated qinf_step applications; element k is the
/// pool after k steps.
std::vector<SamplePool> iterate_qinf(const SamplePool& initial, int p, const KernelSpec& spec,
                                     const StepperSpec& stepper, double tau, long steps, std::uint64_t seed);

struct MeanfieldReferenceConfig {
  int n_ref = 8192;
  InitialDistribution initial;
  int dim = 1;
  KernelSpec kernel;
  StepperSpec stepper;
  double dt = 2.5e-2;
  double final_time = 1.0;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 0;
};

/// Large-N full-system surrogate for the kinetic solution: N_ref i.i.d.
/// samples from f0 evolved under the full N_ref-particle dynamics, returned
/// as pools at the snapshot times (the final time is always included last).
std::vector<SamplePool> meanfield_reference(const MeanfieldReferenceConfig& config);

struct Theorem2Config {
  std::vector<double> taus{0.2, 0.1, 0.05, 0.025};
  double final_time = 1.0;
  int pool_size = 4096;  // the reference must hold at least 2 pool_size samples
  int batch_size = 2;
  int replicates = 8;             // independent reference splits per tau
  int subsample_replicates = 16;  // assignment subsamples per split
  int assignment_cap = 512;
  MeanfieldReferenceConfig reference;
  std::uint64_t seed = 0;
};

struct Theorem2Row {
  double tau = 0.0;
  double w2_gap = 0.0;  // sqrt of the debiased squared distance, 0 if negative
  double w2_stderr = 0.0;
  double w2_sq = 0.0;  // debiased squared distance
  double w2_sq_stderr = 0.0;
  int n_replicates = 0;  // D samples: reference splits times assignment subsamples
  bool above_floor = false;
};

struct Theorem2Result {
  std::vector<Theorem2Row> rows;
  double floor = 0.0;  // mean W2 between two independent pool-sized halves of the reference
  double floor_stderr = 0.0;
  double slope = 0.0;  // log-log slope fitted on rows above the floor
  int fitted_points = 0;
};

/// For each tau, iterates qinf_step to the final time and compares the pool
/// with the meanfield_reference snapshot.
///
/// Each replicate splits the reference into halves A and B; pools P and P'
/// start from the initial states of A and B and are iterated independently.
/// On a common random row subset of size assignment_cap,
///   D = (W2^2(P, B) + W2^2(A, P')) / 2 - (W2^2(P, P') + W2^2(A, B)) / 2
/// estimates W2^2 between the two laws with the first-order finite-sample
/// bias removed; the coupling of P with A (and P' with B) makes the terms
/// cancel most of their sampling noise. w2_gap = sqrt(max(D, 0)). A row is
/// above the floor when D exceeds 3 standard errors; the slope of
/// log w2_gap against log tau is fitted on those rows.
Theorem2Result theorem2_scan(const Theorem2Config& config);

/// Same, against a precomputed reference (initial and final pools of one
/// meanfield_reference run).
Theorem2Result theorem2_scan(const Theorem2Config& config, const SamplePool& reference_initial,
                             const SamplePool& reference_final);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace csrbm
