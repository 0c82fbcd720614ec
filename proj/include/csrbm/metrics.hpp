#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "csrbm/gpc.hpp"

namespace csrbm {

/// Exact W_q between two equal-size one-dimensional samples through the
/// monotone (sorted) coupling.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, double q);

/// Minimum-cost perfect matching on a square cost matrix (shortest
/// augmenting paths with potentials, O(m^3)). Returns the column assigned
/// to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

inline constexpr int kAssignmentCap = 512;

/// Exact W_q between the equal-weight empirical measures on the rows of a
/// and b (equal row counts, Euclidean ground cost). Sizes above `cap` are a
/// UsageError; use wasserstein_subsampled.
double wasserstein_assignment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double q,
                              int cap = kAssignmentCap);

struct WassersteinEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  int replicates = 1;
  bool exact = true;
};

/// Exact assignment when m <= cap; otherwise the mean over `replicates`
/// independent subsample pairs of size cap, with its standard error. With
/// `paired`, each replicate keeps the same row subset of a and b (for
/// samples whose rows are coupled, e.g. common initial data).
WassersteinEstimate wasserstein_subsampled(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double q,
                                           int replicates, std::uint64_t seed, int cap = kAssignmentCap,
                                           bool paired = false);

/// Random subset of `count` rows without replacement (order preserved).
Eigen::MatrixXd resample_rows(const Eigen::MatrixXd& data, int count, std::uint64_t seed);

/// L1 distance of two histograms on the same grid.
double tv_error(const Histogram& a, const Histogram& b);

/// Mean of squared deviations of the run temperatures from the reference.
double mse_temperature(std::span<const double> run_temps, double ref_temp);

/// Phase-space points (x, v) of an ensemble, one row per particle.
Eigen::MatrixXd phase_points(const Ensemble& ens);

}  // namespace csrbm
