#include "csrbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csrbm/errors.hpp"
#include "csrbm/parallel.hpp"
#include "csrbm/random.hpp"

namespace csrbm {

double wasserstein_1d(std::span<const double> a, std::span<const double> b, double q) {
  if (a.empty() || b.empty()) throw UsageError("wasserstein_1d: empty sample");
  if (a.size() != b.size()) throw UsageError("wasserstein_1d: samples must have equal size (resample upstream)");
  if (!(q >= 1.0)) throw DomainError("wasserstein_1d: order q must be >= 1");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) total += std::pow(std::abs(sa[i] - sb[i]), q);
  return std::pow(total / static_cast<double>(sa.size()), 1.0 / q);
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw UsageError("solve_assignment: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials u (rows), v (columns); way[] stores the augmenting tree.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return row_to_col;
}

double wasserstein_assignment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double q, int cap) {
  if (a.rows() == 0 || b.rows() == 0) throw UsageError("wasserstein_assignment: empty sample");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw UsageError("wasserstein_assignment: samples must have equal size and dimension");
  if (a.rows() > cap) throw UsageError("wasserstein_assignment: sample size exceeds the assignment cap");
  if (!(q >= 1.0)) throw DomainError("wasserstein_assignment: order q must be >= 1");
  const Eigen::Index m = a.rows();
  Eigen::MatrixXd cost(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double dist = (a.row(i) - b.row(j)).norm();
      cost(i, j) = q == 2.0 ? dist * dist : std::pow(dist, q);
    }
  const auto match = solve_assignment(cost);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) total += cost(i, match[static_cast<std::size_t>(i)]);
  return std::pow(total / static_cast<double>(m), 1.0 / q);
}

Eigen::MatrixXd resample_rows(const Eigen::MatrixXd& data, int count, std::uint64_t seed) {
  const int n = static_cast<int>(data.rows());
  if (count > n) throw UsageError("resample_rows: cannot draw more rows than available");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed, {stream::subsample});
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return data(idx, Eigen::all);
}

WassersteinEstimate wasserstein_subsampled(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double q,
                                           int replicates, std::uint64_t seed, int cap, bool paired) {
  if (a.rows() != b.rows()) throw UsageError("wasserstein_subsampled: samples must have equal size");
  if (a.rows() <= cap) return {wasserstein_assignment(a, b, q, cap), 0.0, 1, true};
  if (replicates < 2) throw UsageError("wasserstein_subsampled: need at least two subsample replicates");
  std::vector<double> values(static_cast<std::size_t>(replicates));
  parallel_for(values.size(), [&](std::size_t r) {
    const Eigen::MatrixXd sa = resample_rows(a, cap, derive_seed(seed, {r, 0}));
    const Eigen::MatrixXd sb = resample_rows(b, cap, derive_seed(seed, {r, paired ? 0u : 1u}));
    values[r] = wasserstein_assignment(sa, sb, q, cap);
  });
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / replicates;
  double var = 0.0;
  for (double x : values) var += (x - mean) * (x - mean);
  var /= (replicates - 1);
  return {mean, std::sqrt(var / replicates), replicates, false};
}

double tv_error(const Histogram& a, const Histogram& b) {
  if (!a.grid.same_as(b.grid)) throw UsageError("tv_error: histograms live on different grids");
  return (a.density - b.density).cwiseAbs().sum() * a.grid.cell_volume();
}

double mse_temperature(std::span<const double> run_temps, double ref_temp) {
  if (run_temps.empty()) throw UsageError("mse_temperature: no runs");
  double total = 0.0;
  for (double t : run_temps) total += (ref_temp - t) * (ref_temp - t);
  return total / static_cast<double>(run_temps.size());
}

Eigen::MatrixXd phase_points(const Ensemble& ens) {
  Eigen::MatrixXd z(ens.size(), 2 * ens.dim());
  z << ens.positions, ens.velocities;
  return z;
}

}  // namespace csrbm
