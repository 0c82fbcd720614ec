#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csrbm/gpc.hpp"
#include "csrbm/kinetic_reference.hpp"
#include "csrbm/particle_dynamics.hpp"

namespace csrbm {

using CsvCell = std::variant<double, long long, std::string>;

/// Shortest-free fixed format: 17 significant digits.
std::string format_double(double x);

/// Tidy CSV with a header row; doubles at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<CsvCell>& cells);
  void row_values(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// t, m_1..m_d, kinetic_energy, diam_x, diam_v (plus diameters_approximate
/// when any row used a subsample).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
/// One row per particle: x_1..x_d, v_1..v_d.
void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& ens);
/// One row per cell: center coordinates (x_a for axis a < dim, else
/// v_{a-dim}), density.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist, int dim);
/// Rows (i, k, xhat_1..xhat_d, vhat_1..vhat_d).
void write_gpc_snapshot_csv(const std::filesystem::path& path, const GpcEnsemble& ens);
/// v, f0..fM of the kinetic solver's chaos modes.
void write_density_csv(const std::filesystem::path& path, const VelocityGrid& grid, const GpcDensity& density);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// "t0.5" style tag for file names.
std::string time_tag(double t);

}  // namespace csrbm
