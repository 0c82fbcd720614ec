#include "csrbm/csv_io.hpp"

#include <iomanip>
#include <limits>
#include <sstream>

#include "csrbm/errors.hpp"

namespace csrbm {

std::string format_double(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) throw UsageError("CsvWriter: row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>)
            out_ << format_double(v);
          else
            out_ << v;
        },
        cells[i]);
  }
  out_ << '\n';
}

void CsvWriter::row_values(const std::vector<double>& values) {
  if (values.size() != columns_) throw UsageError("CsvWriter: row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

std::string time_tag(double t) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << 't' << std::setprecision(6) << t;
  return os.str();
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  const int d = traj.diagnostics.empty() ? 0 : static_cast<int>(traj.diagnostics.front().momentum.size());
  bool approximate = false;
  for (const auto& g : traj.diagnostics) approximate = approximate || g.approximate;
  std::vector<std::string> header{"t"};
  for (int c = 0; c < d; ++c) header.push_back("m_" + std::to_string(c + 1));
  header.insert(header.end(), {"kinetic_energy", "diam_x", "diam_v"});
  if (approximate) header.push_back("diameters_approximate");
  CsvWriter w(path, header);
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    const Diagnostics& g = traj.diagnostics[s];
    std::vector<CsvCell> row{traj.times[s]};
    for (int c = 0; c < d; ++c) row.emplace_back(g.momentum[c]);
    row.insert(row.end(), {g.kinetic_energy, g.diam_x, g.diam_v});
    if (approximate) row.emplace_back(static_cast<long long>(g.approximate));
    w.row(row);
  }
}

void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& ens) {
  const int d = ens.dim();
  std::vector<std::string> header;
  for (int c = 0; c < d; ++c) header.push_back("x" + std::to_string(c + 1));
  for (int c = 0; c < d; ++c) header.push_back("v" + std::to_string(c + 1));
  CsvWriter w(path, header);
  std::vector<double> row(static_cast<std::size_t>(2 * d));
  for (int i = 0; i < ens.size(); ++i) {
    for (int c = 0; c < d; ++c) {
      row[c] = ens.positions(i, c);
      row[d + c] = ens.velocities(i, c);
    }
    w.row_values(row);
  }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist, int d) {
  const auto& axes = hist.grid.axes;
  std::vector<std::string> header;
  for (int a : axes) header.push_back(a < d ? "x" + std::to_string(a + 1) : "v" + std::to_string(a - d + 1));
  header.push_back("density");
  CsvWriter w(path, header);
  for (std::size_t cell = 0; cell < hist.grid.cell_count(); ++cell) {
    std::vector<double> row = hist.grid.center(cell);
    row.push_back(hist.density[static_cast<Eigen::Index>(cell)]);
    w.row_values(row);
  }
}

void write_gpc_snapshot_csv(const std::filesystem::path& path, const GpcEnsemble& ens) {
  const int d = ens.dim();
  std::vector<std::string> header{"i", "k"};
  for (int c = 0; c < d; ++c) header.push_back("xhat" + std::to_string(c + 1));
  for (int c = 0; c < d; ++c) header.push_back("vhat" + std::to_string(c + 1));
  CsvWriter w(path, header);
  for (int i = 0; i < ens.size(); ++i)
    for (int k = 0; k <= ens.order; ++k) {
      std::vector<CsvCell> row{static_cast<long long>(i), static_cast<long long>(k)};
      for (int c = 0; c < d; ++c) row.emplace_back(ens.xhat(i, k * d + c));
      for (int c = 0; c < d; ++c) row.emplace_back(ens.vhat(i, k * d + c));
      w.row(row);
    }
}

void write_density_csv(const std::filesystem::path& path, const VelocityGrid& grid, const GpcDensity& density) {
  std::vector<std::string> header{"v"};
  for (Eigen::Index h = 0; h < density.coeffs.rows(); ++h) header.push_back("f" + std::to_string(h));
  CsvWriter w(path, header);
  for (int j = 0; j < grid.n_cells; ++j) {
    std::vector<double> row{grid.center(j)};
    for (Eigen::Index h = 0; h < density.coeffs.rows(); ++h) row.push_back(density.coeffs(h, j));
    w.row_values(row);
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace csrbm
