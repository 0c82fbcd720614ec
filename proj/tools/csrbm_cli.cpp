// Command-line front end: every subcommand resolves a scenario config
// (defaults, then --config file, then flags) and writes tidy CSV tables plus
// a config.json sidecar into a run directory.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csrbm/config.hpp"
#include "csrbm/csv_io.hpp"
#include "csrbm/errors.hpp"
#include "csrbm/experiments.hpp"
#include "csrbm/metrics.hpp"
#include "csrbm/parallel.hpp"

namespace fs = std::filesystem;
using namespace csrbm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config_path;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> n, p, order, replicates, workers, cells;
  std::optional<double> tau, final_time;
};

void add_common(CLI::App* cmd, Overrides& o, bool seed_required) {
  cmd->add_option("--config", o.config_path, "JSON scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", o.scenario, "scenario name (overrides the file)");
  cmd->add_option("--out", o.out, "run directory (default: timestamped under $CSRBM_OUTPUT_ROOT or ./runs)");
  auto* seed = cmd->add_option("--seed", o.seed, "base RNG seed");
  if (seed_required) seed->required();
  cmd->add_option("--N", o.n, "number of particles");
  cmd->add_option("-p,--batch-size", o.p, "batch size p");
  cmd->add_option("--tau,--dt", o.tau, "time step");
  cmd->add_option("--T", o.final_time, "final time");
  cmd->add_option("--K", o.order, "gPC order");
  cmd->add_option("--replicates", o.replicates, "number of replicates n_m");
  cmd->add_option("--cells", o.cells, "histogram cells per axis");
  cmd->add_option("--workers", o.workers, "worker threads (0: all cores); outputs do not depend on it");
}

ScenarioConfig resolve(const Overrides& o, Scenario fallback) {
  std::optional<Scenario> named;
  if (!o.scenario.empty()) named = scenario_from_string(o.scenario);
  ScenarioConfig cfg = o.config_path.empty() ? default_config(named.value_or(fallback))
                                             : load_config(o.config_path, named.value_or(fallback));
  if (named && *named != cfg.scenario) {
    // --scenario wins over the file: re-apply the file on the new defaults.
    cfg = o.config_path.empty() ? default_config(*named) : load_config(o.config_path, *named);
    cfg.scenario = *named;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.n) cfg.n = *o.n;
  if (o.p) cfg.p = *o.p;
  if (o.tau) cfg.tau = *o.tau;
  if (o.final_time) cfg.final_time = *o.final_time;
  if (o.order) cfg.order = *o.order;
  if (o.replicates) cfg.n_replicates = *o.replicates;
  if (o.cells) cfg.grid.cells = *o.cells;
  if (o.workers) cfg.workers = *o.workers;
  cfg.stepper.dt = cfg.tau / cfg.stepper.substeps;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

fs::path run_directory(const ScenarioConfig& cfg, const std::string& command) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  const char* root = std::getenv("CSRBM_OUTPUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << command << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  fs::path dir = base / stamp.str();
  for (int i = 1; fs::exists(dir); ++i) dir = base / (stamp.str() + "-" + std::to_string(i));
  return dir;
}

Eigen::MatrixXd read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("ragged CSV '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("no data rows in '" + path + "'");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random batch Cucker-Smale simulations, gPC uncertainty runs and convergence scans"};
  app.require_subcommand(1);

  Overrides o;
  double theta = 0.0;
  bool theta_set = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "full Cucker-Smale particle dynamics");
  auto* rbm_cmd = app.add_subcommand("rbm", "random batch particle dynamics");
  auto* meanfield_cmd = app.add_subcommand("meanfield", "tau scan of the RBM mean-field step against a large-N reference");
  auto* epsilon_cmd = app.add_subcommand("epsilon", "Monte Carlo estimate of the non-clean probability eps_k");
  auto* gpc_cmd = app.add_subcommand("gpc", "RBM-gPC run (homogeneous, cs1d or cs2d scenario)");
  auto* scan_cmd = app.add_subcommand("scan", "MSE_T scans (n_scan, p_scan, dt_scan) or epsilon/tau scans");
  for (auto* cmd : {simulate_cmd, rbm_cmd, meanfield_cmd, epsilon_cmd, gpc_cmd, scan_cmd}) add_common(cmd, o, true);
  for (auto* cmd : {simulate_cmd, rbm_cmd})
    cmd->add_option_function<double>(
        "--theta", [&](double t) { theta = t; theta_set = true; }, "frozen value of the kernel's random parameter");

  auto* metrics_cmd = app.add_subcommand("metrics", "Wasserstein distance between two snapshot CSV files");
  std::string file_a, file_b, metrics_out;
  double q = 2.0;
  int subsamples = 16;
  std::uint64_t metrics_seed = 0;
  metrics_cmd->add_option("a", file_a, "first snapshot CSV")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("b", file_b, "second snapshot CSV")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("-q", q, "order of the distance");
  metrics_cmd->add_option("--subsamples", subsamples, "subsample pairs when the samples exceed the assignment cap");
  metrics_cmd->add_option("--seed", metrics_seed, "seed for subsampling");
  metrics_cmd->add_option("--out", metrics_out, "run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (metrics_cmd->parsed()) {
      const Eigen::MatrixXd a = read_numeric_csv(file_a);
      const Eigen::MatrixXd b = read_numeric_csv(file_b);
      if (a.cols() != b.cols()) throw ConfigError("snapshots have different column counts");
      WassersteinEstimate w;
      if (a.cols() == 1 && a.rows() == b.rows()) {
        w.value = wasserstein_1d({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())}, q);
      } else {
        w = wasserstein_subsampled(a, b, q, subsamples, metrics_seed);
      }
      std::cout << "W_" << q << " = " << format_double(w.value);
      if (!w.exact) std::cout << " +- " << format_double(w.stderr_) << " (" << w.replicates << " subsamples)";
      std::cout << '\n';
      if (!metrics_out.empty()) {
        fs::create_directories(metrics_out);
        CsvWriter out(fs::path(metrics_out) / "metrics.csv", {"q", "wasserstein", "stderr", "exact"});
        out.row({q, w.value, w.stderr_, static_cast<long long>(w.exact)});
      }
      return 0;
    }

    struct Command {
      CLI::App* cmd;
      const char* name;
      Scenario fallback;
    };
    const Command commands[] = {{simulate_cmd, "simulate", Scenario::cs1d},
                                {rbm_cmd, "rbm", Scenario::cs1d},
                                {meanfield_cmd, "meanfield", Scenario::tau_scan},
                                {epsilon_cmd, "epsilon", Scenario::epsilon_scan},
                                {gpc_cmd, "gpc", Scenario::homogeneous},
                                {scan_cmd, "scan", Scenario::n_scan}};
    Scenario fallback = Scenario::homogeneous;
    std::string name;
    for (const Command& c : commands)
      if (c.cmd->parsed()) {
        name = c.name;
        fallback = c.fallback;
      }

    ScenarioConfig cfg = resolve(o, fallback);
    if (meanfield_cmd->parsed()) cfg.scenario = Scenario::tau_scan;
    if (epsilon_cmd->parsed()) cfg.scenario = Scenario::epsilon_scan;
    if (gpc_cmd->parsed() && cfg.scenario != Scenario::homogeneous && cfg.scenario != Scenario::cs1d &&
        cfg.scenario != Scenario::cs2d)
      throw ConfigError("gpc runs the homogeneous, cs1d or cs2d scenario");
    set_default_workers(cfg.workers);
    const fs::path dir = run_directory(cfg, name);

    if (simulate_cmd->parsed() || rbm_cmd->parsed()) {
      if (!theta_set) theta = 0.5 * (cfg.param.a + cfg.param.b);
      run_particles(cfg, rbm_cmd->parsed() ? DynamicsMode::rbm : DynamicsMode::full, theta, dir);
    } else {
      run_experiment(cfg, dir);
    }
    std::cout << dir.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
