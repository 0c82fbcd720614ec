#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csrbm/gpc.hpp"
#include "csrbm/initial.hpp"
#include "csrbm/integrators.hpp"
#include "csrbm/kernels.hpp"

namespace csrbm {

enum class Scenario { homogeneous, cs1d, cs2d, epsilon_scan, tau_scan, n_scan, p_scan, dt_scan };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

/// Histogram grid: every listed phase-space axis spans [lo, hi] with
/// `cells` cells. dv is the kinetic solver's velocity step.
struct GridSpec {
  double lo = -3.0;
  double hi = 3.0;
  int cells = 100;
  double dv = 1e-2;
};

struct ScanSpec {
  std::vector<int> n_values{32, 64, 128, 256, 512};
  std::vector<int> p_values{2, 4, 8, 16};
  std::vector<double> dt_values{4e-2, 2e-2, 1e-2, 5e-3};
  double anchor_dt = 1e-2;  // dt of the dt_scan reference runs
  int scan_n = 256;         // N of p_scan and dt_scan
  std::vector<int> epsilon_n{64, 128, 256, 512};
  int epsilon_k = 3;
  long epsilon_trials = 100000;
  std::vector<double> taus{0.2, 0.1, 0.05, 0.025};
  int pool_size = 4096;
  int n_ref = 8192;
  double ref_dt = 5e-2;
  int tau_replicates = 8;
  int subsample_replicates = 16;
};

/// One experiment, fully resolved. Scenario defaults come from
/// default_config(); a config file and CLI flags override them key by key.
struct ScenarioConfig {
  Scenario scenario = Scenario::homogeneous;
  int n = 10000;
  int p = 2;
  double tau = 1e-2;
  double final_time = 0.5;
  int order = 3;             // gPC order K
  int quadrature_order = 0;  // 0: K + 3
  int dim = 1;
  KernelSpec kernel;
  RandomParamSpec param;
  InitialDistribution initial;
  StepperSpec stepper;
  std::optional<std::uint64_t> seed;
  int n_replicates = 100;
  GridSpec grid;
  std::vector<double> snapshot_times;
  std::string output_dir;
  int workers = 0;
  ScanSpec scans;

  int resolved_quadrature_order() const { return quadrature_order > 0 ? quadrature_order : order + 3; }
  /// Throws ConfigError on any inconsistency (p must divide N, ...).
  void validate() const;
};

ScenarioConfig default_config(Scenario scenario);

/// Applies the keys present in `j` on top of `base`; unknown keys are a
/// ConfigError.
ScenarioConfig apply_json(ScenarioConfig base, const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& config);

/// Reads a JSON config file. Its "scenario" key (if any) selects the
/// defaults the remaining keys override.
ScenarioConfig load_config(const std::string& path, std::optional<Scenario> fallback = std::nullopt);

}  // namespace csrbm
