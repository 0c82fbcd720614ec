#include "csrbm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "csrbm/errors.hpp"

namespace csrbm {

using nlohmann::json;

namespace {

constexpr const char* kScenarioNames[] = {"homogeneous", "cs1d", "cs2d", "epsilon_scan",
                                          "tau_scan", "n_scan", "p_scan", "dt_scan"};

// Reads `key` into `out` when present; a type mismatch is a ConfigError.
template <typename T>
void read(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> names(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!names.contains(it.key())) throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

bool scenario_uses_particles(Scenario s) {
  return s == Scenario::homogeneous || s == Scenario::cs1d || s == Scenario::cs2d || s == Scenario::n_scan;
}

}  // namespace

std::string to_string(Scenario scenario) { return kScenarioNames[static_cast<int>(scenario)]; }

Scenario scenario_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kScenarioNames[i]) return static_cast<Scenario>(i);
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig default_config(Scenario scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  switch (scenario) {
    case Scenario::homogeneous:
    case Scenario::n_scan:
    case Scenario::p_scan:
    case Scenario::dt_scan:
      c.kernel = KernelSpec::constant(0.5);
      c.kernel.gamma_base = 0.5;
      c.kernel.gamma_slope = 0.01;
      c.kernel.psiM = 0.51;
      c.param = {0.0, 1.0};
      c.initial = InitialDistribution::homogeneous_bimodal();
      c.final_time = 0.5;
      c.snapshot_times = {0.0, 0.25, 0.5};
      break;
    case Scenario::cs1d:
    case Scenario::cs2d:
      c.kernel = KernelSpec::stochastic_inverse_power(0.1, 0.05);
      c.param = {-1.0, 1.0};
      c.initial = scenario == Scenario::cs1d ? InitialDistribution::cs1d() : InitialDistribution::annulus();
      c.dim = scenario == Scenario::cs1d ? 1 : 2;
      c.final_time = 4.0;
      c.n_replicates = 1;
      c.snapshot_times = {0.0, 1.0, 2.0, 3.0, 4.0};
      break;
    case Scenario::epsilon_scan:
      c.n_replicates = 1;
      break;
    case Scenario::tau_scan:
      c.kernel = KernelSpec::constant(1.0);
      c.initial = InitialDistribution::cs1d();
      c.final_time = 1.0;
      c.order = 0;
      c.n_replicates = 1;
      break;
  }
  c.stepper.dt = c.tau;
  return c;
}

void ScenarioConfig::validate() const {
  if (!seed) throw ConfigError("a seed is required (--seed or the config key 'seed')");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) throw ConfigError("T must be nonnegative");
  if (order < 0) throw ConfigError("K must be >= 0");
  if (quadrature_order < 0) throw ConfigError("Q must be >= 0");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (n_replicates < 1) throw ConfigError("n_replicates must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  kernel.validate();
  param.validate();
  stepper.validate();
  if (initial.required_dim() != 0 && initial.required_dim() != dim)
    throw ConfigError("initial family " + to_string(initial.family) + " needs dim " +
                      std::to_string(initial.required_dim()));
  if (!(grid.hi > grid.lo) || grid.cells < 1) throw ConfigError("grid: need hi > lo and cells >= 1");
  if (!(grid.dv > 0.0)) throw ConfigError("grid: dv must be positive");
  for (double t : snapshot_times)
    if (t < 0.0 || t > final_time + 1e-12) throw ConfigError("snapshot time outside [0, T]");
  if (scenario_uses_particles(scenario)) {
    if (n < 2) throw ConfigError("N must be >= 2");
    if (p < 2) throw ConfigError("p must be >= 2");
    if (n % p != 0)
      throw ConfigError("batch size p = " + std::to_string(p) + " does not divide N = " + std::to_string(n));
  }
  if (scenario == Scenario::n_scan)
    for (int v : scans.n_values)
      if (v < 2 || v % p != 0) throw ConfigError("n_scan: every N must be divisible by p");
  if (scenario == Scenario::p_scan)
    for (int v : scans.p_values)
      if (v < 2 || scans.scan_n % v != 0) throw ConfigError("p_scan: every p must divide scan_n");
  for (double v : scans.dt_values)
    if (!(v > 0.0)) throw ConfigError("dt_scan: dt values must be positive");
  if (!(scans.anchor_dt > 0.0)) throw ConfigError("dt_scan: anchor_dt must be positive");
  if (scenario == Scenario::epsilon_scan)
    for (int v : scans.epsilon_n)
      if (v < p || v % p != 0) throw ConfigError("epsilon_scan: every N must be divisible by p");
  if (scans.epsilon_k < 0 || scans.epsilon_trials < 1) throw ConfigError("epsilon_scan: need k >= 0, trials >= 1");
  for (double v : scans.taus)
    if (!(v > 0.0)) throw ConfigError("tau_scan: tau values must be positive");
  if (scenario == Scenario::tau_scan && (scans.pool_size < p || scans.n_ref < 2 * scans.pool_size))
    throw ConfigError("tau_scan: need pool_size >= p and n_ref >= 2 pool_size");
  if (!(scans.ref_dt > 0.0) || scans.tau_replicates < 2 || scans.subsample_replicates < 1)
    throw ConfigError("tau_scan: need ref_dt > 0, tau_replicates >= 2, subsample_replicates >= 1");
}

ScenarioConfig apply_json(ScenarioConfig c, const json& j) {
  reject_unknown(j,
                 {"scenario", "N", "p", "tau", "T", "K", "Q", "dim", "kernel", "param", "initial", "stepper", "seed",
                  "n_replicates", "grid", "snapshot_times", "output_dir", "workers", "scans"},
                 "config");
  if (auto it = j.find("scenario"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("config key 'scenario' must be a string");
    c.scenario = scenario_from_string(it->get<std::string>());
  }
  read(j, "N", c.n);
  read(j, "p", c.p);
  read(j, "tau", c.tau);
  read(j, "T", c.final_time);
  read(j, "K", c.order);
  read(j, "Q", c.quadrature_order);
  read(j, "dim", c.dim);
  read(j, "n_replicates", c.n_replicates);
  read(j, "snapshot_times", c.snapshot_times);
  read(j, "output_dir", c.output_dir);
  read(j, "workers", c.workers);
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    std::uint64_t s = 0;
    read(j, "seed", s);
    c.seed = s;
  }
  if (auto it = j.find("kernel"); it != j.end()) {
    const json& k = *it;
    reject_unknown(k, {"family", "kappa", "psi0", "psiM", "lip", "gamma_base", "gamma_slope", "knots_r", "knots_psi"},
                   "kernel");
    if (auto f = k.find("family"); f != k.end()) {
      std::string name;
      read(k, "family", name);
      c.kernel.family = kernel_family_from_string(name);
    }
    read(k, "kappa", c.kernel.kappa);
    read(k, "psi0", c.kernel.psi0);
    read(k, "psiM", c.kernel.psiM);
    read(k, "lip", c.kernel.lip);
    read(k, "gamma_base", c.kernel.gamma_base);
    read(k, "gamma_slope", c.kernel.gamma_slope);
    read(k, "knots_r", c.kernel.knots_r);
    read(k, "knots_psi", c.kernel.knots_psi);
  }
  if (auto it = j.find("param"); it != j.end()) {
    reject_unknown(*it, {"a", "b"}, "param");
    read(*it, "a", c.param.a);
    read(*it, "b", c.param.b);
  }
  if (auto it = j.find("initial"); it != j.end()) {
    const json& d = *it;
    reject_unknown(d, {"family", "mu", "sigma2", "sigma_x2", "sigma_v2", "r_inner", "r_outer", "position", "velocity"},
                   "initial");
    if (auto f = d.find("family"); f != d.end()) {
      std::string name;
      read(d, "family", name);
      c.initial.family = initial_family_from_string(name);
    }
    read(d, "mu", c.initial.mu);
    read(d, "sigma2", c.initial.sigma2);
    read(d, "sigma_x2", c.initial.sigma_x2);
    read(d, "sigma_v2", c.initial.sigma_v2);
    read(d, "r_inner", c.initial.r_inner);
    read(d, "r_outer", c.initial.r_outer);
    read(d, "position", c.initial.position);
    read(d, "velocity", c.initial.velocity);
  }
  if (auto it = j.find("stepper"); it != j.end()) {
    reject_unknown(*it, {"scheme", "substeps"}, "stepper");
    if (auto f = it->find("scheme"); f != it->end()) {
      std::string name;
      read(*it, "scheme", name);
      c.stepper.scheme = scheme_from_string(name);
    }
    read(*it, "substeps", c.stepper.substeps);
  }
  if (auto it = j.find("grid"); it != j.end()) {
    reject_unknown(*it, {"lo", "hi", "cells", "dv"}, "grid");
    read(*it, "lo", c.grid.lo);
    read(*it, "hi", c.grid.hi);
    read(*it, "cells", c.grid.cells);
    read(*it, "dv", c.grid.dv);
  }
  if (auto it = j.find("scans"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s,
                   {"n_values", "p_values", "dt_values", "anchor_dt", "scan_n", "epsilon_n", "epsilon_k",
                    "epsilon_trials", "taus", "pool_size", "n_ref", "ref_dt", "tau_replicates",
                    "subsample_replicates"},
                   "scans");
    read(s, "n_values", c.scans.n_values);
    read(s, "p_values", c.scans.p_values);
    read(s, "dt_values", c.scans.dt_values);
    read(s, "anchor_dt", c.scans.anchor_dt);
    read(s, "scan_n", c.scans.scan_n);
    read(s, "epsilon_n", c.scans.epsilon_n);
    read(s, "epsilon_k", c.scans.epsilon_k);
    read(s, "epsilon_trials", c.scans.epsilon_trials);
    read(s, "taus", c.scans.taus);
    read(s, "pool_size", c.scans.pool_size);
    read(s, "n_ref", c.scans.n_ref);
    read(s, "ref_dt", c.scans.ref_dt);
    read(s, "tau_replicates", c.scans.tau_replicates);
    read(s, "subsample_replicates", c.scans.subsample_replicates);
  }
  c.stepper.dt = c.tau / c.stepper.substeps;
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["N"] = c.n;
  j["p"] = c.p;
  j["tau"] = c.tau;
  j["T"] = c.final_time;
  j["K"] = c.order;
  j["Q"] = c.resolved_quadrature_order();
  j["dim"] = c.dim;
  j["kernel"] = {{"family", to_string(c.kernel.family)}, {"kappa", c.kernel.kappa},
                 {"psi0", c.kernel.psi0},                {"psiM", c.kernel.psiM},
                 {"lip", c.kernel.lip},                  {"gamma_base", c.kernel.gamma_base},
                 {"gamma_slope", c.kernel.gamma_slope},  {"knots_r", c.kernel.knots_r},
                 {"knots_psi", c.kernel.knots_psi}};
  j["param"] = {{"a", c.param.a}, {"b", c.param.b}};
  j["initial"] = {{"family", to_string(c.initial.family)},
                  {"mu", c.initial.mu},
                  {"sigma2", c.initial.sigma2},
                  {"sigma_x2", c.initial.sigma_x2},
                  {"sigma_v2", c.initial.sigma_v2},
                  {"r_inner", c.initial.r_inner},
                  {"r_outer", c.initial.r_outer},
                  {"position", c.initial.position},
                  {"velocity", c.initial.velocity}};
  j["stepper"] = {{"scheme", to_string(c.stepper.scheme)}, {"substeps", c.stepper.substeps}};
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["n_replicates"] = c.n_replicates;
  j["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"cells", c.grid.cells}, {"dv", c.grid.dv}};
  j["snapshot_times"] = c.snapshot_times;
  j["output_dir"] = c.output_dir;
  // The worker count does not change any output; it is left out of the
  // sidecar so that runs with different worker counts stay byte-identical.
  j["scans"] = {{"n_values", c.scans.n_values},
                {"p_values", c.scans.p_values},
                {"dt_values", c.scans.dt_values},
                {"anchor_dt", c.scans.anchor_dt},
                {"scan_n", c.scans.scan_n},
                {"epsilon_n", c.scans.epsilon_n},
                {"epsilon_k", c.scans.epsilon_k},
                {"epsilon_trials", c.scans.epsilon_trials},
                {"taus", c.scans.taus},
                {"pool_size", c.scans.pool_size},
                {"n_ref", c.scans.n_ref},
                {"ref_dt", c.scans.ref_dt},
                {"tau_replicates", c.scans.tau_replicates},
                {"subsample_replicates", c.scans.subsample_replicates}};
  return j;
}

ScenarioConfig load_config(const std::string& path, std::optional<Scenario> fallback) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  Scenario scenario = fallback.value_or(Scenario::homogeneous);
  if (auto it = j.find("scenario"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("config key 'scenario' must be a string");
    scenario = scenario_from_string(it->get<std::string>());
  }
  return apply_json(default_config(scenario), j);
}

}  // namespace csrbm
