#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csrbm {

enum class KernelFamily { constant, inverse_power, tabulated };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Communication weight psi(r) or psi(r, theta) together with the coupling
/// strength and the bounds it is declared to satisfy.
///
/// The family parameter is affine in the random parameter,
/// g(theta) = gamma_base + gamma_slope * theta:
///   - constant:       psi(r, theta) = g(theta)
///   - inverse_power:  psi(r, theta) = (1 + r^2)^(-g(theta))
///   - tabulated:      piecewise-linear through (knots_r, knots_psi), clamped
///                     outside the knot range; theta is ignored.
/// The kernel is stochastic iff gamma_slope != 0.
struct KernelSpec {
  KernelFamily family = KernelFamily::constant;
  double kappa = 1.0;
  double psi0 = 1.0;
  double psiM = 1.0;
  double lip = 1.0;
  double gamma_base = 1.0;
  double gamma_slope = 0.0;
  std::vector<double> knots_r;
  std::vector<double> knots_psi;

  static KernelSpec constant(double value, double kappa = 1.0);
  static KernelSpec inverse_power(double gamma, double kappa = 1.0);
  static KernelSpec stochastic_inverse_power(double gamma_base, double gamma_slope, double kappa = 1.0);
  static KernelSpec tabulated(std::vector<double> r, std::vector<double> psi, double kappa = 1.0);

  bool stochastic() const { return family != KernelFamily::tabulated && gamma_slope != 0.0; }
  bool distance_independent() const { return family == KernelFamily::constant; }
  double parameter(double theta) const { return gamma_base + gamma_slope * theta; }

  /// Unchecked evaluation for inner loops; r >= 0 is the caller's contract.
  double operator()(double r, double theta = 0.0) const;

  /// Throws ConfigError on malformed fields (negative kappa, bad knots, ...).
  void validate() const;
};

/// Checked evaluation: negative r is a DomainError; a stochastic kernel
/// evaluated without theta is a UsageError. theta is ignored for
/// deterministic kernels.
double eval_psi(const KernelSpec& spec, double r, std::optional<double> theta = std::nullopt);

struct KernelViolation {
  enum class Kind { lower_bound, upper_bound, monotonicity, lipschitz };
  Kind kind;
  double r1 = 0.0;
  double r2 = 0.0;
  double theta = 0.0;
  double value = 0.0;  // offending psi value or slope
};

std::string to_string(KernelViolation::Kind kind);

struct KernelReport {
  std::vector<KernelViolation> violations;
  int n_samples = 0;
  double r_max = 0.0;
  bool passed() const { return violations.empty(); }
};

struct ThetaRange {
  double lo = -1.0;
  double hi = 1.0;
};

/// Samples r in [0, r_max] (and theta in `thetas` for stochastic kernels)
/// and reports every sampled violation of the declared lower/upper bounds,
/// monotonicity in r, and the Lipschitz constant. An empty report means the
/// kernel passed at the sampled resolution.
KernelReport validate_kernel(const KernelSpec& spec, int n_samples, double r_max, std::uint64_t rng_seed,
                             ThetaRange thetas = {});

}  // namespace csrbm
