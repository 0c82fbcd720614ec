#pragma once

#include <Eigen/Core>
#include <sstream>
#include <string>

#include "csrbm/errors.hpp"

namespace csrbm {

enum class Scheme { rk4, euler };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Fixed-step integration settings for one batch interval: `substeps`
/// steps of size tau / substeps cover an interval of length tau.
struct StepperSpec {
  Scheme scheme = Scheme::rk4;
  double dt = 1e-2;
  int substeps = 1;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("stepper: dt must be positive");
    if (substeps < 1) throw ConfigError("stepper: substeps must be >= 1");
  }
};

template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Scalar>
void require_finite(const StateVector<Scalar>& v, long step_index, const char* stage) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "non-finite right-hand side at step " << step_index << " (" << stage << ")";
    throw NumericalError(os.str());
  }
}

}  // namespace detail

/// Scratch storage so hot loops do not reallocate stage vectors.
template <typename Scalar>
struct Rk4Workspace {
  StateVector<Scalar> k1, k2, k3, k4, tmp;
};

/// Classical four-stage Runge-Kutta step, in place. `rhs(y, dy)` writes the
/// derivative of y into dy (already sized). Every stage is a linear
/// combination of rhs evaluations, so linear first integrals of rhs are
/// preserved up to rounding.
template <typename Scalar, typename Rhs>
void rk4_step_inplace(Rhs&& rhs, StateVector<Scalar>& y, Scalar dt, Rk4Workspace<Scalar>& ws, long step_index = 0) {
  const auto n = y.size();
  ws.k1.resize(n);
  ws.k2.resize(n);
  ws.k3.resize(n);
  ws.k4.resize(n);
  const Scalar half = dt / Scalar(2);
  rhs(y, ws.k1);
  detail::require_finite(ws.k1, step_index, "stage 1");
  ws.tmp = y + half * ws.k1;
  rhs(ws.tmp, ws.k2);
  detail::require_finite(ws.k2, step_index, "stage 2");
  ws.tmp = y + half * ws.k2;
  rhs(ws.tmp, ws.k3);
  detail::require_finite(ws.k3, step_index, "stage 3");
  ws.tmp = y + dt * ws.k3;
  rhs(ws.tmp, ws.k4);
  detail::require_finite(ws.k4, step_index, "stage 4");
  y += (dt / Scalar(6)) * (ws.k1 + Scalar(2) * ws.k2 + Scalar(2) * ws.k3 + ws.k4);
}

template <typename Scalar, typename Rhs>
void euler_step_inplace(Rhs&& rhs, StateVector<Scalar>& y, Scalar dt, Rk4Workspace<Scalar>& ws, long step_index = 0) {
  ws.k1.resize(y.size());
  rhs(y, ws.k1);
  detail::require_finite(ws.k1, step_index, "euler");
  y += dt * ws.k1;
}

template <typename Scalar, typename Rhs>
StateVector<Scalar> rk4_step(Rhs&& rhs, const StateVector<Scalar>& state, Scalar dt, long step_index = 0) {
  Rk4Workspace<Scalar> ws;
  StateVector<Scalar> y = state;
  rk4_step_inplace<Scalar>(rhs, y, dt, ws, step_index);
  return y;
}

template <typename Scalar, typename Rhs>
StateVector<Scalar> euler_step(Rhs&& rhs, const StateVector<Scalar>& state, Scalar dt, long step_index = 0) {
  Rk4Workspace<Scalar> ws;
  StateVector<Scalar> y = state;
  euler_step_inplace<Scalar>(rhs, y, dt, ws, step_index);
  return y;
}

/// Advances y over an interval of length tau with spec.substeps steps.
template <typename Scalar, typename Rhs>
void advance(Rhs&& rhs, StateVector<Scalar>& y, Scalar tau, const StepperSpec& spec, Rk4Workspace<Scalar>& ws,
             long step_index = 0) {
  const Scalar h = tau / Scalar(spec.substeps);
  for (int s = 0; s < spec.substeps; ++s) {
    if (spec.scheme == Scheme::rk4)
      rk4_step_inplace<Scalar>(rhs, y, h, ws, step_index);
    else
      euler_step_inplace<Scalar>(rhs, y, h, ws, step_index);
  }
}

}  // namespace csrbm
