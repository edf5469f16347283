#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/flows.hpp"

namespace nrlangevin {

enum class OdeMethod { euler, rk4, taylor };

// One-step deterministic integrator for dx/dt = gamma(x).  The step dt is
// subdivided into `substeps` equal ODE sub-steps.  The Taylor method applies
// the truncated exponential series of the given order and requires a linear
// flow.
struct FlowIntegrator {
  OdeMethod method = OdeMethod::rk4;
  int taylor_order = 1;  // taylor only
  int substeps = 1;

  void validate() const {
    if (substeps < 1) throw std::invalid_argument("FlowIntegrator: substeps must be >= 1");
    if (method == OdeMethod::taylor && taylor_order < 1)
      throw std::invalid_argument("FlowIntegrator: taylor order must be >= 1");
  }
};

// T_p(dt G) x, the truncated exponential series applied to x.
inline VectorXd taylor_step_linear(const MatrixXd& g, int p, const VectorXd& x, double dt) {
  if (p < 1) throw std::invalid_argument("taylor_step_linear: order must be >= 1");
  VectorXd acc = x;
  VectorXd term = x;
  for (int k = 1; k <= p; ++k) {
    term = (dt / k) * (g * term);
    acc += term;
  }
  return acc;
}

namespace detail {

inline void require_finite(const VectorXd& x) {
  if (!x.allFinite())
    throw FlowBlowupError("flow_step: non-finite state (stiff flow; reduce beta or dt)");
}

inline VectorXd euler_substep(const NonreversibleFlow& flow, const VectorXd& x, double h) {
  return x + h * flow.evaluate(x);
}

inline VectorXd rk4_substep(const NonreversibleFlow& flow, const VectorXd& x, double h) {
  const VectorXd k1 = flow.evaluate(x);
  const VectorXd k2 = flow.evaluate(x + 0.5 * h * k1);
  const VectorXd k3 = flow.evaluate(x + 0.5 * h * k2);
  const VectorXd k4 = flow.evaluate(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

// Advances dx/dt = gamma(x) by one step of size dt.  Throws FlowBlowupError if
// the state becomes non-finite.
inline VectorXd flow_step(const FlowIntegrator& integ, const NonreversibleFlow& flow,
                          const VectorXd& x, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be positive");
  integ.validate();
  if (flow.beta() == 0.0) return x;

  const double h = dt / integ.substeps;
  VectorXd state = x;
  switch (integ.method) {
    case OdeMethod::euler:
      for (int s = 0; s < integ.substeps; ++s) state = detail::euler_substep(flow, state, h);
      break;
    case OdeMethod::rk4:
      for (int s = 0; s < integ.substeps; ++s) state = detail::rk4_substep(flow, state, h);
      break;
    case OdeMethod::taylor: {
      const auto g = flow.linear_matrix();
      if (!g)
        throw std::invalid_argument("flow_step: taylor integrator requires a linear flow");
      for (int s = 0; s < integ.substeps; ++s)
        state = taylor_step_linear(*g, integ.taylor_order, state, h);
      break;
    }
  }
  detail::require_finite(state);
  return state;
}

struct OrderFit {
  double slope = 0.0;
  bool saturated = false;  // error already at rounding level at the largest dt
};

// Least-squares slope of log(one-step error) against log(dt).  The reference
// solution is RK4 with 64 substeps, so nonlinear flows are testable without
// closed forms.
inline OrderFit order_of_accuracy(const FlowIntegrator& integ, const NonreversibleFlow& flow,
                                  const VectorXd& x0, const std::vector<double>& dts) {
  if (dts.size() < 4)
    throw std::invalid_argument("order_of_accuracy: need at least 4 step sizes");
  for (std::size_t i = 1; i < dts.size(); ++i)
    if (!(dts[i] < dts[i - 1]))
      throw std::invalid_argument("order_of_accuracy: dts must be decreasing");

  FlowIntegrator reference{OdeMethod::rk4, 1, 64};
  std::vector<double> log_dt, log_err;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const VectorXd approx = flow_step(integ, flow, x0, dts[i]);
    const VectorXd exact = flow_step(reference, flow, x0, dts[i]);
    const double err = (approx - exact).norm();
    if (i == 0 && err < 1e-13) return {0.0, true};
    if (err > 0.0) {
      log_dt.push_back(std::log(dts[i]));
      log_err.push_back(std::log(err));
    }
  }
  const auto n = static_cast<double>(log_dt.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_dt.size(); ++i) {
    sx += log_dt[i];
    sy += log_err[i];
    sxx += log_dt[i] * log_dt[i];
    sxy += log_dt[i] * log_err[i];
  }
  return {(n * sxy - sx * sy) / (n * sxx - sx * sx), false};
}

}  // namespace nrlangevin
