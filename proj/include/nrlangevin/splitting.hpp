#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/kernels.hpp"
#include "nrlangevin/ode.hpp"

namespace nrlangevin {

enum class Ordering { reversible_first, nonreversible_first };

// One sampler step composes the deterministic nonreversible flow map with a
// pi-invariant reversible kernel step, in the configured order.  With beta = 0
// the flow is the identity and the sampler reduces to the bare kernel.
class LieTrotterSampler {
 public:
  LieTrotterSampler(const ReversibleKernel& kernel, NonreversibleFlow flow,
                    FlowIntegrator integrator, Ordering ordering, double dt)
      : kernel_(&kernel),
        flow_(std::move(flow)),
        integrator_(integrator),
        ordering_(ordering),
        dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("LieTrotterSampler: dt must be positive");
    integrator_.validate();
  }

  double dt() const { return dt_; }
  double beta() const { return flow_.beta(); }
  const NonreversibleFlow& flow() const { return flow_; }
  const ReversibleKernel& kernel() const { return *kernel_; }

  KernelStepRecord step(ChainState& state, Rng& rng) const {
    KernelStepRecord rec;
    if (ordering_ == Ordering::nonreversible_first) {
      apply_flow(state);
      rec = kernel_step(*kernel_, state, dt_, rng);
    } else {
      rec = kernel_step(*kernel_, state, dt_, rng);
      apply_flow(state);
    }
    return rec;
  }

 private:
  void apply_flow(ChainState& state) const {
    if (flow_.beta() == 0.0) return;  // identity map, no evaluations
    state.x = flow_step(integrator_, flow_, state.x, dt_);
    state.invalidate();
  }

  const ReversibleKernel* kernel_;
  NonreversibleFlow flow_;
  FlowIntegrator integrator_;
  Ordering ordering_;
  double dt_;
};

using Observable = std::function<double(const VectorXd&)>;

struct ChainResult {
  // One series per observable, evaluated at states X_0 (the initial state)
  // through X_N, where N steps were taken.
  std::vector<std::vector<double>> series;
  std::vector<double> mean;        // streaming first moment per observable
  std::vector<double> second_moment;
  Eigen::MatrixXd samples;         // states by row, when storage is enabled
  long steps_taken = 0;
  long accepted_count = 0;
  EvalBudget budget;
  std::uint64_t seed = 0;
  bool valid = true;
  std::string error;

  double ergodic_average(std::size_t observable_index) const {
    return mean.at(observable_index);
  }
};

struct ChainOptions {
  bool store_series = true;
  bool store_samples = false;
  // When nonnegative, stop before the step that would push the metered density
  // count past the cap.
  long density_budget = -1;
};

// Runs n_steps of the sampler from x0, recording every observable at each
// visited state (initial state included).  Deterministic given the seed.  A
// flow blow-up aborts the run and returns the partial result flagged invalid.
inline ChainResult run_chain(const LieTrotterSampler& sampler, const CountingTarget& target,
                             const VectorXd& x0, long n_steps,
                             const std::vector<Observable>& observables, std::uint64_t seed,
                             const ChainOptions& options = {}) {
  if (n_steps < 1 && options.density_budget < 0)
    throw std::invalid_argument("run_chain: n_steps must be >= 1");
  if (!x0.allFinite()) throw std::invalid_argument("run_chain: x0 must be finite");

  Rng rng(seed);
  ChainState state;
  state.x = x0;

  ChainResult result;
  result.seed = seed;
  result.series.resize(observables.size());
  result.mean.assign(observables.size(), 0.0);
  result.second_moment.assign(observables.size(), 0.0);

  std::vector<VectorXd> stored;
  long recorded = 0;
  auto record = [&](const VectorXd& x) {
    for (std::size_t i = 0; i < observables.size(); ++i) {
      const double v = observables[i](x);
      if (options.store_series) result.series[i].push_back(v);
      result.mean[i] += (v - result.mean[i]) / static_cast<double>(recorded + 1);
      result.second_moment[i] +=
          (v * v - result.second_moment[i]) / static_cast<double>(recorded + 1);
    }
    if (options.store_samples) stored.push_back(x);
    ++recorded;
  };

  record(state.x);
  const EvalBudget& counts = target.counts();
  long last_step_density_cost = 0;
  try {
    for (long k = 0; n_steps < 1 || k < n_steps; ++k) {
      if (options.density_budget >= 0 && k > 0) {
        // The per-step cost is constant once the chain is warm (k >= 2); the
        // very first continuation step may be cheaper because the current
        // point's values are cached, so probe it optimistically.
        const long next_cost = k >= 2 ? last_step_density_cost : 1;
        if (counts.density + next_cost > options.density_budget) break;
        if (last_step_density_cost == 0)
          throw std::invalid_argument(
              "run_chain: budget-driven run requires a density-evaluating sampler");
      }
      const long before = counts.density;
      KernelStepRecord rec = sampler.step(state, rng);
      last_step_density_cost = counts.density - before;
      if (rec.accepted) ++result.accepted_count;
      record(state.x);
      ++result.steps_taken;
      if (options.density_budget >= 0 && counts.density > options.density_budget) break;
    }
  } catch (const FlowBlowupError& e) {
    result.valid = false;
    result.error = e.what();
  } catch (const NumericalError& e) {
    result.valid = false;
    result.error = e.what();
  }

  result.budget = counts;
  if (options.store_samples && !stored.empty()) {
    result.samples.resize(static_cast<Eigen::Index>(stored.size()), x0.size());
    for (std::size_t i = 0; i < stored.size(); ++i)
      result.samples.row(static_cast<Eigen::Index>(i)) = stored[i];
  }
  return result;
}

// Largest admissible flow strength dt^{-kappa} under a bias tolerance epsilon
// when the flow integrator has error order r.  Heuristic:
//   kappa = -log(eps) / ((r+1) log(dt)) + r/(r+1).
inline double recommend_beta(double epsilon, double dt, int r) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("recommend_beta: epsilon must be positive");
  if (!(dt > 0.0 && dt < 1.0))
    throw std::invalid_argument("recommend_beta: need 0 < dt < 1 (log dt sign)");
  if (r < 1) throw std::invalid_argument("recommend_beta: order r must be >= 1");
  const double kappa =
      -std::log(epsilon) / ((r + 1.0) * std::log(dt)) + static_cast<double>(r) / (r + 1.0);
  return std::pow(dt, -kappa);
}

}  // namespace nrlangevin
