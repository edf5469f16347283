#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "nrlangevin/config.hpp"
#include "nrlangevin/csv.hpp"
#include "nrlangevin/data.hpp"
#include "nrlangevin/diagnostics.hpp"
#include "nrlangevin/gaussian_analysis.hpp"
#include "nrlangevin/splitting.hpp"

namespace nrlangevin {

namespace detail {

// Runs tasks 0..n-1 on up to `threads` workers.  Results are written into
// per-task slots by the task itself, so the outcome does not depend on the
// schedule.
template <typename Task>
void parallel_for(int n, int threads, Task&& task) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      task(i);
    }
  };
  std::vector<std::thread> pool;
  const int k = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline std::string config_echo(const ExperimentConfig& cfg) { return cfg.raw.dump(); }

inline void write_config_echo(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  std::ofstream out(std::filesystem::path(cfg.out) / (name + "_config.json"));
  out << cfg.raw.dump(2) << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Replica execution shared by the sampling experiments.

struct ReplicaOutcome {
  std::vector<double> averages;   // per observable
  std::vector<double> ci_half;    // 95% normal interval half-width, per observable
  std::vector<double> ess_values; // per observable
  std::vector<bool> ess_flagged;
  double acceptance_rate = 0.0;
  EvalBudget budget;
  long steps = 0;
  bool valid = true;
  Eigen::MatrixXd samples;  // when trajectories were requested
};

struct ReplicaRequest {
  const TargetDistribution* target = nullptr;
  SamplerSpec spec;
  double dt = 0.0;
  double beta = 0.0;
  MatrixXd skew;  // flow matrix J
  VectorXd x0;
  long density_budget = 0;
  std::uint64_t seed = 0;
  std::vector<Observable> observables;
  bool want_ess = false;
  bool want_ci = false;
  bool store_samples = false;
};

inline ReplicaOutcome run_replica(const ReplicaRequest& req) {
  CountingTarget counting(*req.target);
  SkewMatrix j = SkewMatrix::from_matrix(req.skew);

  NonreversibleFlow flow = [&] {
    const double log_ref = req.spec.flow_kind == FlowKind::log_grad
                               ? 0.0
                               : req.target->log_density_unnorm(req.x0);
    switch (req.spec.flow_kind) {
      case FlowKind::power:
        return NonreversibleFlow::power(counting, j, req.beta, req.spec.flow_alpha, log_ref);
      case FlowKind::compact:
        return NonreversibleFlow::compact(counting, j, req.beta, req.spec.window_lo,
                                          req.spec.window_hi, log_ref);
      case FlowKind::log_grad:
      default:
        return NonreversibleFlow::log_grad(counting, j, req.beta);
    }
  }();

  ReversibleKernel kernel = ReversibleKernel::metropolized(req.spec.kernel, counting);
  LieTrotterSampler sampler(kernel, flow, req.spec.integrator, req.spec.ordering, req.dt);

  ChainOptions options;
  options.store_series = true;
  options.store_samples = req.store_samples;
  options.density_budget = req.density_budget;
  ChainResult chain =
      run_chain(sampler, counting, req.x0, -1, req.observables, req.seed, options);

  ReplicaOutcome out;
  out.valid = chain.valid;
  out.budget = chain.budget;
  out.steps = chain.steps_taken;
  out.acceptance_rate =
      chain.steps_taken > 0
          ? static_cast<double>(chain.accepted_count) / static_cast<double>(chain.steps_taken)
          : 0.0;
  out.averages = chain.mean;
  out.samples = chain.samples;
  if (!chain.valid) return out;

  const std::size_t n_obs = req.observables.size();
  out.ci_half.assign(n_obs, 0.0);
  out.ess_values.assign(n_obs, 0.0);
  out.ess_flagged.assign(n_obs, false);
  for (std::size_t i = 0; i < n_obs && (req.want_ess || req.want_ci); ++i) {
    ObservableSeries series{chain.series[i], req.dt, chain.budget};
    if (req.want_ess) {
      const EssResult r = ess(series);
      out.ess_values[i] = r.ess;
      out.ess_flagged[i] = r.flagged;
    }
    if (req.want_ci) {
      const int nb = std::clamp<int>(static_cast<int>(series.values.size()) / 50, 10, 40);
      const double sig2 = batch_means_variance(series, nb);
      const double horizon = req.dt * static_cast<double>(series.values.size());
      out.ci_half[i] = 1.96 * std::sqrt(std::max(sig2, 0.0) / horizon);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// gaussian-analysis command: deterministic linear-model tables.

struct GaussianAnalysisRow {
  double alpha, beta, dt;
  int p;
  ReversibleMode mode;
  Ordering ordering;
  bool admissible = true;
  double bias_norm = 0.0;       // ||K - Sigma_inf||_2
  double k11 = 0.0;
  double sigma2_full = 0.0;     // chain-measurable variance of |x|^2
  double sigma2_coordsum = 0.0; // coordinatewise profile sum (tabulated form)
  double mse = 0.0;
};

struct GaussianAnalysisResult {
  std::vector<GaussianAnalysisRow> rows;
};

inline GaussianAnalysisResult cmd_gaussian_analysis(const ExperimentConfig& cfg) {
  const json g = cfg.section("gaussian_analysis");
  const double alpha = detail::get_or<double>(g, "alpha", 1.0);
  const auto betas = detail::get_or<std::vector<double>>(g, "betas", {0.0, 1.0});
  const auto dts = detail::get_or<std::vector<double>>(
      g, "dts", {0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125, 0.0009765625});
  const auto orders = detail::get_or<std::vector<int>>(g, "orders", {1, 2});
  const auto mode_names =
      detail::get_or<std::vector<std::string>>(g, "modes", {"exact", "theta_half"});
  const auto ordering_names = detail::get_or<std::vector<std::string>>(
      g, "orderings", {"nonreversible_first", "reversible_first"});
  const double horizon = detail::get_or<double>(g, "horizon", 1000.0);

  const MatrixXd a = alpha * MatrixXd::Identity(2, 2);
  const MatrixXd j = make_rotation_2d();
  const MatrixXd sigma_inf = solve_lyapunov_continuous(a, MatrixXd::Identity(2, 2));

  GaussianAnalysisResult result;
  for (const auto& mode_name : mode_names) {
    const ReversibleMode mode =
        mode_name == "exact" ? ReversibleMode::exact : ReversibleMode::theta_half;
    if (mode_name != "exact" && mode_name != "theta_half")
      throw ConfigError("gaussian_analysis.modes entries must be exact|theta_half");
    for (const auto& ordering_name : ordering_names)
      for (int p : orders)
        for (double beta : betas)
          for (double dt : dts) {
            GaussianAnalysisRow row{alpha,
                                    beta,
                                    dt,
                                    p,
                                    mode,
                                    detail::parse_ordering(ordering_name)};
            LinearModel model{a, j, beta, dt, p, mode, row.ordering};
            try {
              const OneStepAffine affine = one_step_matrices(model);
              const MatrixXd k = numerical_invariant_covariance(affine);
              row.k11 = k(0, 0);
              Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(k - sigma_inf));
              row.bias_norm = es.eigenvalues().cwiseAbs().maxCoeff();
              row.sigma2_full = numerical_asymptotic_variance(
                  model, MatrixXd::Identity(2, 2), VectorXd::Zero(2));
              row.sigma2_coordsum = coordinatewise_asymptotic_variance(model).sum();
              const double bias_f = (k - sigma_inf).trace();  // observable |x|^2
              row.mse = mse_model(bias_f, row.sigma2_coordsum, horizon);
            } catch (const NumericalError&) {
              row.admissible = false;
            }
            result.rows.push_back(row);
          }
  }
  return result;
}

inline void write_gaussian_analysis(const ExperimentConfig& cfg,
                                    const GaussianAnalysisResult& result) {
  detail::write_config_echo(cfg, "gaussian_analysis");
  CsvWriter csv((std::filesystem::path(cfg.out) / "gaussian_analysis.csv").string());
  csv.row({"alpha", "beta", "dt", "p", "mode", "ordering", "admissible", "bias_norm", "K11",
           "sigma2_full", "sigma2_coordsum", "mse_model", "config"});
  const std::string echo = detail::config_echo(cfg);
  for (const auto& r : result.rows)
    csv.row({CsvWriter::field(r.alpha), CsvWriter::field(r.beta), CsvWriter::field(r.dt),
             CsvWriter::field(r.p), r.mode == ReversibleMode::exact ? "exact" : "theta_half",
             ordering_name(r.ordering), r.admissible ? "1" : "0",
             CsvWriter::field(r.bias_norm), CsvWriter::field(r.k11),
             CsvWriter::field(r.sigma2_full), CsvWriter::field(r.sigma2_coordsum),
             CsvWriter::field(r.mse), echo});
}

// ---------------------------------------------------------------------------
// Sweep experiments (warped / logistic / cox / sample).

struct GridPointSummary {
  double dt = 0.0, beta = 0.0;
  int n_valid = 0, n_invalid = 0;
  double mse = 0.0, bias_sq = 0.0, variance = 0.0;  // warped
  double mean_acceptance = 0.0;
  double mean_density = 0.0, mean_grad = 0.0;
  std::vector<double> coord_means;      // per observable, averaged over replicas
  std::vector<double> coord_ci;         // mean CI half-width per observable
  std::vector<double> coord_ess_median; // per observable, median over replicas
  double median_ess = 0.0;              // median over observables of per-replica medians
  long flagged_ess = 0;
  std::vector<double> pooled_ess;       // cox: all cells x replicas x J
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return 0.5 * (v[mid - 1] + hi);
}

}  // namespace detail

struct SweepExperimentResult {
  std::vector<GridPointSummary> points;
  std::vector<double> reference_means;  // logistic: long-run per-coordinate means
  double f_ref = 0.0;                   // warped: quadrature reference
};

// Runs R replicas at every sweep point under the shared density budget and
// aggregates.  `grid_offset` shifts the grid index used in seed derivation,
// letting callers give distinct streams to distinct J draws.
inline GridPointSummary run_grid_point(const ExperimentConfig& cfg,
                                       const TargetDistribution& target, const SweepPoint& pt,
                                       std::size_t grid_index, const MatrixXd& skew,
                                       const VectorXd& x0,
                                       const std::vector<Observable>& observables,
                                       bool want_ess, bool want_ci, double f_ref,
                                       std::size_t f_ref_observable = 0) {
  GridPointSummary summary;
  summary.dt = pt.dt;
  summary.beta = pt.beta;

  std::vector<ReplicaOutcome> outcomes(static_cast<std::size_t>(cfg.replicas));
  detail::parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    ReplicaRequest req;
    req.target = &target;
    req.spec = cfg.sampler;
    req.dt = pt.dt;
    req.beta = pt.beta;
    req.skew = skew;
    req.x0 = x0;
    req.density_budget = cfg.budget;
    req.seed = derive_seed(cfg.seed, grid_index, static_cast<std::uint64_t>(r));
    req.observables = observables;
    req.want_ess = want_ess;
    req.want_ci = want_ci;
    outcomes[static_cast<std::size_t>(r)] = run_replica(req);
  });

  const std::size_t n_obs = observables.size();
  summary.coord_means.assign(n_obs, 0.0);
  summary.coord_ci.assign(n_obs, 0.0);
  summary.coord_ess_median.assign(n_obs, 0.0);
  std::vector<std::vector<double>> ess_by_obs(n_obs);
  std::vector<double> replica_medians;
  std::vector<double> f_ref_averages;

  for (const auto& o : outcomes) {
    if (!o.valid) {
      ++summary.n_invalid;
      continue;
    }
    ++summary.n_valid;
    summary.mean_acceptance += o.acceptance_rate;
    summary.mean_density += static_cast<double>(o.budget.density);
    summary.mean_grad += static_cast<double>(o.budget.grad);
    for (std::size_t i = 0; i < n_obs; ++i) {
      summary.coord_means[i] += o.averages[i];
      if (want_ci) summary.coord_ci[i] += o.ci_half[i];
      if (want_ess) {
        ess_by_obs[i].push_back(o.ess_values[i]);
        if (o.ess_flagged[i]) ++summary.flagged_ess;
      }
    }
    if (want_ess) {
      std::vector<double> per_replica(n_obs);
      for (std::size_t i = 0; i < n_obs; ++i) per_replica[i] = o.ess_values[i];
      replica_medians.push_back(detail::median_of(per_replica));
      for (std::size_t i = 0; i < n_obs; ++i) summary.pooled_ess.push_back(o.ess_values[i]);
    }
    f_ref_averages.push_back(o.averages[f_ref_observable]);
  }

  if (summary.n_valid > 0) {
    const double nv = summary.n_valid;
    summary.mean_acceptance /= nv;
    summary.mean_density /= nv;
    summary.mean_grad /= nv;
    for (std::size_t i = 0; i < n_obs; ++i) {
      summary.coord_means[i] /= nv;
      summary.coord_ci[i] /= nv;
      if (want_ess) summary.coord_ess_median[i] = detail::median_of(ess_by_obs[i]);
    }
    if (want_ess) summary.median_ess = detail::median_of(replica_medians);
    if (f_ref_averages.size() >= 2) {
      const MseDecomposition m = mse_over_replicas(f_ref_averages, f_ref);
      summary.mse = m.mse;
      summary.bias_sq = m.bias_sq;
      summary.variance = m.variance;
    }
  }
  return summary;
}

inline SweepExperimentResult cmd_experiment_warped(const ExperimentConfig& cfg) {
  const json w = cfg.section("warped");
  const double b = detail::get_or<double>(w, "b", 0.05);
  const auto x0v = detail::get_or<std::vector<double>>(w, "x0", {15.0, 2.0});
  if (x0v.size() != 2) throw ConfigError("warped.x0 must have 2 entries");
  const double tol = detail::get_or<double>(w, "f_ref_tol", 1e-6);
  const auto boxv =
      detail::get_or<std::vector<double>>(w, "box", {-60.0, 60.0, -190.0, 35.0});
  if (boxv.size() != 4) throw ConfigError("warped.box must be [xlo, xhi, ylo, yhi]");
  if (cfg.sweep.empty()) throw ConfigError("warped experiment requires a sweep");

  WarpedGaussianTarget target(b);
  const VectorXd x0 = Eigen::Map<const VectorXd>(x0v.data(), 2);
  const MatrixXd j = make_rotation_2d();
  const std::vector<Observable> observables = {
      [](const VectorXd& x) { return x.squaredNorm(); }};

  SweepExperimentResult result;
  result.f_ref = quadrature_reference(
      target, [](const VectorXd& x) { return x.squaredNorm(); },
      QuadratureBox{boxv[0], boxv[1], boxv[2], boxv[3]}, tol);

  for (std::size_t g = 0; g < cfg.sweep.size(); ++g)
    result.points.push_back(run_grid_point(cfg, target, cfg.sweep[g], g, j, x0, observables,
                                           false, false, result.f_ref));
  return result;
}

// Damped Newton ascent to the posterior mode.  Used as the default chain start
// for the regression experiment; runs on the raw target, outside any chain's
// evaluation budget (both samplers start from the same point).
inline VectorXd logistic_map_estimate(const LogisticRegressionTarget& target,
                                      int max_iter = 50, double tol = 1e-10) {
  const MatrixXd& x = target.design();
  const Eigen::Index d = x.cols();
  VectorXd theta = VectorXd::Zero(d);
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd z = x * theta;
    VectorXd w(z.size());
    VectorXd resid(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = z[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-z[i]))
                                   : std::exp(z[i]) / (1.0 + std::exp(z[i]));
      w[i] = std::max(s * (1.0 - s), 1e-10);
      resid[i] = target.response()[i] - s;
    }
    const VectorXd grad = x.transpose() * resid - target.prior_precision() * theta;
    const MatrixXd hess =
        x.transpose() * w.asDiagonal() * x + target.prior_precision();
    const VectorXd step = hess.ldlt().solve(grad);
    theta += step;
    if (step.norm() < tol) break;
  }
  return theta;
}

inline SweepExperimentResult cmd_experiment_logistic(const ExperimentConfig& cfg) {
  const json l = cfg.section("logistic");
  const std::string path = detail::get_or<std::string>(l, "data", "");
  if (path.empty()) throw ConfigError("logistic.data must name a CSV file");
  const double prior_prec = detail::get_or<double>(l, "prior_precision", 0.01);
  const std::uint64_t j_seed = detail::get_or<std::uint64_t>(l, "j_seed", 42);
  const long reference_budget = detail::get_or<long>(l, "reference_budget", 0);
  const double reference_dt = detail::get_or<double>(l, "reference_dt", 0.005);
  if (cfg.sweep.empty()) throw ConfigError("logistic experiment requires a sweep");

  const RegressionData data = load_binary_regression_csv(path);
  const Eigen::Index d = data.design.cols();
  LogisticRegressionTarget target(data.design, data.response,
                                  prior_prec * MatrixXd::Identity(d, d));
  const MatrixXd j = make_permutation_skew(static_cast<int>(d), j_seed);
  const std::string start = detail::get_or<std::string>(l, "start", "map");
  if (start != "map" && start != "zero")
    throw ConfigError("logistic.start must be map|zero");
  const VectorXd x0 =
      start == "map" ? logistic_map_estimate(target) : VectorXd::Zero(d);

  std::vector<Observable> observables;
  for (Eigen::Index i = 0; i < d; ++i)
    observables.push_back([i](const VectorXd& x) { return x[i]; });

  SweepExperimentResult result;
  for (std::size_t g = 0; g < cfg.sweep.size(); ++g)
    result.points.push_back(run_grid_point(cfg, target, cfg.sweep[g], g, j, x0, observables,
                                           true, true, 0.0));

  if (reference_budget > 0) {
    ReplicaRequest req;
    req.target = &target;
    req.spec = cfg.sampler;
    req.spec.kernel = KernelKind::mala;
    req.dt = reference_dt;
    req.beta = 0.0;
    req.skew = j;
    req.x0 = x0;
    req.density_budget = reference_budget;
    req.seed = derive_seed(cfg.seed, 1000003, 0);
    req.observables = observables;
    const ReplicaOutcome ref = run_replica(req);
    if (!ref.valid) throw NumericalError("logistic reference run failed");
    result.reference_means = ref.averages;
  }
  return result;
}

struct CoxPointSummary {
  std::uint64_t j_seed = 0;
  GridPointSummary summary;
};

struct CoxExperimentResult {
  std::vector<CoxPointSummary> points;  // one per (J seed, sweep point)
};

inline CoxExperimentResult cmd_experiment_cox(const ExperimentConfig& cfg) {
  const json c = cfg.section("cox");
  const std::string path = detail::get_or<std::string>(c, "data", "");
  if (path.empty()) throw ConfigError("cox.data must name a coordinate file");
  const int n = detail::get_or<int>(c, "grid", 16);
  if (n > 32 && !detail::get_or<bool>(c, "allow_large_grid", false))
    throw ConfigError("cox.grid > 32 is expensive; set cox.allow_large_grid to confirm");
  std::vector<std::uint64_t> j_seeds;
  if (c.contains("j_seeds")) {
    j_seeds = c.at("j_seeds").get<std::vector<std::uint64_t>>();
  } else {
    for (std::uint64_t s = 0; s < 10; ++s) j_seeds.push_back(100 + s);
  }
  if (cfg.sweep.empty()) throw ConfigError("cox experiment requires a sweep");

  CoxHyperparameters hyper;
  hyper.sigma2 = detail::get_or<double>(c, "sigma2", hyper.sigma2);
  hyper.corr_scale = detail::get_or<double>(c, "corr_scale", hyper.corr_scale);
  const Eigen::MatrixXi counts = load_point_pattern_counts(path, n);
  hyper.mean = detail::get_or<double>(
      c, "mean", std::log(static_cast<double>(std::max(1, counts.sum()))) - hyper.sigma2 / 2.0);

  LogGaussianCoxTarget target(counts, hyper);
  const int d = target.dim();
  const VectorXd x0 = VectorXd::Constant(d, hyper.mean);

  std::vector<Observable> observables;
  for (int i = 0; i < d; ++i)
    observables.push_back([i](const VectorXd& x) { return x[i]; });

  CoxExperimentResult result;
  for (std::size_t js = 0; js < j_seeds.size(); ++js) {
    const MatrixXd j = make_permutation_skew(d, j_seeds[js]);
    for (std::size_t g = 0; g < cfg.sweep.size(); ++g) {
      const std::size_t grid_index = js * cfg.sweep.size() + g;
      CoxPointSummary point;
      point.j_seed = j_seeds[js];
      point.summary = run_grid_point(cfg, target, cfg.sweep[g], grid_index, j, x0,
                                     observables, true, false, 0.0);
      result.points.push_back(std::move(point));
    }
  }
  return result;
}

// Generic single-target run: emits one chain per replica with stored states.
struct SampleExperimentResult {
  std::vector<ChainResult> chains;
};

inline SampleExperimentResult cmd_experiment_sample(const ExperimentConfig& cfg) {
  const json s = cfg.section("sample");
  const std::string target_name = detail::get_or<std::string>(s, "target", "warped");
  const auto x0v = detail::get_or<std::vector<double>>(s, "x0", {});
  if (cfg.sweep.size() != 1)
    throw ConfigError("sample experiment requires exactly one sweep point");

  std::unique_ptr<TargetDistribution> target;
  MatrixXd j;
  if (target_name == "warped") {
    target = std::make_unique<WarpedGaussianTarget>(detail::get_or<double>(s, "b", 0.05));
    j = make_rotation_2d();
  } else if (target_name == "gaussian") {
    const auto diag = detail::get_or<std::vector<double>>(s, "precision_diag", {1.0, 1.0});
    MatrixXd p = MatrixXd::Zero(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) p(i, i) = diag[i];
    target = std::make_unique<GaussianTarget>(p);
    j = diag.size() == 2
            ? make_rotation_2d()
            : make_permutation_skew(static_cast<int>(diag.size()),
                                    detail::get_or<std::uint64_t>(s, "j_seed", 42));
  } else {
    throw ConfigError("sample.target must be warped|gaussian");
  }

  const int d = target->dim();
  VectorXd x0 = VectorXd::Zero(d);
  if (!x0v.empty()) {
    if (static_cast<int>(x0v.size()) != d) throw ConfigError("sample.x0 dimension mismatch");
    x0 = Eigen::Map<const VectorXd>(x0v.data(), d);
  }

  SampleExperimentResult result;
  result.chains.resize(static_cast<std::size_t>(cfg.replicas));
  detail::parallel_for(cfg.replicas, cfg.threads, [&](int r) {
    CountingTarget counting(*target);
    SkewMatrix skew = SkewMatrix::from_matrix(j);
    NonreversibleFlow flow = NonreversibleFlow::log_grad(counting, skew, cfg.sweep[0].beta);
    ReversibleKernel kernel = ReversibleKernel::metropolized(cfg.sampler.kernel, counting);
    LieTrotterSampler sampler(kernel, flow, cfg.sampler.integrator, cfg.sampler.ordering,
                              cfg.sweep[0].dt);
    ChainOptions options;
    options.store_samples = true;
    options.density_budget = cfg.budget;
    result.chains[static_cast<std::size_t>(r)] =
        run_chain(sampler, counting, x0, -1, {}, derive_seed(cfg.seed, 0, r), options);
  });
  return result;
}

// ---------------------------------------------------------------------------
// Output writers.

inline void write_sweep_points(const ExperimentConfig& cfg, const SweepExperimentResult& result,
                               const std::string& name) {
  detail::write_config_echo(cfg, name);
  const std::string echo = detail::config_echo(cfg);
  CsvWriter csv((std::filesystem::path(cfg.out) / (name + "_points.csv")).string());
  csv.row({"dt", "beta", "n_valid", "n_invalid", "mse", "bias_sq", "variance",
           "mean_acceptance", "mean_density_evals", "mean_grad_evals", "median_ess",
           "flagged_ess", "f_ref", "config"});
  for (const auto& p : result.points)
    csv.row({CsvWriter::field(p.dt), CsvWriter::field(p.beta), CsvWriter::field(p.n_valid),
             CsvWriter::field(p.n_invalid), CsvWriter::field(p.mse),
             CsvWriter::field(p.bias_sq), CsvWriter::field(p.variance),
             CsvWriter::field(p.mean_acceptance), CsvWriter::field(p.mean_density),
             CsvWriter::field(p.mean_grad), CsvWriter::field(p.median_ess),
             CsvWriter::field(p.flagged_ess), CsvWriter::field(result.f_ref), echo});
}

inline void write_logistic_covariates(const ExperimentConfig& cfg,
                                      const SweepExperimentResult& result) {
  const std::string echo = detail::config_echo(cfg);
  CsvWriter csv((std::filesystem::path(cfg.out) / "logistic_covariates.csv").string());
  csv.row({"dt", "beta", "covariate", "posterior_mean", "ci_half_width", "ess_median",
           "reference_mean", "config"});
  for (const auto& p : result.points)
    for (std::size_t i = 0; i < p.coord_means.size(); ++i)
      csv.row({CsvWriter::field(p.dt), CsvWriter::field(p.beta), CsvWriter::field(i),
               CsvWriter::field(p.coord_means[i]), CsvWriter::field(p.coord_ci[i]),
               CsvWriter::field(p.coord_ess_median[i]),
               result.reference_means.empty() ? std::string("")
                                              : CsvWriter::field(result.reference_means[i]),
               echo});
}

inline void write_cox_results(const ExperimentConfig& cfg, const CoxExperimentResult& result) {
  detail::write_config_echo(cfg, "cox");
  const std::string echo = detail::config_echo(cfg);
  CsvWriter csv((std::filesystem::path(cfg.out) / "cox_points.csv").string());
  csv.row({"j_seed", "dt", "beta", "n_valid", "n_invalid", "median_ess", "mean_acceptance",
           "mean_density_evals", "mean_grad_evals", "config"});
  for (const auto& p : result.points)
    csv.row({CsvWriter::field(static_cast<std::size_t>(p.j_seed)),
             CsvWriter::field(p.summary.dt), CsvWriter::field(p.summary.beta),
             CsvWriter::field(p.summary.n_valid), CsvWriter::field(p.summary.n_invalid),
             CsvWriter::field(p.summary.median_ess),
             CsvWriter::field(p.summary.mean_acceptance),
             CsvWriter::field(p.summary.mean_density), CsvWriter::field(p.summary.mean_grad),
             echo});

  CsvWriter cells((std::filesystem::path(cfg.out) / "cox_cell_ess.csv").string());
  cells.row({"j_seed", "dt", "beta", "ess"});
  for (const auto& p : result.points)
    for (double e : p.summary.pooled_ess)
      cells.row({CsvWriter::field(static_cast<std::size_t>(p.j_seed)),
                 CsvWriter::field(p.summary.dt), CsvWriter::field(p.summary.beta),
                 CsvWriter::field(e)});
}

inline void write_sample_chains(const ExperimentConfig& cfg,
                                const SampleExperimentResult& result) {
  detail::write_config_echo(cfg, "sample");
  for (std::size_t r = 0; r < result.chains.size(); ++r) {
    const ChainResult& chain = result.chains[r];
    CsvWriter csv((std::filesystem::path(cfg.out) /
                   ("sample_chain_" + std::to_string(r) + ".csv"))
                      .string());
    std::vector<std::string> header = {"step"};
    for (Eigen::Index i = 0; i < chain.samples.cols(); ++i)
      header.push_back("x" + std::to_string(i + 1));
    csv.row(header);
    for (Eigen::Index k = 0; k < chain.samples.rows(); ++k) {
      std::vector<std::string> fields = {CsvWriter::field(static_cast<long>(k))};
      for (Eigen::Index i = 0; i < chain.samples.cols(); ++i)
        fields.push_back(CsvWriter::field(chain.samples(k, i)));
      csv.row(fields);
    }
  }
}

// Ingest command: validates a raw data file and writes the normalized form.
inline void cmd_ingest(const std::string& kind, const std::string& path,
                       const std::string& out_dir, int grid = 64) {
  std::filesystem::create_directories(out_dir);
  if (kind == "pima") {
    const RegressionData data = ingest_pima(path);
    CsvWriter csv((std::filesystem::path(out_dir) / "pima_ingested.csv").string());
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < data.design.cols(); ++j)
      header.push_back(j == 0 ? "intercept" : "z" + std::to_string(j));
    header.push_back("y");
    csv.row(header);
    for (Eigen::Index i = 0; i < data.design.rows(); ++i) {
      std::vector<std::string> fields;
      for (Eigen::Index j = 0; j < data.design.cols(); ++j)
        fields.push_back(CsvWriter::field(data.design(i, j)));
      fields.push_back(CsvWriter::field(data.response[i]));
      csv.row(fields);
    }
  } else if (kind == "pine") {
    const Eigen::MatrixXi counts = load_point_pattern_counts(path, grid);
    CsvWriter csv((std::filesystem::path(out_dir) / "pine_counts.csv").string());
    csv.row({"i", "j", "count"});
    for (int i = 0; i < counts.rows(); ++i)
      for (int j = 0; j < counts.cols(); ++j)
        csv.row({CsvWriter::field(i), CsvWriter::field(j), CsvWriter::field(counts(i, j))});
  } else {
    throw ConfigError("ingest kind must be pima|pine");
  }
}

}  // namespace nrlangevin
