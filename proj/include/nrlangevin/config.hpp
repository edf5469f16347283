#pragma once

#include <json.hpp>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nrlangevin/errors.hpp"
#include "nrlangevin/kernels.hpp"
#include "nrlangevin/ode.hpp"
#include "nrlangevin/splitting.hpp"

namespace nrlangevin {

using nlohmann::json;

struct SweepPoint {
  double dt = 0.0;
  double beta = 0.0;
};

struct SamplerSpec {
  KernelKind kernel = KernelKind::mala;
  Ordering ordering = Ordering::nonreversible_first;
  FlowIntegrator integrator{OdeMethod::rk4, 1, 1};
  FlowKind flow_kind = FlowKind::log_grad;
  double flow_alpha = 1.0;
  double window_lo = 0.0, window_hi = 1.0;
};

// Fully resolved experiment configuration.  `raw` keeps the resolved JSON for
// provenance: it is echoed into every output file.
struct ExperimentConfig {
  std::string experiment;
  std::string out = "results";
  std::uint64_t seed = 1;
  int threads = 1;
  int replicas = 1;
  long budget = 3500;
  SamplerSpec sampler;
  std::vector<SweepPoint> sweep;
  json raw;

  json section(const std::string& name) const {
    return raw.contains(name) ? raw.at(name) : json::object();
  }
};

namespace detail {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

inline KernelKind parse_kernel(const std::string& s) {
  if (s == "mala") return KernelKind::mala;
  if (s == "rwmh") return KernelKind::rwmh;
  if (s == "mala_barker" || s == "barker") return KernelKind::mala_barker;
  if (s == "exact_ou") return KernelKind::exact_ou;
  if (s == "theta_half") return KernelKind::theta_half;
  throw ConfigError("unknown kernel '" + s + "'");
}

inline Ordering parse_ordering(const std::string& s) {
  if (s == "nonreversible_first") return Ordering::nonreversible_first;
  if (s == "reversible_first") return Ordering::reversible_first;
  throw ConfigError("unknown ordering '" + s + "'");
}

inline OdeMethod parse_method(const std::string& s) {
  if (s == "euler") return OdeMethod::euler;
  if (s == "rk4") return OdeMethod::rk4;
  if (s == "taylor") return OdeMethod::taylor;
  throw ConfigError("unknown integrator method '" + s + "'");
}

inline FlowKind parse_flow_kind(const std::string& s) {
  if (s == "log_grad") return FlowKind::log_grad;
  if (s == "power") return FlowKind::power;
  if (s == "compact") return FlowKind::compact;
  throw ConfigError("unknown flow kind '" + s + "'");
}

}  // namespace detail

inline const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::mala: return "mala";
    case KernelKind::rwmh: return "rwmh";
    case KernelKind::mala_barker: return "mala_barker";
    case KernelKind::exact_ou: return "exact_ou";
    case KernelKind::theta_half: return "theta_half";
  }
  return "?";
}

inline const char* ordering_name(Ordering o) {
  return o == Ordering::nonreversible_first ? "nonreversible_first" : "reversible_first";
}

// Parses and schema-validates a configuration document.  Every failure is a
// ConfigError naming the offending field.
inline ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  ExperimentConfig cfg;
  cfg.raw = doc;
  if (!doc.contains("experiment") || !doc.at("experiment").is_string())
    throw ConfigError("config requires a string field 'experiment'");
  cfg.experiment = doc.at("experiment").get<std::string>();
  static const std::vector<std::string> known = {"gaussian_analysis", "warped", "logistic",
                                                 "cox", "sample"};
  if (std::find(known.begin(), known.end(), cfg.experiment) == known.end())
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");

  cfg.out = detail::get_or<std::string>(doc, "out", cfg.out);
  cfg.seed = detail::get_or<std::uint64_t>(doc, "seed", cfg.seed);
  cfg.threads = detail::get_or<int>(doc, "threads", cfg.threads);
  cfg.replicas = detail::get_or<int>(doc, "replicas", cfg.replicas);
  cfg.budget = detail::get_or<long>(doc, "budget", cfg.budget);
  if (cfg.replicas < 1) throw ConfigError("'replicas' must be >= 1");
  if (cfg.threads < 1) throw ConfigError("'threads' must be >= 1");
  if (cfg.budget < 3 && cfg.experiment != "gaussian_analysis")
    throw ConfigError("'budget' must be at least 3 density evaluations");

  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    if (!s.is_object()) throw ConfigError("'sampler' must be an object");
    cfg.sampler.kernel =
        detail::parse_kernel(detail::get_or<std::string>(s, "kernel", "mala"));
    cfg.sampler.ordering = detail::parse_ordering(
        detail::get_or<std::string>(s, "ordering", "nonreversible_first"));
    cfg.sampler.flow_kind =
        detail::parse_flow_kind(detail::get_or<std::string>(s, "flow", "log_grad"));
    cfg.sampler.flow_alpha = detail::get_or<double>(s, "alpha", 1.0);
    if (s.contains("window")) {
      const auto w = s.at("window").get<std::vector<double>>();
      if (w.size() != 2 || !(w[0] < w[1]))
        throw ConfigError("'sampler.window' must be [lo, hi] with lo < hi");
      cfg.sampler.window_lo = w[0];
      cfg.sampler.window_hi = w[1];
    }
    if (s.contains("integrator")) {
      const json& integ = s.at("integrator");
      cfg.sampler.integrator.method =
          detail::parse_method(detail::get_or<std::string>(integ, "method", "rk4"));
      cfg.sampler.integrator.substeps = detail::get_or<int>(integ, "substeps", 1);
      cfg.sampler.integrator.taylor_order = detail::get_or<int>(integ, "order", 1);
      cfg.sampler.integrator.validate();
    }
  }

  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    if (sw.contains("pairs")) {
      for (const auto& p : sw.at("pairs")) {
        const auto pair = p.get<std::vector<double>>();
        if (pair.size() != 2) throw ConfigError("'sweep.pairs' entries must be [dt, beta]");
        cfg.sweep.push_back({pair[0], pair[1]});
      }
    } else {
      const auto dts = detail::get_or<std::vector<double>>(sw, "dts", {});
      const auto betas = detail::get_or<std::vector<double>>(sw, "betas", {0.0});
      for (double dt : dts)
        for (double beta : betas) cfg.sweep.push_back({dt, beta});
    }
    for (const auto& p : cfg.sweep)
      if (!(p.dt > 0.0)) throw ConfigError("sweep step sizes must be positive");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace nrlangevin
