#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "tvws/solver/lm.hpp"
#include "tvws/tf/ridge.hpp"

namespace tvws {

struct PipelineConfig {
  double sigma = 1e-4;             // STFT window g(m) = exp(-sigma m^2)
  double I_f = 1.0;                // ridge jump bound, Hz
  double delta = 0.0;              // fundamental reconstruction half-width, Hz; 0 = window half-support
  int r_max = 10;
  int order = 0;                   // fixed r; 0 = select
  FitOptions fit{};
  double extension_factor = 0.1;
  double extension_weight = 0.05;  // fit weight of forecast samples relative to observed ones
  double energy_fraction = 0.9;
  std::size_t max_nodes = 0;       // 0 = one node per four cycles
  std::optional<Band> band;        // fundamental search band
  std::string preset = "synthetic";

  void validate() const {
    if (!(sigma > 0.0)) throw InvalidArgument("config: sigma must be positive");
    if (!(I_f > 0.0)) throw InvalidArgument("config: I_f must be positive");
    if (delta < 0.0) throw InvalidArgument("config: delta must be non-negative");
    if (r_max < 1) throw InvalidArgument("config: r_max must be at least 1");
    if (order < 0) throw InvalidArgument("config: order must be non-negative");
    if (extension_factor < 0.0) throw InvalidArgument("config: extension_factor must be non-negative");
    if (!(extension_weight >= 0.0 && extension_weight <= 1.0))
      throw InvalidArgument("config: extension_weight must lie in [0, 1]");
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
      throw InvalidArgument("config: energy_fraction must lie in (0, 1]");
    if (band && !(band->hi > band->lo && band->lo >= 0.0)) throw InvalidArgument("config: invalid band");
    fit.validate();
  }
};

/// Parameter bundles per signal class: synthetic (fs = 2 kHz), eeg, ip, ecg.
inline PipelineConfig preset(const std::string& name) {
  PipelineConfig c;
  c.preset = name;
  if (name == "synthetic") {
    c.sigma = 1e-4;
    c.I_f = 1.0;
    c.delta = 0.0;
  } else if (name == "eeg") {
    c.sigma = 2e-6;
    c.I_f = 0.04;
    c.delta = 0.4;
  } else if (name == "ip") {
    c.sigma = 1e-6;
    c.I_f = 0.3;
    c.delta = 0.008;
  } else if (name == "ecg") {
    c.sigma = 5e-5;
    c.I_f = 0.4;
    c.delta = 1.2;
  } else {
    throw InvalidArgument("unknown preset '" + name + "' (expected synthetic, eeg, ip or ecg)");
  }
  return c;
}

inline nlohmann::ordered_json to_json(const FitOptions& f) {
  return nlohmann::ordered_json{{"max_iters", f.max_iters},
                                {"grad_tol", f.grad_tol},
                                {"step_tol", f.step_tol},
                                {"lambda0", f.lambda0},
                                {"e_bound", f.e_bound},
                                {"min_node_gap", f.min_node_gap},
                                {"jacobian", f.jacobian == JacobianMode::AnalyticMixed ? "analytic_mixed" : "finite_difference"},
                                {"freeze_amplitudes", f.freeze_amplitudes},
                                {"freeze_times", f.freeze_times}};
}

inline void from_json_into(const nlohmann::json& j, FitOptions& f) {
  f.max_iters = j.value("max_iters", f.max_iters);
  f.grad_tol = j.value("grad_tol", f.grad_tol);
  f.step_tol = j.value("step_tol", f.step_tol);
  f.lambda0 = j.value("lambda0", f.lambda0);
  f.e_bound = j.value("e_bound", f.e_bound);
  f.min_node_gap = j.value("min_node_gap", f.min_node_gap);
  if (j.contains("jacobian")) {
    const auto m = j["jacobian"].get<std::string>();
    if (m == "analytic_mixed") f.jacobian = JacobianMode::AnalyticMixed;
    else if (m == "finite_difference") f.jacobian = JacobianMode::FiniteDifference;
    else throw InvalidArgument("config: unknown jacobian mode '" + m + "'");
  }
  f.freeze_amplitudes = j.value("freeze_amplitudes", f.freeze_amplitudes);
  f.freeze_times = j.value("freeze_times", f.freeze_times);
}

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["preset"] = c.preset;
  j["sigma"] = c.sigma;
  j["I_f"] = c.I_f;
  j["delta"] = c.delta;
  j["r_max"] = c.r_max;
  j["order"] = c.order;
  j["fit"] = to_json(c.fit);
  j["extension_factor"] = c.extension_factor;
  j["extension_weight"] = c.extension_weight;
  j["energy_fraction"] = c.energy_fraction;
  j["max_nodes"] = c.max_nodes;
  if (c.band) j["band"] = {c.band->lo, c.band->hi};
  else j["band"] = nullptr;
  return j;
}

/// Reads a config; unspecified fields keep the values of `preset` (or of the
/// base config when no preset is named).
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  PipelineConfig c = j.contains("preset") ? preset(j["preset"].get<std::string>()) : base;
  c.sigma = j.value("sigma", c.sigma);
  c.I_f = j.value("I_f", c.I_f);
  c.delta = j.value("delta", c.delta);
  c.r_max = j.value("r_max", c.r_max);
  c.order = j.value("order", c.order);
  if (j.contains("fit")) from_json_into(j["fit"], c.fit);
  c.extension_factor = j.value("extension_factor", c.extension_factor);
  c.extension_weight = j.value("extension_weight", c.extension_weight);
  c.energy_fraction = j.value("energy_fraction", c.energy_fraction);
  c.max_nodes = j.value("max_nodes", c.max_nodes);
  if (j.contains("band") && !j["band"].is_null()) {
    const auto b = j["band"].get<std::vector<double>>();
    if (b.size() != 2) throw InvalidArgument("config: band must be [lo, hi]");
    c.band = Band{b[0], b[1]};
  }
  c.validate();
  return c;
}

}  // namespace tvws
