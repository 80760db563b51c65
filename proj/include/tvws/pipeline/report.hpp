#pragma once

#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tvws/pipeline/decompose.hpp"
#include "tvws/pipeline/segment.hpp"

namespace tvws {

/// FNV-1a over the sample bytes, fs and t0: identifies the input of a report.
inline std::string input_digest(const RealSignal& x) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](double v) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (double v : x.samples) feed(v);
  feed(x.fs);
  feed(x.t0);
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline nlohmann::ordered_json inputs_json(const RealSignal& x) {
  return {{"digest", input_digest(x)}, {"samples", x.size()}, {"fs", x.fs}, {"t0", x.t0}};
}

inline nlohmann::ordered_json to_json(const OrderSelection& o) {
  return {{"r", o.r}, {"r_max_used", o.r_max_used}, {"scores", o.scores}, {"warnings", o.warnings}};
}

inline nlohmann::ordered_json to_json(const std::vector<StageTiming>& t) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& s : t) j.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  return j;
}

/// Everything but the signals themselves.
inline nlohmann::ordered_json to_json(const DenoiseResult& d) {
  nlohmann::ordered_json j;
  j["model"] = to_json(d.model);
  j["order"] = to_json(d.order);
  j["node_counts"] = d.node_counts;
  j["extension"] = {{"n_pre", d.extension.n_pre},
                    {"n_post", d.extension.n_post},
                    {"forward_fallback", d.extension.forward_fallback},
                    {"backward_fallback", d.extension.backward_fallback}};
  j["delta_used"] = d.delta_used;
  j["n_fft"] = d.n_fft;
  j["input_mean"] = d.input_mean;
  j["fit"] = to_json(d.diagnostics);
  if (d.metrics) j["metrics"] = to_json(*d.metrics);
  else j["metrics"] = nullptr;
  j["timings"] = to_json(d.timings);
  j["warnings"] = d.warnings;
  return j;
}

/// Report of one denoising run: inputs digest, config, model, metrics and stage timings.
inline nlohmann::ordered_json pipeline_report(const RealSignal& x, const PipelineConfig& cfg, const DenoiseResult& d) {
  nlohmann::ordered_json j;
  j["task"] = "denoise";
  j["inputs"] = inputs_json(x);
  j["config"] = to_json(cfg);
  const auto body = to_json(d);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

inline nlohmann::ordered_json pipeline_report(const RealSignal& x, const std::vector<PipelineConfig>& cfgs,
                                              const DecomposeResult& d) {
  nlohmann::ordered_json j;
  j["task"] = "decompose";
  j["inputs"] = inputs_json(x);
  auto jc = nlohmann::ordered_json::array();
  for (const auto& c : cfgs) jc.push_back(to_json(c));
  j["config"] = jc;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : d.components) comps.push_back(to_json(c));
  j["components"] = comps;
  j["warnings"] = d.warnings;
  return j;
}

inline nlohmann::ordered_json to_json(const SegmentationResult& s) {
  nlohmann::ordered_json j;
  if (s.t_hat) j["t_hat"] = *s.t_hat;
  else j["t_hat"] = nullptr;
  auto ph = nlohmann::ordered_json::array();
  for (const auto& c : s.per_harmonic)
    ph.push_back({{"l", c.l}, {"change_time", c.time}, {"all_changes", c.all_times}, {"penalty", c.penalty}});
  j["per_harmonic"] = ph;
  j["penalties"] = s.penalties;
  return j;
}

inline nlohmann::ordered_json pipeline_report(const RealSignal& x, const PipelineConfig& cfg, const SegmentationResult& s) {
  nlohmann::ordered_json j;
  j["task"] = "segment";
  j["inputs"] = inputs_json(x);
  j["config"] = to_json(cfg);
  j["segmentation"] = to_json(s);
  const auto body = to_json(s.fit);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

}  // namespace tvws
