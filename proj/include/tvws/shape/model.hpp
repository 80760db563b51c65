#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/core/signal.hpp"
#include "tvws/shape/pchip.hpp"

namespace tvws {

/// Interpolation nodes of one harmonic amplitude function. The first and last
/// `pinned` node times are fixed; the rest move during the fit.
struct HafNodes {
  std::vector<double> times;
  std::vector<double> amps;
  std::size_t pinned = 1;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t free_times() const noexcept { return times.size() - 2 * pinned; }
  std::size_t first_free() const noexcept { return pinned; }

  void validate() const {
    if (times.size() != amps.size()) throw InvalidArgument("HafNodes: times and amps differ in length");
    if (pinned < 1 || times.size() < 2 * pinned) throw InvalidArgument("HafNodes: too few nodes for the pinned edges");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
      if (!(times[i + 1] > times[i])) throw InvalidArgument("HafNodes: times must be strictly increasing");
    for (double v : amps)
      if (!std::isfinite(v)) throw InvalidArgument("HafNodes: non-finite amplitude");
  }
};

struct HarmonicModel {
  int l = 2;          // harmonic index
  double e = 2.0;     // phase ratio
  double c = 0.0;     // quadrature coefficient
  HafNodes nodes;
  bool c_flagged = false;  // regression amplitude too small to define c
};

struct ExtensionMap {
  std::size_t n_pre = 0;
  std::size_t n_post = 0;
};

/// Full coefficient set. Samples of the fitted record sit at t0 + n / fs.
struct WaveShapeModel {
  int r = 1;
  std::vector<HarmonicModel> harmonics;  // l = 2..r
  double fs = 1.0;
  double t0 = 0.0;
  ExtensionMap extension;

  /// H = sum over harmonics of (free times + amplitudes + c + e).
  std::size_t n_coefficients() const noexcept {
    std::size_t h = 0;
    for (const auto& hm : harmonics) h += hm.nodes.free_times() + hm.nodes.size() + 2;
    return h;
  }
};

/// Layout per harmonic: [free inner times, amplitudes, c, e].
inline std::vector<double> flatten(const WaveShapeModel& m) {
  std::vector<double> g;
  g.reserve(m.n_coefficients());
  for (const auto& h : m.harmonics) {
    const auto& nd = h.nodes;
    for (std::size_t i = nd.pinned; i + nd.pinned < nd.size(); ++i) g.push_back(nd.times[i]);
    g.insert(g.end(), nd.amps.begin(), nd.amps.end());
    g.push_back(h.c);
    g.push_back(h.e);
  }
  return g;
}

inline WaveShapeModel unflatten(const WaveShapeModel& layout, std::span<const double> g) {
  if (g.size() != layout.n_coefficients()) throw InvalidArgument("unflatten: coefficient vector has wrong length");
  WaveShapeModel m = layout;
  std::size_t p = 0;
  for (auto& h : m.harmonics) {
    auto& nd = h.nodes;
    for (std::size_t i = nd.pinned; i + nd.pinned < nd.size(); ++i) nd.times[i] = g[p++];
    for (double& a : nd.amps) a = g[p++];
    h.c = g[p++];
    h.e = g[p++];
  }
  return m;
}

inline std::vector<double> model_times(const WaveShapeModel& m, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = m.t0 + static_cast<double>(i) / m.fs;
  return t;
}

/// Harmonic term alpha(t) [cos(2 pi e phi) + c sin(2 pi e phi)] added into `out`.
inline void add_harmonic(const HarmonicModel& h, std::span<const double> phi1, std::span<const double> times,
                         std::span<double> out) {
  const Pchip p(h.nodes.times, h.nodes.amps);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::size_t k = 0;
  const std::size_t last = p.t.size() - 2;
  for (std::size_t n = 0; n < times.size(); ++n) {
    const double x = times[n];
    if (n == 0 || x < p.t[k]) k = p.interval(x);
    while (k < last && x >= p.t[k + 1]) ++k;
    if (x > p.t.back() + 1e-9 * (p.t.back() - p.t.front())) throw InvalidArgument("evaluate_model: query outside node span");
    const double hk = p.t[k + 1] - p.t[k];
    const double s = std::clamp((x - p.t[k]) / hk, 0.0, 1.0);
    const double a = detail::hermite(p.a[k], p.a[k + 1], p.d[k], p.d[k + 1], hk, s);
    const double arg = kTwoPi * h.e * phi1[n];
    out[n] += a * (std::cos(arg) + h.c * std::sin(arg));
  }
}

/// cos(2 pi phi1) + sum_l alpha_l(t) [cos(2 pi e_l phi1) + c_l sin(2 pi e_l phi1)].
inline RealSignal evaluate_model(const WaveShapeModel& m, std::span<const double> phi1) {
  if (phi1.size() < 2) throw InvalidArgument("evaluate_model: phase too short");
  const auto t = model_times(m, phi1.size());
  RealSignal y(std::vector<double>(phi1.size()), m.fs, m.t0);
  for (std::size_t n = 0; n < phi1.size(); ++n) y[n] = std::cos(2.0 * std::numbers::pi * phi1[n]);
  for (const auto& h : m.harmonics) add_harmonic(h, phi1, t, y.samples);
  return y;
}

/// Sampled alpha_l(t_n) for every harmonic, over the n samples starting at sample `first`.
inline std::vector<std::vector<double>> haf_traces(const WaveShapeModel& m, std::size_t first, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = m.t0 + static_cast<double>(first + i) / m.fs;
  std::vector<std::vector<double>> out;
  for (const auto& h : m.harmonics) out.push_back(Pchip(h.nodes.times, h.nodes.amps)(t));
  return out;
}

inline nlohmann::ordered_json to_json(const WaveShapeModel& m) {
  nlohmann::ordered_json j;
  j["r"] = m.r;
  j["fs"] = m.fs;
  j["t0"] = m.t0;
  auto hs = nlohmann::ordered_json::array();
  for (const auto& h : m.harmonics) {
    nlohmann::ordered_json jh;
    jh["l"] = h.l;
    jh["e"] = h.e;
    jh["c"] = h.c;
    jh["c_flagged"] = h.c_flagged;
    jh["pinned"] = h.nodes.pinned;
    auto nodes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < h.nodes.size(); ++i) nodes.push_back({{"t", h.nodes.times[i]}, {"a", h.nodes.amps[i]}});
    jh["nodes"] = std::move(nodes);
    hs.push_back(std::move(jh));
  }
  j["harmonics"] = std::move(hs);
  j["extension_map"] = {{"n_pre", m.extension.n_pre}, {"n_post", m.extension.n_post}};
  return j;
}

inline WaveShapeModel model_from_json(const nlohmann::ordered_json& j) {
  WaveShapeModel m;
  m.r = j.at("r").get<int>();
  m.fs = j.at("fs").get<double>();
  m.t0 = j.value("t0", 0.0);
  for (const auto& jh : j.at("harmonics")) {
    HarmonicModel h;
    h.l = jh.at("l").get<int>();
    h.e = jh.at("e").get<double>();
    h.c = jh.at("c").get<double>();
    h.c_flagged = jh.value("c_flagged", false);
    h.nodes.pinned = jh.value("pinned", std::size_t{1});
    for (const auto& nd : jh.at("nodes")) {
      h.nodes.times.push_back(nd.at("t").get<double>());
      h.nodes.amps.push_back(nd.at("a").get<double>());
    }
    h.nodes.validate();
    m.harmonics.push_back(std::move(h));
  }
  if (m.r != static_cast<int>(m.harmonics.size()) + 1) throw InvalidArgument("model_from_json: r does not match harmonic count");
  if (j.contains("extension_map")) {
    m.extension.n_pre = j["extension_map"].at("n_pre").get<std::size_t>();
    m.extension.n_post = j["extension_map"].at("n_post").get<std::size_t>();
  }
  return m;
}

}  // namespace tvws
