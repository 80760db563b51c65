#pragma once

// Closed-form generators for the synthetic experiment families: the
// reconstruction signal, the four time-varying shapes used for denoising,
// the two-component decomposition signal and the sharp-transition signal.
//
// Every component has the form
//     x_k(t) = B(t) * sum_l alpha_l(t) cos(2 pi e_l phi(t)),  alpha_1 = 1, e_1 = 1
// and the generated record has its empirical mean removed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/core/signal.hpp"

namespace tvws {

using Law = std::function<double(double)>;

struct HarmonicLaw {
  double e = 1.0;  // phase ratio
  Law alpha;       // harmonic amplitude function
};

struct ComponentLaw {
  Law amplitude;  // B(t)
  Law phase;      // phi(t), cycles
  std::vector<HarmonicLaw> harmonics;  // index 0 is the fundamental
};

enum class SignalKind { TvReconstruction, TvDenoise, Multicomponent, SharpTransition };

struct SharpTransitionParams {
  double mu = 0.3;
  double lambda = 0.2;
  double kappa = 50.0;
  double t_t = 0.5;
  int r = 4;
};

struct SyntheticSpec {
  SignalKind kind = SignalKind::TvReconstruction;
  int shape = 1;  // s1..s4 for TvDenoise
  SharpTransitionParams sharp{};
  bool randomize = false;  // SharpTransition: draw parameters from the seed
  double duration = 1.0;
  double fs = 2000.0;
};

struct HarmonicTruth {
  double e = 1.0;
  std::vector<double> alpha;
};

struct ComponentTruth {
  std::vector<double> B1;
  std::vector<double> phi1;
  std::vector<HarmonicTruth> harmonics;  // index 0 is the fundamental
  std::vector<double> clean;             // this component, its own mean removed
  double mean = 0.0;
};

struct GroundTruth {
  std::vector<ComponentTruth> components;
  double mean = 0.0;                        // subtracted from the synthesized record
  std::optional<double> transition_time;    // SharpTransition only
  std::optional<SharpTransitionParams> sharp;
  double fs = 0.0;

  /// Noiseless, mean-removed sum of all components.
  std::vector<double> clean() const {
    std::vector<double> out;
    for (const auto& c : components) {
      if (out.empty()) out.assign(c.clean.size(), 0.0);
      for (std::size_t n = 0; n < out.size(); ++n) out[n] += c.clean[n];
    }
    return out;
  }
};

namespace laws {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline ComponentLaw fundamental_40hz() {
  ComponentLaw c;
  c.amplitude = [](double t) { return 0.1 * std::sqrt(t + 1.0); };
  c.phase = [](double t) { return 40.0 * t + 5.0 / kTwoPi * std::sin(kTwoPi * t); };
  c.harmonics.push_back({1.0, [](double) { return 1.0; }});
  return c;
}

inline ComponentLaw reconstruction() {
  ComponentLaw c = fundamental_40hz();
  c.harmonics.push_back({2.005, [](double t) { return 0.5 + 0.25 * std::cos(kTwoPi * 3.0 * t); }});
  c.harmonics.push_back({2.995, [](double t) { return 0.3 + 0.25 * std::cos(kTwoPi * 4.0 * t); }});
  return c;
}

/// Shapes s1..s4: cosine/cosine, linear/cosine, tanh/bump, linear/tanh HAF pairs.
inline ComponentLaw denoise_shape(int which) {
  ComponentLaw c = fundamental_40hz();
  auto cos3 = [](double t) { return 0.5 + 0.25 * std::cos(kTwoPi * 3.0 * t); };
  auto cos4 = [](double t) { return 0.3 + 0.25 * std::cos(kTwoPi * 4.0 * t); };
  auto linear = [](double t) { return 0.3 + 0.4 * t; };
  auto tanh2 = [](double t) { return 0.5 + 0.3 * std::tanh(20.0 * (t - 0.5)); };
  auto bump = [](double t) { return 0.2 + 0.3 * std::exp(-std::pow((t - 0.5) / 0.1, 2)); };
  auto tanh3 = [](double t) { return 0.35 + 0.2 * std::tanh(20.0 * (t - 0.5)); };
  switch (which) {
    case 1:
      c.harmonics.push_back({2.005, cos3});
      c.harmonics.push_back({2.995, cos4});
      break;
    case 2:
      c.harmonics.push_back({2.005, linear});
      c.harmonics.push_back({2.995, cos4});
      break;
    case 3:
      c.harmonics.push_back({2.005, tanh2});
      c.harmonics.push_back({2.995, bump});
      break;
    case 4:
      c.harmonics.push_back({2.005, linear});
      c.harmonics.push_back({2.995, tanh3});
      break;
    default:
      throw InvalidArgument("denoise_shape: shape index must be 1..4");
  }
  return c;
}

inline ComponentLaw multicomponent_first() {
  ComponentLaw c;
  c.amplitude = [](double t) { return std::sqrt(0.01 * t) + 1.1; };
  c.phase = [](double t) { return 25.0 * t + 5.0 / kTwoPi * std::cos(kTwoPi * t); };
  c.harmonics.push_back({1.0, [](double) { return 1.0; }});
  c.harmonics.push_back({2.005, [](double t) { return 0.5 + 0.2 * std::cos(kTwoPi * 3.0 * t); }});
  c.harmonics.push_back({3.003, [](double t) { return 0.3 + 0.2 * std::exp(-std::pow((t - 0.25) / 0.1, 2)); }});
  return c;
}

inline ComponentLaw multicomponent_second() {
  ComponentLaw c;
  c.amplitude = [](double t) { return 2.0 * std::log(t + 1.1) + 0.5; };
  c.phase = [](double t) { return 100.0 * t + 7.0 * t * t; };
  c.harmonics.push_back({1.0, [](double) { return 1.0; }});
  c.harmonics.push_back({2.002, [](double t) { return 0.6 + 0.3 * t * t; }});
  c.harmonics.push_back({3.002, [](double t) { return 0.4 + 0.5 * std::tanh(t - 0.5); }});
  c.harmonics.push_back({3.998, [](double t) { return 0.3 + 0.3 * std::cos(kTwoPi * 4.0 * t); }});
  return c;
}

/// Harmonics l = 2..r share the law mu + lambda tanh(kappa (t - t_t)), e_l = l.
inline ComponentLaw sharp_transition(const SharpTransitionParams& p) {
  ComponentLaw c = fundamental_40hz();
  for (int l = 2; l <= p.r; ++l) {
    c.harmonics.push_back({static_cast<double>(l), [p](double t) { return p.mu + p.lambda * std::tanh(p.kappa * (t - p.t_t)); }});
  }
  return c;
}

}  // namespace laws

/// Parameter distributions of the randomized transition experiment:
/// t_t ~ U[0.1, 0.9], kappa = 50, mu ~ U[0.1, 0.5], lambda ~ U[0.1, 0.35], r ~ U{3..6}.
inline SharpTransitionParams draw_sharp_transition(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SharpTransitionParams p;
  p.t_t = 0.1 + 0.8 * u01(rng);
  p.kappa = 50.0;
  p.mu = 0.1 + 0.4 * u01(rng);
  p.lambda = 0.1 + 0.25 * u01(rng);
  p.r = 3 + static_cast<int>(std::floor(4.0 * u01(rng)));
  if (p.r > 6) p.r = 6;
  return p;
}

inline std::vector<ComponentLaw> component_laws(const SyntheticSpec& spec) {
  switch (spec.kind) {
    case SignalKind::TvReconstruction: return {laws::reconstruction()};
    case SignalKind::TvDenoise: return {laws::denoise_shape(spec.shape)};
    case SignalKind::Multicomponent: return {laws::multicomponent_first(), laws::multicomponent_second()};
    case SignalKind::SharpTransition: return {laws::sharp_transition(spec.sharp)};
  }
  throw InvalidArgument("component_laws: unknown signal kind");
}

inline void validate_spec(const SyntheticSpec& spec) {
  if (!(spec.duration > 0.0)) throw InvalidArgument("generate: duration must be positive");
  if (!(spec.fs > 0.0)) throw InvalidArgument("generate: fs must be positive");
  if (spec.kind == SignalKind::TvDenoise && (spec.shape < 1 || spec.shape > 4))
    throw InvalidArgument("generate: shape index must be 1..4");
  if (spec.kind == SignalKind::SharpTransition && !spec.randomize) {
    const auto& p = spec.sharp;
    if (p.r < 2) throw InvalidArgument("generate: sharp transition needs r >= 2");
    if (!(p.kappa > 0.0)) throw InvalidArgument("generate: kappa must be positive");
    if (p.t_t < 0.0 || p.t_t > spec.duration) throw InvalidArgument("generate: transition time outside record");
  }
}

/// Samples the spec on t_n = n / fs, n = 0..round(duration * fs) - 1, and removes the mean.
/// `seed` is consumed only by randomized specs; output is deterministic given (spec, seed).
inline std::pair<RealSignal, GroundTruth> generate(SyntheticSpec spec, std::optional<std::uint64_t> seed = {}) {
  if (spec.kind == SignalKind::SharpTransition && spec.randomize) {
    spec.sharp = draw_sharp_transition(seed.value_or(0));
    spec.randomize = false;
  }
  validate_spec(spec);
  const auto n_samples = static_cast<std::size_t>(std::llround(spec.duration * spec.fs));
  if (n_samples < 2) throw InvalidArgument("generate: record shorter than two samples");

  const bool check_positive = spec.kind != SignalKind::SharpTransition;
  GroundTruth truth;
  truth.fs = spec.fs;
  std::vector<double> total(n_samples, 0.0);
  for (const auto& law : component_laws(spec)) {
    ComponentTruth ct;
    ct.B1.resize(n_samples);
    ct.phi1.resize(n_samples);
    ct.clean.assign(n_samples, 0.0);
    for (const auto& h : law.harmonics) ct.harmonics.push_back({h.e, std::vector<double>(n_samples)});
    for (std::size_t n = 0; n < n_samples; ++n) {
      const double t = static_cast<double>(n) / spec.fs;
      ct.B1[n] = law.amplitude(t);
      ct.phi1[n] = law.phase(t);
      double s = 0.0;
      for (std::size_t l = 0; l < law.harmonics.size(); ++l) {
        const double a = law.harmonics[l].alpha(t);
        if (check_positive && !(a >= -1e-12)) throw InvalidArgument("generate: HAF law must stay non-negative");
        ct.harmonics[l].alpha[n] = a;
        s += a * std::cos(laws::kTwoPi * law.harmonics[l].e * ct.phi1[n]);
      }
      ct.clean[n] = ct.B1[n] * s;
    }
    ct.mean = mean_of(ct.clean);
    for (std::size_t n = 0; n < n_samples; ++n) {
      total[n] += ct.clean[n];
      ct.clean[n] -= ct.mean;
    }
    truth.mean += ct.mean;
    truth.components.push_back(std::move(ct));
  }
  const double m = mean_of(total);
  truth.mean = m;
  for (double& v : total) v -= m;
  if (spec.kind == SignalKind::SharpTransition) {
    truth.transition_time = spec.sharp.t_t;
    truth.sharp = spec.sharp;
  }
  return {RealSignal(std::move(total), spec.fs), std::move(truth)};
}

/// Recomputes sum_l B alpha_l cos(2 pi e_l phi) from the stored truth, without mean removal.
inline std::vector<double> synthesize(const ComponentTruth& c) {
  std::vector<double> out(c.B1.size(), 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    double s = 0.0;
    for (const auto& h : c.harmonics) s += h.alpha[n] * std::cos(laws::kTwoPi * h.e * c.phi1[n]);
    out[n] = c.B1[n] * s;
  }
  return out;
}

inline nlohmann::ordered_json to_json(const GroundTruth& g) {
  nlohmann::ordered_json j;
  j["fs"] = g.fs;
  j["mean"] = g.mean;
  if (g.transition_time) j["transition_time"] = *g.transition_time;
  if (g.sharp) {
    j["sharp"] = {{"mu", g.sharp->mu}, {"lambda", g.sharp->lambda}, {"kappa", g.sharp->kappa},
                  {"t_t", g.sharp->t_t}, {"r", g.sharp->r}};
  }
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : g.components) {
    nlohmann::ordered_json jc;
    jc["mean"] = c.mean;
    jc["B1"] = c.B1;
    jc["phi1"] = c.phi1;
    auto hs = nlohmann::ordered_json::array();
    for (const auto& h : c.harmonics) hs.push_back({{"e", h.e}, {"alpha", h.alpha}});
    jc["harmonics"] = std::move(hs);
    jc["clean"] = c.clean;
    comps.push_back(std::move(jc));
  }
  j["components"] = std::move(comps);
  return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::ordered_json& j) {
  GroundTruth g;
  g.fs = j.at("fs").get<double>();
  g.mean = j.at("mean").get<double>();
  if (j.contains("transition_time")) g.transition_time = j["transition_time"].get<double>();
  if (j.contains("sharp")) {
    const auto& s = j["sharp"];
    g.sharp = SharpTransitionParams{s.at("mu").get<double>(), s.at("lambda").get<double>(),
                                    s.at("kappa").get<double>(), s.at("t_t").get<double>(), s.at("r").get<int>()};
  }
  for (const auto& jc : j.at("components")) {
    ComponentTruth c;
    c.mean = jc.at("mean").get<double>();
    c.B1 = jc.at("B1").get<std::vector<double>>();
    c.phi1 = jc.at("phi1").get<std::vector<double>>();
    for (const auto& jh : jc.at("harmonics"))
      c.harmonics.push_back({jh.at("e").get<double>(), jh.at("alpha").get<std::vector<double>>()});
    c.clean = jc.at("clean").get<std::vector<double>>();
    g.components.push_back(std::move(c));
  }
  return g;
}

}  // namespace tvws
