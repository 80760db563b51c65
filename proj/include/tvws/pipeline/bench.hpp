#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tvws/core/noise.hpp"
#include "tvws/core/synthetic.hpp"
#include "tvws/pipeline/decompose.hpp"
#include "tvws/pipeline/segment.hpp"
#include "tvws/tf/threshold.hpp"

namespace tvws {

enum class Experiment { Denoise, Multicomponent, Segmentation };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Denoise: return "denoise";
    case Experiment::Multicomponent: return "multicomponent";
    case Experiment::Segmentation: return "segmentation";
  }
  return "unknown";
}

inline Experiment experiment_from_string(const std::string& s) {
  if (s == "denoise") return Experiment::Denoise;
  if (s == "multicomponent") return Experiment::Multicomponent;
  if (s == "segmentation") return Experiment::Segmentation;
  throw InvalidArgument("unknown experiment '" + s + "' (expected denoise, multicomponent or segmentation)");
}

struct BenchSpec {
  Experiment experiment = Experiment::Denoise;
  int shape = 1;  // s1..s4 for Denoise
  std::vector<double> snr_levels{0.0, 5.0, 10.0, 15.0, 20.0};
  int n_realizations = 20;
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0 = hardware concurrency

  void validate() const {
    if (n_realizations < 1) throw InvalidArgument("bench: n_realizations must be at least 1");
    if (snr_levels.empty()) throw InvalidArgument("bench: snr_levels must not be empty");
    if (experiment == Experiment::Denoise && (shape < 1 || shape > 4)) throw InvalidArgument("bench: shape must be 1..4");
  }
};

/// One realization: named SNR_out (dB) or absolute-error (s) values, or the failure message.
struct Trial {
  double snr_in = 0.0;
  int realization = 0;
  std::vector<std::pair<std::string, double>> values;
  std::string error;
};

struct CellStats {
  double snr_in = 0.0;
  std::string method;
  std::size_t n = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};

struct BenchResult {
  BenchSpec spec;
  std::vector<Trial> trials;
  std::vector<CellStats> cells;
};

/// Deterministic per-cell seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + a * 0xBF58476D1CE4E5B9ULL + b * 0x94D049BB133111EBULL + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads; f must write only its own slot.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

/// Two-component configs: the dominant 90-130 Hz component first, then the 10-45 Hz one.
/// Fitting the lower component first lets its fourth harmonic absorb the other component.
inline std::vector<PipelineConfig> multicomponent_configs(const PipelineConfig& base = preset("synthetic")) {
  PipelineConfig hi = base, lo = base;
  hi.band = Band{90.0, 130.0};
  lo.band = Band{10.0, 45.0};
  return {hi, lo};
}

/// Denoising trial on shape s_k: ours, the LR warm-start model, hard and soft STFT thresholding.
inline std::vector<std::pair<std::string, double>> denoise_trial(const RealSignal& clean, double snr_in,
                                                                 std::uint64_t noise_seed, const PipelineConfig& cfg) {
  const RealSignal x = add_noise(clean, snr_in, noise_seed);
  const DenoiseResult d = denoise(x, cfg, &clean);
  return {{"ours", snr_out(clean, d.reconstruction)},
          {"lr", snr_out(clean, d.lr_baseline)},
          {"hard", snr_out(clean, threshold_denoise(x, cfg.sigma, ThresholdMode::Hard))},
          {"soft", snr_out(clean, threshold_denoise(x, cfg.sigma, ThresholdMode::Soft))}};
}

/// Two-component trial. comp1 is the 25 Hz component and comp2 the 100 Hz one,
/// whatever the fitting order.
inline std::vector<std::pair<std::string, double>> multicomponent_trial(const RealSignal& x0, const GroundTruth& gt,
                                                                        double snr_in, std::uint64_t noise_seed,
                                                                        const std::vector<PipelineConfig>& cfgs) {
  const RealSignal x = add_noise(x0, snr_in, noise_seed);
  const RealSignal c1(gt.components[0].clean, x0.fs, x0.t0), c2(gt.components[1].clean, x0.fs, x0.t0);
  const DecomposeResult d = decompose(x, cfgs, 2);
  const auto& f2 = d.components[0];  // 100 Hz component fit first
  const auto& f1 = d.components[1];
  RealSignal sum = f1.reconstruction;
  for (std::size_t n = 0; n < sum.size(); ++n) sum[n] += f2.reconstruction[n];
  const RealSignal clean(gt.clean(), x0.fs, x0.t0);
  return {{"comp1", snr_out(c1, f1.reconstruction)}, {"comp1_lr", snr_out(c1, f1.lr_baseline)},
          {"comp2", snr_out(c2, f2.reconstruction)}, {"comp2_lr", snr_out(c2, f2.lr_baseline)},
          {"sum", snr_out(clean, sum)}};
}

/// Randomized sharp-transition trial: absolute error of t_hat. A miss, including a fit
/// with a single harmonic and so no HAF to segment, scores the record duration.
inline std::vector<std::pair<std::string, double>> segmentation_trial(std::uint64_t signal_seed, double snr_in,
                                                                      std::uint64_t noise_seed, const PipelineConfig& cfg) {
  SyntheticSpec spec;
  spec.kind = SignalKind::SharpTransition;
  spec.randomize = true;
  const auto [x0, gt] = generate(spec, signal_seed);
  const RealSignal x = add_noise(x0, snr_in, noise_seed);
  DenoiseResult fit = denoise(x, cfg);
  if (fit.model.r < 2) return {{"ae", x.duration()}, {"detected", 0.0}};
  const SegmentationResult s = segment_model(std::move(fit), x.size(), x.t0, x.fs);
  const double ae = s.t_hat ? std::abs(*s.t_hat - *gt.transition_time) : x.duration();
  return {{"ae", ae}, {"detected", s.t_hat ? 1.0 : 0.0}};
}

inline std::vector<CellStats> summarize(const std::vector<Trial>& trials, const std::vector<double>& levels) {
  std::vector<CellStats> cells;
  for (double snr : levels) {
    std::map<std::string, std::vector<double>> by;
    std::vector<std::string> order;
    std::size_t failures = 0;
    for (const auto& t : trials) {
      if (t.snr_in != snr) continue;
      if (!t.error.empty()) {
        ++failures;
        continue;
      }
      for (const auto& [k, v] : t.values) {
        if (!by.count(k)) order.push_back(k);
        by[k].push_back(v);
      }
    }
    for (const auto& k : order) {
      auto v = by[k];
      CellStats c;
      c.snr_in = snr;
      c.method = k;
      c.n = v.size();
      c.failures = failures;
      double s = 0.0;
      for (double e : v) s += e;
      c.mean = s / static_cast<double>(v.size());
      double ss = 0.0;
      for (double e : v) ss += (e - c.mean) * (e - c.mean);
      c.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size();
      c.median = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
      cells.push_back(c);
    }
  }
  return cells;
}

/// Runs the experiment grid. Failed realizations are recorded and the run continues.
inline BenchResult run_bench(const BenchSpec& spec, const PipelineConfig& cfg = preset("synthetic")) {
  spec.validate();
  BenchResult out;
  out.spec = spec;
  const std::size_t L = spec.snr_levels.size();
  const auto R = static_cast<std::size_t>(spec.n_realizations);
  out.trials.resize(L * R);

  RealSignal clean;
  GroundTruth gt;
  if (spec.experiment == Experiment::Denoise) {
    SyntheticSpec s;
    s.kind = SignalKind::TvDenoise;
    s.shape = spec.shape;
    std::tie(clean, gt) = generate(s);
  } else if (spec.experiment == Experiment::Multicomponent) {
    SyntheticSpec s;
    s.kind = SignalKind::Multicomponent;
    std::tie(clean, gt) = generate(s);
  }
  const auto mc_cfgs = multicomponent_configs(cfg);
  const PipelineConfig seg_cfg = segmentation_config(cfg);

  parallel_for(L * R, spec.jobs, [&](std::size_t i) {
    const std::size_t li = i / R, k = i % R;
    Trial& t = out.trials[i];
    t.snr_in = spec.snr_levels[li];
    t.realization = static_cast<int>(k);
    const std::uint64_t noise_seed = mix_seed(spec.seed, li + 1, k + 1);
    try {
      switch (spec.experiment) {
        case Experiment::Denoise: t.values = denoise_trial(clean, t.snr_in, noise_seed, cfg); break;
        case Experiment::Multicomponent: t.values = multicomponent_trial(clean, gt, t.snr_in, noise_seed, mc_cfgs); break;
        case Experiment::Segmentation:
          t.values = segmentation_trial(mix_seed(spec.seed, 0, k + 1), t.snr_in, noise_seed, seg_cfg);
          break;
      }
    } catch (const std::exception& e) {
      t.error = e.what();
    }
  });
  out.cells = summarize(out.trials, spec.snr_levels);
  return out;
}

inline const CellStats* find_cell(const BenchResult& r, double snr, const std::string& method) {
  for (const auto& c : r.cells)
    if (c.snr_in == snr && c.method == method) return &c;
  return nullptr;
}

inline nlohmann::ordered_json to_json(const BenchResult& r) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(r.spec.experiment);
  if (r.spec.experiment == Experiment::Denoise) j["shape"] = r.spec.shape;
  j["snr_levels"] = r.spec.snr_levels;
  j["n_realizations"] = r.spec.n_realizations;
  j["seed"] = r.spec.seed;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"snr_in", c.snr_in}, {"method", c.method}, {"n", c.n}, {"failures", c.failures},
                     {"mean", c.mean}, {"std", c.stddev}, {"median", c.median}});
  j["cells"] = cells;
  auto errors = nlohmann::ordered_json::array();
  for (const auto& t : r.trials)
    if (!t.error.empty()) errors.push_back({{"snr_in", t.snr_in}, {"realization", t.realization}, {"error", t.error}});
  j["failures"] = errors;
  return j;
}

}  // namespace tvws
