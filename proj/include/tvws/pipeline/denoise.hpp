#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvws/core/metrics.hpp"
#include "tvws/extend/extend.hpp"
#include "tvws/pipeline/config.hpp"
#include "tvws/shape/demod.hpp"
#include "tvws/shape/lr.hpp"
#include "tvws/shape/nodes.hpp"
#include "tvws/shape/order.hpp"
#include "tvws/shape/warm_start.hpp"
#include "tvws/solver/lm.hpp"
#include "tvws/tf/reconstruct.hpp"

namespace tvws {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Runs `f` under a stage name: times it and tags any exception with the stage.
template <class F>
auto run_stage(const char* stage, std::vector<StageTiming>& timings, F&& f) -> decltype(f()) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    timings.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record();
    } else {
      auto r = f();
      record();
      return r;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct DenoiseResult {
  RealSignal reconstruction;   // original support
  RealSignal lr_baseline;      // full fixed-shape regression, same front end
  RealSignal warm_start;       // warm-start model before the nonlinear fit
  WaveShapeModel model;
  FundamentalEstimate fundamental;  // on the extended record
  ExtensionResult extension;
  OrderSelection order;
  std::vector<std::size_t> node_counts;  // I_l before extension nodes, l = 2..r
  FitDiagnostics diagnostics;
  std::optional<MetricsReport> metrics;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  double delta_used = 0.0;
  std::size_t n_fft = 0;
  double input_mean = 0.0;  // removed before the analysis; the zero-mean model leaves it in the residual
};

namespace detail {

/// Cycle lengths (samples) near the start and end of the raw record, from the phase slope
/// of a preliminary fundamental estimate over three cycles at each end.
inline std::pair<double, double> coarse_cycle_lengths(const RealSignal& x, const PipelineConfig& cfg) {
  StftOptions so;
  so.n_bins = std::max(next_pow2(x.size()), next_pow2(static_cast<std::size_t>(std::ceil(x.fs / cfg.I_f))));
  const Spectrogram s = stft(x, cfg.sigma, so);
  const double delta = cfg.delta > 0.0 ? cfg.delta : window_half_support(cfg.sigma, x.fs, s.n_fft);
  FundamentalOptions fo;
  fo.band = cfg.band;
  const FundamentalEstimate f = estimate_fundamental(s, cfg.I_f, delta, fo);
  const double mean_if = f.mean_frequency();
  if (!(mean_if > 0.0)) throw NumericalError("preliminary phase does not advance");
  const std::size_t N = x.size();
  const auto m = std::min<std::size_t>(N - 1, static_cast<std::size_t>(std::ceil(3.0 * x.fs / mean_if)));
  auto cycle = [&](std::size_t a, std::size_t b) {
    const double cyc = f.phi1[b] - f.phi1[a];
    return cyc > 0.0 ? static_cast<double>(b - a) / cyc : x.fs / mean_if;
  };
  return {cycle(0, m), cycle(N - 1 - m, N - 1)};
}

inline std::vector<double> real_part(const std::vector<cplx>& y) {
  std::vector<double> r(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) r[n] = y[n].real();
  return r;
}

}  // namespace detail

/// Boundary extension used by denoise(): seasonal forecasts with cycle lengths taken
/// from a preliminary fundamental estimate (autocorrelation fallback).
inline ExtensionResult pipeline_extension(const RealSignal& x, const PipelineConfig& cfg,
                                          std::vector<std::string>* warnings = nullptr) {
  if (cfg.extension_factor <= 0.0) return extend_boundaries(x, 4.0, 4.0, 0.0);
  double back = 0.0, fwd = 0.0;
  try {
    std::tie(back, fwd) = detail::coarse_cycle_lengths(x, cfg);
  } catch (const std::exception& e) {
    if (warnings) warnings->push_back(std::string("cycle length from autocorrelation: ") + e.what());
    back = fwd = static_cast<double>(acf_cycle_length(x));
  }
  const double limit = static_cast<double>(x.size()) / 3.0;
  if (back > limit || fwd > limit) {
    if (warnings) warnings->push_back("record too short for a 3-cycle extension; extension skipped");
    return extend_boundaries(x, 4.0, 4.0, 0.0);
  }
  return extend_boundaries(x, std::max(back, 4.0), std::max(fwd, 4.0), cfg.extension_factor);
}

/// Denoising chain on an already extended record: stft -> ridge -> fundamental -> order ->
/// demodulate -> node counts -> warm start -> fit -> synthesis -> remodulate -> trim.
/// `reference` (noiseless signal, when known) fills the SNR entry of the metrics.
inline DenoiseResult denoise_extended(const RealSignal& x, ExtensionResult extension, const PipelineConfig& cfg,
                                      const RealSignal* reference = nullptr,
                                      std::vector<StageTiming> timings = {}) {
  cfg.validate();
  x.validate("denoise");
  DenoiseResult out;
  out.timings = std::move(timings);
  auto& T = out.timings;
  out.extension = std::move(extension);
  if (out.extension.extended.size() != x.size() + out.extension.n_pre + out.extension.n_post)
    throw InvalidArgument("denoise: extension does not match the record");
  const RealSignal& xe = out.extension.extended;
  const ExtensionMap emap{out.extension.n_pre, out.extension.n_post};
  const std::size_t N = x.size();

  Spectrogram spec = run_stage("stft", T, [&] {
    StftOptions so;
    so.n_bins = std::max(next_pow2(xe.size()), next_pow2(static_cast<std::size_t>(std::ceil(xe.fs / cfg.I_f))));
    return stft(xe, cfg.sigma, so);
  });
  out.n_fft = spec.n_fft;
  out.delta_used = cfg.delta > 0.0 ? cfg.delta : window_half_support(cfg.sigma, xe.fs, spec.n_fft);

  Ridge ridge = run_stage("extract_ridge", T, [&] { return extract_ridge(spec, cfg.I_f, cfg.band); });
  ridge.band_halfwidth = out.delta_used;
  out.fundamental = run_stage("estimate_fundamental", T, [&] {
    FundamentalEstimate f;
    const auto y = vertical_reconstruct(spec, ridge, out.delta_used);
    f.fs = xe.fs;
    f.ridge_hz = ridge.freq;
    double peak = 0.0;
    for (const auto& v : y) peak = std::max(peak, std::abs(v));
    f.guard = std::max(1e-3 * peak, std::numeric_limits<double>::epsilon() * spec.signal_norm);
    if (!(f.guard > 0.0)) throw NumericalError("zero fundamental amplitude");
    f.B1.resize(y.size());
    for (std::size_t n = 0; n < y.size(); ++n) f.B1[n] = std::max(std::abs(y[n]), f.guard);
    f.phi1 = unwrap_cycles(y, emap.n_pre);
    return f;
  });
  const auto& phi1 = out.fundamental.phi1;
  const double mean_if = out.fundamental.mean_frequency();

  const RealSignal xd = run_stage("demodulate", T, [&] { return demodulate(xe, out.fundamental); });

  out.order = run_stage("estimate_order", T, [&] {
    if (cfg.order > 0) {
      OrderSelection s;
      s.r = s.r_max_used = cfg.order;
      return s;
    }
    return select_order(xd, phi1, cfg.r_max);
  });
  for (const auto& w : out.order.warnings) out.warnings.push_back(w);
  const int r = out.order.r;

  out.node_counts = run_stage("estimate_node_count", T, [&] {
    std::vector<std::size_t> counts;
    const std::size_t cap = cfg.max_nodes >= 2 ? cfg.max_nodes : default_max_nodes(N, x.fs, mean_if);
    const double delta_l = std::min(out.delta_used, 0.45 * mean_if);
    for (int l = 2; l <= r; ++l) {
      std::vector<double> c(ridge.freq.size());
      for (std::size_t n = 0; n < c.size(); ++n) c[n] = l * ridge.freq[n];
      std::size_t count = 2;
      try {
        const auto y = vertical_reconstruct(spec, c, delta_l);
        const std::vector<cplx> core(y.begin() + static_cast<std::ptrdiff_t>(emap.n_pre),
                                     y.end() - static_cast<std::ptrdiff_t>(emap.n_post));
        count = estimate_node_count(core, x.fs, cfg.energy_fraction, cap);
      } catch (const InvalidArgument& e) {
        out.warnings.push_back("harmonic " + std::to_string(l) + ": " + e.what() + "; using 2 nodes");
      }
      counts.push_back(count);
    }
    return counts;
  });
  spec = Spectrogram{};  // release the matrix before the fit

  WarmStartResult ws = run_stage("warm_start", T, [&] { return warm_start_with_fit(xd, phi1, r, out.node_counts, emap); });

  FitResult fr = run_stage("fit", T, [&] {
    std::vector<double> w;
    if (cfg.extension_weight < 1.0 && (emap.n_pre > 0 || emap.n_post > 0)) {
      w.assign(xd.size(), 1.0);
      std::fill_n(w.begin(), emap.n_pre, cfg.extension_weight);
      std::fill_n(w.end() - static_cast<std::ptrdiff_t>(emap.n_post), emap.n_post, cfg.extension_weight);
    }
    return fit(xd, phi1, ws.model, cfg.fit, w);
  });
  out.model = std::move(fr.model);
  out.diagnostics = std::move(fr.diagnostics);

  run_stage("synthesize", T, [&] {
    const RealSignal yd = evaluate_model(out.model, phi1);
    out.reconstruction = trim(remodulate(yd, out.fundamental), out.extension);
    const RealSignal wsd(ws.lr.fitted, xe.fs, xe.t0);
    out.warm_start = trim(remodulate(wsd, out.fundamental), out.extension);
    const LrFit full = lr_fit(xd.view(), phi1, r);
    out.lr_baseline = trim(remodulate(RealSignal(full.fitted, xe.fs, xe.t0), out.fundamental), out.extension);
    out.reconstruction.t0 = out.warm_start.t0 = out.lr_baseline.t0 = x.t0;
  });

  run_stage("metrics", T, [&] {
    RealSignal residual = x;
    for (std::size_t n = 0; n < N; ++n) residual[n] -= out.reconstruction[n];
    try {
      out.metrics = residual_metrics(residual, out.reconstruction);
    } catch (const InvalidArgument& e) {
      out.warnings.push_back(std::string("metrics: ") + e.what());
      out.metrics = MetricsReport{};
    }
    if (reference) out.metrics->snr_out = snr_out(*reference, out.reconstruction);
  });
  return out;
}

/// Full denoising chain: mean removal, boundary extension, then denoise_extended().
/// A constant offset has no place in the zero-mean wave-shape model, and its window
/// leakage would otherwise dominate the lowest bins of the ridge search.
inline DenoiseResult denoise(const RealSignal& x, const PipelineConfig& cfg, const RealSignal* reference = nullptr) {
  cfg.validate();
  x.validate("denoise");
  const double mean = mean_of(x.view());
  RealSignal xc = x;
  for (double& v : xc.samples) v -= mean;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  ExtensionResult ext = run_stage("extend", timings, [&] { return pipeline_extension(xc, cfg, &warnings); });
  DenoiseResult out = denoise_extended(xc, std::move(ext), cfg, reference, std::move(timings));
  out.input_mean = mean;
  out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

}  // namespace tvws
