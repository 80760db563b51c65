#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tvws/pipeline/denoise.hpp"

namespace tvws {

/// Change-in-mean segmentation by pruned exact linear time search: minimizes the sum
/// of within-segment squared deviations plus `penalty` per change. Returns the change
/// indices in increasing order; index k means a new segment starts at sample k.
inline std::vector<std::size_t> pelt_mean(std::span<const double> y, double penalty, std::size_t min_segment = 2) {
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw InvalidArgument("pelt: penalty must be finite and non-negative");
  if (min_segment < 1) throw InvalidArgument("pelt: min_segment must be at least 1");
  const std::size_t N = y.size();
  if (N < 2 * min_segment) return {};
  std::vector<double> s1(N + 1, 0.0), s2(N + 1, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    s1[n + 1] = s1[n] + y[n];
    s2[n + 1] = s2[n] + y[n] * y[n];
  }
  auto cost = [&](std::size_t a, std::size_t b) {  // samples a..b-1
    const double m = static_cast<double>(b - a);
    const double s = s1[b] - s1[a];
    return std::max(0.0, s2[b] - s2[a] - s * s / m);
  };
  std::vector<double> F(N + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> last(N + 1, 0);
  F[0] = -penalty;
  std::vector<std::size_t> cand{0};
  for (std::size_t t = min_segment; t <= N; ++t) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t tau : cand) {
      if (t - tau < min_segment) continue;
      const double v = F[tau] + cost(tau, t) + penalty;
      if (v < best) {
        best = v;
        arg = tau;
      }
    }
    F[t] = best;
    last[t] = arg;
    std::vector<std::size_t> keep;
    keep.reserve(cand.size() + 1);
    for (std::size_t tau : cand)
      if (t - tau < min_segment || F[tau] + cost(tau, t) <= F[t]) keep.push_back(tau);
    if (t + 1 >= min_segment) keep.push_back(t + 1 - min_segment);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    cand = std::move(keep);
  }
  std::vector<std::size_t> cps;
  for (std::size_t t = N; last[t] > 0; t = last[t]) cps.push_back(last[t]);
  std::reverse(cps.begin(), cps.end());
  return cps;
}

/// Variance of the noise in a trace from the median absolute deviation of its first
/// difference: var(diff) = 2 var(noise).
inline double mad_diff_variance(std::span<const double> y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d(y.size() - 1);
  for (std::size_t n = 0; n + 1 < y.size(); ++n) d[n] = y[n + 1] - y[n];
  auto median = [](std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  const double med = median(d);
  for (double& v : d) v = std::abs(v - med);
  const double sd = 1.4826 * median(d);
  return sd * sd / 2.0;
}

struct SegmentOptions {
  std::optional<double> penalty;  // absolute penalty; default 2 ln(N) var per trace
  double range_fraction = 0.75;   // var >= (range_fraction (max - min))^2 of the trace
  double variance_floor = 1e-4;   // var >= this, HAF units squared
  std::size_t min_segment = 2;
};

/// Per-trace variance used in the default penalty: the difference-based noise estimate,
/// bounded below by a fraction of the trace range and an absolute floor. A fitted HAF is a
/// smooth curve, so the difference-based estimate alone is close to zero.
inline double trace_variance(std::span<const double> y, const SegmentOptions& opts) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double span = y.empty() ? 0.0 : *hi - *lo;
  return std::max({mad_diff_variance(y), std::pow(opts.range_fraction * span, 2), opts.variance_floor});
}

struct HarmonicChange {
  int l = 0;
  double time = 0.0;                // first change, seconds
  std::vector<double> all_times;    // every detected change, seconds
  double penalty = 0.0;
};

struct SegmentationResult {
  std::optional<double> t_hat;                  // mean of the per-harmonic first changes
  std::vector<HarmonicChange> per_harmonic;     // harmonics with at least one change
  std::vector<std::vector<double>> haf_traces;  // alpha_l(n), l = 2..r, on the original support
  std::vector<double> penalties;                // penalty used per trace, l = 2..r
  DenoiseResult fit;
};

/// Change-in-mean detection on the fitted HAF traces. Traces are sampled on the
/// original support; t_hat averages the first change of every harmonic that has one.
inline SegmentationResult segment_model(DenoiseResult fit, std::size_t N, double t0, double fs,
                                        const SegmentOptions& opts = {}) {
  SegmentationResult out;
  const auto traces = haf_traces(fit.model, fit.extension.n_pre, N);
  for (const auto& h : fit.model.harmonics) {
    const auto& y = traces[static_cast<std::size_t>(&h - fit.model.harmonics.data())];
    double pen = 0.0;
    if (opts.penalty) {
      pen = *opts.penalty;
    } else {
      pen = 2.0 * std::log(static_cast<double>(N)) * trace_variance(y, opts);
    }
    out.penalties.push_back(pen);
    const auto cps = pelt_mean(y, pen, opts.min_segment);
    if (!cps.empty()) {
      HarmonicChange c;
      c.l = h.l;
      c.penalty = pen;
      for (std::size_t k : cps) c.all_times.push_back(t0 + static_cast<double>(k) / fs);
      c.time = c.all_times.front();
      out.per_harmonic.push_back(std::move(c));
    }
    out.haf_traces.push_back(y);
  }
  if (!out.per_harmonic.empty()) {
    double s = 0.0;
    for (const auto& c : out.per_harmonic) s += c.time;
    out.t_hat = s / static_cast<double>(out.per_harmonic.size());
  }
  out.fit = std::move(fit);
  return out;
}

/// Node-count energy fraction used for segmentation. A step-like HAF keeps most of its
/// envelope energy at DC, so the denoising fraction leaves too few nodes to place it.
inline constexpr double kSegmentEnergyFraction = 0.99;

/// `cfg` with the segmentation node-count fraction.
inline PipelineConfig segmentation_config(PipelineConfig cfg) {
  cfg.energy_fraction = kSegmentEnergyFraction;
  return cfg;
}

/// Fits the full model, then runs segment_model(). Requires r >= 2.
inline SegmentationResult segment(const RealSignal& x, const PipelineConfig& cfg, const SegmentOptions& opts = {},
                                  const RealSignal* reference = nullptr) {
  DenoiseResult fit = denoise(x, cfg, reference);
  if (fit.model.r < 2) throw StageError("segment", "fitted model has a single harmonic; no HAF to segment");
  std::vector<StageTiming> timings = std::move(fit.timings);
  SegmentationResult out =
      run_stage("segment", timings, [&] { return segment_model(std::move(fit), x.size(), x.t0, x.fs, opts); });
  out.fit.timings = std::move(timings);
  return out;
}

}  // namespace tvws
