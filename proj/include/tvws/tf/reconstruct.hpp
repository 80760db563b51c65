#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "tvws/tf/ridge.hpp"
#include "tvws/tf/stft.hpp"

namespace tvws {

namespace detail {

// One-sided inversion weight: DC and Nyquist count once, every other bin twice.
inline double bin_weight(const Spectrogram& s, std::size_t k) noexcept {
  return (k == 0 || 2 * k == s.n_fft) ? 1.0 : 2.0;
}

}  // namespace detail

/// Vertical reconstruction around a frequency curve:
///   y(n) = 1 / (g(0) K) * sum_{|f_k - c(n)| < delta} w_k F(n, k)
/// The 1/K factor is the discrete bin-width term; with the full band the real part of y
/// reproduces the input exactly.
inline std::vector<cplx> vertical_reconstruct(const Spectrogram& s, std::span<const double> curve, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("vertical_reconstruct: delta must be positive");
  if (curve.size() != s.frames) throw InvalidArgument("vertical_reconstruct: ridge/spectrogram length mismatch");
  const double df = s.bin_width();
  const double scale = 1.0 / (s.window_peak * static_cast<double>(s.n_fft));
  const long last = static_cast<long>(s.bins) - 1;
  std::vector<cplx> y(s.frames);
  for (std::size_t n = 0; n < s.frames; ++n) {
    const double c = curve[n];
    long lo = static_cast<long>(std::ceil((c - delta) / df));
    long hi = static_cast<long>(std::floor((c + delta) / df));
    if (std::abs(lo * df - c) >= delta) ++lo;  // strict inequality at the band edges
    if (std::abs(hi * df - c) >= delta) --hi;
    lo = std::max(lo, 0L);
    hi = std::min(hi, last);
    if (lo > hi) throw InvalidArgument("vertical_reconstruct: band contains no frequency bins");
    cplx acc{};
    for (long k = lo; k <= hi; ++k) acc += detail::bin_weight(s, std::size_t(k)) * s.at(std::size_t(n), std::size_t(k));
    y[n] = scale * acc;
  }
  return y;
}

inline std::vector<cplx> vertical_reconstruct(const Spectrogram& s, const Ridge& ridge, double delta) {
  return vertical_reconstruct(s, ridge.freq, delta);
}

/// Sum over every stored bin; Re of the result inverts stft() when the spectrogram is full band.
inline std::vector<cplx> full_band_reconstruct(const Spectrogram& s) {
  if (!s.full_band()) throw InvalidArgument("full_band_reconstruct: spectrogram was truncated in frequency");
  const double scale = 1.0 / (s.window_peak * static_cast<double>(s.n_fft));
  std::vector<cplx> y(s.frames);
  for (std::size_t n = 0; n < s.frames; ++n) {
    cplx acc{};
    for (std::size_t k = 0; k < s.bins; ++k) acc += detail::bin_weight(s, k) * s.at(n, k);
    y[n] = scale * acc;
  }
  return y;
}

/// Amplitude B1(n) and unwrapped phase phi1(n) (cycles) of the fundamental component.
struct FundamentalEstimate {
  std::vector<double> B1;
  std::vector<double> phi1;
  double fs = 1.0;
  double guard = 0.0;            // positivity floor applied to B1
  std::vector<double> ridge_hz;  // ridge used for the reconstruction

  std::size_t size() const noexcept { return B1.size(); }
  double mean_frequency() const {
    if (phi1.size() < 2) return 0.0;
    return (phi1.back() - phi1.front()) * fs / static_cast<double>(phi1.size() - 1);
  }
};

/// Unwrapped phase in cycles, made non-decreasing by clipping negative increments,
/// with phi(anchor) in [-0.5, 0.5).
inline std::vector<double> unwrap_cycles(std::span<const cplx> y, std::size_t anchor = 0) {
  std::vector<double> phi(y.size());
  if (y.empty()) return phi;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  phi[0] = std::arg(y[0]) / kTwoPi;
  for (std::size_t n = 1; n < y.size(); ++n) {
    double d = std::arg(y[n]) / kTwoPi - std::arg(y[n - 1]) / kTwoPi;
    d -= std::round(d);
    phi[n] = phi[n - 1] + std::max(0.0, d);
  }
  anchor = std::min(anchor, y.size() - 1);
  const double shift = std::floor(phi[anchor] + 0.5);
  for (double& p : phi) p -= shift;
  return phi;
}

struct FundamentalOptions {
  std::optional<Band> band;   // ridge search band
  std::size_t anchor = 0;     // sample whose phase is kept within half a cycle of zero
};

inline FundamentalEstimate estimate_fundamental(const Spectrogram& s, double max_jump_hz, double delta,
                                                const FundamentalOptions& opts = {}) {
  if (s.hop != 1) throw InvalidArgument("estimate_fundamental: needs a hop-1 spectrogram");
  const Ridge ridge = extract_ridge(s, max_jump_hz, opts.band);
  const auto y = vertical_reconstruct(s, ridge, delta);
  FundamentalEstimate f;
  f.fs = s.fs;
  f.ridge_hz = ridge.freq;
  f.B1.resize(y.size());
  double peak = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    f.B1[n] = std::abs(y[n]);
    peak = std::max(peak, f.B1[n]);
  }
  f.guard = std::max(1e-3 * peak, std::numeric_limits<double>::epsilon() * s.signal_norm);
  if (!(f.guard > 0.0)) throw NumericalError("estimate_fundamental: zero fundamental amplitude");
  for (double& b : f.B1) b = std::max(b, f.guard);
  f.phi1 = unwrap_cycles(y, opts.anchor);
  return f;
}

}  // namespace tvws
