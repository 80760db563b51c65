#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "tvws/tf/stft.hpp"

namespace tvws {

/// Frequency band in Hz, inclusive.
struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

struct Ridge {
  std::vector<double> freq;       // Hz, one per frame
  std::vector<std::size_t> bin;   // bin index per frame
  double band_halfwidth = 0.0;    // reconstruction half-width, filled by callers
};

/// Greedy ridge: anchored at the global magnitude maximum (inside `band` when given),
/// then extended frame by frame in both directions, each step restricted to
/// [c(n) - I_f, c(n) + I_f].
inline Ridge extract_ridge(const Spectrogram& s, double max_jump_hz, std::optional<Band> band = {}) {
  const double df = s.bin_width();
  if (!(max_jump_hz > 0.0) || max_jump_hz + 1e-12 < df)
    throw InvalidArgument("extract_ridge: I_f must be at least one bin width");
  std::size_t k_lo = 1;
  std::size_t k_hi = s.bins - 1;
  if (s.full_band() && k_hi == s.n_fft / 2) --k_hi;  // keep 0 < f < fs/2
  if (band) {
    if (!(band->hi > band->lo)) throw InvalidArgument("extract_ridge: empty band");
    k_lo = std::max<std::size_t>(k_lo, static_cast<std::size_t>(std::ceil(band->lo / df)));
    k_hi = std::min<std::size_t>(k_hi, static_cast<std::size_t>(std::floor(band->hi / df)));
  }
  if (k_lo > k_hi || s.frames == 0) throw InvalidArgument("extract_ridge: empty band");

  double best = -1.0;
  std::size_t n0 = 0, k0 = k_lo;
  for (std::size_t n = 0; n < s.frames; ++n) {
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      const double m = std::norm(s.at(n, k));
      if (m > best) {
        best = m;
        n0 = n;
        k0 = k;
      }
    }
  }
  if (!(best > 0.0)) throw NumericalError("extract_ridge: spectrogram is identically zero in band");

  const std::size_t jump = static_cast<std::size_t>(std::floor(max_jump_hz / df + 1e-9));
  Ridge r;
  r.bin.assign(s.frames, k0);
  auto step = [&](std::size_t n, std::size_t prev) {
    const std::size_t lo = std::max(k_lo, prev >= jump ? prev - jump : 0);
    const std::size_t hi = std::min(k_hi, prev + jump);
    std::size_t arg = prev;
    double m = -1.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const double v = std::norm(s.at(n, k));
      if (v > m) {
        m = v;
        arg = k;
      }
    }
    return arg;
  };
  for (std::size_t n = n0 + 1; n < s.frames; ++n) r.bin[n] = step(n, r.bin[n - 1]);
  for (std::size_t n = n0; n-- > 0;) r.bin[n] = step(n, r.bin[n + 1]);
  r.freq.resize(s.frames);
  for (std::size_t n = 0; n < s.frames; ++n) r.freq[n] = s.freq(r.bin[n]);
  return r;
}

}  // namespace tvws
