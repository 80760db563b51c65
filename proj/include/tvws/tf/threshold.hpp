#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tvws/tf/reconstruct.hpp"
#include "tvws/tf/stft.hpp"

namespace tvws {

enum class ThresholdMode { Hard, Soft };

/// sigma_hat = median(|Re F|) / (0.6745 ||g||), over every stored coefficient.
inline double noise_sigma_estimate(const Spectrogram& s) {
  if (s.values.empty() || !(s.window_norm > 0.0)) throw InvalidArgument("threshold: degenerate spectrogram");
  std::vector<double> re(s.values.size());
  for (std::size_t i = 0; i < re.size(); ++i) re[i] = std::abs(s.values[i].real());
  auto mid = re.begin() + static_cast<std::ptrdiff_t>(re.size() / 2);
  std::nth_element(re.begin(), mid, re.end());
  double med = *mid;
  if (re.size() % 2 == 0) {
    const double lower = *std::max_element(re.begin(), mid);
    med = 0.5 * (med + lower);
  }
  return med / (0.6745 * s.window_norm);
}

/// eta = 3 sqrt(2) sigma_hat ||g||.
inline double default_threshold(const Spectrogram& s) {
  return 3.0 * std::sqrt(2.0) * noise_sigma_estimate(s) * s.window_norm;
}

/// Hard: zero coefficients with |F| < eta. Soft: shrink |F| by eta, keep the phase.
inline void threshold_coefficients(Spectrogram& s, double eta, ThresholdMode mode) {
  if (!(eta >= 0.0)) throw InvalidArgument("threshold: eta must be non-negative");
  for (auto& v : s.values) {
    const double m = std::abs(v);
    if (mode == ThresholdMode::Hard) {
      if (m < eta) v = cplx{};
    } else {
      v = m > eta ? v * ((m - eta) / m) : cplx{};
    }
  }
}

inline RealSignal threshold_denoise(const RealSignal& x, double sigma, ThresholdMode mode) {
  Spectrogram s = stft(x, sigma);
  threshold_coefficients(s, default_threshold(s), mode);
  const auto y = full_band_reconstruct(s);
  RealSignal out(std::vector<double>(x.size()), x.fs, x.t0);
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = y[n].real();
  return out;
}

}  // namespace tvws
