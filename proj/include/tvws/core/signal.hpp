#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tvws/core/error.hpp"

namespace tvws {

/// Uniformly sampled real signal. Sample n sits at time t0 + n / fs.
struct RealSignal {
  std::vector<double> samples;
  double fs = 1.0;
  double t0 = 0.0;

  RealSignal() = default;
  RealSignal(std::vector<double> x, double fs_hz, double start = 0.0)
      : samples(std::move(x)), fs(fs_hz), t0(start) {}

  std::size_t size() const noexcept { return samples.size(); }
  double operator[](std::size_t n) const noexcept { return samples[n]; }
  double& operator[](std::size_t n) noexcept { return samples[n]; }
  std::span<const double> view() const noexcept { return samples; }

  double time(std::size_t n) const noexcept { return t0 + static_cast<double>(n) / fs; }
  /// N / fs, the record length in seconds.
  double duration() const noexcept { return static_cast<double>(samples.size()) / fs; }

  std::vector<double> times() const {
    std::vector<double> t(samples.size());
    for (std::size_t n = 0; n < t.size(); ++n) t[n] = time(n);
    return t;
  }

  /// Throws InvalidArgument when fs <= 0, fewer than two samples, or a non-finite sample.
  void validate(const std::string& who = "RealSignal") const {
    if (!(fs > 0.0) || !std::isfinite(fs)) throw InvalidArgument(who + ": sampling rate must be positive");
    if (samples.size() < 2) throw InvalidArgument(who + ": signal needs at least two samples");
    for (double v : samples) {
      if (!std::isfinite(v)) throw InvalidArgument(who + ": non-finite sample");
    }
  }
};

inline double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double mean_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline void require_same_shape(const RealSignal& a, const RealSignal& b, const std::string& who) {
  if (a.size() != b.size()) throw InvalidArgument(who + ": length mismatch");
  if (std::abs(a.fs - b.fs) > 1e-9 * a.fs) throw InvalidArgument(who + ": sampling rate mismatch");
}

}  // namespace tvws
