#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tvws/core/signal.hpp"

namespace tvws {

/// Adds zero-mean white Gaussian noise rescaled so that 20 log10(|x| / |n|) equals
/// snr_db exactly. Deterministic per seed.
inline RealSignal add_noise(const RealSignal& x, double snr_db, std::uint64_t seed) {
  x.validate("add_noise");
  const double norm_x = l2_norm(x.view());
  if (!(norm_x > 0.0)) throw InvalidArgument("add_noise: signal has zero norm");
  if (!std::isfinite(snr_db)) throw InvalidArgument("add_noise: snr must be finite");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> n(x.size());
  for (double& v : n) v = gauss(rng);
  const double m = mean_of(n);
  for (double& v : n) v -= m;
  const double scale = norm_x / (l2_norm(n) * std::pow(10.0, snr_db / 20.0));

  RealSignal out = x;
  for (std::size_t i = 0; i < n.size(); ++i) out.samples[i] += scale * n[i];
  return out;
}

}  // namespace tvws
