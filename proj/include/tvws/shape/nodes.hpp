#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tvws/core/fft.hpp"
#include "tvws/core/signal.hpp"

namespace tvws {

/// Upper node count: one node per four cycles of the fundamental, ceil(N mean_if / (4 fs)).
inline std::size_t default_max_nodes(std::size_t n_samples, double fs, double mean_if) {
  const double cycles = static_cast<double>(n_samples) * mean_if / fs;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(cycles / 4.0 - 1e-9)));
}

/// Bandwidth of the envelope |y| in cycles per record: the smallest FFT bin at which the
/// cumulative two-sided energy reaches `energy_fraction`.
inline std::size_t envelope_bandwidth_bins(std::span<const cplx> harmonic, double energy_fraction) {
  if (harmonic.empty()) throw InvalidArgument("estimate_node_count: empty input");
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
    throw InvalidArgument("estimate_node_count: energy_fraction must lie in (0, 1]");
  std::vector<double> env(harmonic.size());
  double peak = 0.0;
  for (std::size_t n = 0; n < env.size(); ++n) {
    env[n] = std::abs(harmonic[n]);
    peak = std::max(peak, env[n]);
  }
  if (!(peak > 0.0)) throw InvalidArgument("estimate_node_count: all-zero input");
  const std::size_t n = env.size();
  RealFft fft(n);
  const auto spec = fft.forward(env);
  std::vector<double> energy(spec.size());
  double total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double w = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
    energy[k] = w * std::norm(spec[k]);
    total += energy[k];
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < energy.size(); ++k) {
    acc += energy[k];
    if (acc >= energy_fraction * total * (1.0 - 1e-12)) return k;
  }
  return energy.size() - 1;
}

/// I = 2 BW T + 1 with BW T the envelope bandwidth in cycles per record, clamped to [2, max_nodes].
inline std::size_t estimate_node_count(std::span<const cplx> harmonic, double fs, double energy_fraction = 0.9,
                                       std::size_t max_nodes = 0) {
  if (!(fs > 0.0)) throw InvalidArgument("estimate_node_count: fs must be positive");
  const std::size_t bw = envelope_bandwidth_bins(harmonic, energy_fraction);
  std::size_t count = 2 * bw + 1;
  if (max_nodes >= 2) count = std::min(count, max_nodes);
  return std::max<std::size_t>(2, count);
}

}  // namespace tvws
