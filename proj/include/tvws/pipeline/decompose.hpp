#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tvws/pipeline/denoise.hpp"

namespace tvws {

struct DecomposeResult {
  std::vector<DenoiseResult> components;  // in fitting order
  RealSignal residual;                    // x minus every reconstructed component
  std::vector<std::string> warnings;
};

namespace detail {

/// Fraction of the original support where ridge `f` lies within `delta` of harmonic
/// l f_prev, l = 1..r_prev, of an earlier component.
inline double ridge_overlap(const DenoiseResult& prev, const DenoiseResult& cur, double delta) {
  const auto fp = trim_vector(prev.fundamental.ridge_hz, prev.extension.n_pre, prev.extension.n_post);
  const auto fc = trim_vector(cur.fundamental.ridge_hz, cur.extension.n_pre, cur.extension.n_post);
  if (fp.size() != fc.size() || fp.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t n = 0; n < fc.size(); ++n) {
    for (int l = 1; l <= prev.model.r; ++l) {
      if (std::abs(fc[n] - l * fp[n]) < delta) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(fc.size());
}

}  // namespace detail

/// Deflation: component k is fit on the residual left by components 1..k-1, its
/// fundamental taken from the residual's own spectrogram. `cfgs` holds one config per
/// component, or a single config shared by all K.
/// `references` (noiseless components, when known) fill the per-component SNR.
inline DecomposeResult decompose(const RealSignal& x, const std::vector<PipelineConfig>& cfgs, int K,
                                 const std::vector<RealSignal>* references = nullptr) {
  x.validate("decompose");
  if (K < 1) throw InvalidArgument("decompose: K must be at least 1");
  if (cfgs.size() != 1 && cfgs.size() != static_cast<std::size_t>(K))
    throw InvalidArgument("decompose: expected 1 or K configs, got " + std::to_string(cfgs.size()));
  if (references && references->size() != static_cast<std::size_t>(K))
    throw InvalidArgument("decompose: expected K reference components");

  DecomposeResult out;
  out.residual = x;
  for (int k = 0; k < K; ++k) {
    const PipelineConfig& cfg = cfgs.size() == 1 ? cfgs[0] : cfgs[static_cast<std::size_t>(k)];
    const RealSignal* ref = references ? &(*references)[static_cast<std::size_t>(k)] : nullptr;
    DenoiseResult c;
    try {
      c = denoise(out.residual, cfg, ref);
    } catch (const StageError& e) {
      throw StageError("component " + std::to_string(k + 1) + "/" + e.stage(), e.message());
    }
    for (const auto& prev : out.components) {
      const double frac = detail::ridge_overlap(prev, c, c.delta_used);
      if (frac > 0.0)
        out.warnings.push_back("component " + std::to_string(k + 1) + ": ridge within delta of an earlier component's harmonics on " +
                               std::to_string(static_cast<int>(std::round(100.0 * frac))) + "% of the record");
    }
    for (std::size_t n = 0; n < x.size(); ++n) out.residual[n] -= c.reconstruction[n];
    out.components.push_back(std::move(c));
  }
  return out;
}

}  // namespace tvws
