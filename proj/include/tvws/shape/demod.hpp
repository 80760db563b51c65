#pragma once

#include <algorithm>

#include "tvws/core/signal.hpp"
#include "tvws/tf/reconstruct.hpp"

namespace tvws {

/// x(n) / max(B1(n), guard).
inline RealSignal demodulate(const RealSignal& x, const FundamentalEstimate& f) {
  if (x.size() != f.size()) throw InvalidArgument("demodulate: length mismatch");
  RealSignal out = x;
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = x[n] / std::max(f.B1[n], f.guard);
  return out;
}

inline RealSignal remodulate(const RealSignal& y, const FundamentalEstimate& f) {
  if (y.size() != f.size()) throw InvalidArgument("remodulate: length mismatch");
  RealSignal out = y;
  for (std::size_t n = 0; n < y.size(); ++n) out[n] = y[n] * std::max(f.B1[n], f.guard);
  return out;
}

}  // namespace tvws
