#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tvws/core/signal.hpp"
#include "tvws/shape/lr.hpp"
#include "tvws/shape/model.hpp"

namespace tvws {

/// Where the nodes of every harmonic go. Without an extension the I nodes span the
/// record; with one, the I nodes span the original samples and two extra pinned nodes
/// sit at the extended record edges.
struct NodeLayout {
  double t_first = 0.0;  // extended record edges
  double t_last = 1.0;
  double support_first = 0.0;  // original samples
  double support_last = 1.0;
  bool extended = false;
};

inline NodeLayout layout_for(const RealSignal& x, const ExtensionMap& ext = {}) {
  NodeLayout L;
  L.t_first = x.time(0);
  L.t_last = x.time(x.size() - 1);
  L.extended = ext.n_pre > 0 || ext.n_post > 0;
  if (L.extended) {
    if (ext.n_pre == 0 || ext.n_post == 0 || ext.n_pre + ext.n_post + 2 > x.size())
      throw InvalidArgument("warm_start: extension must add samples on both sides");
    L.support_first = x.time(ext.n_pre);
    L.support_last = x.time(x.size() - 1 - ext.n_post);
  } else {
    L.support_first = L.t_first;
    L.support_last = L.t_last;
  }
  return L;
}

inline HafNodes equidistant_nodes(const NodeLayout& L, std::size_t count, double amp) {
  if (count < 2) throw InvalidArgument("warm_start: node count must be at least 2");
  HafNodes nd;
  if (L.extended) {
    nd.pinned = 2;
    nd.times.push_back(L.t_first);
  }
  for (std::size_t i = 0; i < count; ++i)
    nd.times.push_back(L.support_first + (L.support_last - L.support_first) * static_cast<double>(i) /
                                            static_cast<double>(count - 1));
  if (L.extended) nd.times.push_back(L.t_last);
  nd.amps.assign(nd.times.size(), amp);
  return nd;
}

struct WarmStartResult {
  WaveShapeModel model;
  LrFit lr;  // projection the warm-start model reproduces
};

/// Constant-HAF initialization from the regression with the fundamental fixed:
/// alpha_l = a_l at every node, c_l = b_l / a_l, e_l = l. `node_counts[l - 2]` gives I_l.
inline WarmStartResult warm_start_with_fit(const RealSignal& x_demod, std::span<const double> phi1, int r,
                                           std::span<const std::size_t> node_counts, const ExtensionMap& ext = {}) {
  if (r < 1) throw InvalidArgument("warm_start: order must be at least 1");
  if (node_counts.size() + 1 < static_cast<std::size_t>(r))
    throw InvalidArgument("warm_start: node count missing for a harmonic");
  WarmStartResult out;
  out.lr = lr_fit_constrained(x_demod.view(), phi1, r);
  const NodeLayout L = layout_for(x_demod, ext);
  WaveShapeModel& m = out.model;
  m.r = r;
  m.fs = x_demod.fs;
  m.t0 = x_demod.t0;
  m.extension = ext;
  for (int l = 2; l <= r; ++l) {
    HarmonicModel h;
    h.l = l;
    h.e = l;
    const double a = out.lr.a[static_cast<std::size_t>(l - 2)];
    const double b = out.lr.b[static_cast<std::size_t>(l - 2)];
    if (std::abs(a) < 1e-12) {
      h.c = 0.0;
      h.c_flagged = true;
    } else {
      h.c = b / a;
    }
    h.nodes = equidistant_nodes(L, node_counts[static_cast<std::size_t>(l - 2)], a);
    m.harmonics.push_back(std::move(h));
  }
  return out;
}

inline WaveShapeModel warm_start(const RealSignal& x_demod, std::span<const double> phi1, int r,
                                 std::span<const std::size_t> node_counts, const ExtensionMap& ext = {}) {
  return warm_start_with_fit(x_demod, phi1, r, node_counts, ext).model;
}

}  // namespace tvws
