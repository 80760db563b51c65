#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tvws/core/signal.hpp"
#include "tvws/shape/lr.hpp"

namespace tvws {

/// Selection criterion: (N, RSS_r, r) -> score, lower is better.
using OrderCriterion = std::function<double(std::size_t, double, int)>;

/// N ln(RSS / N) + 2 r ln N.
inline double penalized_rss_criterion(std::size_t n, double rss, int r) {
  const double dn = static_cast<double>(n);
  return dn * std::log(rss / dn) + 2.0 * r * std::log(dn);
}

struct OrderOptions {
  OrderCriterion criterion = penalized_rss_criterion;
  double max_condition = 1e8;        // reciprocal-condition limit of the design
  double rss_floor_rel = 1e-10;      // RSS floor relative to |x|^2
};

struct OrderSelection {
  int r = 1;
  int r_max_used = 1;
  std::vector<double> scores;  // index r - 1
  std::vector<std::string> warnings;
};

/// Largest r with r * mean IF below fs / 2.
inline int nyquist_order_limit(std::span<const double> phi1, double fs) {
  if (phi1.size() < 2) return 1;
  const double mean_if = (phi1.back() - phi1.front()) * fs / static_cast<double>(phi1.size() - 1);
  if (!(mean_if > 0.0)) return 1;
  return std::max(1, static_cast<int>(std::floor((fs / 2.0) / mean_if - 1e-9)));
}

inline OrderSelection select_order(const RealSignal& x_demod, std::span<const double> phi1, int r_max,
                                   const OrderOptions& opts = {}) {
  if (x_demod.size() != phi1.size()) throw InvalidArgument("estimate_order: length mismatch");
  if (r_max < 1) throw InvalidArgument("estimate_order: r_max must be at least 1");
  OrderSelection sel;
  const int nyq = nyquist_order_limit(phi1, x_demod.fs);
  if (r_max > nyq) {
    sel.warnings.push_back("r_max reduced to " + std::to_string(nyq) + " by the Nyquist limit");
    r_max = nyq;
  }
  const Eigen::MatrixXd full = harmonic_design(phi1, 1, r_max);
  // Reduce r_max until the design is well conditioned.
  while (r_max > 1) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(full.leftCols(2 * r_max));
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) > 0.0 && s(0) / s(s.size() - 1) < opts.max_condition) break;
    --r_max;
    sel.warnings.push_back("ill-conditioned design, r_max reduced to " + std::to_string(r_max));
  }
  sel.r_max_used = r_max;
  const double floor = opts.rss_floor_rel * std::max(1e-300, std::pow(l2_norm(x_demod.view()), 2));
  double best = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= r_max; ++r) {
    const LrFit fit = lr_solve(full.leftCols(2 * r), x_demod.view());
    const double score = opts.criterion(x_demod.size(), std::max(fit.rss, floor), r);
    sel.scores.push_back(score);
    if (score < best) {
      best = score;
      sel.r = r;
    }
  }
  return sel;
}

inline int estimate_order(const RealSignal& x_demod, std::span<const double> phi1, int r_max,
                          const OrderOptions& opts = {}) {
  return select_order(x_demod, phi1, r_max, opts).r;
}

}  // namespace tvws
