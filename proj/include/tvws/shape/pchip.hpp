#pragma once

// Fritsch-Carlson shape-preserving piecewise cubic Hermite interpolation with the
// harmonic-mean interior slopes and the one-sided three-point end slopes.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tvws/core/error.hpp"

namespace tvws {

struct Pchip {
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> d;  // node slopes

  Pchip() = default;
  Pchip(std::span<const double> times, std::span<const double> amps);

  double operator()(double x) const;
  std::vector<double> operator()(std::span<const double> xs) const;
  std::size_t interval(double x) const;
};

namespace detail {

inline void check_nodes(std::span<const double> t, std::span<const double> a) {
  if (t.size() != a.size()) throw InvalidArgument("pchip: times and amplitudes differ in length");
  if (t.size() < 2) throw InvalidArgument("pchip: need at least two nodes");
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i + 1] > t[i])) throw InvalidArgument("pchip: node times must be strictly increasing");
}

inline double sgn(double v) noexcept { return (v > 0.0) - (v < 0.0); }

inline double end_slope(double h0, double h1, double del0, double del1) {
  double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
  if (sgn(d) != sgn(del0)) d = 0.0;
  else if (sgn(del0) != sgn(del1) && std::abs(d) > std::abs(3.0 * del0)) d = 3.0 * del0;
  return d;
}

inline double hermite(double a0, double a1, double d0, double d1, double h, double s) noexcept {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return a0 * (2 * s3 - 3 * s2 + 1) + a1 * (-2 * s3 + 3 * s2) + h * (d0 * (s3 - 2 * s2 + s) + d1 * (s3 - s2));
}

}  // namespace detail

/// Node slopes of the interpolant.
inline std::vector<double> pchip_slopes(std::span<const double> t, std::span<const double> a) {
  detail::check_nodes(t, a);
  const std::size_t n = t.size();
  std::vector<double> h(n - 1), del(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t[k + 1] - t[k];
    del[k] = (a[k + 1] - a[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = del[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] * del[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  d[0] = detail::end_slope(h[0], h[1], del[0], del[1]);
  d[n - 1] = detail::end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

inline Pchip::Pchip(std::span<const double> times, std::span<const double> amps)
    : t(times.begin(), times.end()), a(amps.begin(), amps.end()), d(pchip_slopes(times, amps)) {}

inline std::size_t Pchip::interval(double x) const {
  const double tol = 1e-9 * std::max(1.0, t.back() - t.front());
  if (x < t.front() - tol || x > t.back() + tol || std::isnan(x)) throw InvalidArgument("pchip: query outside node span");
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  return std::min(k, t.size() - 2);
}

inline double Pchip::operator()(double x) const {
  const std::size_t k = interval(x);
  const double h = t[k + 1] - t[k];
  const double s = std::clamp((x - t[k]) / h, 0.0, 1.0);
  return detail::hermite(a[k], a[k + 1], d[k], d[k + 1], h, s);
}

inline std::vector<double> Pchip::operator()(std::span<const double> xs) const {
  std::vector<double> y(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) y[i] = (*this)(xs[i]);
  return y;
}

inline std::vector<double> pchip_eval(std::span<const double> times, std::span<const double> amps,
                                      std::span<const double> query) {
  return Pchip(times, amps)(query);
}

/// dslope[k][j] = d(slope_k) / d(a_j); zero outside j in [k-1, k+1] (interior)
/// or j in {0, 1, 2} / {n-3, n-2, n-1} (ends). Row-major n x n.
inline std::vector<double> pchip_slope_jacobian(std::span<const double> t, std::span<const double> a) {
  detail::check_nodes(t, a);
  const std::size_t n = t.size();
  std::vector<double> J(n * n, 0.0);
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t[k + 1] - t[k];
    del[k] = (a[k + 1] - a[k]) / h[k];
  }
  // d(del_k)/d(a_k) = -1/h_k, d(del_k)/d(a_{k+1}) = 1/h_k
  auto add_del = [&](std::size_t row, std::size_t k, double coef) {
    J[row * n + k] -= coef / h[k];
    J[row * n + k + 1] += coef / h[k];
  };
  if (n == 2) {
    add_del(0, 0, 1.0);
    add_del(1, 0, 1.0);
    return J;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double da = del[k - 1], db = del[k];
    if (da * db <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    const double den = w1 * db + w2 * da;
    add_del(k, k - 1, (w1 + w2) * w1 * db * db / (den * den));
    add_del(k, k, (w1 + w2) * w2 * da * da / (den * den));
  }
  auto end = [&](std::size_t row, std::size_t k0, std::size_t k1) {
    const double h0 = h[k0], h1 = h[k1], d0 = del[k0], d1 = del[k1];
    const double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (detail::sgn(d) != detail::sgn(d0)) return;
    if (detail::sgn(d0) != detail::sgn(d1) && std::abs(d) > std::abs(3.0 * d0)) {
      add_del(row, k0, 3.0);
      return;
    }
    add_del(row, k0, (2.0 * h0 + h1) / (h0 + h1));
    add_del(row, k1, -h0 / (h0 + h1));
  };
  end(0, 0, 1);
  end(n - 1, n - 2, n - 3);
  return J;
}

}  // namespace tvws
