#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tvws/core/metrics.hpp"
#include "tvws/core/signal.hpp"

namespace tvws {

struct ExtensionResult {
  RealSignal extended;
  std::size_t n_pre = 0;
  std::size_t n_post = 0;
  bool forward_fallback = false;   // seasonal-naive forecast used forward
  bool backward_fallback = false;  // and backward
  double source_t0 = 0.0;          // start time of the unextended record
};

namespace detail {

/// Catmull-Rom interpolation of v at fractional index i, clamped to the valid range.
inline double cubic_at(const std::vector<double>& v, double i) {
  const auto k = static_cast<long>(std::floor(i));
  const double u = i - static_cast<double>(k);
  const long last = static_cast<long>(v.size()) - 1;
  auto g = [&](long j) { return v[static_cast<std::size_t>(std::clamp(j, 0L, last))]; };
  const double p0 = g(k - 1), p1 = g(k), p2 = g(k + 1), p3 = g(k + 2);
  return p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace detail

/// Seasonal model x_t = S_t + y_t with S_t the mean of x over the previous `cycles`
/// seasons at the same phase (fractional season, cubic interpolation) and y an AR(p)
/// fit by least squares on the last `cycles` seasons. Forecasts run recursively.
struct SeasonalAr {
  std::size_t order = 4;
  std::size_t cycles = 3;
  double blowup_ratio = 4.0;  // forecasts beyond this multiple of the history peak fall back

  std::vector<double> forecast(std::span<const double> x, double season, std::size_t horizon,
                               bool* fell_back = nullptr) const {
    if (!(season >= 4.0)) throw InvalidArgument("extend: season must be at least 4 samples");
    const auto c = static_cast<double>(cycles);
    if (c * season > static_cast<double>(x.size())) throw InvalidArgument("extend: record holds fewer than 3 cycles");
    std::vector<double> xs(x.begin(), x.end());
    const std::size_t N = xs.size();
    auto seasonal = [&](double t) {
      double s = 0.0;
      for (std::size_t j = 1; j <= cycles; ++j) s += detail::cubic_at(xs, t - static_cast<double>(j) * season);
      return s / c;
    };
    // residual series over the fit window, where the seasonal mean is fully inside the record
    const double first = std::max(c * season + 1.0, static_cast<double>(N) - c * season);
    std::vector<double> y;
    for (auto t = static_cast<std::size_t>(std::ceil(first)); t < N; ++t) y.push_back(xs[t] - seasonal(double(t)));
    const std::size_t p = y.size() > 4 * order ? order : 0;
    std::vector<double> phi(p, 0.0);
    if (p > 0) {
      const auto rows = static_cast<Eigen::Index>(y.size() - p);
      Eigen::MatrixXd A(rows, static_cast<Eigen::Index>(p));
      Eigen::VectorXd b(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) + p;
        b(i) = y[t];
        for (std::size_t j = 0; j < p; ++j) A(i, Eigen::Index(j)) = y[t - 1 - j];
      }
      const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
      if (sol.allFinite()) phi.assign(sol.data(), sol.data() + sol.size());
    }

    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    bool blown = false;
    for (std::size_t k = 0; k < horizon; ++k) {
      double yn = 0.0;
      for (std::size_t j = 0; j < p && j < y.size(); ++j) yn += phi[j] * y[y.size() - 1 - j];
      const double xn = seasonal(static_cast<double>(xs.size())) + yn;
      if (!std::isfinite(xn) || std::abs(xn) > blowup_ratio * std::max(peak, 1e-300)) {
        blown = true;
        break;
      }
      y.push_back(yn);
      xs.push_back(xn);
    }
    if (blown) {
      // seasonal mean alone
      xs.resize(N);
      for (std::size_t k = 0; k < horizon; ++k) xs.push_back(seasonal(static_cast<double>(xs.size())));
    }
    if (fell_back) *fell_back = blown;
    return {xs.end() - static_cast<std::ptrdiff_t>(horizon), xs.end()};
  }
};

/// Dominant autocorrelation peak lag, for when no fundamental estimate is at hand.
inline std::size_t acf_cycle_length(const RealSignal& x) {
  const auto acf = autocorrelation(x.view(), x.size() / 2);
  std::size_t k = 1;
  while (k + 1 < acf.size() && acf[k] > 0.0) ++k;  // skip the main lobe
  std::size_t best = 0;
  double bv = -1.0;
  for (std::size_t j = k; j + 1 < acf.size(); ++j) {
    if (acf[j] >= acf[j - 1] && acf[j] >= acf[j + 1] && acf[j] > bv) {
      bv = acf[j];
      best = j;
    }
  }
  if (best == 0) throw InvalidArgument("extend: no periodicity found for the cycle length");
  return best;
}

/// Forward and backward extension by N_p = ceil(factor N) forecast samples.
/// `cycle_back` / `cycle_fwd` are the season lengths (samples, possibly fractional) near the
/// start and the end.
inline ExtensionResult extend_boundaries(const RealSignal& x, double cycle_back, double cycle_fwd,
                                         double factor, const SeasonalAr& model = {}) {
  x.validate("extend");
  if (!(factor >= 0.0)) throw InvalidArgument("extend: factor must be non-negative");
  ExtensionResult out;
  out.source_t0 = x.t0;
  const std::size_t N = x.size();
  const auto np = static_cast<std::size_t>(std::ceil(factor * static_cast<double>(N) - 1e-9));
  if (np == 0) {
    out.extended = x;
    return out;
  }
  for (double c : {cycle_back, cycle_fwd}) {
    if (!(c >= 4.0)) throw InvalidArgument("extend: cycle length must be at least 4 samples");
    if (static_cast<double>(model.cycles) * c > static_cast<double>(N))
      throw InvalidArgument("extend: record holds fewer than 3 cycles");
  }
  const auto fwd = model.forecast(x.view(), cycle_fwd, np, &out.forward_fallback);
  std::vector<double> rev(x.samples.rbegin(), x.samples.rend());
  auto back = model.forecast(rev, cycle_back, np, &out.backward_fallback);
  std::reverse(back.begin(), back.end());

  std::vector<double> e;
  e.reserve(N + 2 * np);
  e.insert(e.end(), back.begin(), back.end());
  e.insert(e.end(), x.samples.begin(), x.samples.end());
  e.insert(e.end(), fwd.begin(), fwd.end());
  out.extended = RealSignal(std::move(e), x.fs, x.t0 - static_cast<double>(np) / x.fs);
  out.n_pre = out.n_post = np;
  return out;
}

inline ExtensionResult extend_boundaries(const RealSignal& x, double cycle_len, double factor = 0.1,
                                         const SeasonalAr& model = {}) {
  return extend_boundaries(x, cycle_len, cycle_len, factor, model);
}

/// Central N samples of an extended-length signal.
inline RealSignal trim(const RealSignal& y, const ExtensionResult& ext) {
  if (y.size() != ext.extended.size()) throw InvalidArgument("trim: length differs from the extended record");
  const auto first = y.samples.begin() + static_cast<std::ptrdiff_t>(ext.n_pre);
  const auto last = y.samples.end() - static_cast<std::ptrdiff_t>(ext.n_post);
  const double t0 = y.t0 == ext.extended.t0 ? ext.source_t0 : y.t0 + static_cast<double>(ext.n_pre) / y.fs;
  return RealSignal(std::vector<double>(first, last), y.fs, t0);
}

template <class T>
std::vector<T> trim_vector(const std::vector<T>& v, std::size_t n_pre, std::size_t n_post) {
  if (n_pre + n_post > v.size()) throw InvalidArgument("trim: extension longer than the record");
  return std::vector<T>(v.begin() + static_cast<std::ptrdiff_t>(n_pre), v.end() - static_cast<std::ptrdiff_t>(n_post));
}

}  // namespace tvws
