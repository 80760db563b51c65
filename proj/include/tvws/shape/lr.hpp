#pragma once

// Fixed-shape linear regression on harmonics of the fundamental phase:
//   x(n) ~ sum_l a_l cos(2 pi l phi1(n)) + b_l sin(2 pi l phi1(n))

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tvws/core/error.hpp"

namespace tvws {

/// Columns [cos l, sin l] for l = first..last, in that order.
inline Eigen::MatrixXd harmonic_design(std::span<const double> phi1, int first, int last) {
  const auto n = static_cast<Eigen::Index>(phi1.size());
  const int count = last - first + 1;
  Eigen::MatrixXd A(n, 2 * std::max(count, 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int l = first; l <= last; ++l) {
      const double arg = 2.0 * std::numbers::pi * l * phi1[static_cast<std::size_t>(i)];
      A(i, 2 * (l - first)) = std::cos(arg);
      A(i, 2 * (l - first) + 1) = std::sin(arg);
    }
  }
  return A;
}

struct LrFit {
  std::vector<double> a;       // cosine coefficients, index 0 is harmonic `first`
  std::vector<double> b;       // sine coefficients
  std::vector<double> fitted;  // projection of the target
  double rss = 0.0;
};

inline LrFit lr_solve(const Eigen::MatrixXd& A, std::span<const double> target) {
  const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(target.size()));
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd fit = A * coef;
  LrFit r;
  for (Eigen::Index j = 0; j + 1 < coef.size(); j += 2) {
    r.a.push_back(coef(j));
    r.b.push_back(coef(j + 1));
  }
  r.fitted.assign(fit.data(), fit.data() + fit.size());
  r.rss = (y - fit).squaredNorm();
  return r;
}

/// Full regression over l = 1..r.
inline LrFit lr_fit(std::span<const double> x, std::span<const double> phi1, int r) {
  if (x.size() != phi1.size()) throw InvalidArgument("lr_fit: length mismatch");
  if (r < 1) throw InvalidArgument("lr_fit: order must be at least 1");
  return lr_solve(harmonic_design(phi1, 1, r), x);
}

/// Regression of x - cos(2 pi phi1) on l = 2..r, with the fundamental held at unit
/// amplitude and zero quadrature. `fitted` includes the fundamental term.
inline LrFit lr_fit_constrained(std::span<const double> x, std::span<const double> phi1, int r) {
  if (x.size() != phi1.size()) throw InvalidArgument("lr_fit: length mismatch");
  std::vector<double> target(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) target[n] = x[n] - std::cos(2.0 * std::numbers::pi * phi1[n]);
  LrFit fit;
  if (r >= 2) {
    fit = lr_solve(harmonic_design(phi1, 2, r), target);
  } else {
    fit.fitted.assign(x.size(), 0.0);
    fit.rss = 0.0;
    for (double v : target) fit.rss += v * v;
  }
  for (std::size_t n = 0; n < x.size(); ++n) fit.fitted[n] += std::cos(2.0 * std::numbers::pi * phi1[n]);
  return fit;
}

}  // namespace tvws
