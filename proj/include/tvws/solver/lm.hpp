#pragma once

// Levenberg-Marquardt fit of the wave-shape model to a demodulated signal.
// Bounds are handled by projecting every trial point: phase ratios are clamped to
// l +/- e_bound and free node times are clamped between their neighbours.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tvws/core/signal.hpp"
#include "tvws/shape/model.hpp"
#include "tvws/shape/pchip.hpp"

namespace tvws {

enum class JacobianMode { AnalyticMixed, FiniteDifference };
enum class StopReason { Gradient, Step, MaxIters };

inline const char* to_string(StopReason s) {
  switch (s) {
    case StopReason::Gradient: return "gradient";
    case StopReason::Step: return "step";
    case StopReason::MaxIters: return "max_iters";
  }
  return "unknown";
}

struct FitOptions {
  int max_iters = 200;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  double lambda0 = 1e-3;
  double e_bound = 0.1;
  double min_node_gap = 0.0;  // seconds; 0 selects two sample intervals
  JacobianMode jacobian = JacobianMode::AnalyticMixed;
  bool freeze_amplitudes = false;
  bool freeze_times = false;
  double lambda_max = 1e16;

  void validate() const {
    if (max_iters < 0) throw InvalidArgument("FitOptions: max_iters must be non-negative");
    if (!(grad_tol > 0.0) || !(step_tol > 0.0) || !(lambda0 > 0.0))
      throw InvalidArgument("FitOptions: tolerances and damping must be positive");
    if (!(e_bound > 0.0) || !(e_bound < 0.5)) throw InvalidArgument("FitOptions: e_bound must lie in (0, 0.5)");
    if (min_node_gap < 0.0) throw InvalidArgument("FitOptions: min_node_gap must be non-negative");
  }
};

struct FitDiagnostics {
  int iterations = 0;
  int accepted = 0;
  std::vector<double> rss_trace;  // initial RSS, then one entry per accepted step
  StopReason converged_by = StopReason::MaxIters;
  double initial_rss = 0.0;
  double final_rss = 0.0;
  double final_lambda = 0.0;
  std::size_t n_parameters = 0;
};

inline nlohmann::ordered_json to_json(const FitDiagnostics& d) {
  return nlohmann::ordered_json{{"iterations", d.iterations},
                                {"accepted_steps", d.accepted},
                                {"converged_by", to_string(d.converged_by)},
                                {"initial_rss", d.initial_rss},
                                {"final_rss", d.final_rss},
                                {"final_lambda", d.final_lambda},
                                {"n_parameters", d.n_parameters},
                                {"rss_trace", d.rss_trace}};
}

enum class CoefKind { Time, Amp, C, E };

struct CoefRef {
  std::size_t harmonic;
  CoefKind kind;
  std::size_t node;  // node index for Time / Amp
};

/// Everything residual_and_jacobian needs besides the coefficient vector.
struct FitContext {
  std::span<const double> x;     // demodulated samples
  std::span<const double> phi1;  // cycles
  std::vector<double> times;     // sample times
  WaveShapeModel layout;
  std::vector<CoefRef> coefs;    // meaning of each entry of the flattened vector
  double gap = 0.0;
  double e_bound = 0.1;

  FitContext(const RealSignal& xd, std::span<const double> phi, const WaveShapeModel& init, double min_gap,
             double ebound)
      : x(xd.view()), phi1(phi), times(model_times(init, xd.size())), layout(init), e_bound(ebound) {
    if (xd.size() != phi.size()) throw InvalidArgument("fit: signal and phase differ in length");
    gap = min_gap > 0.0 ? min_gap : 2.0 / init.fs;
    for (std::size_t h = 0; h < init.harmonics.size(); ++h) {
      const auto& nd = init.harmonics[h].nodes;
      for (std::size_t i = nd.pinned; i + nd.pinned < nd.size(); ++i) coefs.push_back({h, CoefKind::Time, i});
      for (std::size_t i = 0; i < nd.size(); ++i) coefs.push_back({h, CoefKind::Amp, i});
      coefs.push_back({h, CoefKind::C, 0});
      coefs.push_back({h, CoefKind::E, 0});
    }
  }
};

namespace detail {

/// Interval index of every sample for the given node times.
inline std::vector<std::size_t> sample_intervals(std::span<const double> nodes, std::span<const double> times) {
  std::vector<std::size_t> k(times.size());
  std::size_t j = 0;
  const std::size_t last = nodes.size() - 2;
  const double tol = 1e-9 * (nodes.back() - nodes.front());
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (times[n] < nodes.front() - tol || times[n] > nodes.back() + tol)
      throw InvalidArgument("fit: sample time outside node span");
    while (j < last && times[n] >= nodes[j + 1]) ++j;
    k[n] = j;
  }
  return k;
}

inline double interp(const Pchip& p, std::size_t k, double x) {
  const double h = p.t[k + 1] - p.t[k];
  return hermite(p.a[k], p.a[k + 1], p.d[k], p.d[k + 1], h, std::clamp((x - p.t[k]) / h, 0.0, 1.0));
}

/// alpha(t_n) for samples [n0, n1) of one harmonic.
inline void eval_haf(const Pchip& p, std::span<const double> times, std::size_t n0, std::size_t n1,
                     std::vector<double>& out) {
  out.resize(n1 - n0);
  std::size_t k = n0 < times.size() ? p.interval(std::clamp(times[n0], p.t.front(), p.t.back())) : 0;
  const std::size_t last = p.t.size() - 2;
  for (std::size_t n = n0; n < n1; ++n) {
    while (k < last && times[n] >= p.t[k + 1]) ++k;
    out[n - n0] = interp(p, k, times[n]);
  }
}

inline std::pair<std::size_t, std::size_t> sample_range(std::span<const double> times, double lo, double hi) {
  const auto a = std::lower_bound(times.begin(), times.end(), lo) - times.begin();
  const auto b = std::upper_bound(times.begin(), times.end(), hi) - times.begin();
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
}

}  // namespace detail

/// Clamps e into l +/- e_bound and free node times into [prev + gap, next - gap].
inline void project_feasible(std::vector<double>& gamma, const FitContext& ctx) {
  WaveShapeModel m = unflatten(ctx.layout, gamma);
  for (auto& h : m.harmonics) {
    h.e = std::clamp(h.e, h.l - ctx.e_bound, h.l + ctx.e_bound);
    auto& t = h.nodes.times;
    const std::size_t p = h.nodes.pinned;
    const std::size_t n = t.size();
    for (std::size_t i = p; i + p < n; ++i) {
      if (!std::isfinite(t[i])) t[i] = 0.5 * (t[i - 1] + t[i + 1]);
      t[i] = std::clamp(t[i], t[i - 1] + ctx.gap, std::max(t[i - 1] + ctx.gap, t[i + 1] - ctx.gap));
    }
    for (std::size_t i = n - p; i-- > p;) t[i] = std::min(t[i], t[i + 1] - ctx.gap);
  }
  gamma = flatten(m);
}

/// Synthesis cos(2 pi phi1) + sum_l alpha_l Theta_l for coefficient vector gamma.
inline std::vector<double> synthesize_model(std::span<const double> gamma, const FitContext& ctx) {
  const WaveShapeModel m = unflatten(ctx.layout, gamma);
  RealSignal y = evaluate_model(m, ctx.phi1);
  return std::move(y.samples);
}

/// r = x - synthesis. J = d(synthesis) / d(gamma), one column per coefficient.
/// Amplitude, c and e columns are analytic; node-time columns use central differences of
/// width gap / 10. In FiniteDifference mode every column is a central difference.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> residual_and_jacobian(std::span<const double> gamma,
                                                                         const FitContext& ctx,
                                                                         JacobianMode mode = JacobianMode::AnalyticMixed) {
  const std::size_t N = ctx.x.size();
  const std::size_t P = gamma.size();
  if (P != ctx.coefs.size()) throw InvalidArgument("residual_and_jacobian: wrong coefficient count");
  const auto model = synthesize_model(gamma, ctx);
  Eigen::VectorXd r(static_cast<Eigen::Index>(N));
  for (std::size_t n = 0; n < N; ++n) r(static_cast<Eigen::Index>(n)) = ctx.x[n] - model[n];
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(P));

  const double h_time = ctx.gap / 10.0;
  if (mode == JacobianMode::FiniteDifference) {
    std::vector<double> gp(gamma.begin(), gamma.end());
    for (std::size_t j = 0; j < P; ++j) {
      const double h = ctx.coefs[j].kind == CoefKind::Time ? h_time : 1e-6 * std::max(1.0, std::abs(gamma[j]));
      const double g0 = gp[j];
      gp[j] = g0 + h;
      const auto up = synthesize_model(gp, ctx);
      gp[j] = g0 - h;
      const auto dn = synthesize_model(gp, ctx);
      gp[j] = g0;
      for (std::size_t n = 0; n < N; ++n) J(Eigen::Index(n), Eigen::Index(j)) = (up[n] - dn[n]) / (2.0 * h);
    }
    return {std::move(r), std::move(J)};
  }

  const WaveShapeModel m = unflatten(ctx.layout, gamma);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::size_t col = 0;
  std::vector<double> C(N), S(N), theta(N), alpha, up, dn;
  for (const auto& h : m.harmonics) {
    const auto& nd = h.nodes;
    const Pchip p(nd.times, nd.amps);
    const auto kidx = detail::sample_intervals(nd.times, ctx.times);
    for (std::size_t n = 0; n < N; ++n) {
      const double arg = kTwoPi * h.e * ctx.phi1[n];
      C[n] = std::cos(arg);
      S[n] = std::sin(arg);
      theta[n] = C[n] + h.c * S[n];
    }
    detail::eval_haf(p, ctx.times, 0, N, alpha);

    // node times
    for (std::size_t i = nd.pinned; i + nd.pinned < nd.size(); ++i, ++col) {
      const double lo = nd.times[std::max<std::ptrdiff_t>(0, std::ptrdiff_t(i) - 2)];
      const double hi = nd.times[std::min(nd.size() - 1, i + 2)];
      const auto [n0, n1] = detail::sample_range(ctx.times, lo, hi);
      auto tp = nd.times;
      tp[i] = nd.times[i] + h_time;
      detail::eval_haf(Pchip(tp, nd.amps), ctx.times, n0, n1, up);
      tp[i] = nd.times[i] - h_time;
      detail::eval_haf(Pchip(tp, nd.amps), ctx.times, n0, n1, dn);
      for (std::size_t n = n0; n < n1; ++n)
        J(Eigen::Index(n), Eigen::Index(col)) = (up[n - n0] - dn[n - n0]) / (2.0 * h_time) * theta[n];
    }

    // amplitudes: d alpha(t) / d a_j through the Hermite basis and the slope dependence
    const std::size_t I = nd.size();
    const auto dslope = pchip_slope_jacobian(nd.times, nd.amps);
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t k = kidx[n];
      const double hk = nd.times[k + 1] - nd.times[k];
      const double s = std::clamp((ctx.times[n] - nd.times[k]) / hk, 0.0, 1.0);
      const double s2 = s * s, s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1, h01 = -2 * s3 + 3 * s2;
      const double h10 = hk * (s3 - 2 * s2 + s), h11 = hk * (s3 - s2);
      const std::size_t j0 = k >= 2 ? k - 2 : 0;
      const std::size_t j1 = std::min(I - 1, k + 3);
      for (std::size_t j = j0; j <= j1; ++j) {
        double w = h10 * dslope[k * I + j] + h11 * dslope[(k + 1) * I + j];
        if (j == k) w += h00;
        if (j == k + 1) w += h01;
        J(Eigen::Index(n), Eigen::Index(col + j)) = w * theta[n];
      }
    }
    col += I;

    for (std::size_t n = 0; n < N; ++n) J(Eigen::Index(n), Eigen::Index(col)) = alpha[n] * S[n];
    ++col;
    for (std::size_t n = 0; n < N; ++n)
      J(Eigen::Index(n), Eigen::Index(col)) = alpha[n] * kTwoPi * ctx.phi1[n] * (h.c * C[n] - S[n]);
    ++col;
  }
  return {std::move(r), std::move(J)};
}

struct FitResult {
  WaveShapeModel model;
  FitDiagnostics diagnostics;
};

/// Weighted least squares when `weights` (one non-negative weight per sample) is given.
inline FitResult fit(const RealSignal& x_demod, std::span<const double> phi1, const WaveShapeModel& init,
                     const FitOptions& opts = {}, std::span<const double> weights = {}) {
  opts.validate();
  if (!weights.empty() && weights.size() != x_demod.size())
    throw InvalidArgument("fit: one weight per sample required");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("fit: weights must be finite and non-negative");
  std::vector<double> sw(weights.size());
  for (std::size_t n = 0; n < sw.size(); ++n) sw[n] = std::sqrt(weights[n]);
  auto apply_weights = [&](Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    for (std::size_t n = 0; n < sw.size(); ++n) {
      r(Eigen::Index(n)) *= sw[n];
      J.row(Eigen::Index(n)) *= sw[n];
    }
  };
  for (const auto& h : init.harmonics) h.nodes.validate();
  const FitContext ctx(x_demod, phi1, init, opts.min_node_gap, opts.e_bound);

  std::vector<double> gamma = flatten(init);
  for (std::size_t j = 0; j < gamma.size(); ++j)
    if (!std::isfinite(gamma[j])) throw NumericalError("fit: non-finite initial coefficient at index " + std::to_string(j));

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < ctx.coefs.size(); ++j) {
    const auto kind = ctx.coefs[j].kind;
    if (kind == CoefKind::Amp && opts.freeze_amplitudes) continue;
    if (kind == CoefKind::Time && opts.freeze_times) continue;
    active.push_back(j);
  }

  FitResult out;
  auto& d = out.diagnostics;
  d.n_parameters = active.size();
  auto [r, Jfull] = residual_and_jacobian(gamma, ctx, opts.jacobian);
  apply_weights(r, Jfull);
  if (!r.allFinite()) {
    std::string bad;
    for (std::size_t j = 0; j < gamma.size(); ++j) bad += (j ? "," : "") + std::to_string(gamma[j]);
    throw NumericalError("fit: non-finite residual at the initial point; coefficients [" + bad + "]");
  }
  double rss = r.squaredNorm();
  d.initial_rss = rss;
  d.rss_trace.push_back(rss);
  double lambda = opts.lambda0;

  if (active.empty()) {
    out.model = init;
    d.final_rss = rss;
    d.converged_by = StopReason::Gradient;
    return out;
  }

  const auto P = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd J(Jfull.rows(), P);
  auto take_active = [&](const Eigen::MatrixXd& full) {
    for (Eigen::Index a = 0; a < P; ++a) J.col(a) = full.col(Eigen::Index(active[std::size_t(a)]));
  };
  take_active(Jfull);

  d.converged_by = StopReason::MaxIters;
  while (d.iterations < opts.max_iters) {
    ++d.iterations;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      d.converged_by = StopReason::Gradient;
      break;
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd D = A.diagonal();
    const double dmax = std::max(D.maxCoeff(), 1e-300);
    for (Eigen::Index a = 0; a < P; ++a) D(a) = std::max(D(a), 1e-12 * dmax);

    bool accepted = false;
    bool stop = false;
    while (!accepted) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * D;
      const Eigen::VectorXd delta = M.ldlt().solve(g);
      std::vector<double> trial = gamma;
      if (delta.allFinite())
        for (Eigen::Index a = 0; a < P; ++a) trial[active[std::size_t(a)]] += delta(a);
      project_feasible(trial, ctx);
      double step2 = 0.0, norm2 = 0.0;
      for (std::size_t j = 0; j < gamma.size(); ++j) {
        step2 += (trial[j] - gamma[j]) * (trial[j] - gamma[j]);
        norm2 += gamma[j] * gamma[j];
      }
      const auto model = synthesize_model(trial, ctx);
      double trial_rss = 0.0;
      for (std::size_t n = 0; n < model.size(); ++n)
        trial_rss += (sw.empty() ? 1.0 : weights[n]) * (ctx.x[n] - model[n]) * (ctx.x[n] - model[n]);
      if (delta.allFinite() && std::isfinite(trial_rss) && trial_rss < rss) {
        accepted = true;
        gamma = std::move(trial);
        rss = trial_rss;
        lambda = std::max(lambda / 10.0, 1e-15);
        ++d.accepted;
        d.rss_trace.push_back(rss);
        if (std::sqrt(step2) <= opts.step_tol * (std::sqrt(norm2) + opts.step_tol)) {
          d.converged_by = StopReason::Step;
          stop = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > opts.lambda_max || std::sqrt(step2) <= opts.step_tol * (std::sqrt(norm2) + opts.step_tol)) {
          // no descent direction left at full damping
          d.converged_by = StopReason::Step;
          stop = true;
          break;
        }
      }
    }
    if (stop) break;
    std::tie(r, Jfull) = residual_and_jacobian(gamma, ctx, opts.jacobian);
    apply_weights(r, Jfull);
    take_active(Jfull);
  }
  d.final_rss = rss;
  d.final_lambda = lambda;
  out.model = unflatten(ctx.layout, gamma);
  return out;
}

}  // namespace tvws
