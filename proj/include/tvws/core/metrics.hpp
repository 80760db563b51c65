#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tvws/core/fft.hpp"
#include "tvws/core/signal.hpp"

namespace tvws {

/// 20 log10(|ref| / |est - ref|). Returns +infinity when the estimate is exact.
inline double snr_out(const RealSignal& reference, const RealSignal& estimate) {
  require_same_shape(reference, estimate, "snr_out");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    num += reference[n] * reference[n];
    const double d = estimate[n] - reference[n];
    den += d * d;
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

inline double snr_out(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) throw InvalidArgument("snr_out: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    num += reference[n] * reference[n];
    den += (estimate[n] - reference[n]) * (estimate[n] - reference[n]);
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

/// Normalized autocorrelation for lags 0..max_lag (biased estimator, acf[0] = 1).
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < 2) throw InvalidArgument("autocorrelation: need at least two samples");
  max_lag = std::min(max_lag, n - 1);
  const double m = mean_of(x);
  std::vector<double> c(x.begin(), x.end());
  for (double& v : c) v -= m;
  double c0 = 0.0;
  for (double v : c) c0 += v * v;
  std::vector<double> acf(max_lag + 1, 0.0);
  if (c0 == 0.0) {
    acf[0] = 1.0;
    return acf;
  }
  // FFT-based for long records.
  const std::size_t nfft = next_pow2(2 * n);
  RealFft fft(nfft);
  auto spec = fft.forward(c);
  std::vector<cplx> full(nfft);
  for (std::size_t k = 0; k < spec.size(); ++k) full[k] = std::norm(spec[k]);
  for (std::size_t k = spec.size(); k < nfft; ++k) full[k] = full[nfft - k];
  Eigen::FFT<double> inv;
  std::vector<cplx> r;
  inv.inv(r, full);
  for (std::size_t k = 0; k <= max_lag; ++k) acf[k] = r[k].real() / r[0].real();
  acf[0] = 1.0;
  return acf;
}

/// Pearson correlation. Throws when either input has zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("pearson: length mismatch");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    sab += (a[n] - ma) * (b[n] - mb);
    saa += (a[n] - ma) * (a[n] - ma);
    sbb += (b[n] - mb) * (b[n] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw InvalidArgument("pearson: zero-variance input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// One-sided Welch power spectrum: Hann segments with 50% overlap.
inline std::vector<double> welch_psd(std::span<const double> x, std::size_t segment) {
  const std::size_t n = x.size();
  segment = std::clamp<std::size_t>(segment, 2, n);
  const std::size_t hop = std::max<std::size_t>(1, segment / 2);
  std::vector<double> win(segment);
  for (std::size_t i = 0; i < segment; ++i)
    win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(segment));
  RealFft fft(segment);
  std::vector<double> psd(segment / 2 + 1, 0.0);
  std::vector<cplx> spec;
  for (std::size_t start = 0; start + segment <= n; start += hop) {
    auto& buf = fft.buffer();
    double m = 0.0;
    for (std::size_t i = 0; i < segment; ++i) m += x[start + i];
    m /= static_cast<double>(segment);
    for (std::size_t i = 0; i < segment; ++i) buf[i] = (x[start + i] - m) * win[i];
    fft.transform_buffer(spec);
    for (std::size_t k = 0; k < psd.size(); ++k) psd[k] += std::norm(spec[k]);
  }
  return psd;
}

/// Shannon entropy (bits) of the normalized one-sided power spectrum.
/// `segments` sets the Welch segment length to N / segments.
inline double spectral_entropy(std::span<const double> x, std::size_t segments = 16) {
  if (x.size() < 4) throw InvalidArgument("spectral_entropy: need at least four samples");
  std::size_t seg = x.size() / std::max<std::size_t>(1, segments);
  seg = std::max<std::size_t>(8, seg - seg % 2);
  const auto psd = welch_psd(x, seg);
  double total = 0.0;
  for (double p : psd) total += p;
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double p : psd) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log2(q);
  }
  return h;
}

struct MetricsOptions {
  std::size_t acf_lags = 0;        // 0 selects min(N - 1, 2 fs)
  std::size_t entropy_segments = 16;
};

struct MetricsReport {
  std::optional<double> snr_out;  // filled when a noiseless reference is known
  std::vector<double> residual_acf;
  double acf_band = 0.0;          // 95% band half-width, 1 / sqrt(N)
  double acf_inside_fraction = 0.0;
  double spectral_entropy = 0.0;  // bits
  double pcc = 0.0;
};

inline MetricsReport residual_metrics(const RealSignal& residual, const RealSignal& estimate,
                                      const MetricsOptions& opts = {}) {
  require_same_shape(residual, estimate, "residual_metrics");
  MetricsReport r;
  const std::size_t n = residual.size();
  std::size_t lags = opts.acf_lags;
  if (lags == 0) lags = std::min<std::size_t>(n - 1, static_cast<std::size_t>(2.0 * residual.fs));
  r.residual_acf = autocorrelation(residual.view(), lags);
  r.acf_band = 1.0 / std::sqrt(static_cast<double>(n));
  std::size_t inside = 0;
  for (std::size_t k = 1; k < r.residual_acf.size(); ++k)
    if (std::abs(r.residual_acf[k]) <= r.acf_band) ++inside;
  if (r.residual_acf.size() > 1)
    r.acf_inside_fraction = static_cast<double>(inside) / static_cast<double>(r.residual_acf.size() - 1);
  r.spectral_entropy = spectral_entropy(residual.view(), opts.entropy_segments);
  r.pcc = pearson(residual.view(), estimate.view());
  return r;
}

/// JSON number or {"infinite": true} for non-finite dB values.
inline nlohmann::ordered_json db_to_json(double v) {
  if (std::isfinite(v)) return v;
  return nlohmann::ordered_json{{"infinite", true}, {"positive", v > 0}};
}

inline nlohmann::ordered_json to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  if (m.snr_out) j["snr_out"] = db_to_json(*m.snr_out);
  else j["snr_out"] = nullptr;
  j["spectral_entropy"] = m.spectral_entropy;
  j["pcc"] = m.pcc;
  j["acf_band"] = m.acf_band;
  j["acf_inside_fraction"] = m.acf_inside_fraction;
  j["residual_acf"] = m.residual_acf;
  return j;
}

}  // namespace tvws
