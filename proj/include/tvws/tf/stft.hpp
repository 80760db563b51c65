#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/core/fft.hpp"
#include "tvws/core/signal.hpp"

namespace tvws {

/// Gaussian window g(m) = exp(-sigma m^2), m in samples, truncated where g < 1e-8.
struct GaussianWindow {
  double sigma = 1e-4;
  std::size_t half_width = 0;  // L: support is [-L, L]
  std::vector<double> taps;    // g(0..L)

  explicit GaussianWindow(double s) : sigma(s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("stft: sigma must be positive");
    half_width = static_cast<std::size_t>(std::floor(std::sqrt(std::log(1e8) / sigma)));
    if (2 * half_width + 1 < 8) throw InvalidArgument("stft: sigma too large, window shorter than 8 samples");
    taps.resize(half_width + 1);
    for (std::size_t m = 0; m <= half_width; ++m) taps[m] = std::exp(-sigma * double(m) * double(m));
  }

  double operator()(long m) const noexcept { return taps[static_cast<std::size_t>(std::labs(m))]; }
  double peak() const noexcept { return taps[0]; }
  std::size_t length() const noexcept { return 2 * half_width + 1; }

  double l2_norm() const noexcept {
    double s = taps[0] * taps[0];
    for (std::size_t m = 1; m < taps.size(); ++m) s += 2.0 * taps[m] * taps[m];
    return std::sqrt(s);
  }
};

struct StftOptions {
  std::size_t n_bins = 0;  // FFT length; 0 selects the next power of two >= N
  double f_max = 0.0;      // highest stored frequency; 0 keeps everything up to fs / 2
  std::size_t hop = 1;     // frame stride in samples
};

/// Complex STFT, F(n, k) = sum_m x(n + m) g(m) exp(-2 pi i k m / K), referenced to the
/// window centre so that arg F tracks the signal phase. Rows are frames, columns bins.
struct Spectrogram {
  std::vector<cplx> values;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t n_fft = 0;
  std::size_t hop = 1;
  double fs = 1.0;
  double t0 = 0.0;
  double window_sigma = 0.0;
  double window_norm = 0.0;
  double window_peak = 1.0;
  std::size_t window_half_width = 0;
  std::size_t signal_length = 0;
  double signal_norm = 0.0;

  const cplx& at(std::size_t n, std::size_t k) const noexcept { return values[n * bins + k]; }
  cplx& at(std::size_t n, std::size_t k) noexcept { return values[n * bins + k]; }

  double bin_width() const noexcept { return fs / static_cast<double>(n_fft); }
  double freq(std::size_t k) const noexcept { return static_cast<double>(k) * bin_width(); }
  std::vector<double> freq_axis() const {
    std::vector<double> f(bins);
    for (std::size_t k = 0; k < bins; ++k) f[k] = freq(k);
    return f;
  }
  /// Sample index of frame n.
  std::size_t sample_of(std::size_t n) const noexcept { return n * hop; }
  bool full_band() const noexcept { return bins == n_fft / 2 + 1; }
};

inline Spectrogram stft(const RealSignal& x, double sigma, const StftOptions& opts = {}) {
  x.validate("stft");
  const GaussianWindow g(sigma);
  const std::size_t n = x.size();
  const std::size_t span = std::min(g.length(), n);
  std::size_t nfft = opts.n_bins ? opts.n_bins : next_pow2(n);
  if (nfft < span) {
    if (opts.n_bins) throw InvalidArgument("stft: n_bins shorter than the effective window span");
    nfft = next_pow2(span);
  }
  if (opts.hop == 0) throw InvalidArgument("stft: hop must be positive");

  Spectrogram s;
  s.n_fft = nfft;
  s.fs = x.fs;
  s.t0 = x.t0;
  s.hop = opts.hop;
  s.window_sigma = sigma;
  s.window_norm = g.l2_norm();
  s.window_peak = g.peak();
  s.window_half_width = g.half_width;
  s.signal_length = n;
  s.signal_norm = l2_norm(x.view());
  const std::size_t all_bins = nfft / 2 + 1;
  s.bins = all_bins;
  if (opts.f_max > 0.0 && opts.f_max < x.fs / 2.0)
    s.bins = std::min(all_bins, static_cast<std::size_t>(std::ceil(opts.f_max / s.bin_width())) + 1);
  s.frames = (n + s.hop - 1) / s.hop;
  s.values.assign(s.frames * s.bins, cplx{});

  RealFft fft(nfft);
  std::vector<cplx> spec;
  const long L = static_cast<long>(g.half_width);
  const long N = static_cast<long>(n);
  const long K = static_cast<long>(nfft);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const long c = static_cast<long>(f * s.hop);
    auto& buf = fft.buffer();
    std::fill(buf.begin(), buf.end(), 0.0);
    const long m0 = std::max(-L, -c);
    const long m1 = std::min(L, N - 1 - c);
    for (long m = m0; m <= m1; ++m) buf[static_cast<std::size_t>((m + K) % K)] += x.samples[c + m] * g(m);
    fft.transform_buffer(spec);
    std::copy(spec.begin(), spec.begin() + static_cast<std::ptrdiff_t>(s.bins), s.values.begin() + f * s.bins);
  }
  return s;
}

/// Half-support of the window spectrum at the 1e-3 relative-magnitude level, in Hz.
inline double window_half_support(double sigma, double fs, std::size_t n_fft, double level = 1e-3) {
  const GaussianWindow g(sigma);
  if (n_fft < g.length()) n_fft = next_pow2(g.length());
  RealFft fft(n_fft);
  auto& buf = fft.buffer();
  std::fill(buf.begin(), buf.end(), 0.0);
  const long L = static_cast<long>(g.half_width);
  const long K = static_cast<long>(n_fft);
  for (long m = -L; m <= L; ++m) buf[static_cast<std::size_t>((m + K) % K)] += g(m);
  std::vector<cplx> spec;
  fft.transform_buffer(spec);
  const double peak = std::abs(spec[0]);
  std::size_t k = 0;
  while (k + 1 < spec.size() && std::abs(spec[k + 1]) >= level * peak) ++k;
  return static_cast<double>(k) * fs / static_cast<double>(n_fft);
}

/// Magnitude dump: raw little-endian float64 matrix [frames x bins] plus a JSON sidecar
/// with axes and window description.
inline void export_spectrogram(const Spectrogram& s, const std::string& bin_path, const std::string& json_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("export_spectrogram: cannot open " + bin_path);
  std::vector<double> row(s.bins);
  for (std::size_t n = 0; n < s.frames; ++n) {
    for (std::size_t k = 0; k < s.bins; ++k) row[k] = std::abs(s.at(n, k));
    bin.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  nlohmann::ordered_json j;
  j["format"] = "float64-le-row-major";
  j["quantity"] = "magnitude";
  j["frames"] = s.frames;
  j["bins"] = s.bins;
  j["fs"] = s.fs;
  j["t0"] = s.t0;
  j["hop"] = s.hop;
  j["n_fft"] = s.n_fft;
  j["bin_width_hz"] = s.bin_width();
  j["window"] = {{"type", "gaussian"}, {"sigma", s.window_sigma}, {"norm", s.window_norm},
                 {"peak", s.window_peak}, {"half_width", s.window_half_width}};
  std::vector<double> times(s.frames);
  for (std::size_t n = 0; n < s.frames; ++n) times[n] = s.t0 + double(s.sample_of(n)) / s.fs;
  j["time_axis"] = times;
  j["freq_axis"] = s.freq_axis();
  std::ofstream js(json_path);
  if (!js) throw Error("export_spectrogram: cannot open " + json_path);
  js << j.dump(1) << "\n";
}

}  // namespace tvws
