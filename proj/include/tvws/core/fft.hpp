#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace tvws {

using cplx = std::complex<double>;

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Forward real FFT of length nfft (zero-padded or truncated input), one-sided output of
/// nfft / 2 + 1 bins. X_k = sum_m x_m exp(-2 pi i k m / nfft).
class RealFft {
 public:
  explicit RealFft(std::size_t nfft) : nfft_(nfft), buffer_(nfft, 0.0) {
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  }

  std::size_t size() const noexcept { return nfft_; }
  std::size_t bins() const noexcept { return nfft_ / 2 + 1; }

  /// Scratch input buffer; callers fill it and then call transform_buffer().
  std::vector<double>& buffer() noexcept { return buffer_; }

  void transform_buffer(std::vector<cplx>& out) {
    out.resize(nfft_ / 2 + 1);
    fft_.fwd(out.data(), buffer_.data(), static_cast<Eigen::Index>(nfft_));
  }

  std::vector<cplx> forward(std::span<const double> x) {
    std::fill(buffer_.begin(), buffer_.end(), 0.0);
    const std::size_t n = std::min(x.size(), nfft_);
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), buffer_.begin());
    std::vector<cplx> out;
    transform_buffer(out);
    return out;
  }

 private:
  std::size_t nfft_;
  std::vector<double> buffer_;
  Eigen::FFT<double> fft_;
};

}  // namespace tvws
