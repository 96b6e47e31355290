#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "cruse/error.hpp"

namespace cruse::dsp {

// Mixed-radix Cooley-Tukey FFT for arbitrary sizes. Radix 2/3/4/5 cover the
// usual audio frame lengths (320 = 4^3 * 5); any remaining prime factor is
// handled by a direct DFT butterfly.
class Fft {
 public:
  using cplx = std::complex<double>;

  explicit Fft(std::size_t n) : n_(n) {
    if (n == 0) throw ConfigError("Fft: size must be positive");
    std::size_t rest = n;
    for (std::size_t p : {4u, 2u, 3u, 5u}) {
      while (rest % p == 0) {
        factors_.push_back(p);
        rest /= p;
      }
    }
    for (std::size_t p = 7; p * p <= rest; p += 2) {
      while (rest % p == 0) {
        factors_.push_back(p);
        rest /= p;
      }
    }
    if (rest > 1) factors_.push_back(rest);
    twiddles_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(phase), std::sin(phase)};
    }
  }

  std::size_t size() const { return n_; }

  // out[k] = sum_t in[t] exp(-2 pi i k t / n)
  void forward(std::span<const cplx> in, std::span<cplx> out) const { run(in, out, false); }

  // out[t] = (1/n) sum_k in[k] exp(+2 pi i k t / n)
  void inverse(std::span<const cplx> in, std::span<cplx> out) const {
    run(in, out, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= scale;
  }

  // Non-negative frequency half (n/2 + 1 bins) of a real input.
  std::vector<cplx> forward_real(std::span<const double> in) const {
    std::vector<cplx> buf(n_), spec(n_);
    for (std::size_t i = 0; i < n_; ++i) buf[i] = i < in.size() ? in[i] : 0.0;
    forward(buf, spec);
    spec.resize(n_ / 2 + 1);
    return spec;
  }

  // Inverse of forward_real: conjugate-symmetric extension, inverse, real part.
  std::vector<double> inverse_real(std::span<const cplx> half) const {
    if (half.size() != n_ / 2 + 1) throw ShapeError("Fft::inverse_real: expected n/2+1 bins");
    std::vector<cplx> full(n_), time(n_);
    for (std::size_t k = 0; k < half.size(); ++k) full[k] = half[k];
    for (std::size_t k = 1; k < n_ - n_ / 2; ++k) full[n_ - k] = std::conj(half[k]);
    inverse(full, time);
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = time[i].real();
    return out;
  }

 private:
  void run(std::span<const cplx> in, std::span<cplx> out, bool inverse) const {
    if (in.size() != n_ || out.size() != n_) throw ShapeError("Fft: buffer size mismatch");
    transform(in.data(), out.data(), n_, 1, 0, inverse);
  }

  cplx twiddle(std::size_t index, bool inverse) const {
    const cplx w = twiddles_[index % n_];
    return inverse ? std::conj(w) : w;
  }

  void transform(const cplx* in, cplx* out, std::size_t n, std::size_t stride, std::size_t level,
                 bool inverse) const {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = factors_[level];
    const std::size_t m = n / p;
    for (std::size_t r = 0; r < p; ++r) {
      transform(in + r * stride, out + r * m, m, stride * p, level + 1, inverse);
    }
    // Twiddle index scale: W_n^j == W_N^(j * stride).
    std::vector<cplx> scratch(p);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t r = 0; r < p; ++r) {
        scratch[r] = out[r * m + k] * twiddle(r * k * stride, inverse);
      }
      for (std::size_t q = 0; q < p; ++q) {
        cplx acc = scratch[0];
        for (std::size_t r = 1; r < p; ++r) {
          acc += scratch[r] * twiddle(r * q * m * stride, inverse);
        }
        out[q * m + k] = acc;
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<cplx> twiddles_;
};

}  // namespace cruse::dsp
