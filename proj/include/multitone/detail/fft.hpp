#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "multitone/common.hpp"

namespace multitone::detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT (decimation in time); size must be a power
/// of two. Twiddles come from one table of exp(-2 pi i k / n), so no factor
/// accumulates multiplicative drift across stages.
inline void fft_pow2_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n < 2) {
    return;
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      std::swap(a[i], a[j]);
    }
  }
  std::vector<std::complex<double>> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    twiddle[k] = std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    const std::size_t half = len / 2;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::complex<double> u = a[base + j];
        const std::complex<double> v = a[base + j + half] * twiddle[j * stride];
        a[base + j] = u + v;
        a[base + j + half] = u - v;
      }
    }
  }
}

inline void ifft_pow2_inplace(std::vector<std::complex<double>>& a) {
  for (std::complex<double>& value : a) {
    value = std::conj(value);
  }
  fft_pow2_inplace(a);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (std::complex<double>& value : a) {
    value = std::conj(value) * scale;
  }
}

/// Bluestein chirp-z transform: DFT of arbitrary size through one
/// power-of-two circular convolution. Chirp exponents k^2 are reduced
/// mod 2n in integer arithmetic before the trig call, keeping the argument
/// small for accuracy.
inline std::vector<std::complex<double>> dft_bluestein(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) {
    m <<= 1;
  }
  std::vector<std::complex<double>> chirp(n);  // chirp[k] = exp(-i pi k^2 / n)
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    chirp[k] = std::polar(1.0, -kPi * static_cast<double>(k2) / static_cast<double>(n));
  }
  std::vector<std::complex<double>> a(m, {0.0, 0.0});
  std::vector<std::complex<double>> b(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = x[k] * chirp[k];
  }
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = b[m - k] = std::conj(chirp[k]);
  }
  fft_pow2_inplace(a);
  fft_pow2_inplace(b);
  for (std::size_t k = 0; k < m; ++k) {
    a[k] *= b[k];
  }
  ifft_pow2_inplace(a);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = a[k] * chirp[k];
  }
  return out;
}

/// Full DFT of a complex sequence of any size, O(n log n).
inline std::vector<std::complex<double>> dft_complex(std::vector<std::complex<double>> x) {
  if (is_power_of_two(x.size())) {
    fft_pow2_inplace(x);
    return x;
  }
  return dft_bluestein(x);
}

}  // namespace multitone::detail
