#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "multitone/common.hpp"
#include "multitone/detail/fft.hpp"
#include "multitone/signal.hpp"

namespace multitone {

/// Lower-half DFT of a real signal: bins X_k for k = 0 .. floor(N/2).
/// Conjugate symmetry makes the upper half redundant for real input.
struct HalfSpectrum {
  std::size_t n_samples = 0;
  std::vector<std::complex<double>> bins;  ///< size floor(N/2) + 1

  double bin_width() const { return kTwoPi / static_cast<double>(n_samples); }
  std::size_t half_index() const { return n_samples / 2; }  ///< K = floor(N/2)
};

/// One DTFT evaluation. The magnitude starts as |value| and may be
/// overwritten upward by median repair; it never becomes negative.
struct SpectrumPoint {
  double frequency = 0.0;
  std::complex<double> value{0.0, 0.0};
  double magnitude = 0.0;
};

inline SpectrumPoint make_spectrum_point(double frequency, std::complex<double> value) {
  return SpectrumPoint{frequency, value, std::abs(value)};
}

/// X_k = sum_n x_n exp(-i 2 pi k n / N) for k = 0 .. floor(N/2), via FFT
/// (radix-2 for power-of-two sizes, Bluestein otherwise).
inline HalfSpectrum dft(const Signal& x) {
  require(x.size() >= 2, "dft: need at least 2 samples");
  std::vector<std::complex<double>> buffer(x.begin(), x.end());
  const std::vector<std::complex<double>> full = detail::dft_complex(std::move(buffer));
  HalfSpectrum spectrum;
  spectrum.n_samples = x.size();
  spectrum.bins.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(x.size() / 2 + 1));
  return spectrum;
}

/// X(w) = sum_n x_n exp(-i w n), one pass over the samples. A phasor
/// recurrence advances exp(-i w n); it re-synchronizes from std::polar
/// every kDtftResyncInterval samples so rounding drift cannot accumulate
/// past the 1e-9 relative accuracy budget at N up to 2^20.
inline constexpr std::size_t kDtftResyncInterval = 256;

inline std::complex<double> dtft_point(const Signal& x, double w) {
  require(std::isfinite(w), "dtft_point: frequency must be finite");
  const std::complex<double> step = std::polar(1.0, -w);
  std::complex<double> sum{0.0, 0.0};
  std::complex<double> phasor{1.0, 0.0};
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (n % kDtftResyncInterval == 0) {
      phasor = std::polar(1.0, -w * static_cast<double>(n));
    }
    sum += x[n] * phasor;
    phasor *= step;
  }
  return sum;
}

/// S(w) = sin(N w / 2) / (N w / 2) with the removable singularity S(0) = 1.
inline double sinc_kernel(double w, std::size_t n_samples) {
  require(n_samples >= 1, "sinc_kernel: n_samples must be at least 1");
  require(std::isfinite(w), "sinc_kernel: frequency must be finite");
  const double argument = 0.5 * static_cast<double>(n_samples) * w;
  if (argument == 0.0) {
    return 1.0;
  }
  return std::sin(argument) / argument;
}

}  // namespace multitone
