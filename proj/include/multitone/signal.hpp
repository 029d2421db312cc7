#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "multitone/common.hpp"

namespace multitone {

/// Finite real-valued sample sequence x_0 .. x_{N-1}.
using Signal = std::vector<double>;

/// One real sinusoid A * sin(w * n + theta).
struct ToneParams {
  double frequency = 0.0;  ///< radians per sample, inside the open band (0, pi)
  double amplitude = 0.0;  ///< non-negative
  double phase = 0.0;      ///< radians; any finite value, canonical range is (-pi, pi]
};

/// Additive white Gaussian noise for synthesize().
struct NoiseSpec {
  double standard_deviation = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Seedable standard-normal stream: mt19937_64 + Box-Muller transform.
/// std::normal_distribution leaves the variate algorithm unspecified, so the
/// transform is pinned here to keep seeded signals reproducible across
/// standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log stays finite; u2 in [0, 1).
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return radius * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace detail

inline void validate_tone(const ToneParams& tone) {
  require(std::isfinite(tone.frequency) && tone.frequency > 0.0 && tone.frequency < kPi,
          "tone frequency must be finite and inside (0, pi)");
  require(std::isfinite(tone.amplitude) && tone.amplitude >= 0.0,
          "tone amplitude must be finite and non-negative");
  require(std::isfinite(tone.phase), "tone phase must be finite");
}

/// Synthesizes x_n = sum_m A_m sin(w_m n + theta_m) + v_n with
/// v_n ~ N(0, sigma^2). Deterministic for a fixed NoiseSpec::seed.
inline Signal synthesize(const std::vector<ToneParams>& tones, std::size_t n_samples,
                         const NoiseSpec& noise = {}) {
  require(n_samples >= 2, "synthesize: n_samples must be at least 2");
  require(std::isfinite(noise.standard_deviation) && noise.standard_deviation >= 0.0,
          "synthesize: noise standard deviation must be finite and non-negative");
  for (const ToneParams& tone : tones) {
    validate_tone(tone);
  }

  Signal x(n_samples, 0.0);
  for (const ToneParams& tone : tones) {
    for (std::size_t n = 0; n < n_samples; ++n) {
      x[n] += tone.amplitude * std::sin(tone.frequency * static_cast<double>(n) + tone.phase);
    }
  }
  if (noise.standard_deviation > 0.0) {
    detail::GaussianSource gauss(noise.seed);
    for (std::size_t n = 0; n < n_samples; ++n) {
      x[n] += noise.standard_deviation * gauss.next();
    }
  }
  return x;
}

/// Returns sum_n x_n^2.
inline double signal_energy(const Signal& x) {
  double energy = 0.0;
  for (double sample : x) {
    energy += sample * sample;
  }
  return energy;
}

}  // namespace multitone
