#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "multitone/common.hpp"
#include "multitone/spectrum.hpp"

namespace multitone {

/// Two-bin leakage estimate for the DFT pair (k, k+1):
///   delta = |X_k| / (|X_k| + |X_{k+1}|)
///   theta = sin(pi * delta)
///   amplitude = (pi / theta) * |X_k| |X_{k+1}| / (|X_k| + |X_{k+1}|)
///   implied_frequency = 2 pi (k + 1 - delta) / N
struct BinCandidate {
  std::size_t k = 0;
  double delta = 0.0;
  double theta = 0.0;
  double amplitude = 0.0;
  double implied_frequency = 0.0;
};

/// Below this fraction of the pair sum the smaller magnitude counts as an
/// on-bin tone: the amplitude formula degenerates to 0/0 there, and its
/// analytic limit as delta -> 0 or 1 is the larger bin magnitude.
inline constexpr double kOnBinMagnitudeRatio = 1e-6;

/// One candidate per bin pair, k = 0 .. K-1. Degenerate pairs resolve to
/// delta = 0.5 with amplitude 0, so a numerically empty pair never wins
/// selection; never throws beyond the input-shape check.
inline std::vector<BinCandidate> bin_candidates(const HalfSpectrum& spectrum) {
  require(spectrum.bins.size() >= 2, "bin_candidates: need at least 2 bins");
  require(spectrum.n_samples >= 2, "bin_candidates: spectrum lacks its sample count");
  const std::size_t pair_count = spectrum.bins.size() - 1;

  std::vector<double> magnitude(spectrum.bins.size());
  for (std::size_t k = 0; k < spectrum.bins.size(); ++k) {
    magnitude[k] = std::abs(spectrum.bins[k]);
  }

  // Empty-pair threshold: machine epsilon scaled by the largest pair sum,
  // so "empty" is judged relative to the spectrum's own magnitude scale.
  double max_pair_sum = 0.0;
  for (std::size_t k = 0; k < pair_count; ++k) {
    max_pair_sum = std::max(max_pair_sum, magnitude[k] + magnitude[k + 1]);
  }
  const double empty_threshold = std::numeric_limits<double>::epsilon() * max_pair_sum;

  std::vector<BinCandidate> candidates(pair_count);
  const double n = static_cast<double>(spectrum.n_samples);
  for (std::size_t k = 0; k < pair_count; ++k) {
    BinCandidate& candidate = candidates[k];
    candidate.k = k;
    const double lower = magnitude[k];
    const double upper = magnitude[k + 1];
    const double sum = lower + upper;
    if (sum <= empty_threshold) {
      candidate.delta = 0.5;
      candidate.theta = 1.0;
      candidate.amplitude = 0.0;
    } else {
      candidate.delta = lower / sum;
      candidate.theta = std::sin(kPi * candidate.delta);
      if (std::min(lower, upper) / sum < kOnBinMagnitudeRatio) {
        candidate.amplitude = std::max(lower, upper);
      } else {
        candidate.amplitude = (kPi / candidate.theta) * (lower * upper / sum);
      }
    }
    candidate.implied_frequency = kTwoPi * (static_cast<double>(k) + 1.0 - candidate.delta) / n;
  }
  return candidates;
}

/// The candidate with maximal amplitude; ties break toward the smaller k.
inline BinCandidate select_bin(const std::vector<BinCandidate>& candidates) {
  require(!candidates.empty(), "select_bin: empty candidate list");
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    if (candidates[k].amplitude > candidates[best].amplitude) {
      best = k;
    }
  }
  return candidates[best];
}

}  // namespace multitone
