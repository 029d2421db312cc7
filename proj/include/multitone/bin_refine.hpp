#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "multitone/common.hpp"
#include "multitone/spectrum.hpp"

namespace multitone {

/// Test hook: receives (evaluation index, frequency, magnitude) for every
/// DTFT evaluation and returns the magnitude the search should see.
using MagnitudeFault = std::function<double(std::size_t, double, double)>;

struct RefineConfig {
  double epsilon = 1e-4;            ///< stop once the interval is <= 2 pi epsilon / N
  std::size_t max_evaluations = 0;  ///< 0 = auto: 4 ceil(log2(1/epsilon)) + 8; explicit values must be >= 3
  MagnitudeFault fault_injection;   ///< disabled when empty
};

/// One DTFT evaluation in a refinement trace. raw_magnitude is the value the
/// search saw at evaluation time (after any fault injection);
/// repaired_magnitude differs only when median repair replaced it.
struct RefineSample {
  double frequency = 0.0;
  double raw_magnitude = 0.0;
  double repaired_magnitude = 0.0;
};

struct RefineTrace {
  std::size_t evaluations = 0;
  std::size_t repairs = 0;
  double final_interval_width = 0.0;
  bool truncated = false;  ///< max_evaluations stopped the search early
  std::vector<RefineSample> history;
};

struct RefineResult {
  double frequency = 0.0;
  RefineTrace trace;
};

namespace detail {

/// Halvings needed before a dyadic interval of width 1 shrinks to <= epsilon;
/// equals ceil(log2(1/epsilon)), computed with the same comparison the search
/// loop uses so predicted and actual iteration counts cannot diverge.
inline std::size_t halvings_for(double epsilon) {
  std::size_t halvings = 0;
  double width = 1.0;
  while (width > epsilon && halvings < 64) {
    width *= 0.5;
    ++halvings;
  }
  return halvings;
}

inline std::size_t effective_max_evaluations(const RefineConfig& cfg) {
  if (cfg.max_evaluations != 0) {
    return cfg.max_evaluations;
  }
  return 4 * halvings_for(cfg.epsilon) + 8;
}

/// Search point: position held as an exact dyadic fraction t of the bin, so
/// interval halving stays bitwise exact, plus the cached DTFT evaluation.
struct RefinePoint {
  double t = 0.0;
  SpectrumPoint point;
  std::ptrdiff_t history_index = -1;  ///< -1 for the two DFT-bin endpoints
};

/// Replaces mid's cached magnitude with the median of the triple when the
/// cached value lies below that median; returns whether the repair fired.
/// Only the magnitude is overwritten; the raw complex value stays.
inline bool median_repair(RefinePoint& mid, const RefinePoint& left, const RefinePoint& right,
                          RefineTrace& trace) {
  const double a = left.point.magnitude;
  const double b = mid.point.magnitude;
  const double c = right.point.magnitude;
  const double median = std::max(std::min(a, b), std::min(std::max(a, b), c));
  if (b < median) {
    mid.point.magnitude = median;
    ++trace.repairs;
    if (mid.history_index >= 0) {
      trace.history[static_cast<std::size_t>(mid.history_index)].repaired_magnitude = median;
    }
    return true;
  }
  return false;
}

/// Shared state for one within-bin search: maps dyadic fractions to
/// frequencies and performs hooked, traced DTFT evaluations.
class BinSearch {
 public:
  BinSearch(const Signal& x, const HalfSpectrum& spectrum, std::size_t k, const RefineConfig& cfg)
      : x_(x),
        cfg_(cfg),
        bin_low_(kTwoPi * static_cast<double>(k) / static_cast<double>(spectrum.n_samples)),
        bin_width_(spectrum.bin_width()) {}

  double bin_width() const { return bin_width_; }
  double frequency_at(double t) const { return bin_low_ + t * bin_width_; }

  /// Endpoint at a bin frequency: the DFT bin doubles as the DTFT value
  /// there, so no evaluation is spent.
  RefinePoint endpoint(const HalfSpectrum& spectrum, std::size_t bin, double t) const {
    return RefinePoint{t, make_spectrum_point(frequency_at(t), spectrum.bins[bin]), -1};
  }

  RefinePoint evaluate(double t, RefineTrace& trace) const {
    const double w = frequency_at(t);
    SpectrumPoint point = make_spectrum_point(w, dtft_point(x_, w));
    if (cfg_.fault_injection) {
      point.magnitude = cfg_.fault_injection(trace.evaluations, w, point.magnitude);
      require(point.magnitude >= 0.0, "fault hook must return a non-negative magnitude");
    }
    trace.history.push_back({w, point.magnitude, point.magnitude});
    RefinePoint result{t, point, static_cast<std::ptrdiff_t>(trace.history.size() - 1)};
    ++trace.evaluations;
    return result;
  }

 private:
  const Signal& x_;
  const RefineConfig& cfg_;
  double bin_low_ = 0.0;
  double bin_width_ = 0.0;
};

inline void validate_refine_args(const Signal& x, const HalfSpectrum& spectrum, std::size_t k,
                                 const RefineConfig& cfg) {
  require(x.size() >= 2, "refine: need at least 2 samples");
  require(spectrum.n_samples == x.size(), "refine: spectrum does not match the signal length");
  require(spectrum.bins.size() == x.size() / 2 + 1, "refine: spectrum has the wrong bin count");
  require(k + 2 <= spectrum.bins.size(), "refine: bin index out of range (need k <= K-1)");
  require(std::isfinite(cfg.epsilon) && cfg.epsilon > 0.0 && cfg.epsilon <= 1.0,
          "refine: epsilon must lie in (0, 1]");
  require(cfg.max_evaluations == 0 || cfg.max_evaluations >= 3,
          "refine: max_evaluations must be at least 3");
}

}  // namespace detail

/// Baseline bisection on bin k of the spectrum of x: compares the cached
/// endpoint magnitudes and moves the dimmer endpoint to the midpoint, one
/// DTFT evaluation per halving. Returns the midpoint of the final interval.
/// The spectrum must be dft(x); its bins seed the endpoint magnitudes.
inline RefineResult refine_bisect(const Signal& x, const HalfSpectrum& spectrum, std::size_t k,
                                  const RefineConfig& cfg = {}) {
  detail::validate_refine_args(x, spectrum, k, cfg);
  const std::size_t max_evaluations = detail::effective_max_evaluations(cfg);

  RefineResult result;
  RefineTrace& trace = result.trace;
  const detail::BinSearch search(x, spectrum, k, cfg);
  detail::RefinePoint left = search.endpoint(spectrum, k, 0.0);
  detail::RefinePoint right = search.endpoint(spectrum, k + 1, 1.0);

  while (right.t - left.t > cfg.epsilon) {
    if (trace.evaluations + 1 > max_evaluations) {
      trace.truncated = true;
      break;
    }
    const detail::RefinePoint mid = search.evaluate(0.5 * (left.t + right.t), trace);
    if (left.point.magnitude < right.point.magnitude) {
      left = mid;
    } else {
      right = mid;
    }
  }

  trace.final_interval_width = (right.t - left.t) * search.bin_width();
  result.frequency = search.frequency_at(0.5 * (left.t + right.t));
  return result;
}

/// Robust five-point quasi-concave search on bin k of the spectrum of x.
/// Step 1 evaluates the bin midpoint; step 2 median-repairs it against the
/// two endpoints. Each iteration evaluates the two quarter points, repairs
/// each newly sampled point against its cached neighbors, then re-centers on
/// the maximal cached magnitude, halving the interval. Ties prefer the
/// middle branch, then the left, then the right. Comparisons always use the
/// repaired magnitudes; raw values stay in the trace. Returns the middle
/// point, which is the midpoint of the final interval.
inline RefineResult refine_robust(const Signal& x, const HalfSpectrum& spectrum, std::size_t k,
                                  const RefineConfig& cfg = {}) {
  detail::validate_refine_args(x, spectrum, k, cfg);
  const std::size_t max_evaluations = detail::effective_max_evaluations(cfg);

  RefineResult result;
  RefineTrace& trace = result.trace;
  const detail::BinSearch search(x, spectrum, k, cfg);
  detail::RefinePoint left = search.endpoint(spectrum, k, 0.0);
  detail::RefinePoint right = search.endpoint(spectrum, k + 1, 1.0);

  detail::RefinePoint mid = search.evaluate(0.5, trace);
  detail::median_repair(mid, left, right, trace);

  while (right.t - left.t > cfg.epsilon) {
    if (trace.evaluations + 2 > max_evaluations) {
      trace.truncated = true;
      break;
    }
    detail::RefinePoint left_mid = search.evaluate(0.5 * (left.t + mid.t), trace);
    detail::RefinePoint mid_right = search.evaluate(0.5 * (mid.t + right.t), trace);
    detail::median_repair(left_mid, left, mid, trace);
    detail::median_repair(mid_right, mid, right, trace);

    const double m_left = left.point.magnitude;
    const double m_left_mid = left_mid.point.magnitude;
    const double m_mid = mid.point.magnitude;
    const double m_mid_right = mid_right.point.magnitude;
    const double m_right = right.point.magnitude;
    const double best = std::max({m_left, m_left_mid, m_mid, m_mid_right, m_right});
    if (m_mid == best) {
      left = left_mid;
      right = mid_right;
    } else if (std::max(m_left, m_left_mid) == best) {
      right = mid;
      mid = left_mid;
    } else {
      left = mid;
      mid = mid_right;
    }
  }

  trace.final_interval_width = (right.t - left.t) * search.bin_width();
  result.frequency = search.frequency_at(mid.t);
  return result;
}

}  // namespace multitone
