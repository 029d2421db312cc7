#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "multitone/bin_detect.hpp"
#include "multitone/bin_refine.hpp"
#include "multitone/common.hpp"
#include "multitone/signal.hpp"
#include "multitone/spectrum.hpp"
#include "multitone/tone_fit.hpp"

namespace multitone {

enum class StopReason {
  ReachedToneCount,        ///< known-count mode: requested count extracted
  ResidualBelowThreshold,  ///< blind mode: residual energy under tau * input energy
  MaxTonesReached,         ///< blind mode: tone cap hit
  NoCandidate,             ///< empty residual spectrum, or the refined frequency duplicates an accepted one
};

inline const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ReachedToneCount:
      return "reached_tone_count";
    case StopReason::ResidualBelowThreshold:
      return "residual_below_threshold";
    case StopReason::MaxTonesReached:
      return "max_tones_reached";
    case StopReason::NoCandidate:
      return "no_candidate";
  }
  return "unknown";
}

struct DecompositionConfig {
  std::optional<std::size_t> tone_count;   ///< set = known-count mode; empty = blind
  RefineConfig refine{};
  std::size_t max_tones = 32;              ///< blind-mode cap
  double residual_energy_fraction = 1e-3;  ///< blind stopping threshold tau, in (0, 1)
  std::size_t min_bin_separation = 0;      ///< diagnostic flag only; 0 disables
};

/// Per-iteration diagnostic record.
struct IterationRecord {
  std::size_t selected_bin = 0;
  double refined_frequency = 0.0;
  double residual_energy = 0.0;  ///< after this iteration's joint fit
  std::size_t dtft_evaluations = 0;
  std::size_t repairs = 0;
  bool refine_truncated = false;
  double refine_interval_width = 0.0;
  bool near_previous_bin = false;  ///< within min_bin_separation bins of an earlier selection
};

struct DecompositionResult {
  std::vector<ToneEstimate> tones;  ///< extraction order, values from the final joint fit
  Signal residual;
  std::vector<IterationRecord> iterations;
  StopReason stop_reason = StopReason::NoCandidate;
};

/// Known-count mode could not deliver the requested tones.
class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterates: DFT of the current residual, two-bin detection, robust bin
/// refinement, then a joint least-squares fit of ALL accepted frequencies
/// against the ORIGINAL signal; the fit's residual drives the next
/// iteration. Known-count mode runs exactly tone_count iterations or throws
/// DecompositionError; blind mode stops on the residual-energy threshold,
/// the tone cap, an empty residual spectrum, or a duplicate refined
/// frequency (reported as NoCandidate).
inline DecompositionResult decompose(const Signal& x, const DecompositionConfig& cfg = {}) {
  require(x.size() >= 4, "decompose: need at least 4 samples");
  for (double sample : x) {
    require(std::isfinite(sample), "decompose: samples must be finite");
  }
  require(cfg.residual_energy_fraction > 0.0 && cfg.residual_energy_fraction < 1.0,
          "decompose: residual energy fraction must lie in (0, 1)");
  require(cfg.max_tones >= 1, "decompose: max_tones must be at least 1");
  const bool known = cfg.tone_count.has_value();
  if (known) {
    require(*cfg.tone_count >= 1, "decompose: known tone count must be at least 1");
    require(*cfg.tone_count <= cfg.max_tones, "decompose: known tone count exceeds max_tones");
    require(2 * *cfg.tone_count <= x.size(), "decompose: tone count saturates the basis");
  }

  const double input_energy = signal_energy(x);
  // Frequencies closer than the refinement resolution are duplicates.
  const double duplicate_separation = kTwoPi * cfg.refine.epsilon / static_cast<double>(x.size());

  DecompositionResult result;
  result.residual = x;
  JointToneFitter fitter(x, duplicate_separation);
  double residual_energy = input_energy;

  while (true) {
    if (known) {
      if (result.tones.size() == *cfg.tone_count) {
        result.stop_reason = StopReason::ReachedToneCount;
        break;
      }
    } else {
      if (residual_energy <= cfg.residual_energy_fraction * input_energy) {
        result.stop_reason = StopReason::ResidualBelowThreshold;
        break;
      }
      if (result.tones.size() == cfg.max_tones) {
        result.stop_reason = StopReason::MaxTonesReached;
        break;
      }
    }

    const HalfSpectrum spectrum = dft(result.residual);
    const BinCandidate best = select_bin(bin_candidates(spectrum));
    if (!(best.amplitude > 0.0)) {
      if (known) {
        throw DecompositionError(
            "decompose: residual spectrum is empty before reaching the requested tone count");
      }
      result.stop_reason = StopReason::NoCandidate;
      break;
    }

    const RefineResult refined = refine_robust(result.residual, spectrum, best.k, cfg.refine);

    bool duplicate = false;
    for (const ToneEstimate& tone : result.tones) {
      if (std::abs(tone.frequency - refined.frequency) <= duplicate_separation) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      if (known) {
        throw DecompositionError("decompose: refined frequency " +
                                 std::to_string(refined.frequency) +
                                 " duplicates an accepted tone at the working resolution");
      }
      result.stop_reason = StopReason::NoCandidate;
      break;
    }

    fitter.add_frequency(refined.frequency);
    const LinearCoefficients coefficients = fitter.solve();
    result.residual = fitter.residual(coefficients);
    residual_energy = signal_energy(result.residual);
    result.tones = fitter.tones(coefficients);

    IterationRecord record;
    record.selected_bin = best.k;
    record.refined_frequency = refined.frequency;
    record.residual_energy = residual_energy;
    record.dtft_evaluations = refined.trace.evaluations;
    record.repairs = refined.trace.repairs;
    record.refine_truncated = refined.trace.truncated;
    record.refine_interval_width = refined.trace.final_interval_width;
    if (cfg.min_bin_separation > 0) {
      for (const IterationRecord& previous : result.iterations) {
        const std::size_t gap = previous.selected_bin > best.k ? previous.selected_bin - best.k
                                                               : best.k - previous.selected_bin;
        if (gap < cfg.min_bin_separation) {
          record.near_previous_bin = true;
          break;
        }
      }
    }
    result.iterations.push_back(record);
  }
  return result;
}

/// Greedy matching of estimates to ground truth by frequency proximity.
struct MatchReport {
  struct Pairing {
    std::size_t truth_index = 0;
    std::size_t estimate_index = 0;
    double frequency_error = 0.0;  ///< estimate minus truth
    double amplitude_error = 0.0;
    double phase_error = 0.0;  ///< wrapped to (-pi, pi]
  };
  std::vector<Pairing> matched;
  std::size_t unmatched_truth = 0;
  std::size_t unmatched_estimates = 0;
};

/// Pairs every estimate with its closest ground-truth tone, globally closest
/// gap first. Ties order by the frequency values themselves, so the matching
/// is invariant to the input order of either list.
inline MatchReport match_tones(const std::vector<ToneEstimate>& estimates,
                               const std::vector<ToneParams>& truth) {
  struct CandidatePair {
    double gap;
    double truth_frequency;
    double estimate_frequency;
    std::size_t truth_index;
    std::size_t estimate_index;
  };
  std::vector<CandidatePair> pairs;
  pairs.reserve(estimates.size() * truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t e = 0; e < estimates.size(); ++e) {
      pairs.push_back({std::abs(estimates[e].frequency - truth[t].frequency), truth[t].frequency,
                       estimates[e].frequency, t, e});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const CandidatePair& a, const CandidatePair& b) {
    if (a.gap != b.gap) return a.gap < b.gap;
    if (a.truth_frequency != b.truth_frequency) return a.truth_frequency < b.truth_frequency;
    return a.estimate_frequency < b.estimate_frequency;
  });

  MatchReport report;
  std::vector<bool> truth_taken(truth.size(), false);
  std::vector<bool> estimate_taken(estimates.size(), false);
  for (const CandidatePair& pair : pairs) {
    if (truth_taken[pair.truth_index] || estimate_taken[pair.estimate_index]) {
      continue;
    }
    truth_taken[pair.truth_index] = true;
    estimate_taken[pair.estimate_index] = true;
    const ToneParams& t = truth[pair.truth_index];
    const ToneEstimate& e = estimates[pair.estimate_index];
    report.matched.push_back({pair.truth_index, pair.estimate_index, e.frequency - t.frequency,
                              e.amplitude - t.amplitude, wrap_phase(e.phase - t.phase)});
  }
  report.unmatched_truth = truth.size() - report.matched.size();
  report.unmatched_estimates = estimates.size() - report.matched.size();
  return report;
}

inline MatchReport evaluate_against_truth(const DecompositionResult& result,
                                          const std::vector<ToneParams>& truth) {
  return match_tones(result.tones, truth);
}

}  // namespace multitone
