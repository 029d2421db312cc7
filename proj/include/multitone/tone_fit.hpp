#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "multitone/common.hpp"
#include "multitone/signal.hpp"

namespace multitone {

/// One estimated sinusoid, same model as ToneParams: A * sin(w * n + theta).
struct ToneEstimate {
  double frequency = 0.0;
  double amplitude = 0.0;  ///< non-negative
  double phase = 0.0;      ///< canonical range (-pi, pi]
};

/// Sampled basis pair for one frequency: s_n = sin(w n), c_n = cos(w n).
struct SinCosBasis {
  double frequency = 0.0;
  std::vector<double> sin_vector;
  std::vector<double> cos_vector;
};

/// Per-frequency linear weights (alpha_i, beta_i) of the model
/// sum_i  alpha_i sin(w_i n) + beta_i cos(w_i n).
struct LinearCoefficients {
  std::vector<std::pair<double, double>> pairs;
};

/// Structured least-squares failure: duplicate frequencies at the working
/// resolution, or a normal matrix too ill-conditioned to solve meaningfully.
/// Carries the offending frequency pair.
class FitError : public std::runtime_error {
 public:
  enum class Kind { DuplicateFrequency, IllConditioned };

  FitError(Kind kind, double frequency_a, double frequency_b, const std::string& message)
      : std::runtime_error(message),
        kind_(kind),
        frequency_a_(frequency_a),
        frequency_b_(frequency_b) {}

  Kind kind() const { return kind_; }
  double frequency_a() const { return frequency_a_; }
  double frequency_b() const { return frequency_b_; }

 private:
  Kind kind_;
  double frequency_a_;
  double frequency_b_;
};

/// Reciprocal-condition floor for the normal matrix; below it the solve is
/// rejected as ill-conditioned rather than silently regularized.
inline constexpr double kMinReciprocalCondition = 1e-12;

inline SinCosBasis make_basis(double w, std::size_t n_samples) {
  require(n_samples >= 2, "make_basis: n_samples must be at least 2");
  require(std::isfinite(w) && w > 0.0 && w < kPi, "make_basis: frequency must lie in (0, pi)");
  SinCosBasis basis;
  basis.frequency = w;
  basis.sin_vector.resize(n_samples);
  basis.cos_vector.resize(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    basis.sin_vector[n] = std::sin(w * static_cast<double>(n));
    basis.cos_vector[n] = std::cos(w * static_cast<double>(n));
  }
  return basis;
}

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()))
      .dot(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
}

}  // namespace detail

/// Incremental joint least-squares fit of sum_i A_i sin(w_i n + theta_i)
/// against a fixed signal. Adding frequency m+1 extends the normal matrix
/// Y^T Y by one sin/cos column pair in O(mN); solve() re-factorizes the
/// maintained matrix (O(m^3)) and returns the minimizing coefficients.
class JointToneFitter {
 public:
  explicit JointToneFitter(Signal x, double min_frequency_separation = 0.0)
      : x_(std::move(x)), min_separation_(min_frequency_separation) {
    require(x_.size() >= 2, "joint fit: need at least 2 samples");
    require(std::isfinite(min_separation_) && min_separation_ >= 0.0,
            "joint fit: minimum separation must be finite and non-negative");
  }

  std::size_t tone_count() const { return bases_.size(); }

  std::vector<double> frequencies() const {
    std::vector<double> result;
    result.reserve(bases_.size());
    for (const SinCosBasis& basis : bases_) {
      result.push_back(basis.frequency);
    }
    return result;
  }

  /// Rejects frequencies within min_frequency_separation of an accepted one:
  /// two basis pairs at indistinguishable frequencies are linearly dependent
  /// at the working resolution.
  void add_frequency(double w) {
    require(2 * (bases_.size() + 1) <= x_.size(), "joint fit: more basis columns than samples");
    for (const SinCosBasis& existing : bases_) {
      if (std::abs(existing.frequency - w) <= min_separation_) {
        throw FitError(FitError::Kind::DuplicateFrequency, existing.frequency, w,
                       "joint fit: frequency " + std::to_string(w) + " duplicates accepted " +
                           std::to_string(existing.frequency) + " at the working resolution");
      }
    }
    SinCosBasis basis = make_basis(w, x_.size());

    const Eigen::Index m = static_cast<Eigen::Index>(bases_.size());
    gram_.conservativeResize(2 * m + 2, 2 * m + 2);
    rhs_.conservativeResize(2 * m + 2);
    for (Eigen::Index i = 0; i <= m; ++i) {
      const SinCosBasis& other = (i < m) ? bases_[static_cast<std::size_t>(i)] : basis;
      const double ss = detail::dot(other.sin_vector, basis.sin_vector);
      const double sc = detail::dot(other.sin_vector, basis.cos_vector);
      const double cs = detail::dot(other.cos_vector, basis.sin_vector);
      const double cc = detail::dot(other.cos_vector, basis.cos_vector);
      gram_(2 * i, 2 * m) = ss;
      gram_(2 * i, 2 * m + 1) = sc;
      gram_(2 * i + 1, 2 * m) = cs;
      gram_(2 * i + 1, 2 * m + 1) = cc;
      gram_(2 * m, 2 * i) = ss;
      gram_(2 * m + 1, 2 * i) = sc;
      gram_(2 * m, 2 * i + 1) = cs;
      gram_(2 * m + 1, 2 * i + 1) = cc;
    }
    rhs_(2 * m) = detail::dot(x_, basis.sin_vector);
    rhs_(2 * m + 1) = detail::dot(x_, basis.cos_vector);
    bases_.push_back(std::move(basis));
  }

  /// Minimizer of || x - Y lambda ||^2 via LDLT of the normal matrix.
  LinearCoefficients solve() const {
    require(!bases_.empty(), "joint fit: no frequencies added");
    const Eigen::LDLT<Eigen::MatrixXd> factorization(gram_);
    if (factorization.info() != Eigen::Success ||
        !(factorization.rcond() > kMinReciprocalCondition)) {
      const auto [wa, wb] = closest_frequency_pair();
      throw FitError(FitError::Kind::IllConditioned, wa, wb,
                     "joint fit: normal matrix is ill-conditioned (reciprocal condition " +
                         std::to_string(factorization.rcond()) + "); closest frequencies " +
                         std::to_string(wa) + " and " + std::to_string(wb));
    }
    const Eigen::VectorXd lambda = factorization.solve(rhs_);
    LinearCoefficients coefficients;
    coefficients.pairs.reserve(bases_.size());
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      coefficients.pairs.emplace_back(lambda(2 * static_cast<Eigen::Index>(i)),
                                      lambda(2 * static_cast<Eigen::Index>(i) + 1));
    }
    return coefficients;
  }

  /// Converts coefficients to tones: A = sqrt(alpha^2 + beta^2) and theta is
  /// the full-quadrant angle with alpha = A cos(theta), beta = A sin(theta),
  /// since alpha sin(wn) + beta cos(wn) = A sin(wn + theta).
  std::vector<ToneEstimate> tones(const LinearCoefficients& coefficients) const {
    require(coefficients.pairs.size() == bases_.size(), "joint fit: coefficient count mismatch");
    std::vector<ToneEstimate> result;
    result.reserve(bases_.size());
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      const auto [alpha, beta] = coefficients.pairs[i];
      ToneEstimate tone;
      tone.frequency = bases_[i].frequency;
      tone.amplitude = std::hypot(alpha, beta);
      tone.phase = wrap_phase(std::atan2(beta, alpha));
      result.push_back(tone);
    }
    return result;
  }

  /// x minus the fitted model, using the cached basis vectors.
  Signal residual(const LinearCoefficients& coefficients) const {
    require(coefficients.pairs.size() == bases_.size(), "joint fit: coefficient count mismatch");
    Signal out = x_;
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      const auto [alpha, beta] = coefficients.pairs[i];
      const SinCosBasis& basis = bases_[i];
      for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] -= alpha * basis.sin_vector[n] + beta * basis.cos_vector[n];
      }
    }
    return out;
  }

 private:
  std::pair<double, double> closest_frequency_pair() const {
    if (bases_.size() == 1) {
      return {bases_[0].frequency, bases_[0].frequency};
    }
    std::pair<double, double> closest{bases_[0].frequency, bases_[1].frequency};
    double smallest_gap = std::abs(closest.first - closest.second);
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      for (std::size_t j = i + 1; j < bases_.size(); ++j) {
        const double gap = std::abs(bases_[i].frequency - bases_[j].frequency);
        if (gap < smallest_gap) {
          smallest_gap = gap;
          closest = {bases_[i].frequency, bases_[j].frequency};
        }
      }
    }
    return closest;
  }

  Signal x_;
  double min_separation_;
  std::vector<SinCosBasis> bases_;
  Eigen::MatrixXd gram_{0, 0};
  Eigen::VectorXd rhs_{0};
};

struct JointFit {
  LinearCoefficients coefficients;
  std::vector<ToneEstimate> tones;
};

/// One-shot joint fit over a fixed frequency list.
inline JointFit joint_ls_fit(const Signal& x, const std::vector<double>& freqs,
                             double min_frequency_separation = 0.0) {
  require(!freqs.empty(), "joint_ls_fit: need at least one frequency");
  JointToneFitter fitter(x, min_frequency_separation);
  for (double w : freqs) {
    fitter.add_frequency(w);
  }
  JointFit fit;
  fit.coefficients = fitter.solve();
  fit.tones = fitter.tones(fit.coefficients);
  return fit;
}

/// x minus sum_i  alpha_i sin(w_i n) + beta_i cos(w_i n), elementwise.
inline Signal subtract_model(const Signal& x, const LinearCoefficients& coefficients,
                             const std::vector<double>& freqs) {
  require(coefficients.pairs.size() == freqs.size(),
          "subtract_model: coefficient/frequency count mismatch");
  Signal residual = x;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const SinCosBasis basis = make_basis(freqs[i], x.size());
    const auto [alpha, beta] = coefficients.pairs[i];
    for (std::size_t n = 0; n < residual.size(); ++n) {
      residual[n] -= alpha * basis.sin_vector[n] + beta * basis.cos_vector[n];
    }
  }
  return residual;
}

}  // namespace multitone
