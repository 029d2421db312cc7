#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "multitone/signal.hpp"
#include "multitone/tone_fit.hpp"
#include "oracles.hpp"

using namespace multitone;

namespace {

double energy(const Signal& x) { return signal_energy(x); }

double dot_manual(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot_manual(a, a)); }

}  // namespace

TEST_CASE("make_basis: hand values and long-double oracle") {
  const double w = 0.4;
  const SinCosBasis basis = make_basis(w, 300);
  REQUIRE(basis.frequency == w);
  REQUIRE(basis.sin_vector.size() == 300);
  REQUIRE(basis.sin_vector[0] == 0.0);
  REQUIRE(basis.cos_vector[0] == 1.0);
  for (std::size_t n = 0; n < 300; ++n) {
    const long double angle = static_cast<long double>(w) * static_cast<long double>(n);
    REQUIRE_THAT(basis.sin_vector[n],
                 Catch::Matchers::WithinAbs(static_cast<double>(std::sin(angle)), 1e-12));
    REQUIRE_THAT(basis.cos_vector[n],
                 Catch::Matchers::WithinAbs(static_cast<double>(std::cos(angle)), 1e-12));
  }
}

TEST_CASE("make_basis: rejects out-of-band frequencies and short signals") {
  REQUIRE_THROWS_AS(make_basis(0.0, 16), std::invalid_argument);
  REQUIRE_THROWS_AS(make_basis(kPi, 16), std::invalid_argument);
  REQUIRE_THROWS_AS(make_basis(-0.5, 16), std::invalid_argument);
  REQUIRE_THROWS_AS(make_basis(0.5, 1), std::invalid_argument);
}

TEST_CASE("joint fit: recovers a pure tone to solver precision") {
  const double w = kTwoPi * 41.3 / 512.0;
  const double amplitude = 1.3;
  const double phase = 0.8;
  const Signal x = synthesize({{w, amplitude, phase}}, 512);

  const JointFit fit = joint_ls_fit(x, {w});
  REQUIRE(fit.tones.size() == 1);
  REQUIRE_THAT(fit.tones[0].amplitude, Catch::Matchers::WithinAbs(amplitude, 1e-9));
  REQUIRE_THAT(fit.tones[0].phase, Catch::Matchers::WithinAbs(phase, 1e-9));
  REQUIRE(fit.tones[0].frequency == w);

  const Signal residual = subtract_model(x, fit.coefficients, {w});
  REQUIRE(energy(residual) <= 1e-18 * energy(x));
}

TEST_CASE("joint fit: pure sine and pure cosine map to phase 0 and pi/2") {
  const double w = kTwoPi * 20.0 / 256.0;

  const JointFit sine_fit = joint_ls_fit(synthesize({{w, 2.0, 0.0}}, 256), {w});
  REQUIRE_THAT(sine_fit.tones[0].amplitude, Catch::Matchers::WithinAbs(2.0, 1e-10));
  REQUIRE_THAT(sine_fit.tones[0].phase, Catch::Matchers::WithinAbs(0.0, 1e-10));
  REQUIRE_THAT(sine_fit.coefficients.pairs[0].first, Catch::Matchers::WithinAbs(2.0, 1e-10));
  REQUIRE_THAT(sine_fit.coefficients.pairs[0].second, Catch::Matchers::WithinAbs(0.0, 1e-10));

  const JointFit cosine_fit = joint_ls_fit(synthesize({{w, 2.0, kPi / 2.0}}, 256), {w});
  REQUIRE_THAT(cosine_fit.tones[0].amplitude, Catch::Matchers::WithinAbs(2.0, 1e-10));
  REQUIRE_THAT(cosine_fit.tones[0].phase, Catch::Matchers::WithinAbs(kPi / 2.0, 1e-10));
  REQUIRE_THAT(cosine_fit.coefficients.pairs[0].second, Catch::Matchers::WithinAbs(2.0, 1e-10));
}

TEST_CASE("joint fit: matches the long-double normal-equation oracle on noisy two-tone data") {
  const std::vector<double> freqs = {kTwoPi * 30.41 / 512.0, kTwoPi * 77.89 / 512.0};
  const Signal x =
      synthesize({{freqs[0], 1.0, 0.6}, {freqs[1], 0.5, -1.2}}, 512, {0.05, 99});

  const JointFit fit = joint_ls_fit(x, freqs);
  const std::vector<std::pair<double, double>> oracle = oracles::normal_equation_fit(x, freqs);
  REQUIRE(fit.coefficients.pairs.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    REQUIRE_THAT(fit.coefficients.pairs[i].first,
                 Catch::Matchers::WithinAbs(oracle[i].first, 1e-9));
    REQUIRE_THAT(fit.coefficients.pairs[i].second,
                 Catch::Matchers::WithinAbs(oracle[i].second, 1e-9));
  }
}

TEST_CASE("joint fit: residual is orthogonal to every basis vector") {
  const std::vector<double> freqs = {kTwoPi * 12.3 / 256.0, kTwoPi * 47.61 / 256.0,
                                     kTwoPi * 90.05 / 256.0};
  const Signal x = synthesize(
      {{freqs[0], 1.0, 0.1}, {freqs[1], 0.7, 1.9}, {freqs[2], 0.4, -2.4}}, 256, {0.1, 7});

  JointToneFitter fitter(x);
  for (double w : freqs) {
    fitter.add_frequency(w);
  }
  const LinearCoefficients coefficients = fitter.solve();
  const Signal residual = fitter.residual(coefficients);

  const double x_norm = norm2(x);
  for (double w : freqs) {
    const SinCosBasis basis = make_basis(w, x.size());
    REQUIRE(std::abs(dot_manual(residual, basis.sin_vector)) <=
            1e-8 * x_norm * norm2(basis.sin_vector));
    REQUIRE(std::abs(dot_manual(residual, basis.cos_vector)) <=
            1e-8 * x_norm * norm2(basis.cos_vector));
  }
}

TEST_CASE("joint fit: fitter residual and subtract_model agree exactly") {
  const std::vector<double> freqs = {kTwoPi * 9.27 / 128.0, kTwoPi * 33.8 / 128.0};
  const Signal x = synthesize({{freqs[0], 1.0, 0.5}, {freqs[1], 0.3, -0.4}}, 128, {0.02, 5});

  JointToneFitter fitter(x);
  for (double w : freqs) {
    fitter.add_frequency(w);
  }
  const LinearCoefficients coefficients = fitter.solve();
  const Signal from_fitter = fitter.residual(coefficients);
  const Signal from_free_function = subtract_model(x, coefficients, freqs);
  REQUIRE(from_fitter == from_free_function);
}

TEST_CASE("subtract_model: exactly cancels a model built from its own basis") {
  const double w = kTwoPi * 17.0 / 128.0 + 0.3 / 128.0;
  const SinCosBasis basis = make_basis(w, 128);
  const double alpha = 0.9;
  const double beta = -0.4;
  Signal x(128);
  for (std::size_t n = 0; n < x.size(); ++n) {
    x[n] = alpha * basis.sin_vector[n] + beta * basis.cos_vector[n];
  }
  LinearCoefficients coefficients;
  coefficients.pairs = {{alpha, beta}};
  const Signal residual = subtract_model(x, coefficients, {w});
  for (double sample : residual) {
    REQUIRE(std::abs(sample) <= 1e-16);
  }
}

TEST_CASE("joint fit: adding a frequency never increases residual energy") {
  const std::vector<double> freqs = {kTwoPi * 21.4 / 512.0, kTwoPi * 60.72 / 512.0,
                                     kTwoPi * 150.33 / 512.0};
  const Signal x = synthesize(
      {{freqs[0], 1.0, 0.2}, {freqs[1], 0.8, -0.8}, {freqs[2], 0.5, 2.8}}, 512, {0.2, 31});

  JointToneFitter fitter(x);
  double previous = energy(x);
  for (double w : freqs) {
    fitter.add_frequency(w);
    const double current = energy(fitter.residual(fitter.solve()));
    REQUIRE(current <= previous * (1.0 + 1e-12));
    previous = current;
  }
}

TEST_CASE("joint fit: tone form and linear form synthesize the same model") {
  const double w = kTwoPi * 25.19 / 256.0;
  const Signal x = synthesize({{w, 1.1, 2.3}}, 256, {0.05, 17});
  const JointFit fit = joint_ls_fit(x, {w});
  const auto [alpha, beta] = fit.coefficients.pairs[0];
  const ToneEstimate& tone = fit.tones[0];
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double linear = alpha * std::sin(w * static_cast<double>(n)) +
                          beta * std::cos(w * static_cast<double>(n));
    const double tonal =
        tone.amplitude * std::sin(w * static_cast<double>(n) + tone.phase);
    REQUIRE_THAT(tonal, Catch::Matchers::WithinAbs(linear, 1e-12));
  }
}

TEST_CASE("joint fit: coefficients scale linearly with the signal") {
  const std::vector<double> freqs = {kTwoPi * 14.77 / 256.0, kTwoPi * 51.08 / 256.0};
  const Signal x = synthesize({{freqs[0], 1.0, 0.4}, {freqs[1], 0.6, -1.5}}, 256, {0.1, 23});
  const JointFit base = joint_ls_fit(x, freqs);

  SECTION("power-of-two factor is exact") {
    Signal scaled = x;
    for (double& sample : scaled) {
      sample *= 4.0;
    }
    const JointFit rescaled = joint_ls_fit(scaled, freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      REQUIRE(rescaled.coefficients.pairs[i].first == 4.0 * base.coefficients.pairs[i].first);
      REQUIRE(rescaled.coefficients.pairs[i].second == 4.0 * base.coefficients.pairs[i].second);
    }
  }

  SECTION("general factor within rounding") {
    Signal scaled = x;
    for (double& sample : scaled) {
      sample *= 3.7;
    }
    const JointFit rescaled = joint_ls_fit(scaled, freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      REQUIRE_THAT(rescaled.coefficients.pairs[i].first,
                   Catch::Matchers::WithinRel(3.7 * base.coefficients.pairs[i].first, 1e-12));
      REQUIRE_THAT(rescaled.coefficients.pairs[i].second,
                   Catch::Matchers::WithinRel(3.7 * base.coefficients.pairs[i].second, 1e-12));
    }
  }
}

TEST_CASE("joint fit: duplicate frequencies are rejected as structured errors") {
  const Signal x = synthesize({{0.5, 1.0, 0.0}}, 128);

  SECTION("within the configured separation") {
    JointToneFitter fitter(x, 0.01);
    fitter.add_frequency(0.5);
    try {
      fitter.add_frequency(0.505);
      FAIL("expected FitError");
    } catch (const FitError& error) {
      REQUIRE(error.kind() == FitError::Kind::DuplicateFrequency);
      REQUIRE(error.frequency_a() == 0.5);
      REQUIRE(error.frequency_b() == 0.505);
    }
  }

  SECTION("an exact duplicate is rejected even with separation zero") {
    JointToneFitter fitter(x, 0.0);
    fitter.add_frequency(0.5);
    REQUIRE_THROWS_AS(fitter.add_frequency(0.5), FitError);
  }

  SECTION("distinct frequencies beyond the separation are accepted") {
    JointToneFitter fitter(x, 0.01);
    fitter.add_frequency(0.5);
    REQUIRE_NOTHROW(fitter.add_frequency(0.52));
  }
}

TEST_CASE("joint fit: indistinguishably close frequencies fail the condition gate") {
  const double w = kTwoPi * 40.5 / 512.0;
  const Signal x = synthesize({{w, 1.0, 0.7}}, 512);
  JointToneFitter fitter(x);
  fitter.add_frequency(w);
  fitter.add_frequency(w + 1e-9);
  try {
    (void)fitter.solve();
    FAIL("expected FitError");
  } catch (const FitError& error) {
    REQUIRE(error.kind() == FitError::Kind::IllConditioned);
    const double low = std::min(error.frequency_a(), error.frequency_b());
    const double high = std::max(error.frequency_a(), error.frequency_b());
    REQUIRE(low == w);
    REQUIRE(high == w + 1e-9);
  }
}

TEST_CASE("joint fit: basis columns may not outnumber samples") {
  const Signal x = synthesize({{0.3, 1.0, 0.0}}, 8);
  JointToneFitter fitter(x);
  fitter.add_frequency(0.3);
  fitter.add_frequency(0.7);
  fitter.add_frequency(1.1);
  fitter.add_frequency(1.5);
  REQUIRE_THROWS_AS(fitter.add_frequency(1.9), std::invalid_argument);
}

TEST_CASE("joint fit: remaining argument validation") {
  REQUIRE_THROWS_AS(joint_ls_fit(synthesize({{0.5, 1.0, 0.0}}, 64), {}), std::invalid_argument);
  REQUIRE_THROWS_AS(JointToneFitter(Signal{1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(JointToneFitter(Signal(16, 0.0), -1.0), std::invalid_argument);

  JointToneFitter fitter(synthesize({{0.5, 1.0, 0.0}}, 64));
  REQUIRE_THROWS_AS(fitter.solve(), std::invalid_argument);
  fitter.add_frequency(0.5);
  LinearCoefficients wrong_count;
  wrong_count.pairs = {{1.0, 0.0}, {0.0, 1.0}};
  REQUIRE_THROWS_AS(fitter.tones(wrong_count), std::invalid_argument);
  REQUIRE_THROWS_AS(fitter.residual(wrong_count), std::invalid_argument);
  REQUIRE_THROWS_AS(subtract_model(Signal(16, 0.0), wrong_count, {0.5}), std::invalid_argument);
}
