#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace multitone {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Throws std::invalid_argument when a precondition does not hold.
inline void require(bool condition, const char* message) {
  if (!condition) {
    throw std::invalid_argument(message);
  }
}

/// Wraps an angle into the canonical range (-pi, pi].
inline double wrap_phase(double angle) {
  double wrapped = std::remainder(angle, kTwoPi);
  if (wrapped <= -kPi) {
    wrapped += kTwoPi;
  }
  return wrapped;
}

}  // namespace multitone
