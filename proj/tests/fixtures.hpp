#pragma once

#include <cmath>
#include <numbers>

#include "disloc/potential.hpp"

namespace fixture {

// -1 on [0, pi), +1 on [pi, 2 pi), period 2 pi.
inline disloc::PotentialSpec step() {
  return disloc::PotentialSpec::piecewise(2.0 * std::numbers::pi, {0.0, std::numbers::pi}, {-1.0, 1.0});
}

// The same step on the unit period.
inline disloc::PotentialSpec unit_step(double a = -1.0, double b = 1.0) {
  return disloc::PotentialSpec::piecewise(1.0, {0.0, 0.5}, {a, b});
}

// A cos(2 pi x): Mathieu-type potential with open gaps.
inline disloc::PotentialSpec cosine(double amplitude = 5.0) {
  return disloc::PotentialSpec::fourier(1.0, {0.0, amplitude});
}

// Samples of |frac(x) - 1/2|^{1/2} on a uniform grid.
inline disloc::PotentialSpec sqrt_cusp(int n = 4096) {
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) s[j] = std::sqrt(std::abs(static_cast<double>(j) / n - 0.5));
  return disloc::PotentialSpec::sampled(1.0, s);
}

}  // namespace fixture
