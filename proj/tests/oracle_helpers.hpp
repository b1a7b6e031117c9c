#pragma once

// Small numerical oracles used by the test suite. Everything here is written
// independently of the library under test (plain doubles, textbook formulas)
// so tests compare two separate routes to the same quantity.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// First derivative by central difference.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Second derivative by central difference.
inline double central_diff2(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// |a - b| relative to |b| (reference second).
inline double rel_err(double got, double want) {
  const double denom = std::abs(want);
  return std::abs(got - want) / (denom > 0.0 ? denom : 1.0);
}

/// Relative L2 distance between two vectors: ||got - want|| / ||want||.
inline double rel_l2_err(const std::vector<double>& got, const std::vector<double>& want) {
  double num = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double d = got[i] - want[i];
    num += d * d;
    denom += want[i] * want[i];
  }
  return std::sqrt(num) / (denom > 0.0 ? std::sqrt(denom) : 1.0);
}

}  // namespace oracle
