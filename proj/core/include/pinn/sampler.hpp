#pragma once

#include <cstddef>
#include <vector>

#include "pinn/errors.hpp"
#include "pinn/rng.hpp"

namespace pinn {

/// Axis-aligned box in physical coordinates.
struct BoxDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  /// Throws ArgumentError unless lower < upper in every dimension.
  void validate() const;
};

/// Latin Hypercube Sampling: n points, row-major n × dim. Per dimension,
/// exactly one point falls in each of the n equal-width strata, jittered
/// uniformly within its stratum. Deterministic given the Rng state.
std::vector<double> lhs(const BoxDomain& domain, std::size_t n, Rng& rng);

/// n distinct indices drawn uniformly without replacement from [0, count).
/// Throws ArgumentError if n > count.
std::vector<std::size_t> subsample_indices(std::size_t count, std::size_t n, Rng& rng);

/// Uniform subsample without replacement of a dataset.
template <typename T>
std::vector<T> subsample(const std::vector<T>& dataset, std::size_t n, Rng& rng) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i : subsample_indices(dataset.size(), n, rng)) out.push_back(dataset[i]);
  return out;
}

}  // namespace pinn
