#include "pinn/sampler.hpp"

#include <numeric>

namespace pinn {

void BoxDomain::validate() const {
  if (lower.size() != upper.size())
    throw ArgumentError("domain bound vectors differ in dimension");
  if (lower.empty()) throw ArgumentError("domain must have at least one dimension");
  for (std::size_t d = 0; d < lower.size(); ++d) {
    if (!(lower[d] < upper[d]))
      throw ArgumentError("domain lower bound must be below upper bound");
  }
}

std::vector<double> lhs(const BoxDomain& domain, std::size_t n, Rng& rng) {
  domain.validate();
  if (n < 1) throw ArgumentError("sample count must be at least 1");
  const std::size_t dim = domain.dim();
  std::vector<double> points(n * dim);

  std::vector<std::size_t> strata(n);
  for (std::size_t d = 0; d < dim; ++d) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    // Fisher-Yates shuffle assigns one stratum per point.
    for (std::size_t i = n; i-- > 1;) {
      const std::size_t j = rng.below(i + 1);
      std::swap(strata[i], strata[j]);
    }
    const double lo = domain.lower[d];
    const double width = domain.upper[d] - domain.lower[d];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      points[i * dim + d] = lo + (static_cast<double>(strata[i]) + u) * width / static_cast<double>(n);
    }
  }
  return points;
}

std::vector<std::size_t> subsample_indices(std::size_t count, std::size_t n, Rng& rng) {
  if (n > count) throw ArgumentError("subsample size exceeds dataset size");
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n entries are a uniform draw without
  // replacement.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(count - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace pinn
