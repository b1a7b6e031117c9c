#include "pinn/fft.hpp"

#include <cmath>
#include <numbers>

#include "pinn/errors.hpp"

namespace pinn {

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0)
    throw ArgumentError("transform size must be a power of two");
  bit_reverse_.resize(n);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rev = 0;
    for (std::size_t b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) rev |= std::size_t{1} << (log2n - 1 - b);
    bit_reverse_[i] = rev;
  }
  twiddle_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    twiddle_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Fft::transform(std::span<std::complex<double>> data, bool invert) const {
  if (data.size() != n_)
    throw ArgumentError("data size does not match transform size");
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bit_reverse_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t stride = n_ / len;  // twiddle index step for this stage
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> w = twiddle_[k * stride];
        if (invert) w = std::conj(w);
        const std::complex<double> odd = data[start + k + len / 2] * w;
        const std::complex<double> even = data[start + k];
        data[start + k] = even + odd;
        data[start + k + len / 2] = even - odd;
      }
    }
  }
  if (invert) {
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
  }
}

void Fft::forward(std::span<std::complex<double>> data) const {
  transform(data, false);
}

void Fft::inverse(std::span<std::complex<double>> data) const {
  transform(data, true);
}

std::vector<double> fft_wavenumbers(std::size_t n, double domain_length) {
  if (domain_length <= 0.0) throw ArgumentError("domain length must be positive");
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / domain_length;
  for (std::size_t i = 0; i <= n / 2; ++i) k[i] = base * static_cast<double>(i);
  for (std::size_t i = n / 2 + 1; i < n; ++i)
    k[i] = -base * static_cast<double>(n - i);
  return k;
}

}  // namespace pinn
