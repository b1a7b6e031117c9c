#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pinn {

/// Radix-2 complex FFT with tables precomputed for one transform size.
/// Forward convention: X_k = Σ_j x_j e^{-2πi jk/n}; inverse applies 1/n.
class Fft {
 public:
  /// n must be a power of two ≥ 1; throws ArgumentError otherwise.
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }

  /// In-place transforms; data.size() must equal size().
  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void transform(std::span<std::complex<double>> data, bool invert) const;

  std::size_t n_;
  std::vector<std::size_t> bit_reverse_;
  std::vector<std::complex<double>> twiddle_;  ///< e^{-2πi k/n}, k < n/2
};

/// Angular wavenumbers 2π·m/L in standard FFT ordering
/// (m = 0, 1, …, n/2, −n/2+1, …, −1) for a periodic domain of length L.
std::vector<double> fft_wavenumbers(std::size_t n, double domain_length);

}  // namespace pinn
