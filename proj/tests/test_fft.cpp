#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pinn/errors.hpp"
#include "pinn/fft.hpp"
#include "pinn/rng.hpp"

using cd = std::complex<double>;

namespace {

// Direct O(n²) discrete Fourier transform, the oracle for the fast path.
std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * double(j) * double(k) / double(n);
      acc += x[j] * cd{std::cos(ang), std::sin(ang)};
    }
    out[k] = acc;
  }
  return out;
}

std::vector<cd> random_signal(std::size_t n, std::uint64_t seed) {
  pinn::Rng rng(seed);
  std::vector<cd> x(n);
  for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return x;
}

double max_abs_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("forward transform matches the direct DFT") {
  for (std::size_t n : {1, 2, 4, 8, 64, 256}) {
    auto x = random_signal(n, 1000 + n);
    const auto expected = naive_dft(x);
    pinn::Fft plan(n);
    std::vector<cd> got = x;
    plan.forward(got);
    CHECK(max_abs_diff(got, expected) < 1e-11 * double(n));
  }
}

TEST_CASE("known transforms") {
  pinn::Fft plan(8);

  // Impulse → all-ones spectrum.
  std::vector<cd> impulse(8, cd{0.0, 0.0});
  impulse[0] = {1.0, 0.0};
  plan.forward(impulse);
  for (const auto& v : impulse) CHECK(std::abs(v - cd{1.0, 0.0}) < 1e-15);

  // Single mode e^{2πi·3j/8} → lone spike of height n at bin 3.
  std::vector<cd> mode(8);
  for (std::size_t j = 0; j < 8; ++j) {
    const double ang = 2.0 * std::numbers::pi * 3.0 * double(j) / 8.0;
    mode[j] = {std::cos(ang), std::sin(ang)};
  }
  plan.forward(mode);
  for (std::size_t k = 0; k < 8; ++k) {
    const cd want = (k == 3) ? cd{8.0, 0.0} : cd{0.0, 0.0};
    CHECK(std::abs(mode[k] - want) < 1e-13);
  }
}

TEST_CASE("inverse undoes forward") {
  for (std::size_t n : {2, 16, 512}) {
    const auto x = random_signal(n, 77 + n);
    pinn::Fft plan(n);
    std::vector<cd> y = x;
    plan.forward(y);
    plan.inverse(y);
    CHECK(max_abs_diff(y, x) < 1e-13);
  }
}

TEST_CASE("Parseval energy identity") {
  const std::size_t n = 128;
  const auto x = random_signal(n, 5);
  double time_energy = 0.0;
  for (const auto& v : x) time_energy += std::norm(v);
  pinn::Fft plan(n);
  std::vector<cd> y = x;
  plan.forward(y);
  double freq_energy = 0.0;
  for (const auto& v : y) freq_energy += std::norm(v);
  CHECK(freq_energy / double(n) == doctest::Approx(time_energy).epsilon(1e-13));
}

TEST_CASE("size validation") {
  CHECK_THROWS_AS(pinn::Fft(0), pinn::ArgumentError);
  CHECK_THROWS_AS(pinn::Fft(12), pinn::ArgumentError);
  pinn::Fft plan(8);
  std::vector<cd> wrong(4);
  CHECK_THROWS_AS(plan.forward(wrong), pinn::ArgumentError);
}

TEST_CASE("wavenumber layout") {
  const auto k = pinn::fft_wavenumbers(8, 2.0 * std::numbers::pi);
  const std::vector<double> want{0, 1, 2, 3, 4, -3, -2, -1};
  REQUIRE(k.size() == want.size());
  for (std::size_t i = 0; i < k.size(); ++i)
    CHECK(k[i] == doctest::Approx(want[i]).epsilon(1e-15));

  // Spectral derivative of sin(x) on [0, 2π) is cos(x).
  const std::size_t n = 32;
  pinn::Fft plan(n);
  std::vector<cd> f(n);
  for (std::size_t j = 0; j < n; ++j)
    f[j] = {std::sin(2.0 * std::numbers::pi * double(j) / double(n)), 0.0};
  plan.forward(f);
  const auto ks = pinn::fft_wavenumbers(n, 2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < n; ++j) f[j] *= cd{0.0, ks[j]};
  plan.inverse(f);
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = 2.0 * std::numbers::pi * double(j) / double(n);
    CHECK(std::abs(f[j].real() - std::cos(xj)) < 1e-12);
    CHECK(std::abs(f[j].imag()) < 1e-12);
  }
}
