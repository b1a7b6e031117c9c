#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <set>
#include <vector>

#include "pinn/rng.hpp"
#include "pinn/sampler.hpp"

using pinn::ArgumentError;
using pinn::BoxDomain;
using pinn::Rng;

namespace {

// Independent transcription of the published xoshiro256** + splitmix64
// recurrences, used as the oracle for the generator the library documents.
struct RefXoshiro {
  std::uint64_t s[4];

  explicit RefXoshiro(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& word : s) {
      z += 0x9e3779b97f4a7c15ULL;
      std::uint64_t x = z;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
      word = x ^ (x >> 31);
    }
  }

  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

}  // namespace

TEST_CASE("generator matches the published recurrence") {
  RefXoshiro ref(42);
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) CHECK(rng.next_u64() == ref.next());
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform01() == b.uniform01());
    CHECK(a.normal() == b.normal());
  }
  // uniform01 stays in [0, 1)
  Rng c(123);
  for (int i = 0; i < 10000; ++i) {
    const double u = c.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("worker seeds derive distinct streams") {
  Rng w0(pinn::worker_seed(100, 0));
  Rng w1(pinn::worker_seed(100, 1));
  bool any_diff = false;
  for (int i = 0; i < 10; ++i) any_diff |= (w0.next_u64() != w1.next_u64());
  CHECK(any_diff);
}

TEST_CASE("domain bounds are validated") {
  BoxDomain bad{{0.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  BoxDomain empty{{}, {}};
  CHECK_THROWS_AS(empty.validate(), ArgumentError);
  BoxDomain ok{{0.0, -1.0}, {1.0, 1.0}};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("single sample lies inside the box") {
  BoxDomain box{{0.0, 0.0}, {1.0, 1.0}};
  Rng rng(1);
  auto pts = pinn::lhs(box, 1, rng);
  REQUIRE(pts.size() == 2);
  for (double v : pts) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("ten samples stratify the unit interval") {
  BoxDomain box{{0.0}, {1.0}};
  Rng rng(2);
  auto pts = pinn::lhs(box, 10, rng);
  std::sort(pts.begin(), pts.end());
  for (int k = 0; k < 10; ++k) {
    CHECK(pts[k] >= k / 10.0);
    CHECK(pts[k] < (k + 1) / 10.0);
  }
}

TEST_CASE("large sample stratifies every dimension exactly") {
  BoxDomain box{{0.0, -1.0}, {1.0, 1.0}};
  Rng rng(3);
  const std::size_t n = 10000;
  auto pts = pinn::lhs(box, n, rng);
  REQUIRE(pts.size() == 2 * n);

  for (int d = 0; d < 2; ++d) {
    std::vector<int> hist(100, 0);
    const double lo = box.lower[d];
    const double width = box.upper[d] - box.lower[d];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (pts[i * 2 + d] - lo) / width;
      const int bin = static_cast<int>(u * 100.0);
      REQUIRE(bin >= 0);
      REQUIRE(bin < 100);
      ++hist[bin];
    }
    for (int b = 0; b < 100; ++b) CHECK(hist[b] == 100);
  }
}

TEST_CASE("sampling is deterministic given the seed") {
  BoxDomain box{{0.0, -1.0}, {1.0, 1.0}};
  Rng r1(55), r2(55);
  auto a = pinn::lhs(box, 500, r1);
  auto b = pinn::lhs(box, 500, r2);
  CHECK(a == b);
}

TEST_CASE("subsample draws distinct indices uniformly") {
  Rng rng(9);
  auto idx = pinn::subsample_indices(256, 50, rng);
  CHECK(idx.size() == 50);
  std::set<std::size_t> unique(idx.begin(), idx.end());
  CHECK(unique.size() == 50);
  for (std::size_t i : idx) CHECK(i < 256);

  Rng rng2(9);
  auto idx2 = pinn::subsample_indices(256, 50, rng2);
  CHECK(idx == idx2);
}

TEST_CASE("subsample with n equal to the dataset size is a permutation") {
  Rng rng(10);
  auto idx = pinn::subsample_indices(64, 64, rng);
  std::vector<std::size_t> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 64; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("subsample edge cases") {
  Rng rng(11);
  CHECK(pinn::subsample_indices(10, 0, rng).empty());
  CHECK_THROWS_AS(pinn::subsample_indices(10, 11, rng), ArgumentError);

  const std::vector<double> data{1.0, 2.0, 3.0, 4.0};
  Rng rng2(12);
  auto picked = pinn::subsample(data, 2, rng2);
  CHECK(picked.size() == 2);
  for (double v : picked) CHECK(std::find(data.begin(), data.end(), v) != data.end());
}
