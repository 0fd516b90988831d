#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mapfsel/simd/kernels.hpp"

using namespace mapfsel::simd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n,
                               double lo = -10, double hi = 10) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::vector<double> random_mask(std::mt19937_64& rng, std::size_t n) {
  std::bernoulli_distribution d(0.8);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng) ? 1.0 : 0.0;
  return v;
}

}  // namespace

TEST_CASE("scalar stencil matches a hand-computed 3x3 case") {
  // grid (row-major, 3x3), all passable
  std::vector<double> cur = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> mask(9, 1.0);
  std::vector<double> next(9, -1);
  kScalar.stencil_step(cur.data(), next.data(), mask.data(), 3, 3);
  // center: 5 + 4 + 6 + 2 + 8
  CHECK(next[4] == 25);
  // corner (0,0): 1 + right 2 + down 4
  CHECK(next[0] == 7);
  // edge (0,1): 2 + 1 + 3 + 5
  CHECK(next[1] == 11);
}

TEST_CASE("stencil zeroes blocked cells") {
  std::vector<double> cur = {1, 2, 3, 4};
  std::vector<double> mask = {1, 0, 1, 1};
  std::vector<double> next(4, -1);
  kScalar.stencil_step(cur.data(), next.data(), mask.data(), 2, 2);
  CHECK(next[1] == 0);
  // (0,0) still receives the blocked neighbour's count: walks may not enter
  // a blocked cell, which the mask enforces on the destination, not the source
  CHECK(next[0] == 1 + 2 + 3);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels match scalar bit-for-bit on random inputs") {
  if (!set_active("avx2")) {
    MESSAGE("avx2 unavailable on this CPU; skipping");
    return;
  }
  const Kernels& avx2 = active();
  REQUIRE(std::string(avx2.name) == "avx2");

  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 50; ++iter) {
    std::uniform_int_distribution<std::size_t> wd(1, 33), hd(1, 17);
    std::size_t w = wd(rng), h = hd(rng), n = w * h;
    std::vector<double> cur = random_vec(rng, n);
    std::vector<double> mask = random_mask(rng, n);

    std::vector<double> a(n), b(n);
    a = random_vec(rng, n);
    b = random_vec(rng, n);

    std::vector<double> next_s(n), next_v(n);
    kScalar.stencil_step(cur.data(), next_s.data(), mask.data(), w, h);
    avx2.stencil_step(cur.data(), next_v.data(), mask.data(), w, h);
    for (std::size_t i = 0; i < n; ++i) CHECK(next_s[i] == next_v[i]);

    std::vector<double> acc_s = random_vec(rng, n), acc_v = acc_s;
    kScalar.fma_acc(acc_s.data(), a.data(), b.data(), n);
    avx2.fma_acc(acc_v.data(), a.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(acc_s[i] == doctest::Approx(acc_v[i]).epsilon(1e-15));

    std::vector<double> sc_s = a, sc_v = a;
    kScalar.scale(sc_s.data(), 1.75, n);
    avx2.scale(sc_v.data(), 1.75, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(sc_s[i] == sc_v[i]);

    // dot and masked_max reduce in a different order; allow rounding slack
    CHECK(kScalar.dot(a.data(), b.data(), n) ==
          doctest::Approx(avx2.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(kScalar.masked_max(a.data(), mask.data(), n) ==
          avx2.masked_max(a.data(), mask.data(), n));
  }
  REQUIRE(set_active("scalar"));
}
#endif

TEST_CASE("set_active rejects unknown kernel names") {
  CHECK(!set_active("neon"));
  CHECK(set_active("scalar"));
  CHECK(std::string(active().name) == "scalar");
}

TEST_CASE("masked_max ignores masked-out cells and empty masks") {
  std::vector<double> x = {5, 100, 3};
  std::vector<double> m = {1, 0, 1};
  CHECK(kScalar.masked_max(x.data(), m.data(), 3) == 5);
  std::vector<double> none = {0, 0, 0};
  CHECK(kScalar.masked_max(x.data(), none.data(), 3) == 0);
}
