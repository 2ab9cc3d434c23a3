#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ddr/rng.hpp"

using namespace ddr;

TEST_CASE("splitmix64 matches the reference generator") {
  // First two outputs of the reference SplitMix64 seeded with 0.
  const std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;
  CHECK(splitmix64(gamma) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(2 * gamma) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("hash_tag is 64-bit FNV-1a") {
  CHECK(hash_tag("") == 0xCBF29CE484222325ULL);
  CHECK(hash_tag("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(hash_tag("foobar") == 0x85944171F73967E8ULL);
}

TEST_CASE("streams replay and differ") {
  Rng a(RngSeed{42, 3}), b(RngSeed{42, 3}), c(RngSeed{42, 4}), d(RngSeed{43, 3});
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  CHECK(Rng(5, 6).next_u64() == Rng(RngSeed{5, 6}).next_u64());
}

TEST_CASE("uniform draws respect their bounds") {
  Rng r(RngSeed{1, 1});
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = r.uniform(0.25, 0.5);
    CHECK(v >= 0.25);
    CHECK(v <= 0.5);
    const auto k = r.uniform_int(-3, 3);
    CHECK(k >= -3);
    CHECK(k <= 3);
  }
  CHECK(r.uniform(0.7, 0.7) == 0.7);
  CHECK(r.uniform_int(9, 9) == 9);
}

TEST_CASE("uniform_int is close to uniform") {
  Rng r(RngSeed{7, 0});
  std::vector<int> bins(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++bins[static_cast<std::size_t>(r.uniform_int(0, 9))];
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
  // 99.9th percentile of chi-squared with 9 degrees of freedom.
  CHECK(chi2 < 27.88);
}

TEST_CASE("uniform01 mean and variance") {
  Rng r(RngSeed{11, 0});
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    s += u;
    s2 += u * u;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("fork and child_seed do not advance the parent") {
  Rng a(RngSeed{9, 9});
  Rng b(RngSeed{9, 9});
  (void)a.fork("x");
  (void)a.child_seed(3);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.fork("x").next_u64() == b.fork("x").next_u64());
  CHECK(a.fork("x").next_u64() != a.fork("y").next_u64());
  CHECK(a.child_seed(1) == b.child_seed(1));
  CHECK(a.child_seed(1) != a.child_seed(2));
}

TEST_CASE("shuffle is a permutation") {
  Rng r(RngSeed{3, 3});
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  r.shuffle(v);
  CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
  bool moved = false;
  for (int i = 0; i < 50; ++i) moved = moved || v[static_cast<std::size_t>(i)] != i;
  CHECK(moved);
}
