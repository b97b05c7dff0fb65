#include <cmath>
#include <cstring>
#include <set>
#include <vector>

#include "brwldp/rng.hpp"
#include "brwldp/simd/kernels.hpp"
#include "doctest.h"

using namespace brwldp;

namespace {
std::vector<double> random_doubles(std::size_t n, std::uint64_t stream) {
  Philox4x32 g(99, stream);
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform() * 2 - 1;
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}
}  // namespace

TEST_CASE("philox known-answer vectors") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::rounds10(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::rounds10(B{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}) == B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::rounds10(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams") {
  Philox4x32 a(7, 0), b(7, 0), c(7, 1);
  std::set<std::uint64_t> seen;
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs |= x != c();
    seen.insert(x);
  }
  CHECK(differs);
  CHECK(seen.size() == 1000u);

  Philox4x32 u(1, 2);
  double mean = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    mean += x / 100000;
  }
  CHECK(std::abs(mean - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("scalar kernels") {
  const auto& k = simd::scalar_kernels();
  std::vector<double> y{1, 2, 3};
  const std::vector<double> x{1, 1, 1};
  k.axpy(2, x.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 4, 5});
  const std::vector<double> a{1, 2}, ker{1, 0, -1};
  std::vector<double> out(4);
  k.convolve(a.data(), 2, ker.data(), 3, out.data());
  CHECK(out == std::vector<double>{1, 2, -1, -2});
  const std::vector<double> s{1, 2, 3, 4, 5, 6, 7};
  CHECK(k.sum_f64(s.data(), s.size()) == 28);
  const std::vector<std::uint64_t> u{1, 2, 3, 4, 5};
  CHECK(k.sum_u64(u.data(), u.size()) == 15u);
  CHECK(k.sum_f64(s.data(), 0) == 0);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  const auto* v = simd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 unavailable, skipping");
    return;
  }
  const auto& s = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u}) {
    const auto x = random_doubles(n, n);
    const auto y0 = random_doubles(n, n + 1000);
    auto ys = y0, yv = y0;
    s.axpy(0.37, x.data(), ys.data(), n);
    v->axpy(0.37, x.data(), yv.data(), n);
    CHECK(bit_equal(ys, yv));

    const double fs = s.sum_f64(x.data(), n), fv = v->sum_f64(x.data(), n);
    CHECK(std::memcmp(&fs, &fv, sizeof fs) == 0);

    std::vector<std::uint64_t> u(n);
    Philox4x32 g(5, n);
    for (auto& e : u) e = g() >> 8;
    CHECK(s.sum_u64(u.data(), n) == v->sum_u64(u.data(), n));

    for (std::size_t nk : {1u, 2u, 3u, 9u}) {
      if (n == 0) continue;
      const auto ker = random_doubles(nk, 7 * nk);
      std::vector<double> cs(n + nk - 1), cv(n + nk - 1);
      s.convolve(x.data(), n, ker.data(), nk, cs.data());
      v->convolve(x.data(), n, ker.data(), nk, cv.data());
      CHECK(bit_equal(cs, cv));
    }
  }
}

TEST_CASE("active kernel table") {
  const auto& a = simd::active();
  CHECK((a.name == simd::scalar_kernels().name || (simd::avx2_kernels() && a.name == simd::avx2_kernels()->name)));
}
