// Compiled with -mavx2 -mfma. Nothing in this file may run before
// avx2_kernels() has confirmed CPU support.
#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "brwldp/simd/kernels.hpp"

namespace brwldp::simd::avx2 {

namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void convolve(const double* a, std::size_t na, const double* k, std::size_t nk, double* out) {
  if (na == 0 || nk == 0) return;
  std::memset(out, 0, (na + nk - 1) * sizeof(double));
  for (std::size_t j = 0; j < nk; ++j) axpy(k[j], a, out + j, na);
}

double sum_f64(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

std::uint64_t sum_u64(const std::uint64_t* x, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_epi64(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i)));
  alignas(32) std::uint64_t lane[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lane), acc);
  std::uint64_t s = lane[0] + lane[1] + lane[2] + lane[3];
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", axpy, convolve, sum_f64, sum_u64};
  return t;
}

}  // namespace brwldp::simd::avx2
