#include <cmath>
#include <cstring>

#include "brwldp/simd/kernels.hpp"

namespace brwldp::simd {

namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void convolve_scalar(const double* a, std::size_t na, const double* k, std::size_t nk, double* out) {
  if (na == 0 || nk == 0) return;
  std::memset(out, 0, (na + nk - 1) * sizeof(double));
  for (std::size_t j = 0; j < nk; ++j) axpy_scalar(k[j], a, out + j, na);
}

double sum_f64_scalar(const double* x, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int l = 0; l < 4; ++l) lane[l] += x[i + l];
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

std::uint64_t sum_u64_scalar(const std::uint64_t* x, std::size_t n) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", axpy_scalar, convolve_scalar, sum_f64_scalar, sum_u64_scalar};
  return table;
}

}  // namespace brwldp::simd
