#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace brwldp::simd {

// Data-parallel inner loops shared by the lattice convolutions, the exact
// event-probability dynamic programme and the histogram reductions.
//
// Every variant produces bit-identical results to the scalar reference:
// multiply-adds are fused in both, and floating sums accumulate in four
// interleaved lanes folded as (l0 + l1) + (l2 + l3) before the scalar tail.
struct KernelTable {
  std::string_view name;
  /// y[i] = fma(a, x[i], y[i]) for i < n.
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// out[0 .. na+nk-1) = a * k (full linear convolution). out must not alias.
  void (*convolve)(const double* a, std::size_t na, const double* k, std::size_t nk, double* out);
  double (*sum_f64)(const double* x, std::size_t n);
  std::uint64_t (*sum_u64)(const std::uint64_t* x, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the build or the running CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// Selected once per process: AVX2 when available, scalar otherwise. Setting
/// BRWLDP_SIMD=scalar in the environment forces the reference kernels.
const KernelTable& active();

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) { return active().sum_f64(x.data(), x.size()); }
inline std::uint64_t sum(std::span<const std::uint64_t> x) {
  return active().sum_u64(x.data(), x.size());
}

}  // namespace brwldp::simd
