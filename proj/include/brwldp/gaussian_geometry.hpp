#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "brwldp/extended_real.hpp"
#include "brwldp/step_distribution.hpp"
#include "brwldp/target_set.hpp"

namespace brwldp {

/// ν(A) for the standard Gaussian ν. Open/closed flags carry no mass.
double gaussian_measure(const TargetSet& A);

/// ν(aA + b), a > 0.
double measure_affine(const TargetSet& A, double a, double b);

/// sup_x ν((A − x)/s) and a maximiser, by a 0.01·min(1, s) scan over
/// x ∈ [−(max|endpoint| + 8), max|endpoint| + 8] refined by golden section.
struct ShiftSup {
  double x;
  double value;
};
ShiftSup sup_shift_measure(const TargetSet& A, double s = 1.0);

struct IRate {
  ExtendedReal rate;
  double witness_x = 0.0;  // |witness_x| = rate, ν(A − witness_x) ≥ p
};

struct JRate {
  double rate = 0.0;       // in [0, 1)
  double witness_x = 0.0;  // ν((A − witness_x)/√(1 − rate)) ≥ p
};

/// I_A(p) = inf{|x| : ν(A − x) ≥ p} as min(x₊(p), x₋(p)).
/// Requires ν(A) ≤ p < 1; returns 0 at p = ν(A) (the rate is only used for
/// p > ν(A)).
IRate i_rate(const TargetSet& A, double p);

/// J_A(p) = inf{y ∈ [0,1) : sup_x ν((A − x)/√(1 − y)) ≥ p}. Same domain as
/// i_rate. Zero when I_A(p) is finite.
JRate j_rate(const TargetSet& A, double p);

struct GaussianRates {
  ExtendedReal i_rate;
  double j_rate = 0.0;
  double witness_x = 0.0;  // i-rate witness if finite, else the j-rate shift
  double witness_y = 0.0;
};
GaussianRates gaussian_rates(const TargetSet& A, double p);

struct SetCalculus {
  /// A⁻_ε = {x ∈ A : B(x, ε) ⊂ A}; nullopt when empty.
  std::optional<TargetSet> interior;
  /// A⁺_ε = {x : dist(x, A) ≤ ε}.
  TargetSet neighbourhood;
  /// (∂A)⁺_ε; nullopt when A has no finite endpoint (A = ℝ).
  std::optional<TargetSet> boundary_nbhd;
};
SetCalculus set_calculus(const TargetSet& A, double eps);

/// Pmf on the lattice spacing·(origin + i), i = 0 .. mass.size() − 1.
struct LatticePmf {
  double spacing = 1.0;
  std::int64_t origin = 0;
  std::vector<double> mass;

  double position(std::size_t i) const { return spacing * static_cast<double>(origin + static_cast<std::int64_t>(i)); }
  /// Σ mass over positions in A.
  double measure(const TargetSet& A) const;
  double total() const;
};

/// Law of X₁ + … + X_n for a lattice step, by repeated convolution.
LatticePmf convolve_n(const StepDistribution& step, int n);

/// max over (a, b) ∈ a_grid × b_grid of |ν_n(√n(aA + b)) − ν(aA + b)|.
double uniform_clt_gap(const StepDistribution& step, int n, const TargetSet& A,
                       const std::vector<double>& a_grid, const std::vector<double>& b_grid);

}  // namespace brwldp
