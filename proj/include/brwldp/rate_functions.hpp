#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "brwldp/extended_real.hpp"
#include "brwldp/gaussian_geometry.hpp"
#include "brwldp/offspring.hpp"
#include "brwldp/step_distribution.hpp"
#include "brwldp/target_set.hpp"
#include "json.hpp"

namespace brwldp {

/// p ≤ ν(A), p ≥ 1, or another violated theorem hypothesis.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The configuration satisfies no theorem's hypotheses.
class UncoveredRegime : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Λ(t) = log E e^{tX}.
ExtendedReal log_mgf(const StepDistribution& step, double t);

/// Λ⁻¹(s) = inf{t > 0 : Λ(t) ≥ s}, inf ∅ = sup{t > 0 : Λ(t) < ∞}.
ExtendedReal lambda_inverse(const StepDistribution& step, double s);

/// γ(a) = sup_t {at − Λ(t)}, even in a.
ExtendedReal cramer_rate(const StepDistribution& step, double a);

/// θ with Λ′(θ) = a, for 0 ≤ a < ess sup X.
double tilt_for_drift(const StepDistribution& step, double a);

struct BarLambda {
  double value = 0.0;        // Λ⁻¹(log 1/p₁)
  double variational = 0.0;  // inf_{a>0} (log 1/p₁ + γ(a))/a
  double residual = 0.0;
  double optimal_drift = 0.0;  // minimising a, equal to Λ′(value)
};

/// B̄(p₁) by both routes; throws std::logic_error when they disagree by more
/// than 1e-7.
BarLambda bar_lambda(const StepDistribution& step, double p1);

struct FMapValue {
  double value = 0.0;  // α inf_u (log 1/p₁ + γ(u) − uL) + L
  double dual = 0.0;   // α (log 1/p₁ − Λ(L)) + L
};

/// F(L) for 0 < L ≤ B̄(p₁); throws std::logic_error if the two forms differ
/// by more than 1e-8.
FMapValue f_map(const StepDistribution& step, double p1, double alpha_iter, double L);

/// 0.5 / Λ′(B̄(p₁)).
double default_alpha_iter(const StepDistribution& step, double p1);

struct FixedPointResult {
  double limit = 0.0;
  std::vector<double> trace;  // L₀, L₁, …
};

/// Iterates L ↦ α(log 1/p₁ − Λ(L)) + L from L₀ ∈ (0, B̄). Requires
/// α Λ′(B̄) ≤ 1. Throws std::runtime_error on a decreasing step or when
/// max_iter is exhausted.
FixedPointResult iterate_fixed_point(const StepDistribution& step, double p1, double alpha_iter, double L0,
                                     double tol = 1e-10, int max_iter = 10000);

/// χ = log(1/p₁)/log m.
double schroder_exponent(const OffspringDistribution& offspring);

enum class Regime {
  SchroderCramerFiniteI,
  SchroderInfiniteI,
  BottcherWeibullSub,
  BottcherWeibullSuper,
  BottcherWeibullRegular,
  BottcherGumbel,
  BottcherBounded,
  BottcherInfiniteI,
};
std::string to_string(Regime r);

/// n^num_exp / (log n)^log_exp. For the double-exponential regimes this is
/// the inner speed of log(−log P).
struct Speed {
  enum class Kind { Poly, DoubleExp };
  Kind kind = Kind::Poly;
  double num_exp = 0.5;
  double log_exp = 0.0;

  double operator()(double n) const;
  nlohmann::json to_json() const;
};

struct RateReport {
  Regime regime = Regime::SchroderCramerFiniteI;
  Speed speed;
  double constant = 0.0;
  /// BottcherWeibullRegular only: [c_α, C_α]; c_α is unquantified for α > 1.
  std::optional<double> lower;
  std::optional<double> upper;
  bool log_log_scale = false;
  /// Schröder step without Cramér (Weibull α < 1): rate taken from the remark
  /// after the Schröder theorem, not from a theorem.
  bool remark_based = false;
  /// I_A (resp. J_A) numerically continuous at p.
  bool continuity_ok = true;

  double nu_A = 0.0;
  double p = 0.0;
  ExtendedReal i_rate;
  double j_rate = 0.0;
  double witness_x = 0.0;
  std::optional<double> chi;
  std::optional<double> bar_lambda;
  std::optional<double> y_alpha;
  std::optional<double> upsilon;

  nlohmann::json to_json() const;
};

RateReport classify_and_predict(const OffspringDistribution& offspring, const StepDistribution& step,
                                const TargetSet& A, double p);

}  // namespace brwldp
