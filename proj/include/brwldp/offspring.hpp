#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brwldp/rng.hpp"

namespace brwldp {

/// Offspring law {p_k} with p₀ = 0: either finitely supported or the shifted
/// geometric P(N = b + j) = (1 − q)q^j, whose generating function is finite
/// for θ < −log q.
class OffspringDistribution {
 public:
  /// pmf[k] = p_k. Validates p₀ = 0, p₁ < 1, Σ p_k = 1 (to 1e-12, then
  /// renormalised) and m > 1.
  static OffspringDistribution finite(std::vector<double> pmf);
  static OffspringDistribution geometric(double q, int b = 1);
  /// Skips the p₁ < 1 and m > 1 checks. Only for degenerate oracles such as
  /// the single-lineage walk.
  static OffspringDistribution unchecked(std::vector<double> pmf);

  /// "1:0.5,2:0.5" or "geometric:q[:b]".
  static OffspringDistribution parse(std::string_view text);
  std::string to_string() const;

  bool finite_support() const { return !geometric_; }
  double pk(int k) const;
  /// P(N ≥ k).
  double tail(int k) const;
  double mean() const { return mean_; }
  double variance() const { return var_; }
  int b() const { return b_; }
  /// Largest k with p_k > 0; nullopt for unbounded support.
  std::optional<int> B() const;
  double p1() const { return pk(1); }
  /// Schröder exponent χ = log(1/p₁)/log m; throws when p₁ = 0.
  double chi() const;
  bool schroder() const { return p1() > 0; }
  /// sup{θ : Σ p_k e^{θk} < ∞}.
  double exponential_moment_bound() const;

  /// Finite support only: p_0 .. p_B.
  const std::vector<double>& pmf() const;

  int sample(Rng& rng) const;

  /// Children of `parents` independent individuals, as counts per k (index k),
  /// drawn by sequential conditional binomials.
  void sample_counts(Rng& rng, std::uint64_t parents, std::vector<std::uint64_t>& by_k) const;

  friend bool operator==(const OffspringDistribution& a, const OffspringDistribution& b) {
    return a.geometric_ == b.geometric_ && a.q_ == b.q_ && a.b_ == b.b_ && a.pmf_ == b.pmf_;
  }

 private:
  OffspringDistribution() = default;
  void derive();

  bool geometric_ = false;
  double q_ = 0.0;
  int b_ = 1;
  std::vector<double> pmf_;
  double mean_ = 0.0;
  double var_ = 0.0;
};

}  // namespace brwldp
