#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brwldp/extended_real.hpp"
#include "brwldp/rng.hpp"

namespace brwldp {

enum class StepKind { Rademacher, BoundedUniform, Weibull, Gumbel, Gaussian };

/// Step law supported on spacing·{offsets}.
struct Lattice {
  double spacing = 1.0;
  std::vector<int> offsets;  // increasing
  std::vector<double> probs;
};

/// Symmetric, unit-variance displacement law.
///
/// Standardisation per kind:
///   Rademacher      ±1, already unit variance.
///   Gaussian        N(0, 1).
///   BoundedUniform  ess sup L ≥ 1. For L ≤ √3 a mixture of Uniform[−L, L]
///                   with atoms q at ±L, q = (3/L² − 1)/4; for L > √3 the
///                   uniform is mixed with an atom r = 1 − 3/L² at 0. L = 1
///                   is Rademacher.
///   Weibull(λ, α)   P(|X| > z) = min(1, C e^{−λ z^α}).
///   Gumbel(α)       P(|X| > z) = min(1, C e^{−e^{z^α}}).
/// For the last two the prefactor C is solved so that E X² = 1. Rescaling X
/// would instead change λ (and, for Gumbel, the tail shape) and with it the
/// predicted rate, while C is a Θ(1) factor that the rates ignore.
class StepDistribution {
 public:
  static StepDistribution rademacher();
  static StepDistribution gaussian();
  static StepDistribution bounded_uniform(double L);
  static StepDistribution weibull(double lambda, double alpha);
  static StepDistribution gumbel(double alpha);

  /// "rademacher" | "gaussian" | "uniform:L" | "weibull:lambda:alpha" | "gumbel:alpha".
  static StepDistribution parse(std::string_view text);
  std::string to_string() const;

  StepKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  /// Essential supremum (+inf for unbounded kinds).
  double ess_sup() const;
  double tail_prefactor() const { return c_; }

  /// E[e^{κX}] < ∞ for some κ > 0.
  bool has_cramer() const;
  /// sup{t ≥ 0 : Λ(t) < ∞}; may itself be a finite point where Λ is finite.
  double mgf_domain() const;
  bool mgf_finite_at(double t) const;

  ExtendedReal log_mgf(double t) const;
  /// Λ′(t). Closed form for Rademacher and Gaussian, otherwise a central
  /// difference with h = 1e-5·max(1, |t|).
  double log_mgf_derivative(double t) const;

  /// P(|X| > z) and P(|X| ≥ z) for z ≥ 0.
  double abs_tail(double z) const;
  double abs_tail_closed(double z) const;
  /// log P(X > x), accurate deep in the tail.
  double log_sf(double x) const;
  double cdf(double x) const;
  /// P(lo ≤ X ≤ hi).
  double window_prob(double lo, double hi) const;
  /// P(X = x) (nonzero only at atoms).
  double atom(double x) const;

  double sample(Rng& rng) const;
  /// X conditioned on X ∈ [lo, hi]; the window must have positive mass.
  double sample_window(Rng& rng, double lo, double hi) const;

  std::optional<Lattice> lattice() const;

  /// E X², by quadrature of the tail for the continuous kinds. Used to check
  /// the standardisation.
  double second_moment() const;

  friend bool operator==(const StepDistribution& a, const StepDistribution& b) {
    return a.kind_ == b.kind_ && a.lambda_ == b.lambda_ && a.alpha_ == b.alpha_ && a.L_ == b.L_;
  }

 private:
  StepDistribution(StepKind k, double lambda, double alpha, double L);
  /// inf{z ≥ 0 : P(|X| > z) ≤ v}.
  double abs_quantile(double v) const;
  double log_mgf_quadrature(double t) const;
  /// E|X|^k for the tail-defined kinds.
  double abs_moment(int k) const;
  void init_series();

  StepKind kind_;
  double lambda_ = 0.0;
  double alpha_ = 0.0;
  double L_ = 0.0;
  double c_ = 1.0;      // tail prefactor (Weibull, Gumbel)
  double atom_ = 0.0;   // BoundedUniform: mass of each ±L atom, or of the 0 atom
  // Even moments E X⁴, E X⁶, E X⁸ and the |t| below which Λ uses its series.
  double m4_ = 0.0, m6_ = 0.0, m8_ = 0.0;
  double series_below_ = 0.0;
};

}  // namespace brwldp
