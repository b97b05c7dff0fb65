#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brwldp/brw_engine.hpp"
#include "brwldp/rate_functions.hpp"
#include "json.hpp"

namespace brwldp {

enum class Method { Naive, IsSchroder, IsBottcher };
std::string to_string(Method m);

struct EstimationResult {
  int n = 0;
  double p = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double log_estimate = 0.0;  // -inf for a zero estimate
  std::uint64_t replicas = 0;
  Method method = Method::Naive;
  double effective_sample_size = 0.0;
  std::uint64_t seed = 0;

  std::uint64_t hits = 0;
  std::uint64_t cap_exceeded = 0;
  /// One-sided 95% bound when there are no hits (rule of three), else 0.
  double zero_hit_bound = 0.0;
  /// IS only: weighted estimate of P(spine event) and its standard error.
  std::optional<double> event_mass;
  std::optional<double> event_mass_se;
  /// IS only: fraction of proposal-branch replicas that hit the target.
  std::optional<double> conditional_success;
};

/// Large-population continuation. Once a replica's population reaches
/// `saturation` individuals the remaining generations are propagated by the
/// mean flow: Z̄_n(S) is replaced by Σ_x c_x P(x + S_r ∈ S)/Σ_x c_x, exact
/// lattice convolution for lattice steps and the Gaussian approximation
/// otherwise. The neglected fluctuation is O(saturation^{-1/2}). Zero disables
/// continuation, and populations beyond the cap then count as cap-exceeded.
struct Continuation {
  double saturation = 1e7;
  double list_saturation = 262144;
};

struct EstimatorOptions {
  Continuation continuation;
  unsigned threads = 0;
  /// Probability of the proposal branch in the defensive mixture.
  double mixture = 0.9;
  /// Schröder proposal: mix spine lengths ⌈t_n/2⌉ .. 2t_n (balance heuristic)
  /// instead of using t_n alone.
  bool spread_spine = true;
};

/// Fraction of replicas with Z̄_n(√n A) ≥ p, with binomial standard error.
EstimationResult naive_estimate(const BrwConfig& cfg, int n, const TargetSet& A, double p, std::uint64_t replicas,
                                std::uint64_t seed, const EstimatorOptions& opt = {});

/// The same replicas evaluated at every p, so estimates are monotone in p.
std::vector<EstimationResult> naive_estimate_multi(const BrwConfig& cfg, int n, const TargetSet& A,
                                                   const std::vector<double>& ps, std::uint64_t replicas,
                                                   std::uint64_t seed, const EstimatorOptions& opt = {});

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

struct SpineSchedule {
  Method method = Method::IsSchroder;
  int n = 0;
  int t_n = 0;
  double x0 = 0.0;  // target position per √n

  // Schröder: spine drift a, tilt θ (signed toward x0), C_a = (I + ε)/a and
  // the target window ((1 + η)x√n, x√n] of the spine endpoint.
  double a = 0.0;
  double C_a = 0.0;
  double tilt = 0.0;
  Window target;

  // Böttcher: fat-child count d, fat-subtree depth s_n, spine window for the
  // t_n − s_n steps down to u*, and one window per fat level k = 1..s_n.
  int b = 0;
  int d = 0;
  int s_n = 0;
  Window spine;
  std::vector<Window> fat;
  /// Window nesting: above n0 every fat leaf lands in [(x0 − η)√n, (x0 + η)√n].
  std::optional<double> n0;

  double eps = 0.0;
  double eta = 0.0;

  nlohmann::json to_json() const;
};

/// Spine length ⌊C_a √n⌋ with C_a = (I_A(p) + ε)/a and the tilt solving
/// Λ′(θ) = a. ε and η default to 0.1·I_A(p) and 0.05·I_A(p).
SpineSchedule schedule_schroder(const StepDistribution& step, const TargetSet& A, double p, int n, double a,
                                std::optional<double> eta = std::nullopt, std::optional<double> eps = std::nullopt);

/// The drift minimising (log 1/p₁ + γ(a))/a, i.e. Λ′(B̄(p₁)).
double optimal_spine_drift(const OffspringDistribution& offspring, const StepDistribution& step);

/// Unbiased defensive-mixture estimator: with probability w the first t
/// generations are a single lineage with exponentially tilted steps, else the
/// process is run unmodified; weight = 1/(1 − w + Σ_t w_t R_t) with R_t the
/// likelihood ratio of the length-t spine proposal. t is t_n, or uniform over
/// ⌈t_n/2⌉ .. 2t_n when spread_spine is set.
EstimationResult is_schroder_estimate(const BrwConfig& cfg, int n, const TargetSet& A, double p,
                                      const SpineSchedule& schedule, std::uint64_t replicas, std::uint64_t seed,
                                      const EstimatorOptions& opt = {});

/// Weibull-tail steps: t_n = ⌊α log n/(2 log b) − t log log n⌋ and
/// s_n = ⌊(log log n + t_n log b)/log d⌋. Gumbel-tail steps: t_n =
/// ⌊t n^{α/(2(α+1))} − 2 log n/log b⌋ and s_n = ⌊(log n + t_n log b)/log d⌋ ∧ t_n,
/// with t = 𝒳^α/log b and 𝒳 = (|x₀| y_α(d) log b)^{1/(α+1)} when t is not
/// given. Other steps use the Weibull construction. On lattice steps every
/// window is snapped to contain a lattice point.
SpineSchedule schedule_bottcher(const OffspringDistribution& offspring, const StepDistribution& step,
                                const TargetSet& A, double p, int n, int d, std::optional<double> t = std::nullopt,
                                std::optional<double> eta = std::nullopt, std::optional<double> eps = std::nullopt);

/// A Böttcher schedule with explicit (t_n, s_n, d) and windows, validated.
SpineSchedule manual_bottcher_schedule(const OffspringDistribution& offspring, const StepDistribution& step, int n,
                                       int t_n, int s_n, int d, Window spine, std::vector<Window> fat);

/// Smallest M (a lattice point for lattice steps) with P(|X| ≤ M) ≥ 1/2.
double half_mass_bound(const StepDistribution& step);

/// log P(spine event): the tree of the schedule up to t_n and every
/// constrained step inside its window.
double spine_event_log_prob(const OffspringDistribution& offspring, const StepDistribution& step,
                            const SpineSchedule& schedule);

/// Defensive-mixture estimator whose proposal forces the schedule's tree and
/// samples the constrained steps from their windows.
EstimationResult is_bottcher_estimate(const BrwConfig& cfg, int n, const TargetSet& A, double p,
                                      const SpineSchedule& schedule, std::uint64_t replicas, std::uint64_t seed,
                                      const EstimatorOptions& opt = {});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<int> n_used;
  std::vector<int> n_excluded;  // zero estimates
};

/// Least squares of log P̂ (log(−log P̂) on the log-log scale) against
/// −speed(n); the slope estimates the rate constant.
RateFit fit_rate(const std::vector<EstimationResult>& results, const Speed& speed, bool log_log_scale = false);

/// Naive counts the replicas above mean + Δ. Tilted samples every subtree
/// under the exact exponential tilt of Y = Z_n(√n A) − (mean + Δ)Z_n(ℝ) that
/// centres Σ Y on zero and reweights by e^{K(θ) − θ Σ Y}; finite offspring
/// support only.
enum class ConcentrationMethod { Naive, Tilted };
std::string to_string(ConcentrationMethod m);

struct ConcentrationPoint {
  int size = 0;
  double mean = 0.0;  // (1/|ζ|) Σ_x ν_n(√n A − x)
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;  // replicas above the threshold (under the proposal when tilted)
  double theta = 0.0;      // tilt, 0 for the naive method
};

struct ConcentrationResult {
  double delta = 0.0;
  ConcentrationMethod method = ConcentrationMethod::Tilted;
  double slope = 0.0;  // of log P̂ against |ζ|, over sizes with ≥ 10 hits
  bool fitted = false;
  std::vector<ConcentrationPoint> points;
};

/// P(Z̄_n^ζ(√n A) > mean + Δ) for start measures of |ζ| atoms spread evenly
/// over [−√n, √n]. Lattice steps only.
ConcentrationResult concentration_check(const BrwConfig& cfg, const std::vector<int>& sizes, const TargetSet& A,
                                        double delta, int n, std::uint64_t replicas, std::uint64_t seed,
                                        ConcentrationMethod method = ConcentrationMethod::Tilted,
                                        const EstimatorOptions& opt = {});

struct TailCheck {
  int t_n = 0;
  double a = 0.0;
  int n = 0;
  std::string method;  // "exact", "convolution", "mc" or "unverifiable"
  double log_p = 0.0;
  double scaled = 0.0;  // Weibull: (t^{α−1}/n^{α/2}) log P; Gumbel: (t^α/n^{α/2}) log(−log P)
  double bound = 0.0;   // Weibull: −λa^α; Gumbel: a^α
  bool pass = false;
};

/// P(X₁ + … + X_t ≥ a√n) against the i.i.d.-sum tail bounds. t = 1 is exact,
/// t ≥ 2 uses a grid convolution (cell h) unless `mc_replicas` > 0. Weibull
/// passes when scaled ≤ bound + tol·|bound|, Gumbel when scaled ≥ bound − tol·bound.
TailCheck iid_sum_tail_check(const StepDistribution& step, int t_n, double a, int n, double tol = 0.05,
                             std::uint64_t mc_replicas = 0, std::uint64_t seed = 1, double h = 0.01);

/// Results table row and header.
std::string results_csv_header();
std::string results_csv_row(const EstimationResult& r);
nlohmann::json to_json(const EstimationResult& r);

}  // namespace brwldp
