#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "brwldp/offspring.hpp"
#include "brwldp/rng.hpp"
#include "brwldp/step_distribution.hpp"
#include "brwldp/target_set.hpp"

namespace brwldp {

/// The total population would exceed BrwConfig::population_cap.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(int generation, double total)
      : std::runtime_error("population cap exceeded at generation " + std::to_string(generation) + " (total " +
                           std::to_string(total) + ")"),
        generation_(generation) {}
  int generation() const { return generation_; }

 private:
  int generation_;
};

/// A dynamic programme or exact law would need more states than allowed.
class StateSpaceExplosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BrwConfig {
  OffspringDistribution offspring;
  StepDistribution step;
  double population_cap = 1e8;
  std::uint64_t seed = 0;
};

/// One generation of a BRW. Lattice mode keeps counts per lattice site
/// spacing·(origin + i); list mode keeps the sorted positions.
class Population {
 public:
  enum class Mode { Lattice, List };

  /// One individual at x₀ (list mode).
  static Population root(double x0 = 0.0);
  /// One individual at lattice site `index`.
  static Population lattice_root(double spacing, std::int64_t index = 0);
  /// Lattice population with counts[i] individuals at spacing·(origin + i).
  static Population lattice(double spacing, std::int64_t origin, std::vector<std::uint64_t> counts, int generation = 0);
  /// List population; positions need not be sorted.
  static Population list(std::vector<double> positions, int generation = 0);

  Mode mode() const { return mode_; }
  int generation() const { return generation_; }
  std::uint64_t total() const { return total_; }

  double spacing() const { return spacing_; }
  std::int64_t origin() const { return origin_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const std::vector<double>& positions() const { return positions_; }

  /// Calls f(position, count) for every occupied site / distinct position in
  /// increasing order.
  void for_each(const std::function<void(double, std::uint64_t)>& f) const;
  /// Number of individuals in A.
  std::uint64_t count_in(const TargetSet& A) const;
  /// Lattice form of a list population (positions must be on spacing·ℤ).
  Population to_lattice(double spacing) const;

  friend bool operator==(const Population&, const Population&) = default;

 private:
  friend Population advance(const Population&, const BrwConfig&, Rng&);
  Mode mode_ = Mode::List;
  int generation_ = 0;
  std::uint64_t total_ = 0;
  double spacing_ = 1.0;
  std::int64_t origin_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<double> positions_;
};

/// One generation: every individual has an independent number of children,
/// each displaced by an independent step. On lattice steps both modes use
/// per-site multinomial splitting in increasing site order, so they consume
/// the stream identically and agree exactly.
Population advance(const Population& pop, const BrwConfig& cfg, Rng& rng);

/// n generations from a single root at 0, lattice mode when the step allows.
Population simulate(const BrwConfig& cfg, int n, Rng& rng);

/// Z_n(scale·A)/Z_n(ℝ).
double empirical_measure(const Population& pop, const TargetSet& A, double scale);

/// W_n = Z_n(ℝ)/mⁿ.
double martingale_w(const Population& pop, double m);

/// Exact pmf of |Z_n| (index k), by iterating pmf_n = Σ_k p_k pmf_{n−1}^{*k}.
std::vector<double> population_law_exact(const OffspringDistribution& offspring, int n,
                                         std::size_t max_states = 1000000);

struct GwMoments {
  double mean;
  double variance;
};
/// E|Z_n| = mⁿ and Var|Z_n| = σ² m^{n−1}(mⁿ − 1)/(m − 1).
GwMoments galton_watson_moments(const OffspringDistribution& offspring, int n);

/// P(|Z_n| = k) ≤ C min(1/k, k^{χ−1} p₁ⁿ) with C fitted at n = 1.
struct PopulationBoundCheck {
  double C = 0.0;
  double worst_ratio = 0.0;  // max over (k, n) of pmf / (C·bound)
  int worst_n = 0;
  std::size_t worst_k = 0;
  bool holds = false;
};
PopulationBoundCheck population_bound_check(const OffspringDistribution& offspring, int n_max);

/// Exact P(Z̄_n(√n A) ≥ p) by a dynamic programme over the joint law of
/// (subtree size, subtree count in √n A) for every subtree root position.
/// Throws StateSpaceExplosion past max_states entries or 400·max_states
/// multiply-adds of convolution work.
double exact_event_prob(const OffspringDistribution& offspring, const StepDistribution& step, int n,
                        const TargetSet& A, double p, std::size_t max_states = 50000000);

/// CSV rows "generation,position,count".
void write_snapshot_csv(std::ostream& os, const Population& pop, bool header = true);

}  // namespace brwldp
