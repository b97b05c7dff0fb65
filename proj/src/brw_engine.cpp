#include "brwldp/brw_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <random>

#include "brwldp/simd/kernels.hpp"

namespace brwldp {

namespace {

std::uint64_t draw_binomial(Rng& rng, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  if (trials == 1) return rng.uniform() < p ? 1 : 0;
  std::binomial_distribution<std::uint64_t> bin(trials, p);
  return bin(rng);
}

// Children of `count` co-located individuals, split over the lattice offsets.
// emit(j, c) receives c children displaced by offsets[j]; returns the number
// of children.
template <class Emit>
std::uint64_t spawn_site(std::uint64_t count, const OffspringDistribution& off, const Lattice& lat, Rng& rng,
                         std::vector<std::uint64_t>& by_k, Emit emit) {
  off.sample_counts(rng, count, by_k);
  std::uint64_t children = 0;
  for (std::size_t k = 0; k < by_k.size(); ++k) children += static_cast<std::uint64_t>(k) * by_k[k];
  std::uint64_t remaining = children;
  double rest = 1.0;
  for (std::size_t j = 0; j < lat.offsets.size() && remaining > 0; ++j) {
    const bool last = j + 1 == lat.offsets.size();
    const std::uint64_t got = last ? remaining : draw_binomial(rng, remaining, lat.probs[j] / rest);
    if (got) emit(j, got);
    remaining -= got;
    rest -= lat.probs[j];
  }
  return children;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Joint law of (N, N_in): rows[N][j] = P(N total, j inside).
struct Joint {
  std::vector<std::vector<double>> rows;

  std::size_t entries() const {
    std::size_t s = 0;
    for (const auto& r : rows) s += r.size();
    return s;
  }
  void add_scaled(const Joint& o, double w) {
    if (rows.size() < o.rows.size()) rows.resize(o.rows.size());
    for (std::size_t N = 0; N < o.rows.size(); ++N) {
      if (o.rows[N].empty()) continue;
      if (rows[N].empty()) rows[N].assign(N + 1, 0.0);
      simd::axpy(w, o.rows[N], rows[N]);
    }
  }
};

Joint convolve(const Joint& a, const Joint& b) {
  Joint out;
  out.rows.resize(a.rows.size() + b.rows.size() - 1);
  const auto& k = simd::active();
  for (std::size_t Na = 0; Na < a.rows.size(); ++Na) {
    if (a.rows[Na].empty()) continue;
    for (std::size_t Nb = 0; Nb < b.rows.size(); ++Nb) {
      if (b.rows[Nb].empty()) continue;
      auto& dst = out.rows[Na + Nb];
      if (dst.empty()) dst.assign(Na + Nb + 1, 0.0);
      const auto& ra = a.rows[Na];
      const auto& rb = b.rows[Nb];
      for (std::size_t i = 0; i < ra.size(); ++i)
        if (ra[i] != 0.0) k.axpy(ra[i], rb.data(), dst.data() + i, rb.size());
    }
  }
  return out;
}

}  // namespace

Population Population::root(double x0) { return list({x0}, 0); }

Population Population::lattice_root(double spacing, std::int64_t index) { return lattice(spacing, index, {1}, 0); }

Population Population::lattice(double spacing, std::int64_t origin, std::vector<std::uint64_t> counts, int generation) {
  Population p;
  p.mode_ = Mode::Lattice;
  p.generation_ = generation;
  p.spacing_ = spacing;
  std::size_t lo = 0, hi = counts.size();
  while (lo < hi && counts[lo] == 0) ++lo;
  while (hi > lo && counts[hi - 1] == 0) --hi;
  p.origin_ = origin + static_cast<std::int64_t>(lo);
  p.counts_.assign(counts.begin() + lo, counts.begin() + hi);
  p.total_ = simd::sum(std::span<const std::uint64_t>(p.counts_));
  return p;
}

Population Population::list(std::vector<double> positions, int generation) {
  Population p;
  p.mode_ = Mode::List;
  p.generation_ = generation;
  std::sort(positions.begin(), positions.end());
  p.positions_ = std::move(positions);
  p.total_ = p.positions_.size();
  return p;
}

void Population::for_each(const std::function<void(double, std::uint64_t)>& f) const {
  if (mode_ == Mode::Lattice) {
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (counts_[i]) f(spacing_ * static_cast<double>(origin_ + static_cast<std::int64_t>(i)), counts_[i]);
    return;
  }
  for (std::size_t i = 0; i < positions_.size();) {
    std::size_t j = i;
    while (j < positions_.size() && positions_[j] == positions_[i]) ++j;
    f(positions_[i], j - i);
    i = j;
  }
}

std::uint64_t Population::count_in(const TargetSet& A) const {
  std::uint64_t c = 0;
  if (mode_ == Mode::Lattice) {
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (counts_[i] && A.contains(spacing_ * static_cast<double>(origin_ + static_cast<std::int64_t>(i))))
        c += counts_[i];
    return c;
  }
  for (const auto& iv : A.intervals()) {
    const auto b = iv.lo_closed ? std::lower_bound(positions_.begin(), positions_.end(), iv.lo)
                                : std::upper_bound(positions_.begin(), positions_.end(), iv.lo);
    const auto e = iv.hi_closed ? std::upper_bound(positions_.begin(), positions_.end(), iv.hi)
                                : std::lower_bound(positions_.begin(), positions_.end(), iv.hi);
    if (e > b) c += static_cast<std::uint64_t>(e - b);
  }
  return c;
}

Population Population::to_lattice(double spacing) const {
  if (mode_ == Mode::Lattice) return *this;
  if (positions_.empty()) return lattice(spacing, 0, {}, generation_);
  const auto lo = std::llround(positions_.front() / spacing);
  const auto hi = std::llround(positions_.back() / spacing);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(hi - lo + 1), 0);
  for (double x : positions_) ++counts[static_cast<std::size_t>(std::llround(x / spacing) - lo)];
  return lattice(spacing, lo, std::move(counts), generation_);
}

Population advance(const Population& pop, const BrwConfig& cfg, Rng& rng) {
  const auto lat = cfg.step.lattice();
  const int gen = pop.generation() + 1;
  std::vector<std::uint64_t> by_k;
  double total = 0.0;
  auto check_cap = [&](double add) {
    total += add;
    if (total > cfg.population_cap) throw CapExceeded(gen, total);
  };

  if (lat) {
    const int lo = lat->offsets.front();
    const int width = lat->offsets.back() - lo;
    if (pop.mode() == Population::Mode::Lattice) {
      if (pop.spacing() != lat->spacing) throw std::invalid_argument("advance: lattice spacing mismatch");
      std::vector<std::uint64_t> next(pop.counts().size() + static_cast<std::size_t>(width), 0);
      for (std::size_t i = 0; i < pop.counts().size(); ++i) {
        if (!pop.counts()[i]) continue;
        const auto kids = spawn_site(pop.counts()[i], cfg.offspring, *lat, rng, by_k, [&](std::size_t j, std::uint64_t c) {
          next[i + static_cast<std::size_t>(lat->offsets[j] - lo)] += c;
        });
        check_cap(static_cast<double>(kids));
      }
      return Population::lattice(lat->spacing, pop.origin() + lo, std::move(next), gen);
    }
    std::vector<double> out;
    pop.for_each([&](double x, std::uint64_t count) {
      const auto kids = spawn_site(count, cfg.offspring, *lat, rng, by_k, [&](std::size_t j, std::uint64_t c) {
        out.insert(out.end(), c, x + lat->spacing * lat->offsets[j]);
      });
      check_cap(static_cast<double>(kids));
    });
    return Population::list(std::move(out), gen);
  }

  if (pop.mode() == Population::Mode::Lattice)
    throw std::invalid_argument("advance: lattice population with a non-lattice step");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(pop.total() * cfg.offspring.mean() * 1.1) + 4);
  for (double x : pop.positions()) {
    const int k = cfg.offspring.sample(rng);
    check_cap(k);
    for (int c = 0; c < k; ++c) out.push_back(x + cfg.step.sample(rng));
  }
  return Population::list(std::move(out), gen);
}

Population simulate(const BrwConfig& cfg, int n, Rng& rng) {
  const auto lat = cfg.step.lattice();
  Population pop = lat ? Population::lattice_root(lat->spacing) : Population::root(0.0);
  for (int g = 0; g < n; ++g) pop = advance(pop, cfg, rng);
  return pop;
}

double empirical_measure(const Population& pop, const TargetSet& A, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("empirical_measure: scale must be positive");
  if (pop.total() == 0) throw std::invalid_argument("empirical_measure: empty population");
  return static_cast<double>(pop.count_in(A.affine(scale, 0.0))) / static_cast<double>(pop.total());
}

double martingale_w(const Population& pop, double m) {
  return static_cast<double>(pop.total()) / std::pow(m, pop.generation());
}

std::vector<double> population_law_exact(const OffspringDistribution& offspring, int n, std::size_t max_states) {
  if (n < 0) throw std::invalid_argument("population_law_exact: n must be nonnegative");
  if (!offspring.finite_support()) throw std::invalid_argument("population_law_exact: needs finite support");
  const auto& p = offspring.pmf();
  const double B = static_cast<double>(p.size() - 1);
  if (std::pow(B, n) + 1 > static_cast<double>(max_states))
    throw StateSpaceExplosion("population_law_exact: support " + fmt(std::pow(B, n)) + " exceeds " +
                              std::to_string(max_states));
  std::vector<double> law{0.0, 1.0};
  const auto& kern = simd::active();
  for (int g = 0; g < n; ++g) {
    std::vector<double> next((law.size() - 1) * (p.size() - 1) + 1, 0.0);
    std::vector<double> power = law;
    std::vector<double> tmp;
    for (std::size_t k = 1; k < p.size(); ++k) {
      if (k > 1) {
        tmp.resize(power.size() + law.size() - 1);
        kern.convolve(power.data(), power.size(), law.data(), law.size(), tmp.data());
        power.swap(tmp);
      }
      if (p[k] != 0.0) kern.axpy(p[k], power.data(), next.data(), power.size());
    }
    law.swap(next);
  }
  return law;
}

GwMoments galton_watson_moments(const OffspringDistribution& offspring, int n) {
  const double m = offspring.mean();
  const double s2 = offspring.variance();
  const double mn = std::pow(m, n);
  return {mn, n == 0 ? 0.0 : s2 * std::pow(m, n - 1) * (mn - 1.0) / (m - 1.0)};
}

PopulationBoundCheck population_bound_check(const OffspringDistribution& offspring, int n_max) {
  const double p1 = offspring.p1();
  const double chi = offspring.chi();
  auto bound = [&](double k, int n) { return std::min(1.0 / k, std::pow(k, chi - 1.0) * std::pow(p1, n)); };
  PopulationBoundCheck out;
  const auto law1 = population_law_exact(offspring, 1);
  for (std::size_t k = 1; k < law1.size(); ++k) out.C = std::max(out.C, law1[k] / bound(static_cast<double>(k), 1));
  for (int n = 1; n <= n_max; ++n) {
    const auto law = population_law_exact(offspring, n);
    for (std::size_t k = 1; k < law.size(); ++k) {
      if (law[k] == 0.0) continue;
      const double r = law[k] / (out.C * bound(static_cast<double>(k), n));
      if (r > out.worst_ratio) {
        out.worst_ratio = r;
        out.worst_n = n;
        out.worst_k = k;
      }
    }
  }
  out.holds = out.worst_ratio <= 1.0 + 1e-12;
  return out;
}

double exact_event_prob(const OffspringDistribution& offspring, const StepDistribution& step, int n,
                        const TargetSet& A, double p, std::size_t max_states) {
  if (n < 0) throw std::invalid_argument("exact_event_prob: n must be nonnegative");
  if (n == 0) return 1.0 >= p ? 1.0 : 0.0;  // the root sits at 0 ∈ 0·A
  if (!offspring.finite_support()) throw std::invalid_argument("exact_event_prob: needs finite-support offspring");
  const auto lat = step.lattice();
  if (!lat) throw std::invalid_argument("exact_event_prob: needs a lattice step");
  const auto& pk = offspring.pmf();
  const TargetSet S = A.affine(std::sqrt(static_cast<double>(n)), 0.0);
  int w = 0;
  for (int o : lat->offsets) w = std::max(w, std::abs(o));

  // layer[x + R] = law for a subtree rooted at site x with r generations left, |x| ≤ R = (n − r)·w.
  std::vector<Joint> layer;
  {
    const int R = n * w;
    layer.resize(2 * R + 1);
    for (int x = -R; x <= R; ++x) {
      Joint j;
      j.rows.resize(2);
      j.rows[1] = S.contains(lat->spacing * x) ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
      layer[x + R] = std::move(j);
    }
  }
  // Convolution work is quadratic in the state count; bound it as well.
  const double max_work = 400.0 * static_cast<double>(max_states);
  double work = 0.0;
  for (int r = 1; r <= n; ++r) {
    const int Rprev = (n - r + 1) * w;
    const int R = (n - r) * w;
    std::vector<Joint> next(2 * R + 1);
    std::size_t states = 0;
    for (int x = -R; x <= R; ++x) {
      Joint g;
      for (std::size_t j = 0; j < lat->offsets.size(); ++j) g.add_scaled(layer[x + lat->offsets[j] + Rprev], lat->probs[j]);
      Joint f;
      Joint power = g;
      for (std::size_t k = 1; k < pk.size(); ++k) {
        if (k > 1) {
          work += static_cast<double>(power.entries()) * static_cast<double>(g.entries());
          if (work > max_work)
            throw StateSpaceExplosion("exact_event_prob: convolution work exceeds budget at depth " +
                                      std::to_string(r));
          power = convolve(power, g);
        }
        if (pk[k] != 0.0) f.add_scaled(power, pk[k]);
        if (power.entries() > max_states)
          throw StateSpaceExplosion("exact_event_prob: " + std::to_string(power.entries()) + " states at depth " +
                                    std::to_string(r));
      }
      states += f.entries();
      next[x + R] = std::move(f);
    }
    if (states > max_states)
      throw StateSpaceExplosion("exact_event_prob: " + std::to_string(states) + " states at depth " + std::to_string(r));
    layer.swap(next);
  }
  const Joint& root = layer[0];
  double prob = 0.0;
  for (std::size_t N = 1; N < root.rows.size(); ++N)
    for (std::size_t j = 0; j < root.rows[N].size(); ++j)
      if (static_cast<double>(j) / static_cast<double>(N) >= p) prob += root.rows[N][j];
  return std::min(prob, 1.0);
}

void write_snapshot_csv(std::ostream& os, const Population& pop, bool header) {
  if (header) os << "generation,position,count\n";
  pop.for_each([&](double x, std::uint64_t c) { os << pop.generation() << ',' << fmt(x) << ',' << c << '\n'; });
}

}  // namespace brwldp
