#include <cmath>
#include <sstream>

#include "brwldp/brw_engine.hpp"
#include "brwldp/gaussian_geometry.hpp"
#include "brwldp/ldp_estimator.hpp"
#include "brwldp/parallel.hpp"
#include "doctest.h"

using namespace brwldp;

namespace {
const auto kRad = StepDistribution::rademacher();
const auto kHalf = TargetSet::parse("(-inf,0]");
const auto kO12 = OffspringDistribution::finite({0, 0.5, 0.5});
}  // namespace

TEST_CASE("advance: support and growth bounds") {
  const BrwConfig cfg{OffspringDistribution::finite({0, 0, 1}), kRad};
  Rng rng(1, 0);
  const auto p1 = advance(Population::lattice_root(1.0), cfg, rng);
  CHECK(p1.total() == 2);
  p1.for_each([](double x, std::uint64_t) { CHECK((x == -1.0 || x == 1.0)); });

  const BrwConfig c3{OffspringDistribution::finite({0, 0.2, 0.3, 0.5}), kRad};
  Population pop = Population::lattice_root(1.0);
  for (int g = 0; g < 10; ++g) {
    const auto next = advance(pop, c3, rng);
    CHECK(next.total() >= pop.total());
    CHECK(next.total() <= 3 * pop.total());
    CHECK(next.generation() == g + 1);
    pop = next;
  }
}

TEST_CASE("advance: mean growth and zero drift") {
  const BrwConfig cfg{kO12, kRad};
  const auto start = Population::lattice(1.0, -2, {3, 0, 1, 0, 2});  // 3 at −2, 1 at 0, 2 at 2
  double sum_x0 = 0;
  start.for_each([&](double x, std::uint64_t c) { sum_x0 += x * c; });
  const int R = 10000;
  double t = 0, t2 = 0, sx = 0, sx2 = 0;
  for (int i = 0; i < R; ++i) {
    Rng rng(7, i);
    const auto p = advance(start, cfg, rng);
    double s = 0;
    p.for_each([&](double x, std::uint64_t c) { s += x * c; });
    t += p.total();
    t2 += double(p.total()) * p.total();
    sx += s;
    sx2 += s * s;
  }
  const double mt = t / R, se_t = std::sqrt((t2 / R - mt * mt) / R);
  CHECK(std::abs(mt - 1.5 * 6) < 3 * se_t);
  const double ms = sx / R, se_s = std::sqrt((sx2 / R - ms * ms) / R);
  CHECK(std::abs(ms - 1.5 * sum_x0) < 3 * se_s);
}

TEST_CASE("lattice and list modes agree exactly") {
  const BrwConfig cfg{OffspringDistribution::finite({0, 0.3, 0.4, 0.3}), kRad};
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng a(s, 1), b(s, 1);
    Population lat = Population::lattice_root(1.0);
    Population lst = Population::root(0.0);
    for (int g = 0; g < 8; ++g) {
      lat = advance(lat, cfg, a);
      lst = advance(lst, cfg, b);
    }
    CHECK(lst.to_lattice(1.0) == lat);
  }
}

TEST_CASE("simulation is deterministic across runs and thread counts") {
  const BrwConfig cfg{kO12, kRad};
  auto run = [&](unsigned threads) {
    return run_replicas<double>(
        64,
        [&](std::size_t i) {
          Rng rng(99, i);
          return empirical_measure(simulate(cfg, 14, rng), kHalf, std::sqrt(14.0));
        },
        threads);
  };
  const auto a = run(1);
  CHECK(a == run(1));
  CHECK(a == run(4));
}

TEST_CASE("population cap is reported, not truncated") {
  BrwConfig cfg{OffspringDistribution::finite({0, 0, 1}), kRad};
  cfg.population_cap = 1000;
  Rng rng(1, 0);
  try {
    simulate(cfg, 12, rng);
    FAIL("expected CapExceeded");
  } catch (const CapExceeded& e) {
    CHECK(e.generation() == 10);
  }
}

TEST_CASE("empirical measure and martingale") {
  const auto one = Population::root(0.0);
  CHECK(empirical_measure(one, kHalf, 3.0) == 1.0);
  CHECK(empirical_measure(one, TargetSet::real_line(), 1.0) == 1.0);
  CHECK(martingale_w(one, 1.5) == 1.0);
  CHECK_THROWS(empirical_measure(one, kHalf, 0.0));
  const auto p = Population::list({-1.0, 0.0, 0.5, 2.0});
  CHECK(p.count_in(TargetSet::parse("(-inf,0]")) == 2);
  CHECK(p.count_in(TargetSet::parse("(-inf,0)")) == 1);
  CHECK(empirical_measure(p, TargetSet::parse("[0,1]"), 2.0) == 0.75);

  // E W_n = 1.
  const BrwConfig cfg{kO12, kRad};
  const int R = 4000;
  double s = 0, s2 = 0;
  for (int i = 0; i < R; ++i) {
    Rng rng(5, i);
    const double w = martingale_w(simulate(cfg, 12, rng), 1.5);
    s += w;
    s2 += w * w;
  }
  const double m = s / R, se = std::sqrt((s2 / R - m * m) / R);
  CHECK(std::abs(m - 1.0) < 3 * se);
}

TEST_CASE("exact population law") {
  const auto o = OffspringDistribution::finite({0, 0.2, 0.5, 0.3});
  const auto l1 = population_law_exact(o, 1);
  CHECK(l1[1] == doctest::Approx(0.2));
  CHECK(l1[2] == doctest::Approx(0.5));
  CHECK(l1[3] == doctest::Approx(0.3));
  CHECK(population_law_exact(kO12, 2)[1] == doctest::Approx(0.25));
  for (int n : {3, 6, 9}) {
    const auto law = population_law_exact(o, n);
    double t = 0, m = 0, v = 0;
    for (std::size_t k = 0; k < law.size(); ++k) {
      t += law[k];
      m += k * law[k];
    }
    for (std::size_t k = 0; k < law.size(); ++k) v += (k - m) * (k - m) * law[k];
    const auto gw = galton_watson_moments(o, n);
    CHECK(std::abs(t - 1) < 1e-12);
    CHECK(std::abs(m / gw.mean - 1) < 1e-9);
    CHECK(std::abs(v / gw.variance - 1) < 1e-9);
  }
  CHECK_THROWS_AS(population_law_exact(o, 30), StateSpaceExplosion);
}

TEST_CASE("population bound check reports the worst ratio") {
  const auto c = population_bound_check(kO12, 12);
  CHECK(c.C == doctest::Approx(1.0));
  // Fitting C at n = 1 alone is too optimistic: the exact law exceeds it.
  CHECK(c.worst_ratio == doctest::Approx(1.2965320884).epsilon(1e-8));
  CHECK(c.worst_n == 12);
  CHECK(c.worst_k == 10);
  CHECK(!c.holds);
}

TEST_CASE("exact event probability oracles") {
  CHECK(exact_event_prob(kO12, kRad, 0, kHalf, 1.0) == 1.0);
  const auto single = OffspringDistribution::unchecked({0, 1});
  CHECK(exact_event_prob(single, kRad, 2, kHalf, 1.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(exact_event_prob(kO12, kRad, 2, kHalf, 1.0) == doctest::Approx(0.580078125).epsilon(1e-14));
  // Single lineage: P(S_n ≤ 0).
  CHECK(exact_event_prob(single, kRad, 5, kHalf, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(exact_event_prob(OffspringDistribution::finite({0, 0, 0, 1}), kRad, 9, kHalf, 0.75, 1000),
                  StateSpaceExplosion);
}

TEST_CASE("exact event probability against naive Monte Carlo") {
  struct Cfg {
    OffspringDistribution o;
    int n;
    TargetSet A;
    double p;
  };
  const std::vector<Cfg> cs = {{kO12, 2, kHalf, 1.0},
                               {kO12, 5, kHalf, 0.75},
                               {OffspringDistribution::finite({0, 0.3, 0.5, 0.2}), 4, TargetSet::parse("[-1,1]"), 0.6}};
  for (const auto& c : cs) {
    const double ex = exact_event_prob(c.o, kRad, c.n, c.A, c.p);
    const auto r = naive_estimate(BrwConfig{c.o, kRad}, c.n, c.A, c.p, 100000, 17);
    CHECK(std::abs(r.estimate - ex) <= 4 * r.std_error);
  }
}

TEST_CASE("snapshot csv") {
  std::ostringstream os;
  write_snapshot_csv(os, Population::lattice(0.5, -1, {2, 0, 3}, 4));
  CHECK(os.str() == "generation,position,count\n4,-0.5,2\n4,0.5,3\n");
}
