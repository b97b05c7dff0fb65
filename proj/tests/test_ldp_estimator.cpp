#include <cmath>

#include "brwldp/brw_engine.hpp"
#include "brwldp/ldp_estimator.hpp"
#include "doctest.h"

using namespace brwldp;

namespace {
const auto kRad = StepDistribution::rademacher();
const auto kHalf = TargetSet::parse("(-inf,0]");
const auto kO12 = OffspringDistribution::finite({0, 0.5, 0.5});
const auto kO23 = OffspringDistribution::finite({0, 0, 0.5, 0.5});
const double kI = 0.6744897501960817;
}  // namespace

TEST_CASE("naive estimate: trivial events, monotone in p") {
  const BrwConfig cfg{kO12, kRad};
  CHECK(naive_estimate(cfg, 6, kHalf, 0.0, 500, 1).estimate == 1.0);
  const auto rs = naive_estimate_multi(cfg, 10, kHalf, {0.5, 0.6, 0.7, 0.8, 0.9}, 3000, 4);
  for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i].estimate <= rs[i - 1].estimate);
  const auto z = naive_estimate(cfg, 10, kHalf, 1.01, 200, 1);
  CHECK(z.hits == 0);
  CHECK(z.zero_hit_bound == doctest::Approx(3.0 / 200));
}

TEST_CASE("schroder schedule examples") {
  const double eps = 0.1 * kI;
  const auto s = schedule_schroder(kRad, kHalf, 0.75, 100, kI + eps, std::nullopt, eps);
  CHECK(s.C_a == doctest::Approx(1.0));
  CHECK(s.t_n == 10);
  CHECK(s.x0 == doctest::Approx(-(kI + eps)));
  CHECK(s.tilt == doctest::Approx(-std::atanh(kI + eps)));
  CHECK(s.target.hi == doctest::Approx(-(kI + eps) * 10));
  CHECK(s.target.lo == doctest::Approx(-(kI + eps) * 10 * (1 + 0.05 * kI)));
  CHECK_THROWS(schedule_schroder(kRad, kHalf, 0.75, 100, kI + eps, 0.0));
  CHECK_THROWS(schedule_schroder(kRad, kHalf, 0.75, 100, 1.2));
  CHECK(std::abs(schedule_schroder(kRad, kHalf, 0.75, 100, 0.5).tilt) == doctest::Approx(std::atanh(0.5)));
  CHECK(optimal_spine_drift(kO12, kRad) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-6));
  CHECK(s.to_json().contains("t_n"));
}

TEST_CASE("schroder IS matches the exact probability and integrates to one") {
  const BrwConfig cfg{kO12, kRad};
  const double ex = exact_event_prob(kO12, kRad, 6, kHalf, 0.75);
  const auto s = schedule_schroder(kRad, kHalf, 0.75, 6, optimal_spine_drift(kO12, kRad));
  for (std::uint64_t seed : {1, 2}) {
    const auto r = is_schroder_estimate(cfg, 6, kHalf, 0.75, s, 40000, seed);
    CHECK(std::abs(r.estimate - ex) <= 4 * r.std_error);
    CHECK(r.effective_sample_size <= double(r.replicas));
  }
  const auto one = is_schroder_estimate(cfg, 6, kHalf, 0.0, s, 40000, 3);
  CHECK(std::abs(one.estimate - 1.0) <= 4 * one.std_error);
  EstimatorOptions single;
  single.spread_spine = false;
  const auto r1 = is_schroder_estimate(cfg, 6, kHalf, 0.75, s, 40000, 4, single);
  CHECK(std::abs(r1.estimate - ex) <= 4 * r1.std_error);
}

TEST_CASE("schroder IS agrees with naive at n = 36") {
  const BrwConfig cfg{kO12, kRad};
  const auto s = schedule_schroder(kRad, kHalf, 0.75, 36, optimal_spine_drift(kO12, kRad));
  const auto is = is_schroder_estimate(cfg, 36, kHalf, 0.75, s, 4000, 5);
  const auto nv = naive_estimate(cfg, 36, kHalf, 0.75, 4000, 5);
  CHECK(std::abs(is.estimate - nv.estimate) <= 4 * std::hypot(is.std_error, nv.std_error));
}

TEST_CASE("bottcher IS on tiny configs") {
  const BrwConfig cfg{kO23, kRad};
  const auto s = manual_bottcher_schedule(kO23, kRad, 4, 2, 1, 3, Window{-1, -1}, {Window{-1, 1}});
  CHECK(std::exp(spine_event_log_prob(kO23, kRad, s)) == doctest::Approx(0.0625));
  const double ex = exact_event_prob(kO23, kRad, 4, kHalf, 0.75);
  const auto r = is_bottcher_estimate(cfg, 4, kHalf, 0.75, s, 40000, 1);
  CHECK(std::abs(r.estimate - ex) <= 4 * r.std_error);
  CHECK(std::abs(*r.event_mass - 0.0625) <= 4 * *r.event_mass_se);
  const auto one = is_bottcher_estimate(cfg, 4, kHalf, 0.0, s, 40000, 2);
  CHECK(std::abs(one.estimate - 1.0) <= 4 * one.std_error);
  CHECK_THROWS(manual_bottcher_schedule(kO23, kRad, 4, 2, 1, 5, Window{-1, -1}, {Window{-1, 1}}));
  CHECK_THROWS(manual_bottcher_schedule(kO23, kRad, 4, 2, 1, 3, Window{-0.5, -0.4}, {Window{-1, 1}}));
}

TEST_CASE("bottcher schedules") {
  const auto wb = StepDistribution::weibull(1, 2);
  const auto s = schedule_bottcher(kO23, wb, kHalf, 0.75, 64, 3);
  CHECK(s.t_n == 6);
  CHECK(s.s_n == 5);
  CHECK(s.fat.size() == 5u);
  CHECK(s.spine.lo < s.spine.hi);
  CHECK(s.spine.hi < 0);
  CHECK(half_mass_bound(wb) == doctest::Approx(std::sqrt(std::log(2.0))));
  CHECK(half_mass_bound(kRad) == 1.0);
  CHECK_THROWS(schedule_bottcher(kO23, wb, kHalf, 0.75, 64, 4));
  CHECK_THROWS(schedule_bottcher(kO12, wb, kHalf, 0.75, 64, 2));

  // Gumbel steps: t_n > 0 needs n of order 1e7, where every spine window
  // sits so deep in the doubly exponential tail that its mass underflows.
  const auto gb = StepDistribution::gumbel(1);
  CHECK_THROWS_WITH_AS(schedule_bottcher(kO23, gb, kHalf, 0.75, 100000000, 3), doctest::Contains("no mass"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(schedule_bottcher(kO23, gb, kHalf, 0.75, 10000, 3), doctest::Contains("too small"),
                       std::invalid_argument);
}

TEST_CASE("fit_rate") {
  Speed sp;
  std::vector<EstimationResult> rs;
  for (int n : {16, 36, 64, 100, 144}) {
    EstimationResult r;
    r.n = n;
    r.estimate = std::exp(-0.7 * std::sqrt(double(n)) + 0.3);
    rs.push_back(r);
  }
  const auto f = fit_rate(rs, sp);
  CHECK(f.slope == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));

  // Additive noise σ = 0.05 on log P.
  Rng rng(11, 0);
  std::vector<EstimationResult> noisy;
  std::vector<double> xs;
  for (int n = 16; n <= 400; n += 8) {
    EstimationResult r;
    r.n = n;
    const double u1 = rng.uniform(), u2 = rng.uniform();
    const double z = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
    r.estimate = std::exp(-0.7 * std::sqrt(double(n)) + 0.05 * z);
    noisy.push_back(r);
    xs.push_back(std::sqrt(double(n)));
  }
  double mx = 0, sxx = 0;
  for (double x : xs) mx += x / xs.size();
  for (double x : xs) sxx += (x - mx) * (x - mx);
  CHECK(std::abs(fit_rate(noisy, sp).slope - 0.7) < 3 * 0.05 / std::sqrt(sxx));

  rs[1].estimate = 0;
  rs[2].estimate = 0;
  rs[3].estimate = 0;
  CHECK_THROWS(fit_rate(rs, sp));
}

TEST_CASE("concentration: tilted agrees with naive, decay steepens with delta") {
  const BrwConfig cfg{kO12, kRad};
  const auto tl = concentration_check(cfg, {1, 8}, kHalf, 0.1, 16, 4000, 3);
  const auto nv = concentration_check(cfg, {1, 8}, kHalf, 0.1, 16, 4000, 3, ConcentrationMethod::Naive);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(tl.points[i].mean == nv.points[i].mean);
    CHECK(std::abs(tl.points[i].estimate - nv.points[i].estimate) <=
          4 * std::hypot(tl.points[i].std_error, nv.points[i].std_error));
  }
  // |ζ| = 1 is a single-root deviation probability.
  const auto single = naive_estimate(cfg, 16, kHalf, nv.points[0].mean + 0.1 + 1e-12, 4000, 9);
  CHECK(std::abs(single.estimate - nv.points[0].estimate) <= 4 * std::hypot(single.std_error, nv.points[0].std_error));

  const auto a = concentration_check(cfg, {8, 16, 32}, kHalf, 0.1, 16, 1000, 5);
  const auto b = concentration_check(cfg, {8, 16, 32}, kHalf, 0.2, 16, 1000, 5);
  REQUIRE(a.fitted);
  REQUIRE(b.fitted);
  CHECK(a.slope < 0);
  CHECK(b.slope < a.slope);
  // Doubling |ζ| lowers log P by a roughly size-proportional amount.
  const double d1 = std::log(a.points[0].estimate) - std::log(a.points[1].estimate);
  const double d2 = std::log(a.points[1].estimate) - std::log(a.points[2].estimate);
  CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.35));
  CHECK_THROWS(concentration_check(BrwConfig{kO12, StepDistribution::gaussian()}, {8}, kHalf, 0.1, 16, 10, 1));
}

TEST_CASE("iid sum tail bounds") {
  const auto wb = StepDistribution::weibull(1, 2);
  const auto t1 = iid_sum_tail_check(wb, 1, 1.0, 400);
  CHECK(t1.method == "exact");
  CHECK(t1.log_p == doctest::Approx(std::log(0.5) - 400.0).epsilon(1e-9));
  CHECK(t1.pass);
  const auto t2 = iid_sum_tail_check(wb, 2, 1.0, 100);
  CHECK(t2.method == "convolution");
  CHECK(t2.scaled <= t2.bound + 0.05 * std::abs(t2.bound));
  const auto mc = iid_sum_tail_check(wb, 4, 1.0, 400, 0.05, 1000, 1);
  CHECK(mc.method == "unverifiable");
  CHECK_THROWS(iid_sum_tail_check(kRad, 1, 1.0, 100));
  CHECK_THROWS(iid_sum_tail_check(StepDistribution::weibull(1, 0.5), 1, 1.0, 100));
}

TEST_CASE("results table") {
  const auto r = naive_estimate(BrwConfig{kO12, kRad}, 4, kHalf, 0.75, 100, 3);
  CHECK(results_csv_header() == "method,n,p,replicas,estimate,std_error,log_estimate,ess,seed,hits,cap_exceeded");
  CHECK(results_csv_row(r).rfind("naive,4,", 0) == 0);
  CHECK(to_json(r)["replicas"] == 100);
}
