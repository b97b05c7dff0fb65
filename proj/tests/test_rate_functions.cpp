#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "brwldp/rate_functions.hpp"
#include "doctest.h"

using namespace brwldp;

namespace {
const double kI = boost::math::quantile(boost::math::normal(), 0.75);
double srw_bar(double p1) { return std::log(1 + std::sqrt(1 - p1 * p1)) - std::log(p1); }
}  // namespace

TEST_CASE("step laws are standardised") {
  for (const auto& s : {StepDistribution::rademacher(), StepDistribution::gaussian(),
                        StepDistribution::bounded_uniform(1.2), StepDistribution::bounded_uniform(2.5),
                        StepDistribution::weibull(1, 2), StepDistribution::weibull(2, 0.5), StepDistribution::gumbel(1)})
    CHECK(s.second_moment() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(StepDistribution::bounded_uniform(2.5).ess_sup() == 2.5);
  CHECK(StepDistribution::parse("weibull:1:2") == StepDistribution::weibull(1, 2));
  CHECK_THROWS(StepDistribution::parse("cauchy"));
}

TEST_CASE("sample moments match the law") {
  const auto s = StepDistribution::bounded_uniform(2.5);
  Rng rng(3, 0);
  double m = 0, m2 = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double x = s.sample(rng);
    CHECK_MESSAGE(std::abs(x) <= 2.5, "outside the support");
    m += x;
    m2 += x * x;
  }
  CHECK(std::abs(m / N) < 4 * std::sqrt(1.0 / N));
  CHECK(std::abs(m2 / N - 1) < 0.02);
}

TEST_CASE("log mgf") {
  const auto rad = StepDistribution::rademacher();
  CHECK(log_mgf(rad, 0).value() == 0.0);
  CHECK(std::abs(log_mgf(rad, 1).value() - std::log(std::cosh(1.0))) < 1e-12);
  CHECK(log_mgf(StepDistribution::weibull(1, 0.5), 0.1).is_infinite());
  const auto g = StepDistribution::gaussian();
  for (double t = -3; t <= 3; t += 0.25) CHECK(std::abs(log_mgf(g, t).value() - t * t / 2) < 1e-10);
  // Convex and even on a grid.
  const auto u = StepDistribution::bounded_uniform(1.5);
  const double h = 0.1;
  for (double t = -2; t <= 2; t += h) {
    CHECK(std::abs(log_mgf(u, t).value() - log_mgf(u, -t).value()) < 1e-12);
    CHECK(log_mgf(u, t + h).value() - 2 * log_mgf(u, t).value() + log_mgf(u, t - h).value() >= -1e-9);
  }
}

TEST_CASE("lambda inverse") {
  const auto rad = StepDistribution::rademacher();
  CHECK(lambda_inverse(rad, 0).value() == doctest::Approx(0.0));
  CHECK(std::abs(lambda_inverse(rad, std::log(2.0)).value() - std::acosh(2.0)) < 1e-10);
  CHECK(std::abs(lambda_inverse(StepDistribution::gaussian(), 0.7).value() - std::sqrt(1.4)) < 1e-10);
  CHECK_THROWS(lambda_inverse(StepDistribution::weibull(1, 0.5), 1.0));
}

TEST_CASE("cramer rate") {
  const auto rad = StepDistribution::rademacher();
  auto closed = [](double a) { return ((1 + a) * std::log(1 + a) + (1 - a) * std::log(1 - a)) / 2; };
  CHECK(cramer_rate(rad, 0).value() == doctest::Approx(0.0));
  CHECK(std::abs(cramer_rate(rad, 0.5).value() - closed(0.5)) < 1e-9);
  CHECK(std::abs(cramer_rate(rad, 0.5).value() - 0.130812035941137) < 1e-9);
  CHECK(std::abs(cramer_rate(rad, 0.3).value() - 0.04570054152531286) < 1e-9);
  CHECK(cramer_rate(rad, 1.5).is_infinite());
  CHECK(cramer_rate(rad, -0.4).value() == doctest::Approx(cramer_rate(rad, 0.4).value()));
  // Legendre biduality for the Gaussian: sup_a (ta − a²/2) = t²/2.
  CHECK(std::abs(cramer_rate(StepDistribution::gaussian(), 1.3).value() - 0.845) < 1e-9);
}

TEST_CASE("tilt for drift") {
  CHECK(std::abs(tilt_for_drift(StepDistribution::rademacher(), 0.5) - std::atanh(0.5)) < 1e-10);
  CHECK(std::abs(tilt_for_drift(StepDistribution::gaussian(), 0.8) - 0.8) < 1e-8);
}

TEST_CASE("bar lambda") {
  const auto rad = StepDistribution::rademacher();
  for (double p1 = 0.1; p1 < 0.95; p1 += 0.1) {
    const auto b = bar_lambda(rad, p1);
    CHECK(std::abs(b.value - srw_bar(p1)) < 1e-8);
    CHECK(std::abs(b.value - b.variational) < 1e-7);
  }
  CHECK(std::abs(bar_lambda(rad, 0.5).value - 1.3169578969248166) < 1e-9);
  CHECK(std::abs(bar_lambda(StepDistribution::gaussian(), std::exp(-0.5)).value - 1.0) < 1e-9);
  CHECK(std::abs(bar_lambda(rad, 0.5).optimal_drift - std::tanh(bar_lambda(rad, 0.5).value)) < 1e-6);
  CHECK_THROWS(bar_lambda(rad, 1.0));
}

TEST_CASE("F map and its fixed point") {
  const auto rad = StepDistribution::rademacher();
  const double b = bar_lambda(rad, 0.5).value;
  const auto f = f_map(rad, 0.5, 0.1, 0.2);
  CHECK(std::abs(f.dual - (0.1 * (std::log(2.0) - std::log(std::cosh(0.2))) + 0.2)) < 1e-12);
  CHECK(std::abs(f.dual - 0.2673279) < 1e-6);
  CHECK(std::abs(f.value - f.dual) < 1e-8);
  CHECK(std::abs(f_map(rad, 0.5, 0.1, b).value - b) < 1e-8);
  for (double L = 0.1; L < b; L += 0.1) CHECK(f_map(rad, 0.5, 0.1, L).value >= L);
  CHECK_THROWS(f_map(rad, 0.5, 0.1, b + 0.1));

  const auto fp = iterate_fixed_point(rad, 0.5, 0.1, 0.1 * std::log(2.0));
  CHECK(std::abs(fp.limit - b) < 1e-8);
  for (std::size_t i = 1; i < fp.trace.size(); ++i) CHECK(fp.trace[i] >= fp.trace[i - 1]);
  CHECK(iterate_fixed_point(rad, 0.5, 0.1, b - 1e-12).trace.size() <= 3);
  // α Λ′(B̄) > 1 is inadmissible.
  CHECK_THROWS(iterate_fixed_point(rad, 0.5, 5.0, 0.5));
}

TEST_CASE("schroder exponent") {
  CHECK(std::abs(schroder_exponent(OffspringDistribution::finite({0, 0.5, 0.5})) - std::log(2.0) / std::log(1.5)) <
        1e-12);
  CHECK(std::abs(schroder_exponent(OffspringDistribution::finite({0, 0.5, 0, 0.5})) - 1.0) < 1e-12);
  // Decreasing in p₁ at fixed m = 2.
  CHECK(schroder_exponent(OffspringDistribution::finite({0, 0.25, 0.5, 0.25})) >
        schroder_exponent(OffspringDistribution::finite({0, 0.5, 0, 0.5})));
  CHECK_THROWS(schroder_exponent(OffspringDistribution::finite({0, 0, 1})));
}

TEST_CASE("offspring laws") {
  const auto o = OffspringDistribution::parse("1:0.5,2:0.5");
  CHECK(o.mean() == doctest::Approx(1.5));
  CHECK(o.b() == 1);
  CHECK(*o.B() == 2);
  CHECK_THROWS(OffspringDistribution::finite({0.1, 0.4, 0.5}));
  CHECK_THROWS(OffspringDistribution::finite({0, 1}));
  const auto g = OffspringDistribution::geometric(0.5, 2);
  CHECK(g.mean() == doctest::Approx(3.0));
  CHECK(!g.B());
}

TEST_CASE("classify and predict") {
  const auto half = TargetSet::parse("(-inf,0]");
  const auto s = classify_and_predict(OffspringDistribution::finite({0, 0.5, 0.5}), StepDistribution::rademacher(),
                                      half, 0.75);
  CHECK(s.regime == Regime::SchroderCramerFiniteI);
  CHECK(std::abs(s.constant - srw_bar(0.5) * kI) < 1e-8);
  CHECK(std::abs(s.constant - 0.8882746) < 1e-6);
  CHECK(s.speed(100.0) == doctest::Approx(10.0));

  const auto w = classify_and_predict(OffspringDistribution::finite({0, 0, 0.5, 0.5}), StepDistribution::weibull(1, 0.5),
                                      half, 0.75);
  CHECK(w.regime == Regime::BottcherWeibullSub);
  CHECK(std::abs(w.constant - std::sqrt(kI)) < 1e-8);
  CHECK(std::abs(w.constant - 0.821273) < 1e-6);

  const auto bd = classify_and_predict(OffspringDistribution::finite({0, 0, 1}), StepDistribution::bounded_uniform(1),
                                       half, 0.75);
  CHECK(bd.regime == Regime::BottcherBounded);
  CHECK(bd.log_log_scale);
  CHECK(std::abs(bd.constant - kI * std::log(2.0)) < 1e-8);

  const auto inf = classify_and_predict(OffspringDistribution::finite({0, 0.5, 0.5}), StepDistribution::rademacher(),
                                        TargetSet::parse("[0,1]"), 0.9);
  CHECK(inf.regime == Regime::SchroderInfiniteI);
  CHECK(inf.speed(100.0) == doctest::Approx(100.0));

  CHECK_THROWS_AS(classify_and_predict(OffspringDistribution::finite({0, 0.5, 0.5}), StepDistribution::rademacher(),
                                       half, 0.4),
                  HypothesisError);
  // Larger shift, larger constant.
  CHECK(classify_and_predict(OffspringDistribution::finite({0, 0.5, 0.5}), StepDistribution::rademacher(), half, 0.9)
            .constant > s.constant);
  const auto j = s.to_json();
  CHECK(j.contains("regime"));
  CHECK(j.contains("bar_lambda"));
}
