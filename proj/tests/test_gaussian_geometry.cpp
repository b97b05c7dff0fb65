#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "brwldp/gaussian_geometry.hpp"
#include "doctest.h"

using namespace brwldp;

namespace {
double Phi(double x) { return boost::math::cdf(boost::math::normal(), x); }
double Phi_inv(double p) { return boost::math::quantile(boost::math::normal(), p); }
}  // namespace

TEST_CASE("target sets parse, round-trip and reject malformed text") {
  const auto A = TargetSet::parse("[0,1]u(2,inf)");
  CHECK(TargetSet::parse(A.to_string()) == A);
  CHECK(A.contains(0.0));
  CHECK(!A.contains(2.0));
  CHECK(A.contains(2.5));
  CHECK_THROWS_AS(TargetSet::parse("(0,]"), std::invalid_argument);
  CHECK_THROWS_AS(TargetSet::parse("[2,1]"), std::invalid_argument);
  CHECK_THROWS_AS(TargetSet::parse("[0,2]u[1,3]"), std::invalid_argument);
}

TEST_CASE("gaussian measure oracles") {
  CHECK(gaussian_measure(TargetSet::real_line()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gaussian_measure(TargetSet::parse("(-inf,0]")) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(gaussian_measure(TargetSet::parse("[-1,1]")) - (2 * Phi(1) - 1)) < 1e-12);
  // Additivity and symmetry.
  const auto A = TargetSet::parse("[-3,-1]u[0.5,2]");
  const double parts = gaussian_measure(TargetSet::parse("[-3,-1]")) + gaussian_measure(TargetSet::parse("[0.5,2]"));
  CHECK(std::abs(gaussian_measure(A) - parts) < 1e-12);
  CHECK(std::abs(gaussian_measure(A) - gaussian_measure(A.reflect())) < 1e-12);
  CHECK(std::abs(gaussian_measure(A.reflect()) - gaussian_measure(TargetSet::parse("[-2,-0.5]u[1,3]"))) < 1e-12);
}

TEST_CASE("measure_affine oracles") {
  const auto half = TargetSet::parse("(-inf,0]");
  const auto unit = TargetSet::parse("[0,1]");
  CHECK(std::abs(measure_affine(unit, 1, 0) - gaussian_measure(unit)) < 1e-15);
  CHECK(std::abs(measure_affine(half, 1, -1) - Phi(-1)) < 1e-12);
  CHECK(std::abs(measure_affine(half, 1, -1) - 0.158655253931457) < 1e-12);
  CHECK(std::abs(measure_affine(unit, 2, 0) - (Phi(2) - 0.5)) < 1e-12);
}

TEST_CASE("i_rate oracles and witness") {
  const auto half = TargetSet::parse("(-inf,0]");
  const auto r = i_rate(half, 0.75);
  REQUIRE(r.rate.is_finite());
  CHECK(std::abs(r.rate.value() - Phi_inv(0.75)) < 1e-9);
  CHECK(std::abs(std::abs(r.witness_x) - r.rate.value()) < 1e-12);
  CHECK(measure_affine(half, 1, -r.witness_x) >= 0.75 - 1e-9);
  CHECK(i_rate(half, 0.5 + 1e-9).rate.value() < 1e-6);
  CHECK(i_rate(TargetSet::parse("[0,1]"), 0.9).rate.is_infinite());
  CHECK_THROWS(i_rate(half, 1.0));
}

TEST_CASE("j_rate oracles") {
  const auto unit = TargetSet::parse("[0,1]");
  const double closed = 1 - std::pow(0.5 / Phi_inv(0.95), 2);
  CHECK(std::abs(j_rate(unit, 0.9).rate - closed) < 1e-6);
  CHECK(j_rate(TargetSet::parse("(-inf,0]"), 0.9).rate == 0.0);
  const double sup = 2 * Phi(0.5) - 1;
  CHECK(j_rate(unit, sup + 1e-6).rate < 1e-3);
}

TEST_CASE("rates are monotone in p and obey the trichotomy") {
  const std::vector<TargetSet> sets = {TargetSet::parse("[0,1]"), TargetSet::parse("(-inf,-1]u[1,inf)"),
                                       TargetSet::parse("[-0.5,2]"), TargetSet::parse("(-inf,0.3]")};
  for (const auto& A : sets) {
    const double nu = gaussian_measure(A);
    double prev_i = 0, prev_j = 0;
    for (double p = nu + 0.02; p < 0.99; p += 0.05) {
      const auto g = gaussian_rates(A, p);
      const bool finite = g.i_rate.is_finite();
      CHECK((finite ? (g.i_rate.value() > 0 && g.j_rate == 0.0) : (g.j_rate > 0 && g.j_rate < 1)));
      CHECK(g.i_rate.raw() >= prev_i);
      CHECK(g.j_rate >= prev_j - 1e-9);
      prev_i = g.i_rate.raw();
      prev_j = g.j_rate;
    }
  }
}

TEST_CASE("set calculus") {
  const auto c = set_calculus(TargetSet::parse("[0,1]"), 0.2);
  REQUIRE(c.interior);
  CHECK(c.interior->intervals().front().lo == doctest::Approx(0.2));
  CHECK(c.interior->intervals().front().hi == doctest::Approx(0.8));
  CHECK(c.neighbourhood.intervals().front().lo == doctest::Approx(-0.2));
  CHECK(c.neighbourhood.intervals().front().hi == doctest::Approx(1.2));
  const auto h = set_calculus(TargetSet::parse("(-inf,0]"), 0.5);
  CHECK(h.interior->intervals().front().hi == doctest::Approx(-0.5));
  CHECK(h.neighbourhood.intervals().front().hi == doctest::Approx(0.5));
  CHECK(!set_calculus(TargetSet::parse("[0,1]"), 0.6).interior);
  CHECK(gaussian_measure(*set_calculus(TargetSet::parse("[0,1]"), 1e-6).boundary_nbhd) < 1e-5);
}

TEST_CASE("lattice convolution") {
  const auto rad = StepDistribution::rademacher();
  const auto one = convolve_n(rad, 1);
  CHECK(one.mass.size() == 3);
  CHECK(one.measure(TargetSet::parse("[-1,-1]")) == 0.5);
  const auto two = convolve_n(rad, 2);
  CHECK(two.measure(TargetSet::parse("[-2,-2]")) == 0.25);
  CHECK(two.measure(TargetSet::parse("[0,0]")) == 0.5);
  const auto big = convolve_n(rad, 500);
  CHECK(std::abs(big.total() - 1.0) < 1e-12);
  CHECK(std::abs(big.measure(TargetSet::parse("(-inf,-10]")) - big.measure(TargetSet::parse("[10,inf)"))) < 1e-15);
  CHECK_THROWS(convolve_n(StepDistribution::gaussian(), 3));
}

TEST_CASE("uniform CLT gap shrinks") {
  const auto rad = StepDistribution::rademacher();
  CHECK(uniform_clt_gap(rad, 1, TargetSet::parse("(-inf,0]"), {1.0}, {0.0}) < 1e-15);
  const std::vector<double> a = {0.5, 1, 2}, b = {-2, -1, 0, 1, 2};
  const auto unit = TargetSet::parse("[0,1]");
  CHECK(uniform_clt_gap(rad, 400, unit, a, b) < uniform_clt_gap(rad, 25, unit, a, b));
  CHECK(uniform_clt_gap(rad, 100, unit, {1.0}, {40.0}) < 1e-12);
}
