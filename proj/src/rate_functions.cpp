#include "brwldp/rate_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brwldp/optimize.hpp"

namespace brwldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_cramer(const StepDistribution& step, const char* who) {
  if (!step.has_cramer())
    throw std::invalid_argument(std::string(who) + ": step '" + step.to_string() + "' has no exponential moment");
}

double lambda_of(const StepDistribution& step, double t) { return step.log_mgf(t).raw(); }

// Bracket [0, hi] with Λ(hi) ≥ s (or Λ′(hi) ≥ a), respecting a finite mgf domain.
template <class Pred>
double grow_bracket(const StepDistribution& step, Pred reached) {
  const double D = step.mgf_domain();
  if (std::isinf(D)) {
    double hi = 1.0;
    while (!reached(hi)) {
      hi *= 2.0;
      if (hi > 1e12) return kInf;
    }
    return hi;
  }
  for (int k = 1; k < 60; ++k) {
    const double hi = D * (1.0 - std::ldexp(1.0, -k));
    if (reached(hi)) return hi;
  }
  return kInf;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

nlohmann::json ext_json(ExtendedReal v) {
  if (v.is_infinite()) return "inf";
  return v.raw();
}

double continuity_probe(const TargetSet& A, double p, bool use_i) {
  const double h = 1e-6;
  if (p + h >= 1.0) return 0.0;
  if (use_i) {
    const auto a = i_rate(A, p).rate;
    const auto b = i_rate(A, p + h).rate;
    if (a.is_infinite() || b.is_infinite()) return a == b ? 0.0 : kInf;
    return std::abs(b.value() - a.value());
  }
  return std::abs(j_rate(A, p + h).rate - j_rate(A, p).rate);
}

}  // namespace

ExtendedReal log_mgf(const StepDistribution& step, double t) { return step.log_mgf(t); }

ExtendedReal lambda_inverse(const StepDistribution& step, double s) {
  require_cramer(step, "lambda_inverse");
  if (!(s >= 0)) throw std::invalid_argument("lambda_inverse: s must be nonnegative");
  if (s == 0.0) return 0.0;
  auto reached = [&](double t) { return lambda_of(step, t) >= s; };
  const double hi = grow_bracket(step, reached);
  if (std::isinf(hi)) return step.mgf_domain();  // inf ∅ convention
  return optimize::bisect_predicate(reached, 0.0, hi, 1e-16);
}

double tilt_for_drift(const StepDistribution& step, double a) {
  require_cramer(step, "tilt_for_drift");
  if (a < 0) return -tilt_for_drift(step, -a);
  if (a == 0.0) return 0.0;
  if (!(a < step.ess_sup())) throw std::invalid_argument("tilt_for_drift: drift outside the range of Lambda'");
  auto reached = [&](double t) { return step.log_mgf_derivative(t) >= a; };
  const double hi = grow_bracket(step, reached);
  if (std::isinf(hi)) throw std::invalid_argument("tilt_for_drift: drift outside the range of Lambda'");
  return optimize::bisect_root([&](double t) { return step.log_mgf_derivative(t) - a; }, 0.0, hi, 1e-16);
}

ExtendedReal cramer_rate(const StepDistribution& step, double a) {
  require_cramer(step, "cramer_rate");
  a = std::abs(a);
  if (a == 0.0) return 0.0;
  const double L = step.ess_sup();
  if (a > L) return ExtendedReal::infinity();
  if (a == L) {
    const double q = step.atom(L);
    return q > 0 ? ExtendedReal(-std::log(q)) : ExtendedReal::infinity();
  }
  const double t = tilt_for_drift(step, a);
  return std::max(0.0, a * t - lambda_of(step, t));
}

BarLambda bar_lambda(const StepDistribution& step, double p1) {
  require_cramer(step, "bar_lambda");
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("bar_lambda: p1 must lie in (0,1)");
  const double c = std::log(1.0 / p1);
  BarLambda out;
  out.value = lambda_inverse(step, c).value();

  auto h = [&](double a) { return (c + cramer_rate(step, a).raw()) / a; };
  const double L = step.ess_sup();
  std::vector<double> grid;
  double best = kInf;
  std::size_t best_i = 0;
  int rising = 0;
  for (double a = 1e-3; rising < 3; a *= 1.2) {
    const double x = std::min(a, L);
    grid.push_back(x);
    const double v = h(x);
    if (v < best) {
      best = v;
      best_i = grid.size() - 1;
      rising = 0;
    } else {
      ++rising;
    }
    if (x == L) break;
  }
  const double lo = grid[best_i == 0 ? 0 : best_i - 1];
  const double hi = grid[std::min(best_i + 1, grid.size() - 1)];
  const auto r = optimize::golden_min(h, lo, hi, 1e-13);
  out.variational = r.value;
  out.optimal_drift = r.x;
  out.residual = std::abs(out.variational - out.value);
  if (out.residual > 1e-7)
    throw std::logic_error("bar_lambda: variational and inverse forms disagree by " + std::to_string(out.residual));
  return out;
}

FMapValue f_map(const StepDistribution& step, double p1, double alpha_iter, double L) {
  require_cramer(step, "f_map");
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("f_map: p1 must lie in (0,1)");
  if (!(alpha_iter > 0)) throw std::invalid_argument("f_map: alpha_iter must be positive");
  const double c = std::log(1.0 / p1);
  const double bar = lambda_inverse(step, c).value();
  if (!(L > 0) || L > bar * (1.0 + 1e-12))
    throw std::invalid_argument("f_map: L must lie in (0, bar_lambda(p1)]");

  auto g = [&](double u) { return c + cramer_rate(step, u).raw() - u * L; };
  double U = step.ess_sup();
  if (std::isinf(U)) {
    U = 1.0;
    while (g(2.0 * U) < g(U)) U *= 2.0;
    U *= 2.0;
  }
  const auto r = optimize::golden_min(g, 0.0, U, 1e-13);
  FMapValue out;
  out.value = alpha_iter * r.value + L;
  out.dual = alpha_iter * (c - lambda_of(step, L)) + L;
  if (std::abs(out.value - out.dual) > 1e-8)
    throw std::logic_error("f_map: primal and dual forms disagree by " + std::to_string(std::abs(out.value - out.dual)));
  return out;
}

double default_alpha_iter(const StepDistribution& step, double p1) {
  const double bar = lambda_inverse(step, std::log(1.0 / p1)).value();
  return 0.5 / step.log_mgf_derivative(bar);
}

FixedPointResult iterate_fixed_point(const StepDistribution& step, double p1, double alpha_iter, double L0,
                                     double tol, int max_iter) {
  require_cramer(step, "iterate_fixed_point");
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("iterate_fixed_point: p1 must lie in (0,1)");
  const double c = std::log(1.0 / p1);
  const double bar = lambda_inverse(step, c).value();
  const double slope = step.log_mgf_derivative(bar);
  if (!(alpha_iter > 0) || alpha_iter * slope > 1.0 + 1e-12)
    throw std::invalid_argument("iterate_fixed_point: inadmissible alpha_iter (need alpha * Lambda'(bar) <= 1, got " +
                                std::to_string(alpha_iter * slope) + ")");
  if (!(L0 > 0) || L0 > bar) throw std::invalid_argument("iterate_fixed_point: L0 must lie in (0, bar_lambda]");

  // Contraction factor at the fixed point; bounds the remaining error by step·q/(1−q).
  const double q = std::clamp(1.0 - alpha_iter * slope, 0.0, 1.0 - 1e-15);
  FixedPointResult out;
  out.trace.push_back(L0);
  double L = L0;
  for (int k = 0; k < max_iter; ++k) {
    const double next = alpha_iter * (c - lambda_of(step, L)) + L;
    if (next < L - 1e-15 * std::max(1.0, L))
      throw std::runtime_error("iterate_fixed_point: non-monotone step at iteration " + std::to_string(k));
    out.trace.push_back(next);
    const double stepsize = next - L;
    L = next;
    if (stepsize * q / (1.0 - q) <= 0.5 * tol) {
      out.limit = L;
      return out;
    }
  }
  throw std::runtime_error("iterate_fixed_point: no convergence within " + std::to_string(max_iter) + " iterations");
}

double schroder_exponent(const OffspringDistribution& offspring) { return offspring.chi(); }

std::string to_string(Regime r) {
  switch (r) {
    case Regime::SchroderCramerFiniteI: return "SchroderCramerFiniteI";
    case Regime::SchroderInfiniteI: return "SchroderInfiniteI";
    case Regime::BottcherWeibullSub: return "BottcherWeibullSub";
    case Regime::BottcherWeibullSuper: return "BottcherWeibullSuper";
    case Regime::BottcherWeibullRegular: return "BottcherWeibullRegular";
    case Regime::BottcherGumbel: return "BottcherGumbel";
    case Regime::BottcherBounded: return "BottcherBounded";
    case Regime::BottcherInfiniteI: return "BottcherInfiniteI";
  }
  return "?";
}

double Speed::operator()(double n) const {
  double s = std::pow(n, num_exp);
  if (log_exp != 0.0) s /= std::pow(std::log(n), log_exp);
  return s;
}

nlohmann::json Speed::to_json() const {
  return {{"kind", kind == Kind::Poly ? "poly" : "double_exp"}, {"num_exp", num_exp}, {"log_exp", log_exp}};
}

nlohmann::json RateReport::to_json() const {
  nlohmann::json j;
  j["regime"] = to_string(regime);
  j["speed"] = speed.to_json();
  j["constant"] = constant;
  j["bounds"] = {{"lower", opt_json(lower)}, {"upper", opt_json(upper)}};
  j["log_log_scale"] = log_log_scale;
  j["remark_based"] = remark_based;
  j["continuity_ok"] = continuity_ok;
  j["nu_A"] = nu_A;
  j["p"] = p;
  j["delta"] = p - nu_A;
  j["I_A"] = ext_json(i_rate);
  j["J_A"] = j_rate;
  j["witness_x"] = witness_x;
  j["chi"] = opt_json(chi);
  j["bar_lambda"] = opt_json(bar_lambda);
  j["y_alpha"] = opt_json(y_alpha);
  j["upsilon"] = opt_json(upsilon);
  return j;
}

RateReport classify_and_predict(const OffspringDistribution& offspring, const StepDistribution& step,
                                const TargetSet& A, double p) {
  RateReport r;
  r.nu_A = gaussian_measure(A);
  r.p = p;
  if (!(p > r.nu_A))
    throw HypothesisError("need Delta = p - nu(A) > 0 (p = " + std::to_string(p) +
                          ", nu(A) = " + std::to_string(r.nu_A) + ")");
  if (!(p < 1.0)) throw HypothesisError("need p < 1");

  const auto rates = gaussian_rates(A, p);
  r.i_rate = rates.i_rate;
  r.j_rate = rates.j_rate;
  r.witness_x = rates.witness_x;
  const bool finite_i = rates.i_rate.is_finite();
  r.continuity_ok = continuity_probe(A, p, finite_i) < 1e-3;

  const double p1 = offspring.p1();
  const double b = offspring.b();
  const auto B = offspring.B();
  const double logb = std::log(b);
  const double logB = B ? std::log(static_cast<double>(*B)) : kInf;

  if (p1 > 0.0) {
    r.chi = offspring.chi();
    if (!finite_i) {
      r.regime = Regime::SchroderInfiniteI;
      r.speed = {Speed::Kind::Poly, 1.0, 0.0};
      r.constant = std::log(1.0 / p1) * rates.j_rate;
      return r;
    }
    const double I = rates.i_rate.value();
    if (step.has_cramer()) {
      r.regime = Regime::SchroderCramerFiniteI;
      r.speed = {Speed::Kind::Poly, 0.5, 0.0};
      r.bar_lambda = bar_lambda(step, p1).value;
      r.constant = *r.bar_lambda * I;
      return r;
    }
    // Weibull α < 1 without Cramér: rate from the remark after the Schröder theorem.
    r.regime = Regime::BottcherWeibullSub;
    r.remark_based = true;
    r.speed = {Speed::Kind::Poly, step.alpha() / 2.0, 0.0};
    r.constant = step.lambda() * std::pow(I, step.alpha());
    return r;
  }

  if (!finite_i) {
    r.regime = Regime::BottcherInfiniteI;
    r.speed = {Speed::Kind::DoubleExp, 1.0, 0.0};
    r.log_log_scale = true;
    r.constant = rates.j_rate * logb;
    return r;
  }
  const double I = rates.i_rate.value();
  switch (step.kind()) {
    case StepKind::Weibull: {
      const double alpha = step.alpha();
      const double lambda = step.lambda();
      const double base = lambda * std::pow(I, alpha);
      if (B && *B == offspring.b()) {
        r.regime = Regime::BottcherWeibullRegular;
        r.speed = {Speed::Kind::Poly, alpha / 2.0, 0.0};
        r.upper = lambda * b * std::pow(I, alpha);
        if (alpha <= 1.0) r.lower = base;
        r.constant = *r.upper;
        return r;
      }
      if (alpha <= 1.0) {
        r.regime = Regime::BottcherWeibullSub;
        r.speed = {Speed::Kind::Poly, alpha / 2.0, 0.0};
        r.constant = base;
        return r;
      }
      r.regime = Regime::BottcherWeibullSuper;
      r.speed = {Speed::Kind::Poly, alpha / 2.0, alpha - 1.0};
      r.upsilon = B ? 2.0 * logb * logB / (alpha * (logB - logb)) : 2.0 * logb / alpha;
      r.constant = std::pow(*r.upsilon, alpha - 1.0) * base;
      return r;
    }
    case StepKind::Gumbel: {
      const double alpha = step.alpha();
      r.regime = Regime::BottcherGumbel;
      r.speed = {Speed::Kind::DoubleExp, alpha / (2.0 * (alpha + 1.0)), 0.0};
      r.log_log_scale = true;
      r.y_alpha = B ? (1.0 + alpha) * logB / ((1.0 + alpha) * logB - logb) : 1.0;
      r.constant = std::pow(*r.y_alpha * I * logb, alpha / (alpha + 1.0));
      return r;
    }
    case StepKind::Rademacher:
    case StepKind::BoundedUniform:
      r.regime = Regime::BottcherBounded;
      r.speed = {Speed::Kind::DoubleExp, 0.5, 0.0};
      r.log_log_scale = true;
      r.constant = I * logb / step.ess_sup();
      return r;
    case StepKind::Gaussian: break;
  }
  throw UncoveredRegime("no theorem covers the Bottcher case with step '" + step.to_string() +
                        "' and finite I_A(p): the tail is neither Weibull, Gumbel nor bounded");
}

}  // namespace brwldp
