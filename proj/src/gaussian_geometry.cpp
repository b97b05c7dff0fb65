#include "brwldp/gaussian_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "brwldp/normal.hpp"
#include "brwldp/optimize.hpp"
#include "brwldp/simd/kernels.hpp"

namespace brwldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScanStep = 0.01;
constexpr double kScanMargin = 8.0;
// Below this gap the inner supremum is treated as reaching p.
constexpr double kSupSlack = 1e-12;

double scan_half_width(const TargetSet& A) { return A.max_abs_endpoint() + kScanMargin; }

// ν((A − x)/s)
double shifted_measure(const TargetSet& A, double x, double s) {
  double m = 0.0;
  for (const auto& iv : A.intervals()) m += normal::interval_mass((iv.lo - x) / s, (iv.hi - x) / s);
  return m;
}

void check_p(const TargetSet& A, double p, const char* who) {
  const double nu = gaussian_measure(A);
  if (!(p < 1.0) || p < nu)
    throw std::invalid_argument(std::string(who) + ": need nu(A) <= p < 1 (nu(A) = " + std::to_string(nu) +
                                ", p = " + std::to_string(p) + ")");
}

// inf{x ∈ [0, W] : g(x) ≥ p}, +inf if the scan finds no crossing. Local maxima
// of the scan are refined so that a crossing inside one grid cell is not missed.
template <class G>
double first_crossing(G g, double p, double W, double h) {
  auto hit = [&](double x) { return g(x) >= p; };
  if (hit(0.0)) return 0.0;
  const int cells = static_cast<int>(std::ceil(W / h));
  double prev2 = -1.0;
  double prev = g(0.0);
  for (int i = 1; i <= cells; ++i) {
    const double x = i * h;
    const double cur = g(x);
    if (cur >= p) return optimize::bisect_predicate(hit, x - h, x);
    if (i >= 2 && prev >= prev2 && prev >= cur) {
      const auto r = optimize::golden_max(g, x - 2 * h, x);
      if (r.value >= p) return optimize::bisect_predicate(hit, x - 2 * h, r.x);
    }
    prev2 = prev;
    prev = cur;
  }
  return kInf;
}

}  // namespace

double gaussian_measure(const TargetSet& A) { return measure_affine(A, 1.0, 0.0); }

double measure_affine(const TargetSet& A, double a, double b) {
  if (!(a > 0)) throw std::invalid_argument("measure_affine: a must be positive");
  double m = 0.0;
  for (const auto& iv : A.intervals()) m += normal::interval_mass(a * iv.lo + b, a * iv.hi + b);
  return std::clamp(m, 0.0, 1.0);
}

ShiftSup sup_shift_measure(const TargetSet& A, double s) {
  if (!(s > 0)) throw std::invalid_argument("sup_shift_measure: scale must be positive");
  const double W = scan_half_width(A);
  const auto r = optimize::scan_max([&](double x) { return shifted_measure(A, x, s); }, -W, W,
                                    kScanStep * std::min(1.0, s));
  return {r.x, r.value};
}

IRate i_rate(const TargetSet& A, double p) {
  check_p(A, p, "i_rate");
  if (p == gaussian_measure(A)) return {0.0, 0.0};
  const auto sup = sup_shift_measure(A, 1.0);
  if (sup.value < p - kSupSlack) return {ExtendedReal::infinity(), sup.x};
  const double target = std::min(p, sup.value);
  const double W = scan_half_width(A);
  const double xp = first_crossing([&](double x) { return shifted_measure(A, x, 1.0); }, target, W, kScanStep);
  const double xm = first_crossing([&](double x) { return shifted_measure(A, -x, 1.0); }, target, W, kScanStep);
  if (std::isinf(xp) && std::isinf(xm)) return {std::abs(sup.x), sup.x};
  if (xp <= xm) return {xp, xp};
  return {xm, -xm};
}

JRate j_rate(const TargetSet& A, double p) {
  check_p(A, p, "j_rate");
  const auto sup0 = sup_shift_measure(A, 1.0);
  if (sup0.value >= p - kSupSlack) return {0.0, sup0.x};
  auto reaches = [&](double y) { return sup_shift_measure(A, std::sqrt(1.0 - y)).value >= p; };
  double hi = 0.75;
  while (!reaches(hi)) {
    hi = 1.0 - (1.0 - hi) / 4.0;
    if (1.0 - hi < 1e-12) throw std::invalid_argument("j_rate: no y < 1 reaches p (A has no mass)");
  }
  const double y = optimize::bisect_predicate(reaches, 0.0, hi, 1e-13);
  return {y, sup_shift_measure(A, std::sqrt(1.0 - y)).x};
}

GaussianRates gaussian_rates(const TargetSet& A, double p) {
  const auto ir = i_rate(A, p);
  if (ir.rate.is_finite()) return {ir.rate, 0.0, ir.witness_x, 0.0};
  const auto jr = j_rate(A, p);
  return {ir.rate, jr.rate, jr.witness_x, jr.rate};
}

SetCalculus set_calculus(const TargetSet& A, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("set_calculus: eps must be positive");
  std::vector<Interval> inner, outer, edges;
  for (const auto& iv : A.intervals()) {
    const Interval shrunk{iv.lo + eps, iv.hi - eps, true, true};
    if (shrunk.lo <= shrunk.hi) inner.push_back(shrunk);
    outer.push_back({iv.lo - eps, iv.hi + eps, true, true});
    if (std::isfinite(iv.lo)) edges.push_back({iv.lo - eps, iv.lo + eps, true, true});
    if (std::isfinite(iv.hi)) edges.push_back({iv.hi - eps, iv.hi + eps, true, true});
  }
  SetCalculus out{std::nullopt, TargetSet::union_of(outer), std::nullopt};
  if (!inner.empty()) out.interior = TargetSet::union_of(inner);
  if (!edges.empty()) out.boundary_nbhd = TargetSet::union_of(edges);
  return out;
}

double LatticePmf::measure(const TargetSet& A) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] != 0.0 && A.contains(position(i))) s += mass[i];
  return s;
}

double LatticePmf::total() const { return simd::sum(mass); }

LatticePmf convolve_n(const StepDistribution& step, int n) {
  const auto lat = step.lattice();
  if (!lat) throw std::invalid_argument("convolve_n: step '" + step.to_string() + "' is not a lattice law");
  if (n < 0) throw std::invalid_argument("convolve_n: n must be nonnegative");
  const int lo = lat->offsets.front();
  const int hi = lat->offsets.back();
  std::vector<double> kernel(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t i = 0; i < lat->offsets.size(); ++i) kernel[lat->offsets[i] - lo] += lat->probs[i];

  LatticePmf pmf{lat->spacing, 0, {1.0}};
  std::vector<double> next;
  const auto& k = simd::active();
  for (int step_i = 0; step_i < n; ++step_i) {
    next.resize(pmf.mass.size() + kernel.size() - 1);
    k.convolve(pmf.mass.data(), pmf.mass.size(), kernel.data(), kernel.size(), next.data());
    pmf.mass.swap(next);
    pmf.origin += lo;
  }
  return pmf;
}

double uniform_clt_gap(const StepDistribution& step, int n, const TargetSet& A, const std::vector<double>& a_grid,
                       const std::vector<double>& b_grid) {
  if (n < 1) throw std::invalid_argument("uniform_clt_gap: n must be positive");
  const auto pmf = convolve_n(step, n);
  const double rn = std::sqrt(static_cast<double>(n));
  double gap = 0.0;
  for (double a : a_grid) {
    for (double b : b_grid) {
      const double walk = pmf.measure(A.affine(a * rn, b * rn));
      gap = std::max(gap, std::abs(walk - measure_affine(A, a, b)));
    }
  }
  return gap;
}

}  // namespace brwldp
