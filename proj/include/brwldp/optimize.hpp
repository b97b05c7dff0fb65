#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace brwldp::optimize {

struct Extremum {
  double x;
  double value;
};

/// Bisection for the boundary of a monotone predicate on [lo, hi].
/// Requires pred(lo) == false and pred(hi) == true; returns the smallest x
/// (to within tol) where pred flips.
template <class Pred>
double bisect_predicate(Pred pred, double lo, double hi, double tol = 1e-14, int max_iter = 400) {
  for (int i = 0; i < max_iter && hi - lo > tol * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Root of a continuous function with f(lo) and f(hi) of opposite sign.
template <class F>
double bisect_root(F f, double lo, double hi, double tol = 1e-15, int max_iter = 400) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  const double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::invalid_argument("bisect_root: no sign change on bracket");
  for (int i = 0; i < max_iter && hi - lo > tol * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <class F>
Extremum golden_max(F f, double lo, double hi, double tol = 1e-12, int max_iter = 300) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  Extremum best{c, fc};
  if (fd > best.value) best = {d, fd};
  const double fa = f(lo), fb = f(hi);
  if (fa > best.value) best = {lo, fa};
  if (fb > best.value) best = {hi, fb};
  return best;
}

template <class F>
Extremum golden_min(F f, double lo, double hi, double tol = 1e-12, int max_iter = 300) {
  const auto r = golden_max([&](double x) { return -f(x); }, lo, hi, tol, max_iter);
  return {r.x, -r.value};
}

/// Global maximum of a smooth function on [lo, hi]: uniform scan at `step`,
/// then golden-section refinement around every local maximum of the scan.
template <class F>
Extremum scan_max(F f, double lo, double hi, double step) {
  const int cells = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
  const double h = (hi - lo) / cells;
  Extremum best{lo, f(lo)};
  double prev2 = best.value;
  double prev = f(lo + h);
  if (prev > best.value) best = {lo + h, prev};
  for (int i = 2; i <= cells; ++i) {
    const double x = lo + i * h;
    const double cur = f(x);
    if (prev >= prev2 && prev >= cur) {
      const auto r = golden_max(f, x - 2 * h, x);
      if (r.value > best.value) best = r;
    }
    if (cur > best.value) best = {x, cur};
    prev2 = prev;
    prev = cur;
  }
  return best;
}

}  // namespace brwldp::optimize
