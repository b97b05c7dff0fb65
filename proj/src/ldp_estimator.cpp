#include "brwldp/ldp_estimator.hpp"

#include <algorithm>
#include <random>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "brwldp/gaussian_geometry.hpp"
#include "brwldp/normal.hpp"
#include "brwldp/optimize.hpp"
#include "brwldp/parallel.hpp"
#include "brwldp/simd/kernels.hpp"

namespace brwldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

TargetSet scaled_target(const TargetSet& A, int n) { return A.affine(std::sqrt(static_cast<double>(n)), 0.0); }

// Runs a population to generation n and returns Z̄_n(S), switching to the
// mean flow once the population saturates.
class Evolver {
 public:
  Evolver(const BrwConfig& cfg, int n, const TargetSet& A, const Continuation& c)
      : cfg_(cfg), n_(n), S_(scaled_target(A, n)), cont_(c), lat_(cfg.step.lattice()) {
    if (lat_ && cont_.saturation > 0) {
      nu_.reserve(static_cast<std::size_t>(n) + 1);
      nu_.push_back({1.0});
      const auto& k = simd::active();
      for (int r = 1; r <= n; ++r) {
        const auto& prev = nu_.back();
        std::vector<double> next(prev.size() + lat_->offsets.back() - lat_->offsets.front(), 0.0);
        std::vector<double> step_pmf(lat_->offsets.back() - lat_->offsets.front() + 1, 0.0);
        for (std::size_t j = 0; j < lat_->offsets.size(); ++j)
          step_pmf[lat_->offsets[j] - lat_->offsets.front()] = lat_->probs[j];
        k.convolve(prev.data(), prev.size(), step_pmf.data(), step_pmf.size(), next.data());
        nu_.push_back(std::move(next));
      }
    }
  }

  const TargetSet& target() const { return S_; }
  bool lattice() const { return lat_.has_value(); }
  double spacing() const { return lat_ ? lat_->spacing : 1.0; }

  Population root() const { return lat_ ? Population::lattice_root(lat_->spacing) : Population::root(0.0); }

  Population normalise(Population pop) const {
    if (lat_ && pop.mode() == Population::Mode::List) return pop.to_lattice(lat_->spacing);
    return pop;
  }

  double finish(Population pop, Rng& rng) const {
    pop = normalise(std::move(pop));
    while (pop.generation() < n_) {
      const double total = static_cast<double>(pop.total());
      if (lat_ && cont_.saturation > 0 && total >= cont_.saturation) return mean_flow_lattice(pop);
      if (!lat_ && cont_.list_saturation > 0 && total >= cont_.list_saturation) return mean_flow_gaussian(pop);
      pop = advance(pop, cfg_, rng);
    }
    return static_cast<double>(pop.count_in(S_)) / static_cast<double>(pop.total());
  }

 private:
  double mean_flow_lattice(const Population& pop) const {
    const int r = n_ - pop.generation();
    const auto& nu = nu_[static_cast<std::size_t>(r)];
    std::vector<double> counts(pop.counts().begin(), pop.counts().end());
    LatticePmf out;
    out.spacing = lat_->spacing;
    out.origin = pop.origin() + static_cast<std::int64_t>(r) * lat_->offsets.front();
    out.mass.assign(counts.size() + nu.size() - 1, 0.0);
    simd::active().convolve(counts.data(), counts.size(), nu.data(), nu.size(), out.mass.data());
    return out.measure(S_) / out.total();
  }

  double mean_flow_gaussian(const Population& pop) const {
    const double sr = std::sqrt(static_cast<double>(n_ - pop.generation()));
    double acc = 0.0;
    pop.for_each([&](double x, std::uint64_t c) {
      acc += static_cast<double>(c) * measure_affine(S_, 1.0 / sr, -x / sr);
    });
    return acc / static_cast<double>(pop.total());
  }

  const BrwConfig& cfg_;
  int n_;
  TargetSet S_;
  Continuation cont_;
  std::optional<Lattice> lat_;
  std::vector<std::vector<double>> nu_;
};

struct Outcome {
  double weight = 1.0;
  double fraction = 0.0;
  bool matched = false;
  bool proposal = false;
  bool cap = false;
};

// 1/(w·R + 1 − w) from log R, stable for large R.
double mixture_weight(double log_r, double w) {
  if (log_r == -kInf) return 1.0 / (1.0 - w);
  if (log_r > 0) {
    const double inv = std::exp(-log_r);
    return inv / (w + (1.0 - w) * inv);
  }
  return 1.0 / (w * std::exp(log_r) + 1.0 - w);
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
  double ess = 0.0;
};

// Sample mean, its standard error and Kish ESS. Values are scaled by their
// maximum first so that tiny weights do not underflow when squared.
Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  const double R = static_cast<double>(v.size());
  const double top = *std::max_element(v.begin(), v.end());
  if (!(top > 0)) return m;
  const double mean = simd::sum(std::span<const double>(v)) / R;
  const double ms = mean / top;
  double ss = 0.0, s2 = 0.0;
  for (double x : v) {
    const double y = x / top;
    ss += (y - ms) * (y - ms);
    s2 += y * y;
  }
  m.mean = mean;
  m.se = v.size() > 1 ? top * std::sqrt(ss / (R - 1.0) / R) : 0.0;
  m.ess = (ms * R) * (ms * R) / s2;
  return m;
}

EstimationResult summarise(const std::vector<Outcome>& out, double p, Method method, int n, std::uint64_t seed,
                           double w) {
  EstimationResult r;
  r.n = n;
  r.p = p;
  r.method = method;
  r.seed = seed;
  std::vector<double> v;
  v.reserve(out.size());
  for (const auto& o : out) {
    if (o.cap) {
      ++r.cap_exceeded;
      continue;
    }
    const bool hit = o.fraction >= p;
    if (hit) ++r.hits;
    v.push_back(hit ? o.weight : 0.0);
  }
  r.replicas = v.size();
  if (v.empty()) {
    r.log_estimate = -kInf;
    return r;
  }
  const double R = static_cast<double>(v.size());
  const Moments mv = moments(v);
  r.estimate = std::clamp(mv.mean, 0.0, method == Method::Naive ? 1.0 : kInf);
  if (method == Method::Naive) {
    r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / R);
    r.effective_sample_size = R;
  } else {
    r.std_error = mv.se;
    r.effective_sample_size = mv.ess;
  }
  r.log_estimate = r.estimate > 0 ? std::log(r.estimate) : -kInf;
  if (r.hits == 0) r.zero_hit_bound = 3.0 / R * (method == Method::Naive ? 1.0 : 1.0 / (1.0 - w));

  if (method != Method::Naive) {
    std::vector<double> e;
    std::uint64_t prop = 0, prop_hit = 0;
    for (const auto& o : out) {
      if (o.cap) continue;
      e.push_back(o.matched ? o.weight : 0.0);
      if (o.proposal) {
        ++prop;
        if (o.fraction >= p) ++prop_hit;
      }
    }
    const Moments me = moments(e);
    r.event_mass = me.mean;
    r.event_mass_se = me.se;
    if (prop) r.conditional_success = static_cast<double>(prop_hit) / static_cast<double>(prop);
  }
  return r;
}

std::vector<Outcome> naive_outcomes(const BrwConfig& cfg, int n, const TargetSet& A, std::uint64_t replicas,
                                    std::uint64_t seed, const EstimatorOptions& opt) {
  if (replicas < 1) throw std::invalid_argument("naive_estimate: replicas must be positive");
  const Evolver ev(cfg, n, A, opt.continuation);
  return run_replicas<Outcome>(
      replicas,
      [&](std::size_t i) {
        Rng rng(seed, i);
        Outcome o;
        try {
          o.fraction = ev.finish(ev.root(), rng);
        } catch (const CapExceeded&) {
          o.cap = true;
        }
        return o;
      },
      opt.threads);
}

// Step law exponentially tilted by θ: density ∝ e^{θx} dF(x).
class TiltedStep {
 public:
  TiltedStep(const StepDistribution& step, double theta) : step_(step), theta_(theta) {
    if (auto lat = step.lattice()) {
      lat_ = lat;
      double z = 0.0;
      for (std::size_t j = 0; j < lat->offsets.size(); ++j) {
        const double w = lat->probs[j] * std::exp(theta * lat->spacing * lat->offsets[j]);
        cum_.push_back(z += w);
      }
      for (double& c : cum_) c /= z;
      log_z_ = std::log(z);
    } else if (step.kind() == StepKind::Gaussian) {
      log_z_ = 0.5 * theta * theta;
    } else if (step.kind() == StepKind::BoundedUniform) {
      L_ = step.ess_sup();
      const double q = step.atom(L_);
      const double r = step.atom(0.0);
      const double cont = 1.0 - 2.0 * q - r;
      const double tl = std::abs(theta) * L_;
      const double shape = tl < 1e-8 ? 1.0 : std::sinh(tl) / tl;
      w_pos_ = q * std::exp(theta * L_);
      w_neg_ = q * std::exp(-theta * L_);
      w_zero_ = r;
      w_cont_ = cont * shape;
      log_z_ = std::log(w_pos_ + w_neg_ + w_zero_ + w_cont_);
    } else {
      throw std::invalid_argument("tilted sampling needs a lattice, Gaussian or bounded-uniform step");
    }
  }

  double log_mgf() const { return log_z_; }
  double log_ratio(double x) const { return theta_ * x - log_z_; }

  double sample(Rng& rng) const {
    const double u = rng.uniform();
    if (lat_) {
      const auto j = static_cast<std::size_t>(std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
      return lat_->spacing * lat_->offsets[std::min(j, cum_.size() - 1)];
    }
    if (step_.kind() == StepKind::Gaussian) return theta_ + normal::quantile(u);
    const double z = w_pos_ + w_neg_ + w_zero_ + w_cont_;
    double v = u * z;
    if ((v -= w_pos_) < 0) return L_;
    if ((v -= w_neg_) < 0) return -L_;
    if ((v -= w_zero_) < 0) return 0.0;
    const double s = rng.uniform();
    const double th = std::abs(theta_);
    double x;
    if (th * L_ < 1e-8) {
      x = L_ * (2.0 * s - 1.0);
    } else {
      x = L_ + std::log(s + (1.0 - s) * std::exp(-2.0 * th * L_)) / th;
    }
    return theta_ < 0 ? -x : x;
  }

 private:
  const StepDistribution& step_;
  double theta_;
  double log_z_ = 0.0;
  std::optional<Lattice> lat_;
  std::vector<double> cum_;
  double L_ = 0.0, w_pos_ = 0.0, w_neg_ = 0.0, w_zero_ = 0.0, w_cont_ = 0.0;
};

double single_position(const Population& pop) {
  if (pop.mode() == Population::Mode::Lattice) return pop.spacing() * static_cast<double>(pop.origin());
  return pop.positions().front();
}

Population point_population(const Evolver& ev, double x, int gen) {
  if (ev.lattice()) return Population::lattice(ev.spacing(), std::llround(x / ev.spacing()), {1}, gen);
  return Population::list({x}, gen);
}

double snap(const StepDistribution& step, double v) {
  const auto lat = step.lattice();
  double best = 0.0, dist = kInf;
  for (int o : lat->offsets) {
    const double x = lat->spacing * o;
    if (std::abs(x - v) < dist) {
      dist = std::abs(x - v);
      best = x;
    }
  }
  return best;
}

Window snap_window(const StepDistribution& step, Window w) {
  if (!step.lattice()) return w;
  if (step.window_prob(w.lo, w.hi) > 0) return w;
  const double v = snap(step, 0.5 * (w.lo + w.hi));
  return {v, v};
}

void check_window(const StepDistribution& step, const Window& w, const char* what) {
  if (!(w.lo <= w.hi)) throw std::invalid_argument(std::string(what) + ": window is empty");
  if (!(step.window_prob(w.lo, w.hi) > 0)) throw std::invalid_argument(std::string(what) + ": window has no mass");
}

struct Target {
  double I;
  double x0;
  double eps;
  double eta;
};

Target target_point(const TargetSet& A, double p, std::optional<double> eta, std::optional<double> eps) {
  const auto ir = i_rate(A, p);
  if (!ir.rate.is_finite()) throw HypothesisError("spine schedule: I_A(p) is infinite");
  const double I = ir.rate.value();
  Target t;
  t.I = I;
  t.eps = eps.value_or(0.1 * I);
  t.eta = eta.value_or(0.05 * I);
  if (!(t.eta > 0)) throw std::invalid_argument("spine schedule: eta must be positive (degenerate window)");
  if (!(t.eps >= 0)) throw std::invalid_argument("spine schedule: eps must be nonnegative");
  t.x0 = (ir.witness_x < 0 ? -1.0 : 1.0) * (I + t.eps);
  return t;
}

// Floor that absorbs rounding, so log 64/log 2 gives 6 and not 5.
int floor_int(double x) { return static_cast<int>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x)))); }

// Roles in the forced tree.
enum : std::uint8_t { kOther = 0, kSpine = 1, kFat = 2 };

struct Node {
  double x;
  std::uint8_t role;
};

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::IsSchroder: return "is_schroder";
    case Method::IsBottcher: return "is_bottcher";
  }
  return "?";
}

EstimationResult naive_estimate(const BrwConfig& cfg, int n, const TargetSet& A, double p, std::uint64_t replicas,
                                std::uint64_t seed, const EstimatorOptions& opt) {
  return summarise(naive_outcomes(cfg, n, A, replicas, seed, opt), p, Method::Naive, n, seed, 0.0);
}

std::vector<EstimationResult> naive_estimate_multi(const BrwConfig& cfg, int n, const TargetSet& A,
                                                   const std::vector<double>& ps, std::uint64_t replicas,
                                                   std::uint64_t seed, const EstimatorOptions& opt) {
  const auto out = naive_outcomes(cfg, n, A, replicas, seed, opt);
  std::vector<EstimationResult> res;
  for (double p : ps) res.push_back(summarise(out, p, Method::Naive, n, seed, 0.0));
  return res;
}

nlohmann::json SpineSchedule::to_json() const {
  auto win = [](const Window& w) { return nlohmann::json::array({w.lo, w.hi}); };
  nlohmann::json j;
  j["method"] = to_string(method);
  j["n"] = n;
  j["t_n"] = t_n;
  j["x0"] = x0;
  j["eps"] = eps;
  j["eta"] = eta;
  if (method == Method::IsSchroder) {
    j["a"] = a;
    j["C_a"] = C_a;
    j["tilt"] = tilt;
    j["target_window"] = win(target);
  } else {
    j["b"] = b;
    j["d"] = d;
    j["s_n"] = s_n;
    j["spine_window"] = win(spine);
    auto f = nlohmann::json::array();
    for (const auto& w : fat) f.push_back(win(w));
    j["fat_windows"] = f;
    j["n0"] = n0 ? nlohmann::json(*n0) : nlohmann::json(nullptr);
  }
  return j;
}

SpineSchedule schedule_schroder(const StepDistribution& step, const TargetSet& A, double p, int n, double a,
                                std::optional<double> eta, std::optional<double> eps) {
  if (!(a > 0)) throw std::invalid_argument("schedule_schroder: a must be positive");
  const Target tg = target_point(A, p, eta, eps);
  SpineSchedule s;
  s.method = Method::IsSchroder;
  s.n = n;
  s.a = a;
  s.eps = tg.eps;
  s.eta = tg.eta;
  s.x0 = tg.x0;
  s.C_a = (tg.I + tg.eps) / a;
  s.t_n = floor_int(s.C_a * std::sqrt(static_cast<double>(n)));
  if (s.t_n < 1 || s.t_n >= n)
    throw std::invalid_argument("schedule_schroder: spine length " + std::to_string(s.t_n) + " outside [1, n)");
  const double theta = tilt_for_drift(step, a);
  s.tilt = tg.x0 < 0 ? -theta : theta;
  const double rn = std::sqrt(static_cast<double>(n));
  const double e1 = (1.0 + tg.eta) * tg.x0 * rn, e2 = tg.x0 * rn;
  s.target = {std::min(e1, e2), std::max(e1, e2)};
  return s;
}

double optimal_spine_drift(const OffspringDistribution& offspring, const StepDistribution& step) {
  return step.log_mgf_derivative(bar_lambda(step, offspring.p1()).value);
}

EstimationResult is_schroder_estimate(const BrwConfig& cfg, int n, const TargetSet& A, double p,
                                      const SpineSchedule& schedule, std::uint64_t replicas, std::uint64_t seed,
                                      const EstimatorOptions& opt) {
  if (schedule.method != Method::IsSchroder) throw std::invalid_argument("is_schroder_estimate: not a Schroder schedule");
  if (!(cfg.offspring.p1() > 0)) throw HypothesisError("is_schroder_estimate: needs p1 > 0");
  if (schedule.t_n < 1 || schedule.t_n > n) throw std::invalid_argument("is_schroder_estimate: spine length outside [1, n]");
  if (replicas < 1) throw std::invalid_argument("is_schroder_estimate: replicas must be positive");
  const double w = opt.mixture;
  if (!(w >= 0 && w < 1)) throw std::invalid_argument("is_schroder_estimate: mixture must lie in [0, 1)");
  const Evolver ev(cfg, n, A, opt.continuation);
  const TiltedStep tilted(cfg.step, schedule.tilt);
  const double log_p1 = std::log(cfg.offspring.p1());

  // Spine lengths of the mixture, each with probability w/|lengths|.
  std::vector<int> lengths;
  if (opt.spread_spine) {
    const int lo = std::max(1, (schedule.t_n + 1) / 2);
    const int hi = std::max(lo, std::min(n - 1, 2 * schedule.t_n));
    for (int t = lo; t <= hi; ++t) lengths.push_back(t);
  } else {
    lengths.push_back(schedule.t_n);
  }
  const int t_max = lengths.back();
  const double wc = w / static_cast<double>(lengths.size());

  auto out = run_replicas<Outcome>(
      replicas,
      [&](std::size_t i) {
        Rng rng(seed, i);
        Outcome o;
        const double u = rng.uniform();
        o.proposal = u < w;
        const int forced =
            o.proposal ? lengths[std::min(lengths.size() - 1, static_cast<std::size_t>(u / wc))] : 0;
        try {
          // Partial sums of Σ(θX − Λ(θ)) while the population is one individual.
          std::vector<double> log_lr{0.0};
          double x = 0.0;
          for (int g = 0; g < forced; ++g) {
            const double X = tilted.sample(rng);
            x += X;
            log_lr.push_back(log_lr.back() + tilted.log_ratio(X));
          }
          Population pop = forced ? point_population(ev, x, forced) : ev.root();
          while (pop.generation() < t_max && pop.total() == 1) {
            pop = advance(pop, cfg, rng);
            if (pop.total() != 1) break;
            const double y = single_position(pop);
            log_lr.push_back(log_lr.back() + tilted.log_ratio(y - x));
            x = y;
          }
          const int single = static_cast<int>(log_lr.size()) - 1;
          // Balance heuristic: weight = 1/((1 − w) + Σ_t w_t R_t).
          double acc = 1.0 - w;
          for (int t : lengths) {
            if (t > single) continue;
            acc += wc * std::exp(-t * log_p1 + log_lr[static_cast<std::size_t>(t)]);
          }
          o.matched = single >= schedule.t_n;
          o.weight = 1.0 / acc;
          o.fraction = ev.finish(std::move(pop), rng);
        } catch (const CapExceeded&) {
          o.cap = true;
        }
        return o;
      },
      opt.threads);
  return summarise(out, p, Method::IsSchroder, n, seed, w);
}

double half_mass_bound(const StepDistribution& step) {
  if (auto lat = step.lattice()) {
    for (int k = 0;; ++k) {
      const double M = lat->spacing * k;
      if (1.0 - step.abs_tail(M) >= 0.5) return M;
    }
  }
  if (1.0 - step.abs_tail(0.0) >= 0.5) return 0.0;
  double hi = 1.0;
  while (1.0 - step.abs_tail(hi) < 0.5) hi *= 2.0;
  return optimize::bisect_predicate([&](double M) { return 1.0 - step.abs_tail(M) >= 0.5; }, 0.0, hi, 1e-14);
}

namespace {

struct BottcherParams {
  int t_n = 0;
  int s_n = 0;
  Window spine;
  std::vector<Window> fat;
};

// Schedule at a given n; nullopt when n is too small for the construction.
std::optional<BottcherParams> bottcher_params(const OffspringDistribution& offspring, const StepDistribution& step,
                                              double n, int d, double t, double x0, double eta, double M) {
  const double lb = std::log(static_cast<double>(offspring.b()));
  const double ld = std::log(static_cast<double>(d));
  const double ln = std::log(n);
  const double rn = std::sqrt(n);
  BottcherParams bp;
  if (step.kind() == StepKind::Gumbel) {
    const double al = step.alpha();
    const double yd = (1.0 + al) * ld / ((1.0 + al) * ld - lb);
    const double X = std::pow(std::abs(x0) * yd * lb, 1.0 / (al + 1.0));
    const double scale = std::pow(n, 1.0 / (2.0 * (al + 1.0)));
    bp.t_n = floor_int(t * std::pow(n, al / (2.0 * (al + 1.0))) - 2.0 * ln / lb);
    if (bp.t_n < 1) return std::nullopt;
    bp.s_n = std::min(floor_int((ln + bp.t_n * lb) / ld), bp.t_n);
    if (bp.s_n < 1) return std::nullopt;
    const double width = eta / (2.0 * t) * scale;
    const double sgn = x0 < 0 ? -1.0 : 1.0;
    auto oriented = [&](double lo) {
      return sgn > 0 ? Window{lo, lo + width} : Window{-(lo + width), -lo};
    };
    bp.spine = oriented(X * scale);
    for (int k = 1; k <= bp.s_n; ++k) {
      const double inner = std::pow(X, al) * std::pow(n, al / (2.0 * (al + 1.0))) - k * ld;
      bp.fat.push_back(oriented(std::pow(std::max(inner, 0.0), 1.0 / al)));
    }
  } else {
    const double al = step.kind() == StepKind::Weibull ? step.alpha() : 2.0;
    if (!(ln > 1.0)) return std::nullopt;
    bp.t_n = floor_int(al / (2.0 * lb) * ln - t * std::log(ln));
    bp.s_n = floor_int((std::log(ln) + bp.t_n * lb) / ld);
    bp.s_n = std::min(bp.s_n, bp.t_n - 1);
    if (bp.t_n < 2 || bp.s_n < 1) return std::nullopt;
    const double k = static_cast<double>(bp.t_n - bp.s_n);
    bp.spine = {(x0 - eta / 2.0) * rn / k, (x0 + eta / 2.0) * rn / k};
    bp.fat.assign(static_cast<std::size_t>(bp.s_n), Window{-M, M});
  }
  bp.spine = snap_window(step, bp.spine);
  for (auto& f : bp.fat) f = snap_window(step, f);
  return bp;
}

bool nested(const BottcherParams& bp, double n, double x0, double eta) {
  double lo = (bp.t_n - bp.s_n) * bp.spine.lo, hi = (bp.t_n - bp.s_n) * bp.spine.hi;
  for (const auto& f : bp.fat) {
    lo += f.lo;
    hi += f.hi;
  }
  const double rn = std::sqrt(n);
  return lo >= (x0 - eta) * rn && hi <= (x0 + eta) * rn;
}

void validate_bottcher(const OffspringDistribution& offspring, const StepDistribution& step, const SpineSchedule& s) {
  if (offspring.schroder()) throw HypothesisError("Bottcher schedule: needs p1 = 0");
  if (s.t_n < 1) throw std::invalid_argument("Bottcher schedule: t_n must be positive");
  if (s.s_n < 0 || s.s_n > s.t_n) throw std::invalid_argument("Bottcher schedule: s_n outside [0, t_n]");
  if (s.d < s.b) throw std::invalid_argument("Bottcher schedule: d < b");
  if (!(offspring.pk(s.d) > 0)) throw std::invalid_argument("Bottcher schedule: p_d = 0");
  if (static_cast<int>(s.fat.size()) != s.s_n) throw std::invalid_argument("Bottcher schedule: one fat window per level");
  if (s.t_n > s.s_n) check_window(step, s.spine, "Bottcher schedule spine");
  for (const auto& f : s.fat) check_window(step, f, "Bottcher schedule fat level");
}

}  // namespace

SpineSchedule schedule_bottcher(const OffspringDistribution& offspring, const StepDistribution& step,
                                const TargetSet& A, double p, int n, int d, std::optional<double> t,
                                std::optional<double> eta, std::optional<double> eps) {
  if (offspring.schroder()) throw HypothesisError("schedule_bottcher: needs p1 = 0");
  const int b = offspring.b();
  if (!(offspring.pk(d) > 0)) throw std::invalid_argument("schedule_bottcher: p_d = 0 for d = " + std::to_string(d));
  const bool super = step.kind() == StepKind::Weibull && step.alpha() > 1.0;
  if (super ? d <= b : d < b)
    throw std::invalid_argument(super ? "schedule_bottcher: Weibull tails with alpha > 1 need d > b"
                                      : "schedule_bottcher: needs d >= b");
  const Target tg = target_point(A, p, eta, eps);
  const double M = half_mass_bound(step);
  double tt;
  if (step.kind() == StepKind::Gumbel) {
    const double al = step.alpha();
    const double lb = std::log(static_cast<double>(b)), ld = std::log(static_cast<double>(d));
    const double yd = (1.0 + al) * ld / ((1.0 + al) * ld - lb);
    const double X = std::pow(std::abs(tg.x0) * yd * lb, 1.0 / (al + 1.0));
    tt = t.value_or(std::pow(X, al) / lb);
  } else {
    tt = t.value_or(0.0);
  }
  const auto bp = bottcher_params(offspring, step, n, d, tt, tg.x0, tg.eta, M);
  if (!bp) throw std::invalid_argument("schedule_bottcher: n = " + std::to_string(n) + " too small for positive t_n, s_n");

  SpineSchedule s;
  s.method = Method::IsBottcher;
  s.n = n;
  s.t_n = bp->t_n;
  s.s_n = bp->s_n;
  s.b = b;
  s.d = d;
  s.x0 = tg.x0;
  s.eps = tg.eps;
  s.eta = tg.eta;
  s.spine = bp->spine;
  s.fat = bp->fat;
  validate_bottcher(offspring, step, s);

  // n0: from here on every grid point up to 1e12 is nested.
  std::optional<double> n0;
  for (double m = std::max(3.0, static_cast<double>(n)); m <= 1e12; m *= 1.05) {
    const auto q = bottcher_params(offspring, step, std::floor(m), d, tt, tg.x0, tg.eta, M);
    const bool ok = q && nested(*q, std::floor(m), tg.x0, tg.eta);
    if (ok && !n0) n0 = std::floor(m);
    if (!ok) n0.reset();
  }
  s.n0 = n0;
  return s;
}

SpineSchedule manual_bottcher_schedule(const OffspringDistribution& offspring, const StepDistribution& step, int n,
                                       int t_n, int s_n, int d, Window spine, std::vector<Window> fat) {
  SpineSchedule s;
  s.method = Method::IsBottcher;
  s.n = n;
  s.t_n = t_n;
  s.s_n = s_n;
  s.b = offspring.b();
  s.d = d;
  s.spine = spine;
  s.fat = std::move(fat);
  if (t_n >= n) throw std::invalid_argument("manual schedule: t_n must be below n");
  validate_bottcher(offspring, step, s);
  return s;
}

double spine_event_log_prob(const OffspringDistribution& offspring, const StepDistribution& step,
                            const SpineSchedule& s) {
  const int k0 = s.t_n - s.s_n;
  const double lpb = std::log(offspring.pk(s.b));
  const double lpd = std::log(offspring.pk(s.d));
  const double b = s.b, d = s.d;
  double lp = 0.0;
  for (int j = 0; j < s.t_n; ++j) {
    if (j < k0) {
      lp += std::pow(b, j) * lpb;
    } else {
      lp += std::pow(d, j - k0) * lpd + (std::pow(b, k0) - 1.0) * std::pow(b, j - k0) * lpb;
    }
  }
  if (k0 > 0) lp += k0 * std::log(step.window_prob(s.spine.lo, s.spine.hi));
  for (int k = 1; k <= s.s_n; ++k)
    lp += std::pow(d, k) * std::log(step.window_prob(s.fat[k - 1].lo, s.fat[k - 1].hi));
  return lp;
}

EstimationResult is_bottcher_estimate(const BrwConfig& cfg, int n, const TargetSet& A, double p,
                                      const SpineSchedule& s, std::uint64_t replicas, std::uint64_t seed,
                                      const EstimatorOptions& opt) {
  if (s.method != Method::IsBottcher) throw std::invalid_argument("is_bottcher_estimate: not a Bottcher schedule");
  validate_bottcher(cfg.offspring, cfg.step, s);
  if (s.t_n >= n) throw std::invalid_argument("is_bottcher_estimate: t_n must be below n");
  if (replicas < 1) throw std::invalid_argument("is_bottcher_estimate: replicas must be positive");
  const double w = opt.mixture;
  if (!(w >= 0 && w < 1)) throw std::invalid_argument("is_bottcher_estimate: mixture must lie in [0, 1)");
  const double forced_size = std::pow(s.b, s.t_n) - std::pow(s.b, s.s_n) + std::pow(s.d, s.s_n);
  if (forced_size > cfg.population_cap)
    throw std::invalid_argument("is_bottcher_estimate: forced tree exceeds the population cap");
  const Evolver ev(cfg, n, A, opt.continuation);
  const int k0 = s.t_n - s.s_n;
  const double log_pb = std::log(cfg.offspring.pk(s.b));
  const double log_pd = std::log(cfg.offspring.pk(s.d));
  const double log_spine = k0 > 0 ? std::log(cfg.step.window_prob(s.spine.lo, s.spine.hi)) : 0.0;
  std::vector<double> log_fat;
  for (const auto& f : s.fat) log_fat.push_back(std::log(cfg.step.window_prob(f.lo, f.hi)));

  auto out = run_replicas<Outcome>(
      replicas,
      [&](std::size_t i) {
        Rng rng(seed, i);
        Outcome o;
        o.proposal = rng.uniform() < w;
        const bool forced = o.proposal;
        bool matched = true;
        double log_r = 0.0;
        std::vector<Node> cur{{0.0, kSpine}}, next;
        try {
          for (int j = 0; j < s.t_n; ++j) {
            next.clear();
            for (const Node& nd : cur) {
              const bool fat_parent = nd.role == kFat || (nd.role == kSpine && j == k0);
              const int need = fat_parent ? s.d : s.b;
              const int k = forced ? need : cfg.offspring.sample(rng);
              const bool tracked = matched;
              if (tracked) {
                if (k != need) {
                  matched = false;
                } else {
                  log_r -= fat_parent ? log_pd : log_pb;
                }
              }
              for (int c = 0; c < k; ++c) {
                std::uint8_t role = kOther;
                if (tracked && matched) {
                  if (fat_parent) role = kFat;
                  else if (nd.role == kSpine && c == 0) role = kSpine;
                }
                double X;
                if (role == kOther) {
                  X = cfg.step.sample(rng);
                } else {
                  const Window& win = role == kSpine ? s.spine : s.fat[static_cast<std::size_t>(j + 1 - k0 - 1)];
                  const double lw = role == kSpine ? log_spine : log_fat[static_cast<std::size_t>(j - k0)];
                  if (forced) {
                    X = cfg.step.sample_window(rng, win.lo, win.hi);
                  } else {
                    X = cfg.step.sample(rng);
                    if (X < win.lo || X > win.hi) matched = false;
                  }
                  if (matched) log_r -= lw;
                }
                next.push_back({nd.x + X, matched ? role : std::uint8_t{kOther}});
              }
            }
            if (static_cast<double>(next.size()) > cfg.population_cap) throw CapExceeded(j + 1, static_cast<double>(next.size()));
            cur.swap(next);
          }
          o.matched = matched;
          o.weight = mixture_weight(matched ? log_r : -kInf, w);
          std::vector<double> pos;
          pos.reserve(cur.size());
          for (const auto& nd : cur) pos.push_back(nd.x);
          if (ev.lattice())
            for (double& x : pos) x = ev.spacing() * static_cast<double>(std::llround(x / ev.spacing()));
          o.fraction = ev.finish(Population::list(std::move(pos), s.t_n), rng);
        } catch (const CapExceeded&) {
          o.cap = true;
        }
        return o;
      },
      opt.threads);
  return summarise(out, p, Method::IsBottcher, n, seed, w);
}

RateFit fit_rate(const std::vector<EstimationResult>& results, const Speed& speed, bool log_log_scale) {
  std::vector<double> xs, ys;
  RateFit f;
  for (const auto& r : results) {
    const bool usable = r.estimate > 0 && (!log_log_scale || r.estimate < 1);
    if (!usable) {
      f.n_excluded.push_back(r.n);
      continue;
    }
    xs.push_back(-speed(r.n));
    ys.push_back(log_log_scale ? std::log(-std::log(r.estimate)) : std::log(r.estimate));
    f.n_used.push_back(r.n);
  }
  if (xs.size() < 3) throw std::invalid_argument("fit_rate: fewer than 3 usable estimates");
  const double k = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit_rate: speeds do not vary");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

namespace {

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::uint64_t> bin(trials, p);
  return bin(rng);
}

// Exponential tilt of Y = C − c·N, C the generation-n count in S and N the
// generation-n total, for a BRW started at lattice site x. L[r][x] is
// log E e^{θY} for a subtree with r generations left and G[r][x] the log mgf
// of one child's subtree. Under the tilted law the process is again a BRW
// whose offspring and step laws depend on (r, x):
//   p̃_k = p_k e^{k G_r(x) − L_r(x)},   q̃_j = q_j e^{L_{r−1}(x + o_j) − G_r(x)}.
class TiltedBrw {
 public:
  TiltedBrw(const OffspringDistribution& off, const Lattice& lat, const TargetSet& S, double c, int n,
            std::int64_t lo, std::int64_t hi)
      : off_(off), lat_(lat), S_(S), c_(c), n_(n) {
    const std::int64_t reach = static_cast<std::int64_t>(n) *
                               std::max(std::abs(lat.offsets.front()), std::abs(lat.offsets.back()));
    lo_ = lo - reach;
    width_ = static_cast<std::size_t>(hi + reach - lo_ + 1);
  }

  void set_theta(double theta) {
    theta_ = theta;
    L_.assign(static_cast<std::size_t>(n_) + 1, std::vector<double>(width_));
    G_ = L_;
    for (std::size_t i = 0; i < width_; ++i)
      L_[0][i] = theta * ((S_.contains(site(i)) ? 1.0 : 0.0) - c_);
    const auto& pk = off_.pmf();
    for (int r = 1; r <= n_; ++r) {
      for (std::size_t i = 0; i < width_; ++i) {
        double g = -kInf;
        for (std::size_t j = 0; j < lat_.offsets.size(); ++j)
          g = log_sum_exp(g, std::log(lat_.probs[j]) + L_[r - 1][clamp(i, lat_.offsets[j])]);
        double l = -kInf;
        for (std::size_t k = 1; k < pk.size(); ++k)
          if (pk[k] > 0) l = log_sum_exp(l, std::log(pk[k]) + static_cast<double>(k) * g);
        G_[r][i] = g;
        L_[r][i] = l;
      }
    }
  }

  /// log E e^{θ Σ Y_i} for one root per entry of `roots`.
  double log_mgf(const std::vector<std::int64_t>& roots) const {
    double k = 0.0;
    for (auto x : roots) k += L_[n_][static_cast<std::size_t>(x - lo_)];
    return k;
  }

  /// Y under the tilted law, from the given start counts.
  double sample(const std::vector<std::int64_t>& roots, Rng& rng) const {
    std::vector<std::uint64_t> cur(width_, 0), next(width_, 0);
    for (auto x : roots) ++cur[static_cast<std::size_t>(x - lo_)];
    const auto& pk = off_.pmf();
    std::vector<double> pt(pk.size()), qt(lat_.offsets.size());
    for (int r = n_; r >= 1; --r) {
      std::fill(next.begin(), next.end(), 0);
      for (std::size_t i = 0; i < width_; ++i) {
        if (!cur[i]) continue;
        for (std::size_t k = 0; k < pk.size(); ++k)
          pt[k] = pk[k] > 0 ? std::exp(std::log(pk[k]) + static_cast<double>(k) * G_[r][i] - L_[r][i]) : 0.0;
        std::uint64_t children = 0, left = cur[i];
        double rest = 1.0;
        for (std::size_t k = 0; k < pk.size() && left > 0; ++k) {
          const std::uint64_t got = k + 1 == pk.size() ? left : binomial(rng, left, pt[k] / rest);
          children += k * got;
          left -= got;
          rest -= pt[k];
        }
        for (std::size_t j = 0; j < qt.size(); ++j)
          qt[j] = std::exp(std::log(lat_.probs[j]) + L_[r - 1][clamp(i, lat_.offsets[j])] - G_[r][i]);
        rest = 1.0;
        for (std::size_t j = 0; j < qt.size() && children > 0; ++j) {
          const std::uint64_t got = j + 1 == qt.size() ? children : binomial(rng, children, qt[j] / rest);
          next[clamp(i, lat_.offsets[j])] += got;
          children -= got;
          rest -= qt[j];
        }
      }
      cur.swap(next);
    }
    double y = 0.0;
    for (std::size_t i = 0; i < width_; ++i)
      if (cur[i]) y += static_cast<double>(cur[i]) * ((S_.contains(site(i)) ? 1.0 : 0.0) - c_);
    return y;
  }

  double theta() const { return theta_; }

 private:
  double site(std::size_t i) const { return lat_.spacing * static_cast<double>(lo_ + static_cast<std::int64_t>(i)); }
  // Unreachable cells at the domain edge read their nearest neighbour.
  std::size_t clamp(std::size_t i, int off) const {
    const auto j = static_cast<std::int64_t>(i) + off;
    return static_cast<std::size_t>(std::clamp<std::int64_t>(j, 0, static_cast<std::int64_t>(width_) - 1));
  }

  const OffspringDistribution& off_;
  const Lattice& lat_;
  const TargetSet& S_;
  double c_;
  int n_;
  std::int64_t lo_ = 0;
  std::size_t width_ = 0;
  double theta_ = 0.0;
  std::vector<std::vector<double>> L_, G_;
};

double fit_slope(const std::vector<double>& fx, const std::vector<double>& fy) {
  const double m = static_cast<double>(fx.size());
  const double mx = std::accumulate(fx.begin(), fx.end(), 0.0) / m;
  const double my = std::accumulate(fy.begin(), fy.end(), 0.0) / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    sxx += (fx[i] - mx) * (fx[i] - mx);
    sxy += (fx[i] - mx) * (fy[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

std::string to_string(ConcentrationMethod m) { return m == ConcentrationMethod::Naive ? "naive" : "tilted"; }

ConcentrationResult concentration_check(const BrwConfig& cfg, const std::vector<int>& sizes, const TargetSet& A,
                                        double delta, int n, std::uint64_t replicas, std::uint64_t seed,
                                        ConcentrationMethod method, const EstimatorOptions& opt) {
  const auto lat = cfg.step.lattice();
  if (!lat) throw std::invalid_argument("concentration_check: needs a lattice step");
  if (!(delta > 0)) throw std::invalid_argument("concentration_check: delta must be positive");
  if (replicas < 1) throw std::invalid_argument("concentration_check: replicas must be positive");
  const bool tilted = method == ConcentrationMethod::Tilted;
  if (tilted && !cfg.offspring.finite_support())
    throw std::invalid_argument("concentration_check: the tilted method needs finite offspring support");
  const Evolver ev(cfg, n, A, opt.continuation);
  const LatticePmf nu = convolve_n(cfg.step, n);
  const double rn = std::sqrt(static_cast<double>(n));
  ConcentrationResult res;
  res.delta = delta;
  res.method = method;
  std::vector<double> fx, fy;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int k = sizes[si];
    if (k < 1) throw std::invalid_argument("concentration_check: sizes must be positive");
    std::vector<std::int64_t> idx;
    for (int j = 0; j < k; ++j) {
      const double x = k == 1 ? 0.0 : -rn + 2.0 * rn * j / (k - 1);
      idx.push_back(std::llround(x / lat->spacing));
    }
    const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
    double mean = 0.0;
    for (auto i : idx) {
      LatticePmf shifted = nu;
      shifted.origin += i;
      mean += shifted.measure(ev.target());
    }
    mean /= k;
    const std::uint64_t sub = seed ^ (0x9e3779b97f4a7c15ULL * (si + 1));
    ConcentrationPoint pt;
    pt.size = k;
    pt.mean = mean;
    std::vector<double> v;
    if (!tilted) {
      std::vector<std::uint64_t> counts(static_cast<std::size_t>(*hi - *lo + 1), 0);
      for (auto i : idx) ++counts[static_cast<std::size_t>(i - *lo)];
      const Population start = Population::lattice(lat->spacing, *lo, counts, 0);
      const auto frac = run_replicas<double>(
          replicas,
          [&](std::size_t i) {
            Rng rng(sub, i);
            return ev.finish(start, rng);
          },
          opt.threads);
      for (double f : frac) v.push_back(f > mean + delta ? 1.0 : 0.0);
    } else {
      // θ minimises the cumulant generating function of Σ Y, which centres
      // the tilted law on the event boundary.
      TiltedBrw tb(cfg.offspring, *lat, ev.target(), mean + delta, n, *lo, *hi);
      auto K = [&](double th) {
        tb.set_theta(th);
        return tb.log_mgf(idx);
      };
      double top = 1e-6;
      while (top < 1e3 && K(2.0 * top) < K(top)) top *= 2.0;
      const auto best = optimize::golden_min(K, 0.0, 2.0 * top, 1e-10 * top);
      tb.set_theta(best.x);
      const double k_theta = tb.log_mgf(idx);
      pt.theta = best.x;
      v = run_replicas<double>(
          replicas,
          [&](std::size_t i) {
            Rng rng(sub, i);
            const double y = tb.sample(idx, rng);
            return y > 0 ? std::exp(k_theta - tb.theta() * y) : 0.0;
          },
          opt.threads);
    }
    for (double x : v)
      if (x > 0) ++pt.hits;
    const Moments m = moments(v);
    pt.estimate = m.mean;
    pt.std_error = m.se;
    res.points.push_back(pt);
    if (pt.hits >= 10) {
      fx.push_back(k);
      fy.push_back(std::log(pt.estimate));
    }
  }
  if (fx.size() >= 2) {
    res.slope = fit_slope(fx, fy);
    res.fitted = true;
  }
  return res;
}

TailCheck iid_sum_tail_check(const StepDistribution& step, int t_n, double a, int n, double tol,
                             std::uint64_t mc_replicas, std::uint64_t seed, double h) {
  const bool weibull = step.kind() == StepKind::Weibull;
  if (!weibull && step.kind() != StepKind::Gumbel)
    throw HypothesisError("iid_sum_tail_check: needs a Weibull or Gumbel tail");
  if (weibull && !(step.alpha() > 1.0)) throw HypothesisError("iid_sum_tail_check: Weibull part needs alpha > 1");
  if (t_n < 1 || n < 1 || !(a > 0)) throw std::invalid_argument("iid_sum_tail_check: needs t_n, n >= 1 and a > 0");
  TailCheck tc;
  tc.t_n = t_n;
  tc.a = a;
  tc.n = n;
  const double s = a * std::sqrt(static_cast<double>(n));
  const double al = step.alpha();
  if (t_n == 1) {
    tc.method = "exact";
    tc.log_p = step.log_sf(s);
  } else if (mc_replicas > 0) {
    const auto hits = run_replicas<std::uint8_t>(mc_replicas, [&](std::size_t i) {
      Rng rng(seed, i);
      double sum = 0.0;
      for (int k = 0; k < t_n; ++k) sum += step.sample(rng);
      return static_cast<std::uint8_t>(sum >= s);
    });
    const double c = std::accumulate(hits.begin(), hits.end(), 0.0);
    tc.method = c > 0 ? "mc" : "unverifiable";
    tc.log_p = c > 0 ? std::log(c / static_cast<double>(mc_replicas)) : -kInf;
  } else {
    const double R = s + 10.0;
    const auto half = static_cast<std::int64_t>(std::ceil(R / h));
    std::vector<double> cell(static_cast<std::size_t>(2 * half + 1));
    for (std::int64_t i = -half; i <= half; ++i)
      cell[static_cast<std::size_t>(i + half)] = step.window_prob(i * h - h / 2, i * h + h / 2);
    std::vector<double> law = cell, tmp;
    std::int64_t origin = -half;
    for (int k = 2; k < t_n; ++k) {
      tmp.assign(law.size() + cell.size() - 1, 0.0);
      simd::active().convolve(law.data(), law.size(), cell.data(), cell.size(), tmp.data());
      law.swap(tmp);
      origin -= half;
    }
    double P = 0.0;
    for (std::size_t i = 0; i < law.size(); ++i) {
      if (law[i] == 0.0) continue;
      const double x = (origin + static_cast<std::int64_t>(i)) * h;
      P += law[i] * std::exp(step.log_sf(s - x));
    }
    tc.method = P > 0 ? "convolution" : "unverifiable";
    tc.log_p = P > 0 ? std::log(P) : -kInf;
  }
  const double na = std::pow(static_cast<double>(n), al / 2.0);
  if (weibull) {
    tc.bound = -step.lambda() * std::pow(a, al);
    if (tc.method != "unverifiable") {
      tc.scaled = std::pow(static_cast<double>(t_n), al - 1.0) / na * tc.log_p;
      tc.pass = tc.scaled <= tc.bound + tol * std::abs(tc.bound);
    }
  } else {
    tc.bound = std::pow(a, al);
    if (tc.method != "unverifiable") {
      tc.scaled = std::pow(static_cast<double>(t_n), al) / na * std::log(-tc.log_p);
      tc.pass = tc.scaled >= tc.bound - tol * tc.bound;
    }
  }
  return tc;
}

std::string results_csv_header() {
  return "method,n,p,replicas,estimate,std_error,log_estimate,ess,seed,hits,cap_exceeded";
}

std::string results_csv_row(const EstimationResult& r) {
  std::ostringstream os;
  os << to_string(r.method) << ',' << r.n << ',' << fmt(r.p) << ',' << r.replicas << ',' << fmt(r.estimate) << ','
     << fmt(r.std_error) << ',' << fmt(r.log_estimate) << ',' << fmt(r.effective_sample_size) << ',' << r.seed << ','
     << r.hits << ',' << r.cap_exceeded;
  return os.str();
}

nlohmann::json to_json(const EstimationResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["n"] = r.n;
  j["p"] = r.p;
  j["replicas"] = r.replicas;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["log_estimate"] = std::isfinite(r.log_estimate) ? nlohmann::json(r.log_estimate) : nlohmann::json("-inf");
  j["ess"] = r.effective_sample_size;
  j["seed"] = r.seed;
  j["hits"] = r.hits;
  j["cap_exceeded"] = r.cap_exceeded;
  j["zero_hit_bound"] = r.zero_hit_bound;
  j["event_mass"] = opt(r.event_mass);
  j["event_mass_se"] = opt(r.event_mass_se);
  j["conditional_success"] = opt(r.conditional_success);
  return j;
}

}  // namespace brwldp
