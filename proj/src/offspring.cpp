#include "brwldp/offspring.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace brwldp {

namespace {

double parse_double(std::string_view tok) {
  double v = 0.0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw std::invalid_argument("offspring: bad number '" + std::string(tok) + "'");
  return v;
}

int parse_int(std::string_view tok) {
  int v = 0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw std::invalid_argument("offspring: bad integer '" + std::string(tok) + "'");
  return v;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

OffspringDistribution OffspringDistribution::unchecked(std::vector<double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("offspring: empty pmf");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("offspring: negative or non-finite p_k");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("offspring: probabilities must sum to 1");
  if (pmf[0] != 0.0) throw std::invalid_argument("offspring: p_0 must be 0");
  for (double& p : pmf) p /= total;
  while (pmf.back() == 0.0) pmf.pop_back();
  OffspringDistribution d;
  d.pmf_ = std::move(pmf);
  d.b_ = 1;
  while (d.pmf_[d.b_] == 0.0) ++d.b_;
  d.derive();
  return d;
}

OffspringDistribution OffspringDistribution::finite(std::vector<double> pmf) {
  auto d = unchecked(std::move(pmf));
  if (d.p1() >= 1.0) throw std::invalid_argument("offspring: p_1 must be < 1");
  if (!(d.mean() > 1.0)) throw std::invalid_argument("offspring: mean must exceed 1");
  return d;
}

OffspringDistribution OffspringDistribution::geometric(double q, int b) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("offspring: geometric q must lie in (0,1)");
  if (b < 1) throw std::invalid_argument("offspring: geometric shift b must be >= 1");
  OffspringDistribution d;
  d.geometric_ = true;
  d.q_ = q;
  d.b_ = b;
  d.derive();
  return d;
}

void OffspringDistribution::derive() {
  if (geometric_) {
    mean_ = b_ + q_ / (1.0 - q_);
    var_ = q_ / ((1.0 - q_) * (1.0 - q_));
    return;
  }
  double m = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    m += static_cast<double>(k) * pmf_[k];
    m2 += static_cast<double>(k * k) * pmf_[k];
  }
  mean_ = m;
  var_ = m2 - m * m;
}

OffspringDistribution OffspringDistribution::parse(std::string_view text) {
  if (text.starts_with("geometric:")) {
    auto rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) return geometric(parse_double(rest));
    return geometric(parse_double(rest.substr(0, colon)), parse_int(rest.substr(colon + 1)));
  }
  std::vector<double> pmf;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("offspring: expected k:p in '" + std::string(item) + "'");
    const int k = parse_int(item.substr(0, colon));
    const double p = parse_double(item.substr(colon + 1));
    if (k < 0 || k > 100000) throw std::invalid_argument("offspring: k out of range");
    if (pmf.size() <= static_cast<std::size_t>(k)) pmf.resize(k + 1, 0.0);
    if (pmf[k] != 0.0) throw std::invalid_argument("offspring: repeated k");
    pmf[k] = p;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return finite(std::move(pmf));
}

std::string OffspringDistribution::to_string() const {
  if (geometric_) return "geometric:" + fmt(q_) + ":" + std::to_string(b_);
  std::string s;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    if (pmf_[k] == 0.0) continue;
    if (!s.empty()) s += ',';
    s += std::to_string(k) + ":" + fmt(pmf_[k]);
  }
  return s;
}

double OffspringDistribution::pk(int k) const {
  if (k < 0) return 0.0;
  if (geometric_) return k < b_ ? 0.0 : (1.0 - q_) * std::pow(q_, k - b_);
  return static_cast<std::size_t>(k) < pmf_.size() ? pmf_[k] : 0.0;
}

double OffspringDistribution::tail(int k) const {
  if (k <= b_) return 1.0;
  if (geometric_) return std::pow(q_, k - b_);
  double s = 0.0;
  for (std::size_t j = k; j < pmf_.size(); ++j) s += pmf_[j];
  return s;
}

std::optional<int> OffspringDistribution::B() const {
  if (geometric_) return std::nullopt;
  return static_cast<int>(pmf_.size()) - 1;
}

double OffspringDistribution::chi() const {
  const double p = p1();
  if (!(p > 0.0)) throw std::invalid_argument("schroder_exponent: p_1 = 0 (Böttcher case)");
  return std::log(1.0 / p) / std::log(mean_);
}

double OffspringDistribution::exponential_moment_bound() const {
  return geometric_ ? -std::log(q_) : std::numeric_limits<double>::infinity();
}

const std::vector<double>& OffspringDistribution::pmf() const {
  if (geometric_) throw std::logic_error("offspring: geometric law has no finite pmf vector");
  return pmf_;
}

int OffspringDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (geometric_) return b_ + static_cast<int>(std::floor(std::log(u) / std::log(q_)));
  double acc = 0.0;
  for (std::size_t k = b_; k < pmf_.size(); ++k) {
    acc += pmf_[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(pmf_.size()) - 1;
}

void OffspringDistribution::sample_counts(Rng& rng, std::uint64_t parents, std::vector<std::uint64_t>& by_k) const {
  by_k.clear();
  std::uint64_t remaining = parents;
  for (int k = b_; remaining > 0; ++k) {
    if (static_cast<std::size_t>(k) >= by_k.size()) by_k.resize(k + 1, 0);
    const double t = tail(k);
    const double p = t > 0.0 ? std::min(1.0, pk(k) / t) : 1.0;
    std::uint64_t got = remaining;
    if (p < 1.0) {
      if (remaining == 1) {
        got = rng.uniform() < p ? 1 : 0;
      } else {
        std::binomial_distribution<std::uint64_t> bin(remaining, p);
        got = bin(rng);
      }
    }
    by_k[k] = got;
    remaining -= got;
    if (!geometric_ && static_cast<std::size_t>(k) + 1 >= pmf_.size()) {
      by_k[k] += remaining;
      remaining = 0;
    }
  }
}

}  // namespace brwldp
