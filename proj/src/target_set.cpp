#include "brwldp/target_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace brwldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Two sorted intervals overlap or touch in a way that leaves no gap.
bool joinable(const Interval& a, const Interval& b) {
  if (b.lo < a.hi) return true;
  if (b.lo == a.hi) return a.hi_closed || b.lo_closed;
  return false;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

double parse_number(std::string_view s, std::size_t& i) {
  skip_ws(s, i);
  std::size_t j = i;
  while (j < s.size() && s[j] != ',' && s[j] != ']' && s[j] != ')' && s[j] != ' ') ++j;
  std::string_view tok = s.substr(i, j - i);
  if (tok.empty()) throw SetParseError("missing endpoint at offset " + std::to_string(i));
  i = j;
  if (tok == "inf" || tok == "+inf") return kInf;
  if (tok == "-inf") return -kInf;
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw SetParseError("bad endpoint '" + std::string(tok) + "'");
  return v;
}

}  // namespace

bool Interval::empty() const {
  if (lo < hi) return false;
  return !(lo == hi && lo_closed && hi_closed && std::isfinite(lo));
}

bool Interval::contains(double x) const {
  if (x < lo || x > hi) return false;
  if (x == lo && !lo_closed) return false;
  if (x == hi && !hi_closed) return false;
  return true;
}

TargetSet::TargetSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw std::invalid_argument("TargetSet: empty set");
  for (auto& iv : intervals_) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw std::invalid_argument("TargetSet: NaN endpoint");
    if (iv.empty()) throw std::invalid_argument("TargetSet: empty interval");
    if (std::isinf(iv.lo)) iv.lo_closed = false;
    if (std::isinf(iv.hi)) iv.hi_closed = false;
  }
  for (std::size_t k = 1; k < intervals_.size(); ++k) {
    if (intervals_[k].lo < intervals_[k - 1].lo || joinable(intervals_[k - 1], intervals_[k]))
      throw std::invalid_argument("TargetSet: intervals overlap or are out of order");
  }
}

TargetSet TargetSet::union_of(std::vector<Interval> pieces) {
  std::erase_if(pieces, [](const Interval& iv) { return iv.empty(); });
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
  });
  std::vector<Interval> merged;
  for (const auto& iv : pieces) {
    if (!merged.empty() && joinable(merged.back(), iv)) {
      auto& back = merged.back();
      if (iv.hi > back.hi) {
        back.hi = iv.hi;
        back.hi_closed = iv.hi_closed;
      } else if (iv.hi == back.hi) {
        back.hi_closed = back.hi_closed || iv.hi_closed;
      }
    } else {
      merged.push_back(iv);
    }
  }
  return TargetSet(std::move(merged));
}

TargetSet TargetSet::real_line() { return TargetSet({{-kInf, kInf, false, false}}); }

TargetSet TargetSet::parse(std::string_view text) {
  std::size_t i = 0;
  skip_ws(text, i);
  if (text.substr(i) == "R") return real_line();
  std::vector<Interval> out;
  while (true) {
    skip_ws(text, i);
    if (i >= text.size()) throw SetParseError("expected '[' or '('");
    Interval iv{};
    if (text[i] == '[') {
      iv.lo_closed = true;
    } else if (text[i] == '(') {
      iv.lo_closed = false;
    } else {
      throw SetParseError("expected '[' or '(' at offset " + std::to_string(i));
    }
    ++i;
    iv.lo = parse_number(text, i);
    skip_ws(text, i);
    if (i >= text.size() || text[i] != ',') throw SetParseError("expected ','");
    ++i;
    iv.hi = parse_number(text, i);
    skip_ws(text, i);
    if (i >= text.size()) throw SetParseError("unterminated interval");
    if (text[i] == ']') {
      iv.hi_closed = true;
    } else if (text[i] == ')') {
      iv.hi_closed = false;
    } else {
      throw SetParseError("expected ']' or ')'");
    }
    ++i;
    if ((std::isinf(iv.lo) && iv.lo_closed) || (std::isinf(iv.hi) && iv.hi_closed))
      throw SetParseError("infinite endpoints must be open");
    if (iv.empty()) throw SetParseError("empty interval");
    out.push_back(iv);
    skip_ws(text, i);
    if (i == text.size()) break;
    if (text[i] != 'u' && text[i] != 'U') throw SetParseError("expected 'u' between intervals");
    ++i;
  }
  try {
    return TargetSet(std::move(out));
  } catch (const std::invalid_argument& e) {
    throw SetParseError(e.what());
  }
}

std::string TargetSet::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    const auto& iv = intervals_[k];
    if (k) s += 'u';
    s += iv.lo_closed ? '[' : '(';
    s += format_number(iv.lo);
    s += ',';
    s += format_number(iv.hi);
    s += iv.hi_closed ? ']' : ')';
  }
  return s;
}

bool TargetSet::contains(double x) const {
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [x](const Interval& iv) { return iv.contains(x); });
}

std::size_t TargetSet::finite_endpoint_count() const {
  std::size_t c = 0;
  for (const auto& iv : intervals_) c += std::isfinite(iv.lo) + std::isfinite(iv.hi);
  return c;
}

double TargetSet::max_abs_endpoint() const {
  double m = 0.0;
  for (const auto& iv : intervals_) {
    if (std::isfinite(iv.lo)) m = std::max(m, std::abs(iv.lo));
    if (std::isfinite(iv.hi)) m = std::max(m, std::abs(iv.hi));
  }
  return m;
}

TargetSet TargetSet::affine(double a, double b) const {
  if (!(a > 0)) throw std::invalid_argument("TargetSet::affine: scale must be positive");
  std::vector<Interval> out;
  out.reserve(intervals_.size());
  for (const auto& iv : intervals_) out.push_back({a * iv.lo + b, a * iv.hi + b, iv.lo_closed, iv.hi_closed});
  return TargetSet(std::move(out));
}

TargetSet TargetSet::reflect() const {
  std::vector<Interval> out;
  for (auto it = intervals_.rbegin(); it != intervals_.rend(); ++it)
    out.push_back({-it->hi, -it->lo, it->hi_closed, it->lo_closed});
  return TargetSet(std::move(out));
}

}  // namespace brwldp
