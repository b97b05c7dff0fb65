#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace brwldp {

/// One real interval; endpoints may be ±inf. The closed/open flags decide
/// membership of lattice points but carry no Gaussian mass.
struct Interval {
  double lo;
  double hi;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double x) const;
  bool empty() const;
  friend bool operator==(const Interval&, const Interval&) = default;
};

class SetParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A nonempty finite union of disjoint intervals, sorted by lower endpoint.
/// This is the algebra generated by the half-lines (−∞, x].
class TargetSet {
 public:
  /// Validates the invariants; throws std::invalid_argument on overlap,
  /// misordering or an empty result.
  explicit TargetSet(std::vector<Interval> intervals);

  /// Sorts and merges overlapping/touching pieces before validating.
  static TargetSet union_of(std::vector<Interval> pieces);
  static TargetSet real_line();

  /// Grammar: interval ('u' interval)*, interval = ('['|'(') num ',' num (']'|')'),
  /// num = decimal | 'inf' | '-inf'. "R" is accepted for the real line.
  static TargetSet parse(std::string_view text);

  /// Canonical text form; parse(to_string()) reproduces the set exactly.
  std::string to_string() const;

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool contains(double x) const;
  std::size_t finite_endpoint_count() const;
  /// Largest |finite endpoint|, 0 if there are none.
  double max_abs_endpoint() const;

  /// {a·x + b : x ∈ A} for a > 0.
  TargetSet affine(double a, double b) const;
  /// {−x : x ∈ A}.
  TargetSet reflect() const;

  friend bool operator==(const TargetSet&, const TargetSet&) = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace brwldp
