#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brwldp {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct AcceptanceOptions {
  /// Criteria to run; empty runs 1..11.
  std::vector<int> only;
  /// Test hook: corrupts the reference constant of this criterion (0 = none).
  int inject_fault = 0;
  unsigned threads = 0;
};

inline constexpr int kCriteria = 11;

CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});

/// Runs the selected criteria in order, printing each line to `log` (if
/// given) as soon as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {}, std::ostream* log = nullptr);

/// "PASS  3  fixed point …  (0.42 s of 10 s)".
std::string format_line(const CriterionResult& r);

}  // namespace brwldp
