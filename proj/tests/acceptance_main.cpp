// Acceptance battery: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--inject N] [--expect-fail 5,...]
//
// Exit code 1 when a criterion fails that is not listed in --expect-fail, or
// when a listed criterion unexpectedly passes.

#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "brwldp/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"brwldp acceptance battery"};
  brwldp::AcceptanceOptions opt;
  std::vector<int> expect_fail;
  app.add_option("--only", opt.only, "criteria to run")->delimiter(',');
  app.add_option("--inject", opt.inject_fault, "corrupt the reference constant of this criterion");
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  app.add_option("--threads", opt.threads, "worker threads (0 = all)");
  CLI11_PARSE(app, argc, argv);

  const auto res = brwldp::run_acceptance(opt, &std::cout);
  int unexpected = 0, failed = 0;
  for (const auto& r : res) {
    const bool expected = std::find(expect_fail.begin(), expect_fail.end(), r.id) != expect_fail.end();
    if (!r.pass) ++failed;
    if (r.pass == expected) {
      ++unexpected;
      if (expected) std::cout << "criterion " << r.id << " was expected to fail but passed\n";
    } else if (expected) {
      std::cout << "criterion " << r.id << " fails as expected (see README)\n";
    }
  }
  std::cout << res.size() - failed << "/" << res.size() << " criteria pass\n";
  return unexpected ? 1 : 0;
}
