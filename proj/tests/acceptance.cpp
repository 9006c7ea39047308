// Acceptance gate: run the full verification battery and print one line per
// criterion. Exits nonzero if any check fails.

#include <cstdio>

#include "ribc/verify.hpp"

int main() {
  const auto results = ribc::verify::run_battery();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("[%s] %-26s (%.2fs): %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
    ok = ok && r.passed;
  }
  std::printf("%s\n", ok ? "acceptance: all criteria hold" : "acceptance: FAILURES above");
  return ok ? 0 : 1;
}
