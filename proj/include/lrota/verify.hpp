#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lrota {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;  // measured extremes, counts, elapsed time
  double seconds = 0.0;
};

struct BatteryOptions {
  std::uint64_t seed = 7;         // base seed; every suite derives from it
  std::vector<std::string> only;  // empty runs the full battery
  // Negative control: corrupts one recorded trace before auditing it, so a
  // healthy battery must report a failure. Proves the audits have teeth.
  bool inject_violation = false;
};

// Names of all checks, in execution order.
const std::vector<std::string>& battery_names();

// Runs the invariant battery: end-to-end recovery, every guarantee audit,
// the matrix-analysis property suites, and the counting formulas, each over
// seeded instances with pinned tolerances. Throws ConfigError for an
// unknown name in opts.only.
std::vector<CheckResult> run_battery(const BatteryOptions& opts);

}  // namespace lrota
