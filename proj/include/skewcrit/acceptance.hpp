#pragma once

#include "skewcrit/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skewcrit {

enum class Suite { All, Contact, Solver, Variation };

std::optional<Suite> parse_suite(const std::string& name);
std::string to_string(Suite s);

/// Criterion ids run by a suite: solver {1, 2}, contact {3..7},
/// variation {8, 9, 10}, all {1..11}.
std::vector<int> suite_criteria(Suite s);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  ojson data;
};

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  /// Load built-in examples from DIR/NAME.json instead of the registry.
  std::optional<std::string> config_dir;
};

struct SuiteReport {
  std::vector<CriterionResult> results;
  bool all_pass = false;
};

/// Runs one criterion. ConfigError propagates; every other library error
/// marks the criterion failed with the error text as detail.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts);

SuiteReport run_acceptance(Suite suite, const AcceptanceOptions& opts);

ojson to_json(const CriterionResult& r);
ojson to_json(const SuiteReport& r);

/// "criterion N: PASS|FAIL name (detail)"
std::string summary_line(const CriterionResult& r);

}  // namespace skewcrit
