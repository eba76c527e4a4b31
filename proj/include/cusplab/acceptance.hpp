#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cusplab {

struct AcceptanceOptions {
  bool quick = false;  ///< criteria 1 to 6 only
  /// Profile CSV used instead of a freshly built table by the profile,
  /// inequality and profile-property checks. Simulations always use a fresh table.
  std::optional<std::filesystem::path> profile_fixture;
  unsigned jobs = 1;  ///< concurrent CH runs
  std::vector<int> only;  ///< restrict to these criteria; empty runs all
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  ///< measured values, or the first failure
  double seconds = 0;
  nlohmann::ordered_json data;
};

struct AcceptanceResult {
  std::vector<CriterionResult> criteria;
  bool passed = true;
};

AcceptanceResult run_acceptance(const AcceptanceOptions& opt);

/// "[PASS] 3 profile consistency: ..." style line.
std::string format_line(const CriterionResult& c);

nlohmann::ordered_json to_json(const AcceptanceResult& r);

}  // namespace cusplab
