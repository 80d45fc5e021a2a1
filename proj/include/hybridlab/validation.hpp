#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybridlab/config.hpp"

namespace hybridlab {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Number of checks in the suite (ids 1..count).
int validation_check_count();
std::string validation_check_name(int id);

/// Run the checks selected by `cfg.validation.checks` (all when empty).
/// Artifacts of the long runs go under `dir` unless it is empty. `on_result`
/// is called as each check finishes.
ValidationReport run_validation(const ExperimentConfig& cfg, const std::string& dir,
                                const std::function<void(const CheckResult&)>& on_result = {});

/// "PASS  [ 4] name  (12.3 s, seed 1)  detail"
std::string format_check(const CheckResult& r);
void write_report_json(const std::string& path, const ValidationReport& report);

}  // namespace hybridlab
