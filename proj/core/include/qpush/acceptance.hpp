#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qpush {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = true;       // outcome of the assertable checks
  bool report_only = false;  // findings are reported but do not gate the suite
  double elapsed_sec = 0.0;
  std::vector<std::string> details;

  std::string status_line() const;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20250810;
  int threads = 0;  // 0 = hardware concurrency
};

// Runs one of the eleven acceptance criteria (1-based id).
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

std::vector<CriterionResult> run_all_criteria(const AcceptanceOptions& opt);

}  // namespace qpush
