#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace permuton::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: default_thread_count()
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<CriterionResult(const Options&)> run;
};

// The ten criteria in order. Each run() fills passed/detail; seconds and the
// runtime budget are applied by run_criterion.
const std::vector<Criterion>& criteria();

CriterionResult run_criterion(const Criterion& c, const Options& opts);

// Runs the selected criteria (all when `ids` is empty), calling `report`
// after each one.
std::vector<CriterionResult> run_suite(const Options& opts, const std::vector<int>& ids,
                                       const std::function<void(const CriterionResult&)>& report);

// "PASS [3] title: detail (12.3 s)"
std::string format_line(const CriterionResult& r);

}  // namespace permuton::acceptance
