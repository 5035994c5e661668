#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swkrr/harness.hpp"

namespace swkrr::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct Options {
  std::string mnist_dir;  // holds images-idx3-ubyte(.gz) and labels-idx1-ubyte(.gz)
  std::string work_dir;   // reports of the experiment criteria land here
  int mnist_repeats = 5;
  std::ostream* log = nullptr;
};

/// Runs the numbered criteria. Criterion 9 reuses the results of criterion 7 when both run.
class Suite {
 public:
  explicit Suite(Options options) : options_(std::move(options)) {}

  static std::vector<int> all_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9}; }
  /// The fast property and oracle checks.
  static std::vector<int> quick_ids() { return {1, 2, 3, 4, 5, 6}; }

  CriterionResult run(int id);

  static ExperimentConfig table1_config(std::uint64_t seed = 2019);

 private:
  CriterionResult oracle_1d();
  CriterionResult dirac_sliced();
  CriterionResult one_dimensional();
  CriterionResult psd_grams();
  CriterionResult mmd_decay();
  CriterionResult krr_sanity();
  CriterionResult table1();
  CriterionResult table2();
  CriterionResult determinism();

  Options options_;
  std::optional<std::vector<TrialResult>> table1_results_;
};

/// "[PASS] 3  title  (1.2 s)  detail"
std::string format_line(const CriterionResult& r);

}  // namespace swkrr::acceptance
