#include "CLI11.hpp"

#include <iostream>

#include "criteria.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  swkrr::acceptance::Options options;
  std::vector<int> only;
  bool verbose = false;
  app.add_option("--mnist-dir", options.mnist_dir, "directory with the MNIST IDX pair");
  app.add_option("--work-dir", options.work_dir, "where experiment reports are written");
  app.add_option("--mnist-repeats", options.mnist_repeats, "repeats for the MNIST criterion")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "criterion ids to run (default: all)");
  app.add_flag("-v,--verbose", verbose, "log each trial");
  CLI11_PARSE(app, argc, argv);

  if (verbose) options.log = &std::cerr;
  swkrr::acceptance::Suite suite(options);
  if (only.empty()) only = swkrr::acceptance::Suite::all_ids();

  int failed = 0;
  for (int id : only) {
    const auto result = suite.run(id);
    std::cout << swkrr::acceptance::format_line(result) << std::endl;
    failed += result.passed ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
