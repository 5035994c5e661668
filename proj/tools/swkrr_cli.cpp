// swkrr: distribution regression experiments with sliced-Wasserstein kernels.
//
//   swkrr gmm   --T 100 --n 50 --C 2 --r 2 --methods mmd,sw2,sw1 --out runs/gmm
//   swkrr mnist --images X.gz --labels Y.gz --max-angle-deg 30 --methods sw2,mmd --out runs/rot30
//   swkrr check [--all --mnist-dir DIR]
//
// Every subcommand accepts --config FILE with `key = value` lines named after its flags;
// flags given on the command line win. Exit status: 0 ok, 1 trial failure, 2 bad configuration.

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

#include "criteria.hpp"
#include "swkrr/datagen.hpp"
#include "swkrr/harness.hpp"

namespace {

constexpr int kExitTrial = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string methods;
  int M = 100;
  int N = 100;
  int repeats = 5;
  std::uint64_t seed = 0;
  std::string out = "swkrr_out";
  bool quiet = false;
  std::string config;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--methods", c.methods, "comma-separated: mmd, sw2, sw1, rbf, hellinger, tv")->capture_default_str();
  cmd->add_option("--M", c.M, "number of slicing directions")->capture_default_str();
  cmd->add_option("--N", c.N, "number of quantile levels")->capture_default_str();
  cmd->add_option("--repeats", c.repeats, "independent repetitions")->capture_default_str();
  cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory for results.csv and summary.md")->capture_default_str();
  cmd->add_flag("--quiet", c.quiet, "no per-trial log on stderr");
  cmd->add_option("--config", c.config, "config file with flag = value lines");
}

// CLI11 only reads config files for the top-level app, so subcommand files are applied by hand:
// each key fills the flag of the same name unless that flag was given on the command line.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    CLI::Option* opt = cmd->get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw CLI::ConfigError::Extras(item.fullname());
    }
    if (opt->count() > 0) continue;
    if (opt->get_expected_max() > 1) {
      for (const auto& v : item.inputs) opt->add_result(v);
    } else {
      std::string joined;
      for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
      opt->add_result(joined);
    }
    opt->run_callback();
  }
}

swkrr::ExperimentConfig base_config(const Common& c) {
  swkrr::ExperimentConfig config;
  config.methods = swkrr::parse_methods(c.methods);
  config.M = c.M;
  config.N = c.N;
  config.repeats = c.repeats;
  config.seed = c.seed;
  config.output_dir = c.out;
  return config;
}

int run(const swkrr::ExperimentConfig& config, bool quiet, const std::string& metric) {
  const auto results = swkrr::run_experiment(config, quiet ? nullptr : &std::cerr);
  swkrr::emit_report(results, config.output_dir, metric);
  std::cout << swkrr::summary_markdown(results, metric);
  std::cout << "wrote " << config.output_dir << "/results.csv and summary.md\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution regression with sliced-Wasserstein kernels"};
  app.require_subcommand(1);

  Common gmm_common;
  gmm_common.methods = "mmd,sw2,sw1";
  swkrr::GmmModesTask gmm_task;
  std::string dump;
  auto* gmm = app.add_subcommand("gmm", "GMM mode-counting regression");
  add_common(gmm, gmm_common);
  gmm->add_option("--T", gmm_task.T, "training bags")->capture_default_str();
  gmm->add_option("--n", gmm_task.n, "points per bag")->capture_default_str();
  gmm->add_option("--C", gmm_task.C, "maximum number of mixture components")->capture_default_str();
  gmm->add_option("--r", gmm_task.r, "dimension")->capture_default_str();
  gmm->add_option("--val", gmm_task.val, "validation bags")->capture_default_str();
  gmm->add_option("--test", gmm_task.test, "test bags")->capture_default_str();
  gmm->add_option("--dump-data", dump, "also write each repeat's bags to DIR/modes_rep<k>.gmd");

  Common mnist_common;
  mnist_common.methods = "sw2,mmd,rbf";
  swkrr::MnistTask mnist_task;
  auto* mnist = app.add_subcommand("mnist", "MNIST-style image classification via histograms");
  add_common(mnist, mnist_common);
  mnist->add_option("--images", mnist_task.images, "IDX image file (gzip accepted)");
  mnist->add_option("--labels", mnist_task.labels, "IDX label file (gzip accepted)");
  mnist->add_option("--max-angle-deg", mnist_task.max_angle_deg, "roto-translation angle bound; 0 keeps raw images")
      ->capture_default_str();
  mnist->add_option("--train", mnist_task.train, "balanced training set size")->capture_default_str();
  mnist->add_option("--val", mnist_task.val, "balanced validation set size")->capture_default_str();
  mnist->add_option("--test", mnist_task.test, "balanced test set size")->capture_default_str();

  swkrr::acceptance::Options check_options;
  bool check_all = false;
  std::vector<int> check_only;
  auto* check = app.add_subcommand("check", "run the oracle and property checks");
  check->add_flag("--all", check_all, "also run the experiment-scale criteria (slow)");
  check->add_option("--only", check_only, "criterion ids");
  check->add_option("--mnist-dir", check_options.mnist_dir, "MNIST IDX directory for the image criterion");
  check->add_option("--work-dir", check_options.work_dir, "where experiment reports are written");
  std::string check_config;
  check->add_option("--config", check_config, "config file with flag = value lines");

  try {
    app.parse(argc, argv);
    if (*gmm) apply_config(gmm, gmm_common.config);
    if (*mnist) apply_config(mnist, mnist_common.config);
    if (*check) apply_config(check, check_config);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gmm) {
      auto config = base_config(gmm_common);
      config.task = gmm_task;
      config.validate();
      if (!dump.empty()) {
        std::filesystem::create_directories(dump);
        for (int rep = 0; rep < config.repeats; ++rep) {
          const auto path = dump + "/modes_rep" + std::to_string(rep) + ".gmd";
          const auto bags = swkrr::gmm_repeat_dataset(config, rep);
          swkrr::write_mode_dataset(path, bags,
                                    {static_cast<std::uint32_t>(bags.size()), static_cast<std::uint32_t>(gmm_task.n),
                                     static_cast<std::uint32_t>(gmm_task.C), static_cast<std::uint32_t>(gmm_task.r),
                                     config.seed});
        }
      }
      return run(config, gmm_common.quiet, "RMSE");
    }
    if (*mnist) {
      auto config = base_config(mnist_common);
      config.task = mnist_task;
      config.validate();
      return run(config, mnist_common.quiet, "accuracy");
    }
    // check
    swkrr::acceptance::Suite suite(check_options);
    if (check_only.empty()) check_only = check_all ? suite.all_ids() : suite.quick_ids();
    int failed = 0;
    for (int id : check_only) {
      const auto r = suite.run(id);
      std::cout << swkrr::acceptance::format_line(r) << std::endl;
      failed += r.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : kExitTrial;
  } catch (const swkrr::TrialError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTrial;
  } catch (const swkrr::InvalidInput& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTrial;
  }
}
