#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "swkrr/datagen.hpp"
#include "swkrr/error.hpp"
#include "swkrr/krr.hpp"

namespace swkrr {

/// A failure inside one (repeat, method) trial; the message carries that context.
class TrialError : public Error {
 public:
  using Error::Error;
};

enum class Method { MMD, SW2, SW1, Euclidean, Hellinger, TV };

/// Lower-case CLI name: mmd, sw2, sw1, rbf, hellinger, tv.
const char* method_name(Method method);
Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& comma_separated);

/// k points from lo to hi, both inclusive, with constant ratio.
std::vector<double> grid_logspace(double lo, double hi, int k);

/// Hyperparameter grids. Defaults reproduce the published experimental grids; Hellinger and TV
/// reuse the sliced-Wasserstein bandwidth grid.
struct Grids {
  std::vector<double> lambda = grid_logspace(1e-8, 100.0, 25);
  std::vector<double> euclidean_gamma = grid_logspace(1e-3, 1.0, 14);
  std::vector<double> mmd_inner_gamma = grid_logspace(1e-6, 100.0, 14);
  std::vector<double> mmd_outer_gamma = grid_logspace(1e-3, 100.0, 7);
  std::vector<double> sw_gamma = grid_logspace(1e-5, 100.0, 14);
};

struct GmmModesTask {
  int T = 100;  // training bags
  int n = 50;   // points per bag
  int C = 2;    // maximum number of components
  int r = 2;
  int val = 50;
  int test = 100;
};

struct MnistTask {
  std::string images;
  std::string labels;
  int train = 1000;
  int val = 300;
  int test = 500;
  double max_angle_deg = 0.0;  // 0 keeps the raw 28 x 28 images
  int num_classes = 10;
};

struct ExperimentConfig {
  std::variant<GmmModesTask, MnistTask> task = GmmModesTask{};
  std::vector<Method> methods;
  int M = 100;
  int N = 100;
  int repeats = 5;
  std::uint64_t seed = 0;
  std::string output_dir;
  Grids grids;

  /// Throws InvalidInput describing the first problem found.
  void validate() const;
  bool is_classification() const noexcept { return std::holds_alternative<MnistTask>(task); }
};

struct TrialResult {
  std::string method;
  int repeat = 0;
  double chosen_lambda = 0;
  double chosen_gamma = 0;
  double chosen_inner_gamma = std::numeric_limits<double>::quiet_NaN();  // MMD only
  double val_score = 0;   // RMSE (regression) or accuracy (classification)
  double test_score = 0;
  double seconds = 0;

  std::string chosen_gammas() const;
};

// ---------------------------------------------------------------------------
// Model selection building blocks
// ---------------------------------------------------------------------------

/// Distances for one setting of any inner hyperparameter: train x train, val x train, test x train.
struct DistanceBlocks {
  double inner_gamma = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd train;
  Eigen::MatrixXd val;
  Eigen::MatrixXd test;
};

/// Regression targets are scored by RMSE, one-hot targets by argmax accuracy.
struct SplitTargets {
  TargetEncoding encoding = TargetEncoding::Scalar;
  int num_classes = 0;
  Eigen::MatrixXd train;  // T x q
  Eigen::VectorXd val_values, test_values;
  std::vector<int> val_labels, test_labels;
};

struct GridCell {
  double lambda = 0;
  double gamma = 0;
  double inner_gamma = std::numeric_limits<double>::quiet_NaN();
  double badness = std::numeric_limits<double>::infinity();  // lower is better; +inf marks a failed cell
};

/// Index of the cell with the lowest validation badness; ties go to the larger lambda, then to the
/// earlier cell.
std::size_t select_cell(const std::vector<GridCell>& cells);

/// Observes every validation score handed to the selector (for auditing which data drove selection).
using SelectionObserver = std::function<void(const GridCell&)>;

/// Grid search over (inner, gamma, lambda) on the validation split, then refit of the winner and a single
/// test evaluation. `beta` is the exponent of the Gaussian-like substitution exp(-gamma d^{2 beta}).
TrialResult select_and_evaluate(const std::vector<DistanceBlocks>& blocks, double beta,
                                const std::vector<double>& gammas, const std::vector<double>& lambdas,
                                const SplitTargets& targets, const SelectionObserver& observer = {});

/// Scalar score reported for a split (RMSE or accuracy) from raw KRR outputs.
double split_score(const Eigen::MatrixXd& predictions, const SplitTargets& targets, bool validation);

// ---------------------------------------------------------------------------
// End to end
// ---------------------------------------------------------------------------

std::vector<TrialResult> run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// The bags of one gmm repeat, train then validation then test, exactly as run_experiment draws them.
std::vector<LabeledBag> gmm_repeat_dataset(const ExperimentConfig& config, int repeat);

struct MethodSummary {
  std::string method;
  double mean = 0;
  double sd = 0;  // sample standard deviation, 0 for a single repeat
  int count = 0;
};

/// One summary per method, in order of first appearance.
std::vector<MethodSummary> summarize(const std::vector<TrialResult>& results);

/// Writes `results.csv` and `summary.md` into `dir` (created if missing).
void emit_report(const std::vector<TrialResult>& results, const std::string& dir, const std::string& metric_name);

std::string results_csv(const std::vector<TrialResult>& results);
std::string summary_markdown(const std::vector<TrialResult>& results, const std::string& metric_name);

}  // namespace swkrr
