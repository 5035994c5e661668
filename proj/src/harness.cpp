#include "swkrr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "swkrr/datagen.hpp"
#include "swkrr/ingest.hpp"
#include "swkrr/kernels.hpp"
#include "swkrr/rng.hpp"
#include "swkrr/sliced.hpp"

namespace swkrr {

const char* method_name(Method method) {
  switch (method) {
    case Method::MMD: return "mmd";
    case Method::SW2: return "sw2";
    case Method::SW1: return "sw1";
    case Method::Euclidean: return "rbf";
    case Method::Hellinger: return "hellinger";
    case Method::TV: return "tv";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::MMD, Method::SW2, Method::SW1, Method::Euclidean, Method::Hellinger, Method::TV}) {
    if (name == method_name(m)) return m;
  }
  throw InvalidInput("unknown method '" + name + "' (expected mmd, sw2, sw1, rbf, hellinger or tv)");
}

std::vector<Method> parse_methods(const std::string& comma_separated) {
  std::vector<Method> out;
  std::stringstream in(comma_separated);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw InvalidInput("no methods given");
  return out;
}

std::vector<double> grid_logspace(double lo, double hi, int k) {
  if (!(lo > 0.0) || !(hi > lo) || k < 2) throw InvalidInput("grid_logspace: need 0 < lo < hi and k >= 2");
  std::vector<double> grid(static_cast<std::size_t>(k));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < k; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (k - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

void ExperimentConfig::validate() const {
  if (repeats < 1) throw InvalidInput("repeats must be >= 1");
  if (M < 1 || N < 1) throw InvalidInput("M and N must be >= 1");
  if (methods.empty()) throw InvalidInput("at least one method is required");
  auto nonempty = [](const std::vector<double>& g, const char* name) {
    if (g.empty()) throw InvalidInput(std::string("grid '") + name + "' is empty");
    for (double v : g) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string("grid '") + name + "' has a non-positive value");
    }
  };
  nonempty(grids.lambda, "lambda");
  nonempty(grids.euclidean_gamma, "euclidean_gamma");
  nonempty(grids.mmd_inner_gamma, "mmd_inner_gamma");
  nonempty(grids.mmd_outer_gamma, "mmd_outer_gamma");
  nonempty(grids.sw_gamma, "sw_gamma");
  if (const auto* g = std::get_if<GmmModesTask>(&task)) {
    if (g->T < 1 || g->n < 1 || g->C < 1 || g->r < 1 || g->val < 1 || g->test < 1) {
      throw InvalidInput("gmm task counts must be positive");
    }
    for (Method m : methods) {
      if (m == Method::Euclidean || m == Method::Hellinger || m == Method::TV) {
        throw InvalidInput(std::string("method ") + method_name(m) +
                           " needs histograms on a shared support and is not available for the gmm task");
      }
    }
  } else {
    const auto& t = std::get<MnistTask>(task);
    if (t.images.empty() || t.labels.empty()) throw InvalidInput("mnist task needs --images and --labels");
    if (t.train < 1 || t.val < 1 || t.test < 1) throw InvalidInput("mnist split sizes must be positive");
    if (t.max_angle_deg < 0.0) throw InvalidInput("max angle must be nonnegative");
    if (t.num_classes < 2) throw InvalidInput("need at least two classes");
  }
}

std::string TrialResult::chosen_gammas() const {
  std::ostringstream out;
  out.precision(17);
  out << "gamma=" << chosen_gamma;
  if (!std::isnan(chosen_inner_gamma)) out << ";inner_gamma=" << chosen_inner_gamma;
  return out.str();
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

std::size_t select_cell(const std::vector<GridCell>& cells) {
  if (cells.empty()) throw InvalidInput("select_cell: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& b = cells[best];
    if (c.badness < b.badness || (c.badness == b.badness && c.lambda > b.lambda)) best = i;
  }
  return best;
}

double split_score(const Eigen::MatrixXd& predictions, const SplitTargets& targets, bool validation) {
  if (targets.encoding == TargetEncoding::Scalar) {
    const Eigen::VectorXd& truth = validation ? targets.val_values : targets.test_values;
    return rmse(predictions.col(0), truth);
  }
  return accuracy(decode_argmax_rows(predictions), validation ? targets.val_labels : targets.test_labels);
}

namespace {

double badness_of(double score, TargetEncoding encoding) {
  if (!std::isfinite(score)) return std::numeric_limits<double>::infinity();
  return encoding == TargetEncoding::Scalar ? score : -score;
}

Eigen::MatrixXd kernel_from(const Eigen::MatrixXd& distances, double gamma, double beta, bool unit_diagonal) {
  Eigen::MatrixXd K = substitute(distances, GaussianLike<double>{gamma, beta});
  if (unit_diagonal) K.diagonal().setOnes();
  return K;
}

}  // namespace

TrialResult select_and_evaluate(const std::vector<DistanceBlocks>& blocks, double beta,
                                const std::vector<double>& gammas, const std::vector<double>& lambdas,
                                const SplitTargets& targets, const SelectionObserver& observer) {
  if (blocks.empty() || gammas.empty() || lambdas.empty()) throw InvalidInput("select_and_evaluate: empty grid");
  std::vector<GridCell> cells;
  std::vector<std::size_t> cell_block;
  cells.reserve(blocks.size() * gammas.size() * lambdas.size());

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    for (double gamma : gammas) {
      const Eigen::MatrixXd K = kernel_from(block.train, gamma, beta, true);
      const Eigen::MatrixXd Kv = kernel_from(block.val, gamma, beta, false);
      for (double lambda : lambdas) {
        GridCell cell{lambda, gamma, block.inner_gamma, std::numeric_limits<double>::infinity()};
        try {
          const auto model = fit(K, targets.train, lambda, targets.encoding);
          cell.badness = badness_of(split_score(predict(model, Kv), targets, true), targets.encoding);
        } catch (const Error&) {
          // Recorded as an infinitely bad cell.
        }
        if (observer) observer(cell);
        cells.push_back(cell);
        cell_block.push_back(b);
      }
    }
  }

  const std::size_t idx = select_cell(cells);
  const GridCell& win = cells[idx];
  if (!std::isfinite(win.badness)) throw NumericalError("every grid cell failed");
  const auto& block = blocks[cell_block[idx]];
  const auto model = fit(kernel_from(block.train, win.gamma, beta, true), targets.train, win.lambda, targets.encoding);

  TrialResult result;
  result.chosen_lambda = win.lambda;
  result.chosen_gamma = win.gamma;
  result.chosen_inner_gamma = win.inner_gamma;
  result.val_score = split_score(predict(model, kernel_from(block.val, win.gamma, beta, false)), targets, true);
  result.test_score = split_score(predict(model, kernel_from(block.test, win.gamma, beta, false)), targets, false);
  return result;
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

// Stream tags keep the derived seeds of different consumers apart.
enum : std::uint64_t { kDataStream = 1, kBasisStream = 2, kSplitStream = 3, kImageStream = 4 };

template <typename Items>
DistanceBlocks blocks_for(const Items& train, const Items& val, const Items& test, const DistanceSpec<double>& spec) {
  DistanceBlocks b;
  b.inner_gamma = spec.kind == DistanceKind::MMD ? spec.inner_gamma : std::numeric_limits<double>::quiet_NaN();
  b.train = pairwise_distances(train, spec);
  b.val = cross_distances(val, train, spec);
  b.test = cross_distances(test, train, spec);
  return b;
}

struct Split {
  std::vector<std::size_t> train, val, test;
};

struct MeasureSplit {
  std::vector<EmpiricalMeasured> train, val, test;
};

std::vector<SlicedFeatured> features_of(const std::vector<EmpiricalMeasured>& measures, const SliceBasisd& basis) {
  std::vector<SlicedFeatured> out(measures.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < measures.size(); ++i) out[i] = sliced_feature(measures[i], basis);
  return out;
}

std::vector<DistanceBlocks> sliced_blocks(const MeasureSplit& data, const SliceBasisd& basis, DistanceKind kind) {
  const auto spec = kind == DistanceKind::SW2 ? DistanceSpec<double>::sw2(basis.id()) : DistanceSpec<double>::sw1(basis.id());
  return {blocks_for(features_of(data.train, basis), features_of(data.val, basis), features_of(data.test, basis), spec)};
}

TrialResult run_sliced(const MeasureSplit& data, const SliceBasisd& basis, Method method, const Grids& grids,
                       const SplitTargets& targets) {
  // exp(-g d2^2) for SW2, exp(-g d1) for SW1 (sqrt(d1) is the Hilbertian quantity).
  const bool sw2 = method == Method::SW2;
  return select_and_evaluate(sliced_blocks(data, basis, sw2 ? DistanceKind::SW2 : DistanceKind::SW1), sw2 ? 1.0 : 0.5,
                             grids.sw_gamma, grids.lambda, targets);
}

template <typename Fn>
TrialResult timed_trial(Method method, int repeat, Fn&& fn) {
  const auto start = Clock::now();
  TrialResult r;
  try {
    r = fn();
  } catch (const Error& e) {
    throw TrialError("repeat " + std::to_string(repeat) + ", method " + method_name(method) + ": " + e.what());
  }
  r.method = method_name(method);
  r.repeat = repeat;
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void log_trial(std::ostream* log, const TrialResult& r) {
  if (!log) return;
  *log << "repeat " << r.repeat << "  " << r.method << "  val=" << r.val_score << "  test=" << r.test_score
       << "  lambda=" << r.chosen_lambda << "  " << r.chosen_gammas() << "  (" << r.seconds << " s)\n";
  log->flush();
}

std::vector<TrialResult> run_gmm(const ExperimentConfig& config, const GmmModesTask& task, std::ostream* log) {
  std::vector<TrialResult> results;
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    const auto rep = static_cast<std::uint64_t>(repeat);
    const int total = task.T + task.val + task.test;
    const auto bags = gmm_repeat_dataset(config, repeat);

    MeasureSplit data;
    SplitTargets targets;
    targets.encoding = TargetEncoding::Scalar;
    targets.train.resize(task.T, 1);
    targets.val_values.resize(task.val);
    targets.test_values.resize(task.test);
    for (int i = 0; i < total; ++i) {
      const auto& bag = bags[static_cast<std::size_t>(i)];
      if (i < task.T) {
        data.train.push_back(bag.measure);
        targets.train(i, 0) = bag.label;
      } else if (i < task.T + task.val) {
        data.val.push_back(bag.measure);
        targets.val_values(i - task.T) = bag.label;
      } else {
        data.test.push_back(bag.measure);
        targets.test_values(i - task.T - task.val) = bag.label;
      }
    }
    const auto basis = sample_basis<double>(config.M, config.N, task.r, derive_seed({config.seed, rep, kBasisStream}));

    for (Method method : config.methods) {
      auto r = timed_trial(method, repeat, [&] {
        if (method == Method::MMD) {
          std::vector<DistanceBlocks> blocks;
          for (double inner : config.grids.mmd_inner_gamma) {
            blocks.push_back(blocks_for(data.train, data.val, data.test, DistanceSpec<double>::mmd(inner)));
          }
          return select_and_evaluate(blocks, 1.0, config.grids.mmd_outer_gamma, config.grids.lambda, targets);
        }
        return run_sliced(data, basis, method, config.grids, targets);
      });
      log_trial(log, r);
      results.push_back(std::move(r));
    }
  }
  return results;
}

/// Equal per-class counts (remainders to the lowest classes), disjoint across splits.
Split balanced_split(const std::vector<std::uint8_t>& labels, int num_classes, int train, int val, int test, Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw InvalidInput("label " + std::to_string(labels[i]) + " outside the class range");
    by_class[labels[i]].push_back(i);
  }
  auto share = [num_classes](int total, int c) { return total / num_classes + (c < total % num_classes ? 1 : 0); };
  Split split;
  for (int c = 0; c < num_classes; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto a = static_cast<std::size_t>(share(train, c));
    const auto b = static_cast<std::size_t>(share(val, c));
    const auto d = static_cast<std::size_t>(share(test, c));
    if (a + b + d > pool.size()) {
      throw InvalidInput("class " + std::to_string(c) + " has " + std::to_string(pool.size()) + " images, " +
                         std::to_string(a + b + d) + " needed for a balanced split");
    }
    split.train.insert(split.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(a));
    split.val.insert(split.val.end(), pool.begin() + static_cast<std::ptrdiff_t>(a),
                     pool.begin() + static_cast<std::ptrdiff_t>(a + b));
    split.test.insert(split.test.end(), pool.begin() + static_cast<std::ptrdiff_t>(a + b),
                      pool.begin() + static_cast<std::ptrdiff_t>(a + b + d));
  }
  return split;
}

struct ImageSplit {
  std::vector<Image> train, val, test;
};

template <typename Fn>
auto map_split(const ImageSplit& images, Fn&& fn) {
  using Out = std::decay_t<decltype(fn(images.train.front()))>;
  struct Mapped {
    std::vector<Out> train, val, test;
  } out;
  for (const auto& img : images.train) out.train.push_back(fn(img));
  for (const auto& img : images.val) out.val.push_back(fn(img));
  for (const auto& img : images.test) out.test.push_back(fn(img));
  return out;
}

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return X;
}

DistanceBlocks vector_blocks(const std::vector<Eigen::VectorXd>& train, const std::vector<Eigen::VectorXd>& val,
                             const std::vector<Eigen::VectorXd>& test, const DistanceSpec<double>& spec) {
  const Eigen::MatrixXd Xtr = stack_rows(train);
  DistanceBlocks b;
  b.train = pairwise_distances(Xtr, spec);
  b.val = cross_distances(stack_rows(val), Xtr, spec);
  b.test = cross_distances(stack_rows(test), Xtr, spec);
  return b;
}

std::vector<TrialResult> run_mnist(const ExperimentConfig& config, const MnistTask& task, std::ostream* log) {
  const auto data = load_idx_dataset(task.images, task.labels);
  if (data.images.empty()) throw InvalidInput("no images in " + task.images);
  const double max_angle = task.max_angle_deg * std::numbers::pi / 180.0;
  const bool perturb = task.max_angle_deg > 0.0;

  std::vector<TrialResult> results;
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    const auto rep = static_cast<std::uint64_t>(repeat);
    Rng split_rng = make_rng({config.seed, rep, kSplitStream});
    const Split split = balanced_split(data.labels, task.num_classes, task.train, task.val, task.test, split_rng);

    auto transform = [&](std::size_t index) {
      if (!perturb) return data.images[index];
      Rng rng = make_rng({config.seed, rep, kImageStream, static_cast<std::uint64_t>(index)});
      return roto_translate(data.images[index], max_angle, rng);
    };
    ImageSplit images;
    SplitTargets targets;
    targets.encoding = TargetEncoding::OneHot;
    targets.num_classes = task.num_classes;
    std::vector<int> train_labels;
    for (auto i : split.train) {
      images.train.push_back(transform(i));
      train_labels.push_back(data.labels[i]);
    }
    for (auto i : split.val) {
      images.val.push_back(transform(i));
      targets.val_labels.push_back(data.labels[i]);
    }
    for (auto i : split.test) {
      images.test.push_back(transform(i));
      targets.test_labels.push_back(data.labels[i]);
    }
    targets.train = encode_one_hot(train_labels, task.num_classes);

    const auto basis = sample_basis<double>(config.M, config.N, 2, derive_seed({config.seed, rep, kBasisStream}));
    const auto height = images.train.front().rows();
    const auto width = images.train.front().cols();

    for (Method method : config.methods) {
      auto r = timed_trial(method, repeat, [&]() -> TrialResult {
        switch (method) {
          case Method::SW2:
          case Method::SW1: {
            auto h = map_split(images, image_to_histogram);
            return run_sliced({std::move(h.train), std::move(h.val), std::move(h.test)}, basis, method, config.grids,
                              targets);
          }
          case Method::MMD: {
            // Histograms share the pixel lattice, so the Gaussian-inner MMD is a Euclidean distance
            // between exact lattice embeddings.
            const auto w = map_split(images, image_grid_weights);
            std::vector<DistanceBlocks> blocks;
            for (double inner : config.grids.mmd_inner_gamma) {
              const GridMmdEmbedding<double> embedding(height, width, inner);
              auto embed = [&](const std::vector<Eigen::VectorXd>& ws) {
                std::vector<Eigen::VectorXd> out;
                out.reserve(ws.size());
                for (const auto& v : ws) out.push_back(embedding.embed(v));
                return out;
              };
              auto b = vector_blocks(embed(w.train), embed(w.val), embed(w.test), DistanceSpec<double>::euclidean());
              b.inner_gamma = inner;
              blocks.push_back(std::move(b));
            }
            return select_and_evaluate(blocks, 1.0, config.grids.mmd_outer_gamma, config.grids.lambda, targets);
          }
          case Method::Euclidean: {
            const auto f = map_split(images, flatten_image);
            return select_and_evaluate({vector_blocks(f.train, f.val, f.test, DistanceSpec<double>::euclidean())}, 1.0,
                                       config.grids.euclidean_gamma, config.grids.lambda, targets);
          }
          case Method::Hellinger:
          case Method::TV: {
            const auto w = map_split(images, image_grid_weights);
            const bool hel = method == Method::Hellinger;
            const auto spec = hel ? DistanceSpec<double>::hellinger() : DistanceSpec<double>::total_variation();
            return select_and_evaluate({vector_blocks(w.train, w.val, w.test, spec)}, hel ? 1.0 : 0.5,
                                       config.grids.sw_gamma, config.grids.lambda, targets);
          }
        }
        throw InvalidInput("unhandled method");
      });
      log_trial(log, r);
      results.push_back(std::move(r));
    }
  }
  return results;
}

}  // namespace

std::vector<LabeledBag> gmm_repeat_dataset(const ExperimentConfig& config, int repeat) {
  const auto* task = std::get_if<GmmModesTask>(&config.task);
  if (task == nullptr) throw InvalidInput("gmm_repeat_dataset: not a gmm experiment");
  return make_mode_dataset(task->T + task->val + task->test, task->n, task->C, task->r,
                           derive_seed({config.seed, static_cast<std::uint64_t>(repeat), kDataStream}));
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  try {
    if (const auto* g = std::get_if<GmmModesTask>(&config.task)) return run_gmm(config, *g, log);
    return run_mnist(config, std::get<MnistTask>(config.task), log);
  } catch (const TrialError&) {
    throw;
  } catch (const Error& e) {
    throw TrialError(std::string("data preparation: ") + e.what());
  }
}

}  // namespace swkrr
