#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "swkrr/datagen.hpp"
#include "swkrr/harness.hpp"
#include "swkrr/ingest.hpp"
#include "swkrr/kernels.hpp"

using namespace swkrr;

namespace {

Grids small_grids() {
  Grids g;
  g.lambda = grid_logspace(1e-6, 1.0, 4);
  g.euclidean_gamma = grid_logspace(1e-3, 1.0, 3);
  g.mmd_inner_gamma = grid_logspace(0.1, 10.0, 2);
  g.mmd_outer_gamma = grid_logspace(0.1, 10.0, 3);
  g.sw_gamma = grid_logspace(1e-2, 10.0, 3);
  return g;
}

ExperimentConfig small_gmm(std::uint64_t seed) {
  ExperimentConfig c;
  c.task = GmmModesTask{30, 15, 2, 2, 10, 20};
  c.methods = {Method::MMD, Method::SW2, Method::SW1};
  c.M = 10;
  c.N = 10;
  c.repeats = 2;
  c.seed = seed;
  c.grids = small_grids();
  return c;
}

// Bars whose orientation encodes the class.
void write_bar_digits(const std::string& images, const std::string& labels, int per_class) {
  Rng rng(5);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  std::uniform_int_distribution<int> intensity(120, 255);
  std::vector<Image> imgs;
  std::vector<std::uint8_t> labs;
  for (int i = 0; i < per_class; ++i) {
    for (int c = 0; c < 10; ++c) {
      Image img = Image::Zero(28, 28);
      const double phi = c * M_PI / 10 + jitter(rng);
      for (int s = -10; s <= 10; ++s) {
        const int row = static_cast<int>(std::lround(13.5 + s * std::sin(phi)));
        const int col = static_cast<int>(std::lround(13.5 + s * std::cos(phi)));
        img(row, col) = static_cast<std::uint8_t>(intensity(rng));
      }
      imgs.push_back(img);
      labs.push_back(static_cast<std::uint8_t>(c));
    }
  }
  write_idx_images(images, imgs, true);
  write_idx_labels(labels, labs);
}

}  // namespace

TEST_CASE("grid_logspace") {
  const auto g = grid_logspace(1e-8, 100, 25);
  REQUIRE(g.size() == 25);
  CHECK(g.front() == 1e-8);
  CHECK(g.back() == 100);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(10.0, 10.0 / 24)));
  const auto small = grid_logspace(1, 100, 3);
  CHECK(small[1] == doctest::Approx(10.0).epsilon(1e-14));
  const auto e = grid_logspace(1e-3, 1, 14);
  CHECK(e.size() == 14);
  CHECK(e.front() == 1e-3);
  CHECK(e.back() == 1.0);
  CHECK_THROWS_AS(grid_logspace(0, 1, 3), InvalidInput);
  CHECK_THROWS_AS(grid_logspace(1, 1, 3), InvalidInput);
  CHECK_THROWS_AS(grid_logspace(1, 2, 1), InvalidInput);

  const Grids defaults;
  CHECK(defaults.lambda.size() == 25);
  CHECK(defaults.mmd_inner_gamma.size() == 14);
  CHECK(defaults.mmd_outer_gamma.size() == 7);
  CHECK(defaults.sw_gamma.front() == 1e-5);
}

TEST_CASE("method names") {
  CHECK(parse_methods("mmd, sw2,sw1") == std::vector<Method>{Method::MMD, Method::SW2, Method::SW1});
  CHECK(parse_method("rbf") == Method::Euclidean);
  CHECK(std::string(method_name(Method::TV)) == "tv");
  CHECK_THROWS_AS(parse_methods("sw3"), InvalidInput);
  CHECK_THROWS_AS(parse_methods(" , "), InvalidInput);
}

TEST_CASE("config validation") {
  auto c = small_gmm(1);
  CHECK_NOTHROW(c.validate());
  c.repeats = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = small_gmm(1);
  c.grids.lambda.clear();
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = small_gmm(1);
  c.methods = {Method::Hellinger};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = small_gmm(1);
  std::get<GmmModesTask>(c.task).val = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = small_gmm(1);
  c.task = MnistTask{};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("select_cell prefers lower badness, then larger lambda") {
  std::vector<GridCell> cells{{1e-3, 1, NAN, 0.5}, {1e-1, 1, NAN, 0.5}, {1e-2, 2, NAN, 0.5}};
  CHECK(select_cell(cells) == 1);
  cells.push_back({1e-8, 1, NAN, 0.4});
  CHECK(select_cell(cells) == 3);
  std::vector<GridCell> failed{{1, 1, NAN, INFINITY}, {1e-3, 1, NAN, 2.0}};
  CHECK(select_cell(failed) == 1);
  CHECK_THROWS_AS(select_cell({}), InvalidInput);
}

TEST_CASE("test data never drives selection") {
  const auto bags = make_mode_dataset(60, 10, 2, 2, 4);
  std::vector<EmpiricalMeasured> train, val, test;
  SplitTargets targets;
  targets.train.resize(30, 1);
  targets.val_values.resize(15);
  targets.test_values.resize(15);
  for (int i = 0; i < 60; ++i) {
    const auto& b = bags[static_cast<std::size_t>(i)];
    if (i < 30) {
      train.push_back(b.measure);
      targets.train(i, 0) = b.label;
    } else if (i < 45) {
      val.push_back(b.measure);
      targets.val_values(i - 30) = b.label;
    } else {
      test.push_back(b.measure);
      targets.test_values(i - 45) = b.label;
    }
  }
  const auto basis = sample_basis(10, 10, 2, 3);
  auto feats = [&](const std::vector<EmpiricalMeasured>& ms) {
    std::vector<SlicedFeatured> out;
    for (const auto& m : ms) out.push_back(sliced_feature(m, basis));
    return out;
  };
  const auto spec = DistanceSpec<double>::sw2(basis.id());
  DistanceBlocks block;
  block.train = pairwise_distances(feats(train), spec);
  block.val = cross_distances(feats(val), feats(train), spec);
  block.test = cross_distances(feats(test), feats(train), spec);

  const auto grids = small_grids();
  std::vector<GridCell> seen;
  const auto a = select_and_evaluate({block}, 1.0, grids.sw_gamma, grids.lambda, targets,
                                     [&](const GridCell& c) { seen.push_back(c); });
  CHECK(seen.size() == grids.sw_gamma.size() * grids.lambda.size());

  // Scramble everything the test split contributes; the observed scores and the winner stay put.
  SplitTargets scrambled = targets;
  scrambled.test_values = -7.0 * targets.test_values.reverse();
  DistanceBlocks other = block;
  other.test = block.test.colwise().reverse();
  std::vector<GridCell> seen2;
  const auto b = select_and_evaluate({other}, 1.0, grids.sw_gamma, grids.lambda, scrambled,
                                     [&](const GridCell& c) { seen2.push_back(c); });
  REQUIRE(seen2.size() == seen.size());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen2[i].badness == seen[i].badness);
  CHECK(a.chosen_lambda == b.chosen_lambda);
  CHECK(a.chosen_gamma == b.chosen_gamma);
  CHECK(a.val_score == b.val_score);
  CHECK(a.test_score != b.test_score);

  // The reported validation score is the selected cell's.
  double best = INFINITY;
  for (const auto& c : seen) best = std::min(best, c.badness);
  CHECK(a.val_score == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("small gmm run: determinism and reports") {
  std::ostringstream log;
  const auto first = run_experiment(small_gmm(11), &log);
  CHECK(first.size() == 6);
  CHECK(log.str().find("sw2") != std::string::npos);
  for (const auto& r : first) {
    CHECK(std::isfinite(r.test_score));
    CHECK(std::isfinite(r.val_score));
    CHECK(r.test_score >= 0.0);
    CHECK(r.seconds >= 0.0);
  }
  CHECK(first[0].chosen_gammas().find("inner_gamma=") != std::string::npos);
  CHECK(first[1].chosen_gammas().find("inner_gamma=") == std::string::npos);

  const auto second = run_experiment(small_gmm(11));
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(second[i].method == first[i].method);
    CHECK(second[i].test_score == first[i].test_score);
    CHECK(second[i].chosen_lambda == first[i].chosen_lambda);
    CHECK(second[i].chosen_gammas() == first[i].chosen_gammas());
  }
  const auto other_seed = run_experiment(small_gmm(12));
  CHECK(other_seed[1].test_score != first[1].test_score);

  const auto dir = std::filesystem::temp_directory_path() / "swkrr_report_test";
  std::filesystem::remove_all(dir);
  emit_report(first, dir.string(), "RMSE");
  std::ifstream csv(dir / "results.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "method,repeat,chosen_lambda,chosen_gammas,val_score,test_score,seconds");
  int rows = 0;
  std::map<std::string, std::vector<double>> by_method;
  while (std::getline(csv, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    REQUIRE(cols.size() == 7);
    by_method[cols[0]].push_back(std::stod(cols[5]));
  }
  CHECK(rows == 6);

  const auto summary = summarize(first);
  REQUIRE(summary.size() == 3);
  for (const auto& s : summary) {
    const auto& v = by_method[s.method];
    REQUIRE(v.size() == 2);
    const double mean = (v[0] + v[1]) / 2;
    const double sd = std::sqrt((v[0] - mean) * (v[0] - mean) + (v[1] - mean) * (v[1] - mean));
    CHECK(std::abs(s.mean - mean) <= 1e-12);
    CHECK(std::abs(s.sd - sd) <= 1e-12);
  }
  std::ifstream md(dir / "summary.md");
  int md_rows = 0;
  while (std::getline(md, line)) md_rows += line.rfind("| ", 0) == 0 && line.find("Method") == std::string::npos;
  CHECK(md_rows == 3);

  CHECK_THROWS_AS(emit_report({}, dir.string(), "RMSE"), InvalidInput);
  std::filesystem::remove_all(dir);
}

TEST_CASE("mnist-style run on a synthetic IDX pair") {
  const auto dir = std::filesystem::temp_directory_path() / "swkrr_mnist_test";
  std::filesystem::create_directories(dir);
  const auto images = (dir / "images.gz").string();
  const auto labels = (dir / "labels").string();
  write_bar_digits(images, labels, 12);

  ExperimentConfig c;
  MnistTask task;
  task.images = images;
  task.labels = labels;
  task.train = 50;
  task.val = 30;
  task.test = 30;
  c.task = task;
  c.methods = {Method::SW2, Method::SW1, Method::MMD, Method::Euclidean, Method::Hellinger, Method::TV};
  c.M = 10;
  c.N = 10;
  c.repeats = 1;
  c.seed = 3;
  c.grids = small_grids();
  const auto results = run_experiment(c);
  REQUIRE(results.size() == 6);
  for (const auto& r : results) {
    CHECK(r.test_score >= 0.0);
    CHECK(r.test_score <= 1.0);
  }
  CHECK(results[0].test_score > 0.5);  // orientation is easy for sliced features

  auto rotated = c;
  std::get<MnistTask>(rotated.task).max_angle_deg = 30;
  rotated.methods = {Method::SW2};
  const auto r1 = run_experiment(rotated);
  const auto r2 = run_experiment(rotated);
  CHECK(r1[0].test_score == r2[0].test_score);

  // Not enough images per class for a balanced split.
  auto greedy = c;
  std::get<MnistTask>(greedy.task).train = 200;
  CHECK_THROWS_AS(run_experiment(greedy), TrialError);
  std::filesystem::remove_all(dir);
}
