#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "swkrr/datagen.hpp"

using namespace swkrr;

TEST_CASE("sample_gmm_task follows the recipe") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) CHECK(sample_gmm_task(1, 3, rng).num_components == 1);

  Rng rng2(2);
  for (int i = 0; i < 10000; ++i) {
    const auto task = sample_gmm_task(3, 2, rng2);
    REQUIRE(task.num_components >= 1);
    REQUIRE(task.num_components <= 3);
    CHECK(task.means.rows() == task.num_components);
    CHECK(task.means.maxCoeff() <= 5.0);
    CHECK(task.means.minCoeff() >= -5.0);
    for (const auto& sigma : task.covariances) {
      CHECK(sigma == sigma.transpose());
      CHECK(Eigen::LLT<Eigen::MatrixXd>(sigma).info() == Eigen::Success);
    }
  }
  CHECK_THROWS_AS(sample_gmm_task(0, 2, rng), InvalidInput);
}

TEST_CASE("sample_points moments") {
  GmmTask task;
  task.num_components = 1;
  task.means = Eigen::MatrixXd::Zero(1, 2);
  task.covariances = {Eigen::MatrixXd::Identity(2, 2)};
  Rng rng(7);
  const int n = 100000;
  const Eigen::MatrixXd x = sample_points(task, n, rng);
  REQUIRE(x.rows() == n);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double se = 1.0 / std::sqrt(double(n));
  CHECK(mean.cwiseAbs().maxCoeff() < 5 * se);
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  // Var of a sample variance of N(0,1) is 2/n; of a sample covariance 1/n.
  CHECK(std::abs(cov(0, 0) - 1) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(cov(1, 1) - 1) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(cov(0, 1)) < 5 * se);

  Rng one(3);
  CHECK(sample_points(task, 1, one).rows() == 1);
  Rng a(11), b(11);
  CHECK(sample_points(task, 20, a) == sample_points(task, 20, b));
  CHECK_THROWS_AS(sample_points(task, 0, a), InvalidInput);

  // Off-diagonal covariance is reproduced too.
  GmmTask shaped = task;
  shaped.means << 1, -2;
  shaped.covariances[0] << 2, 0.8, 0.8, 1;
  Rng c(5);
  const Eigen::MatrixXd y = sample_points(shaped, n, c);
  const Eigen::RowVectorXd my = y.colwise().mean();
  const Eigen::MatrixXd cy = (y.rowwise() - my).transpose() * (y.rowwise() - my) / double(n - 1);
  CHECK(cy.isApprox(shaped.covariances[0], 0.03));
  CHECK((my - shaped.means.row(0)).cwiseAbs().maxCoeff() < 5 * std::sqrt(2.0 / n));
}

TEST_CASE("make_mode_dataset") {
  const auto bags = make_mode_dataset(100, 50, 2, 2, 42);
  REQUIRE(bags.size() == 100);
  for (const auto& bag : bags) {
    CHECK(bag.measure.size() == 50);
    CHECK(bag.measure.dim() == 2);
    CHECK((bag.label == 1 || bag.label == 2));
  }
  const auto again = make_mode_dataset(100, 50, 2, 2, 42);
  for (std::size_t t = 0; t < bags.size(); ++t) {
    CHECK(again[t].label == bags[t].label);
    CHECK(again[t].measure.points() == bags[t].measure.points());
  }
  // Prefixes of a larger dataset are the same bags.
  const auto longer = make_mode_dataset(120, 50, 2, 2, 42);
  CHECK(longer[99].measure.points() == bags[99].measure.points());
  CHECK(make_mode_dataset(3, 50, 2, 2, 43)[0].measure.points() != bags[0].measure.points());
  CHECK_THROWS_AS(make_mode_dataset(0, 50, 2, 2, 1), InvalidInput);
}

TEST_CASE("label marginal is uniform") {
  const auto bags = make_mode_dataset(10000, 1, 10, 1, 99);
  std::vector<int> counts(10, 0);
  for (const auto& bag : bags) ++counts[static_cast<std::size_t>(bag.label - 1)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi2 < 27.88);  // 0.999 quantile of chi-square with 9 dof
}

TEST_CASE("mode dataset dump round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "swkrr_datagen_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "modes.gmd").string();
  const auto bags = make_mode_dataset(7, 5, 3, 2, 12);
  write_mode_dataset(path, bags, {7, 5, 3, 2, 12});
  CHECK(std::filesystem::file_size(path) == 32 + 7 * 5 * 2 * 8 + 7 * 4);
  ModeDatasetHeader h;
  const auto back = read_mode_dataset(path, &h);
  CHECK(h.T == 7);
  CHECK(h.C == 3);
  CHECK(h.seed == 12);
  REQUIRE(back.size() == 7);
  for (std::size_t t = 0; t < 7; ++t) {
    CHECK(back[t].label == bags[t].label);
    CHECK(back[t].measure.points() == bags[t].measure.points());
  }

  {
    std::ofstream bad(path, std::ios::binary);
    bad << "GMD2 not a dump";
  }
  CHECK_THROWS_AS(read_mode_dataset(path), FormatError);
  std::filesystem::remove_all(dir);
}
