#include "swkrr/datagen.hpp"

#include <fstream>
#include <random>

#include "swkrr/binary_io.hpp"
#include "swkrr/error.hpp"

namespace swkrr {

GmmTask sample_gmm_task(int C, int r, Rng& rng) {
  if (C < 1 || r < 1) throw InvalidInput("sample_gmm_task: C and r must be >= 1");
  std::uniform_int_distribution<int> count(1, C);
  std::uniform_real_distribution<double> mean_coord(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(1.0, 4.0);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_real_distribution<double> diag(0.0, 1.0);

  GmmTask task;
  task.num_components = count(rng);
  const int p = task.num_components;
  task.means.resize(p, r);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < r; ++k) task.means(j, k) = mean_coord(rng);
  }
  task.covariances.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    const double a = scale(rng);
    Eigen::MatrixXd A(r, r);
    for (int row = 0; row < r; ++row) {
      for (int col = 0; col < r; ++col) A(row, col) = entry(rng);
    }
    Eigen::MatrixXd sigma = a * A * A.transpose();
    for (int k = 0; k < r; ++k) sigma(k, k) += diag(rng);
    // Exact symmetry; the product is symmetric only up to rounding.
    sigma = (0.5 * (sigma + sigma.transpose())).eval();
    task.covariances.push_back(std::move(sigma));
  }
  return task;
}

namespace {

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::MatrixXd jittered = sigma;
  jittered.diagonal().array() += 1e-12;
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_points: covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

Eigen::MatrixXd sample_points(const GmmTask& task, int n, Rng& rng) {
  if (n < 1) throw InvalidInput("sample_points: n must be >= 1");
  const int p = task.num_components;
  const auto r = task.dim();
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(static_cast<std::size_t>(p));
  for (const auto& sigma : task.covariances) factors.push_back(covariance_factor(sigma));

  std::uniform_int_distribution<int> component(0, p - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd points(n, r);
  Eigen::VectorXd z(r);
  for (int i = 0; i < n; ++i) {
    const int j = component(rng);
    for (Eigen::Index k = 0; k < r; ++k) z(k) = normal(rng);
    points.row(i) = task.means.row(j) + (factors[static_cast<std::size_t>(j)] * z).transpose();
  }
  return points;
}

std::vector<LabeledBag> make_mode_dataset(int T, int n, int C, int r, std::uint64_t seed) {
  if (T < 1 || n < 1 || C < 1 || r < 1) throw InvalidInput("make_mode_dataset: all counts must be >= 1");
  std::vector<LabeledBag> bags;
  bags.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    Rng rng = make_rng({seed, static_cast<std::uint64_t>(t)});
    const GmmTask task = sample_gmm_task(C, r, rng);
    bags.push_back({EmpiricalMeasured::uniform(sample_points(task, n, rng)), task.num_components});
  }
  return bags;
}

void write_mode_dataset(const std::string& path, const std::vector<LabeledBag>& bags, const ModeDatasetHeader& header) {
  if (bags.size() != header.T) throw InvalidInput("write_mode_dataset: header T does not match bag count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("write_mode_dataset: cannot open " + path);
  out.write("GMD1", 4);
  binio::write_le(out, header.T);
  binio::write_le(out, header.n);
  binio::write_le(out, header.C);
  binio::write_le(out, header.r);
  binio::write_le(out, header.seed);
  binio::write_le(out, std::uint32_t{0});
  for (const auto& bag : bags) {
    const auto& X = bag.measure.points();
    if (X.rows() != header.n || X.cols() != header.r) throw InvalidInput("write_mode_dataset: bag shape differs from header");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index k = 0; k < X.cols(); ++k) binio::write_le(out, X(i, k));
    }
  }
  for (const auto& bag : bags) binio::write_le(out, static_cast<std::int32_t>(bag.label));
  if (!out) throw InvalidInput("write_mode_dataset: write failed for " + path);
}

std::vector<LabeledBag> read_mode_dataset(const std::string& path, ModeDatasetHeader* header_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("read_mode_dataset: cannot open " + path);
  binio::expect_magic(in, "GMD1", "mode dataset");
  ModeDatasetHeader h;
  h.T = binio::read_le<std::uint32_t>(in, "mode dataset");
  h.n = binio::read_le<std::uint32_t>(in, "mode dataset");
  h.C = binio::read_le<std::uint32_t>(in, "mode dataset");
  h.r = binio::read_le<std::uint32_t>(in, "mode dataset");
  h.seed = binio::read_le<std::uint64_t>(in, "mode dataset");
  binio::read_le<std::uint32_t>(in, "mode dataset");
  if (h.n == 0 || h.r == 0) throw FormatError("mode dataset: zero bag size or dimension", 4);

  std::vector<Eigen::MatrixXd> points(h.T, Eigen::MatrixXd(h.n, h.r));
  for (auto& X : points) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index k = 0; k < X.cols(); ++k) X(i, k) = binio::read_le<double>(in, "mode dataset");
    }
  }
  std::vector<LabeledBag> bags;
  bags.reserve(h.T);
  for (auto& X : points) {
    const int label = binio::read_le<std::int32_t>(in, "mode dataset");
    bags.push_back({EmpiricalMeasured::uniform(std::move(X)), label});
  }
  if (header_out) *header_out = h;
  return bags;
}

}  // namespace swkrr
