#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <random>
#include <vector>

#include "swkrr/error.hpp"
#include "swkrr/measures.hpp"
#include "swkrr/ot1d.hpp"

namespace swkrr {

/// Monte-Carlo directions theta_1..theta_M on S^{r-1} and quantile levels t_1..t_N.
///
/// One basis is shared by every measure of an experiment. Features computed on different
/// bases are not comparable, so each basis carries an id derived from its content.
template <typename Scalar>
class SliceBasis {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Rows of `directions` must be unit vectors; levels must lie in (0, 1].
  SliceBasis(Matrix directions, Vector levels, std::uint64_t seed = 0)
      : directions_(std::move(directions)), levels_(std::move(levels)), seed_(seed) {
    if (directions_.rows() < 1 || directions_.cols() < 1 || levels_.size() < 1) {
      throw InvalidInput("SliceBasis: need M >= 1 directions in dimension r >= 1 and N >= 1 levels");
    }
    for (Eigen::Index m = 0; m < directions_.rows(); ++m) {
      if (std::abs(double(directions_.row(m).norm()) - 1.0) > 1e-9) {
        throw InvalidInput("SliceBasis: direction " + std::to_string(m) + " is not unit-norm");
      }
    }
    for (Eigen::Index l = 0; l < levels_.size(); ++l) {
      if (!(levels_(l) > Scalar(0)) || levels_(l) > Scalar(1)) {
        throw InvalidInput("SliceBasis: level " + std::to_string(l) + " outside (0, 1]");
      }
    }
    level_order_.resize(static_cast<std::size_t>(levels_.size()));
    std::iota(level_order_.begin(), level_order_.end(), Eigen::Index{0});
    std::stable_sort(level_order_.begin(), level_order_.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return levels_(i) < levels_(j); });
    id_ = content_hash();
  }

  const Matrix& directions() const noexcept { return directions_; }
  const Vector& levels() const noexcept { return levels_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t id() const noexcept { return id_; }
  Eigen::Index num_directions() const noexcept { return directions_.rows(); }
  Eigen::Index num_levels() const noexcept { return levels_.size(); }
  Eigen::Index dim() const noexcept { return directions_.cols(); }

  /// Level indices sorted by ascending level.
  const std::vector<Eigen::Index>& level_order() const noexcept { return level_order_; }

 private:
  // FNV-1a over shape and raw coordinate bytes.
  std::uint64_t content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
      const auto* bytes = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
      }
    };
    const std::int64_t shape[3] = {directions_.rows(), directions_.cols(), levels_.size()};
    feed(shape, sizeof(shape));
    feed(directions_.data(), sizeof(Scalar) * static_cast<std::size_t>(directions_.size()));
    feed(levels_.data(), sizeof(Scalar) * static_cast<std::size_t>(levels_.size()));
    return h;
  }

  Matrix directions_;
  Vector levels_;
  std::uint64_t seed_;
  std::uint64_t id_ = 0;
  std::vector<Eigen::Index> level_order_;
};

using SliceBasisd = SliceBasis<double>;

/// Raw M x N quantile matrix of one measure on a given basis. The (MN)^{-1/p} normalization is
/// applied by sliced_distance, not stored.
template <typename Scalar>
struct SlicedFeature {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> quantiles;
  std::uint64_t basis_id = 0;
};

using SlicedFeatured = SlicedFeature<double>;

/// Directions are normalized standard-normal draws (uniform on the sphere for every r);
/// levels are uniform on the open interval (0, 1). Fully determined by `seed`.
template <typename Scalar = double>
SliceBasis<Scalar> sample_basis(Eigen::Index M, Eigen::Index N, Eigen::Index r, std::uint64_t seed) {
  if (M < 1 || N < 1 || r < 1) throw InvalidInput("sample_basis: M, N and r must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  typename SliceBasis<Scalar>::Matrix directions(M, r);
  Eigen::VectorXd draw(r);
  for (Eigen::Index m = 0; m < M; ++m) {
    double norm = 0.0;
    do {
      for (Eigen::Index k = 0; k < r; ++k) draw(k) = normal(rng);
      norm = draw.norm();
    } while (!(norm > 0.0));
    directions.row(m) = (draw / norm).transpose().template cast<Scalar>();
  }
  typename SliceBasis<Scalar>::Vector levels(N);
  for (Eigen::Index l = 0; l < N; ++l) {
    double t = 0.0;
    do {
      t = uniform(rng);
    } while (!(t > 0.0));
    levels(l) = Scalar(t);
  }
  return SliceBasis<Scalar>(std::move(directions), std::move(levels), seed);
}

/// Quantile matrix Phi(m, l) = F^{[-1]}_{theta_m # P}(t_l).
///
/// Each projection is sorted once; the levels are then swept in ascending order.
template <typename Scalar>
SlicedFeature<Scalar> sliced_feature(const EmpiricalMeasure<Scalar>& measure, const SliceBasis<Scalar>& basis) {
  if (measure.dim() != basis.dim()) {
    throw InvalidInput("sliced_feature: measure dimension " + std::to_string(measure.dim()) +
                       " does not match basis dimension " + std::to_string(basis.dim()));
  }
  const Eigen::Index M = basis.num_directions();
  const Eigen::Index N = basis.num_levels();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> projected =
      measure.points() * basis.directions().transpose();

  SlicedFeature<Scalar> feature;
  feature.quantiles.resize(M, N);
  feature.basis_id = basis.id();
  const auto& order = basis.level_order();
  for (Eigen::Index m = 0; m < M; ++m) {
    const auto proj = SortedProjection<Scalar>::from_atoms(projected.col(m), measure.weights());
    const auto& cum = proj.cum_weights();
    Eigen::Index k = 0;
    const Eigen::Index last = proj.size() - 1;
    for (Eigen::Index l : order) {
      const Scalar t = basis.levels()(l);
      while (k < last && cum(k) < t) ++k;
      feature.quantiles(m, l) = proj.values()(k);
    }
  }
  return feature;
}

/// d_p = ((1/MN) sum |a_ml - b_ml|^p)^{1/p}.
template <typename Scalar>
Scalar sliced_distance(const SlicedFeature<Scalar>& a, const SlicedFeature<Scalar>& b, int p) {
  detail::check_order(p);
  if (a.basis_id != b.basis_id || a.quantiles.rows() != b.quantiles.rows() ||
      a.quantiles.cols() != b.quantiles.cols()) {
    throw ContractViolation("sliced_distance: features were computed on different slice bases");
  }
  const auto diff = (a.quantiles - b.quantiles).array();
  const Scalar count = Scalar(a.quantiles.size());
  if (p == 1) return diff.abs().sum() / count;
  return std::sqrt(diff.square().sum() / count);
}

/// ((1/M) sum_m W_p(theta_m # a, theta_m # b)^p)^{1/p} with exact 1D transport per direction.
template <typename Scalar, typename Derived>
Scalar sliced_distance_exact_inner(const EmpiricalMeasure<Scalar>& a, const EmpiricalMeasure<Scalar>& b, int p,
                                   const Eigen::MatrixBase<Derived>& directions) {
  detail::check_order(p);
  if (a.dim() != b.dim() || directions.cols() != a.dim()) {
    throw InvalidInput("sliced_distance_exact_inner: dimension mismatch");
  }
  if (directions.rows() < 1) throw InvalidInput("sliced_distance_exact_inner: need at least one direction");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pa = a.points() * directions.transpose();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pb = b.points() * directions.transpose();
  Scalar acc = 0;
  for (Eigen::Index m = 0; m < directions.rows(); ++m) {
    const auto qa = SortedProjection<Scalar>::from_atoms(pa.col(m), a.weights());
    const auto qb = SortedProjection<Scalar>::from_atoms(pb.col(m), b.weights());
    const Scalar w = wasserstein_1d_general(qa, qb, p);
    acc += p == 1 ? w : w * w;
  }
  acc /= Scalar(directions.rows());
  return p == 1 ? acc : std::sqrt(acc);
}

}  // namespace swkrr
