#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "swkrr/error.hpp"

namespace swkrr {

/// Finite weighted point cloud sum_i w_i delta_{x_i} in R^r.
///
/// Atoms are stored as the rows of an n x r matrix. Weights are nonnegative and sum to one;
/// both are fixed at construction.
template <typename Scalar>
class EmpiricalMeasure {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr double kSimplexTolerance = 1e-9;

  /// Weight 1/n on each row of `points`.
  static EmpiricalMeasure uniform(Matrix points) {
    if (points.rows() < 1 || points.cols() < 1) {
      throw InvalidInput("EmpiricalMeasure: need at least one atom of dimension >= 1");
    }
    const auto n = points.rows();
    Vector weights = Vector::Constant(n, Scalar(1) / Scalar(n));
    return EmpiricalMeasure(std::move(points), std::move(weights));
  }

  /// Accepts weights on the simplex (within 1e-9) and renormalizes them exactly.
  static EmpiricalMeasure weighted(Matrix points, Vector weights) {
    if (points.rows() < 1 || points.cols() < 1) {
      throw InvalidInput("EmpiricalMeasure: need at least one atom of dimension >= 1");
    }
    if (weights.size() != points.rows()) {
      throw InvalidInput("EmpiricalMeasure: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(points.rows()) + " atoms");
    }
    if ((weights.array() < Scalar(0)).any() || !weights.allFinite()) {
      throw InvalidInput("EmpiricalMeasure: weights must be finite and nonnegative");
    }
    const Scalar total = weights.sum();
    if (std::abs(double(total) - 1.0) > kSimplexTolerance) {
      throw InvalidInput("EmpiricalMeasure: weights sum to " + std::to_string(double(total)) +
                         ", normalize before construction");
    }
    weights /= total;
    return EmpiricalMeasure(std::move(points), std::move(weights));
  }

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }

 private:
  EmpiricalMeasure(Matrix points, Vector weights)
      : points_(std::move(points)), weights_(std::move(weights)) {}

  Matrix points_;
  Vector weights_;
};

using EmpiricalMeasured = EmpiricalMeasure<double>;

template <typename Derived>
EmpiricalMeasure<typename Derived::Scalar> new_uniform(const Eigen::MatrixBase<Derived>& points) {
  return EmpiricalMeasure<typename Derived::Scalar>::uniform(points);
}

template <typename DerivedP, typename DerivedW>
EmpiricalMeasure<typename DerivedP::Scalar> new_weighted(const Eigen::MatrixBase<DerivedP>& points,
                                                         const Eigen::MatrixBase<DerivedW>& weights) {
  return EmpiricalMeasure<typename DerivedP::Scalar>::weighted(points, weights);
}

/// Affine map of lattice index i in [0, n) onto [-1, 1], endpoints exact.
template <typename Scalar = double>
Scalar lattice_coordinate(Eigen::Index i, Eigen::Index n) {
  return n == 1 ? Scalar(0) : Scalar(-1) + Scalar(2) * Scalar(i) / Scalar(n - 1);
}

/// A one-dimensional empirical measure in quantile form: sorted atom values and the running
/// mass s_k up to and including atom k. Zero-mass atoms are dropped so s is strictly increasing,
/// and s_last is exactly 1.
template <typename Scalar>
class SortedProjection {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Sorts `values` (stable) carrying `weights` along. Weights must already be on the simplex.
  template <typename DerivedV, typename DerivedW>
  static SortedProjection from_atoms(const Eigen::MatrixBase<DerivedV>& values,
                                     const Eigen::MatrixBase<DerivedW>& weights) {
    const auto n = values.size();
    if (n < 1 || weights.size() != n) {
      throw InvalidInput("SortedProjection: values and weights must be non-empty and of equal length");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return values(i) < values(j); });

    SortedProjection out;
    out.values_.resize(n);
    out.cum_weights_.resize(n);
    Eigen::Index kept = 0;
    Scalar running = 0;
    for (Eigen::Index idx : order) {
      if (!(weights(idx) > Scalar(0))) continue;
      running += weights(idx);
      out.values_(kept) = values(idx);
      out.cum_weights_(kept) = running;
      ++kept;
    }
    if (kept == 0) throw InvalidInput("SortedProjection: all weights are zero");
    out.values_.conservativeResize(kept);
    out.cum_weights_.conservativeResize(kept);
    out.cum_weights_(kept - 1) = Scalar(1);
    return out;
  }

  const Vector& values() const noexcept { return values_; }
  const Vector& cum_weights() const noexcept { return cum_weights_; }
  Eigen::Index size() const noexcept { return values_.size(); }

  /// True when every atom carries mass 1/n (to 1e-12).
  bool is_uniform() const {
    const auto n = size();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(double(cum_weights_(k)) - double(k + 1) / double(n)) > 1e-12) return false;
    }
    return true;
  }

 private:
  SortedProjection() = default;

  Vector values_;
  Vector cum_weights_;
};

using SortedProjectiond = SortedProjection<double>;

/// Push-forward of `measure` under x -> <theta, x>, in quantile form.
template <typename Scalar, typename Derived>
SortedProjection<Scalar> project(const EmpiricalMeasure<Scalar>& measure,
                                 const Eigen::MatrixBase<Derived>& direction) {
  if (direction.size() != measure.dim()) {
    throw InvalidInput("project: direction has length " + std::to_string(direction.size()) +
                       ", measure lives in dimension " + std::to_string(measure.dim()));
  }
  if (std::abs(double(direction.norm()) - 1.0) > 1e-9) {
    throw InvalidInput("project: direction must be a unit vector");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values =
      measure.points() * direction.derived().template cast<Scalar>();
  return SortedProjection<Scalar>::from_atoms(values, measure.weights());
}

/// Index k of the atom returned by the generalized inverse CDF: smallest k with s_k >= t.
template <typename Scalar>
Eigen::Index quantile_index(const SortedProjection<Scalar>& proj, Scalar t) {
  const auto& cum = proj.cum_weights();
  const auto* first = cum.data();
  const auto* last = first + cum.size();
  const auto* it = std::lower_bound(first, last, t);
  if (it == last) --it;
  return static_cast<Eigen::Index>(it - first);
}

/// F^{[-1]}(t) = x_(k) for s_{k-1} < t <= s_k, t in (0, 1].
template <typename Scalar>
Scalar inverse_cdf(const SortedProjection<Scalar>& proj, Scalar t) {
  if (!(t > Scalar(0)) || t > Scalar(1)) {
    throw InvalidInput("inverse_cdf: level must lie in (0, 1], got " + std::to_string(double(t)));
  }
  return proj.values()(quantile_index(proj, t));
}

}  // namespace swkrr
