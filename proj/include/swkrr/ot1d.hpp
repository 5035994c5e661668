#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "swkrr/error.hpp"
#include "swkrr/measures.hpp"

namespace swkrr {

namespace detail {

template <typename Scalar>
inline Scalar abs_pow(Scalar x, int p) {
  const Scalar a = std::abs(x);
  return p == 1 ? a : a * a;
}

inline void check_order(int p) {
  if (p != 1 && p != 2) throw InvalidInput("Wasserstein order p must be 1 or 2, got " + std::to_string(p));
}

}  // namespace detail

/// W_p between two uniform measures with the same number of atoms: pairs the sorted atoms.
template <typename Scalar>
Scalar wasserstein_1d_balanced(const SortedProjection<Scalar>& a, const SortedProjection<Scalar>& b, int p) {
  detail::check_order(p);
  if (a.size() != b.size() || !a.is_uniform() || !b.is_uniform()) {
    throw DispatchError(
        "wasserstein_1d_balanced: inputs are not uniform with equal atom counts; use wasserstein_1d_general");
  }
  const auto n = a.size();
  Scalar acc = 0;
  for (Eigen::Index k = 0; k < n; ++k) acc += detail::abs_pow(a.values()(k) - b.values()(k), p);
  acc /= Scalar(n);
  return p == 1 ? acc : std::sqrt(acc);
}

/// W_p between arbitrary weighted 1D empirical measures.
///
/// Both quantile functions are piecewise constant; the merged set of cumulative-weight
/// breakpoints partitions (0, 1] into intervals where |F_a^{-1} - F_b^{-1}| is constant.
template <typename Scalar>
Scalar wasserstein_1d_general(const SortedProjection<Scalar>& a, const SortedProjection<Scalar>& b, int p) {
  detail::check_order(p);
  const auto& ca = a.cum_weights();
  const auto& cb = b.cum_weights();
  const auto na = a.size();
  const auto nb = b.size();
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  Scalar prev = 0;
  Scalar acc = 0;
  while (i < na && j < nb) {
    const Scalar next = std::min(ca(i), cb(j));
    const Scalar len = next - prev;
    if (len > Scalar(0)) acc += len * detail::abs_pow(a.values()(i) - b.values()(j), p);
    prev = next;
    const bool advance_a = ca(i) <= next;
    const bool advance_b = cb(j) <= next;
    if (advance_a) ++i;
    if (advance_b) ++j;
  }
  acc = std::max(acc, Scalar(0));
  return p == 1 ? acc : std::sqrt(acc);
}

namespace detail {

/// Dense two-phase simplex with Bland's rule for min c^T x s.t. A x = b, x >= 0, b >= 0.
/// Intended for tiny instances only.
inline double simplex_minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  constexpr double eps = 1e-12;
  const Eigen::Index rows = A.rows();
  const Eigen::Index vars = A.cols();
  const Eigen::Index width = vars + rows + 1;
  const Eigen::Index rhs = width - 1;

  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(rows + 1, width);
  tab.topLeftCorner(rows, vars) = A;
  tab.block(0, vars, rows, rows).setIdentity();
  tab.col(rhs).head(rows) = b;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = vars + i;

  auto pivot = [&](Eigen::Index r, Eigen::Index col) {
    tab.row(r) /= tab(r, col);
    for (Eigen::Index i = 0; i <= rows; ++i) {
      if (i != r && tab(i, col) != 0.0) tab.row(i) -= tab(i, col) * tab.row(r);
    }
    basis[static_cast<std::size_t>(r)] = col;
  };

  auto run = [&](Eigen::Index allowed_cols) {
    for (int guard = 0; guard < 100000; ++guard) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (tab(rows, j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (tab(i, enter) > eps) {
          const double ratio = tab(i, rhs) / tab(i, enter);
          const bool tie = leave >= 0 && std::abs(ratio - best) <= eps;
          if (leave < 0 || (!tie && ratio < best) ||
              (tie && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = std::min(best, ratio);
            leave = i;
          }
        }
      }
      if (leave < 0) throw NumericalError("simplex: unbounded program");
      pivot(leave, enter);
    }
    throw NumericalError("simplex: iteration limit reached");
  };

  // Phase 1: drive the artificial variables out.
  tab.row(rows).head(vars) = -A.colwise().sum();
  tab(rows, rhs) = -b.sum();
  run(vars + rows);
  if (-tab(rows, rhs) > 1e-9) throw NumericalError("simplex: infeasible program");
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (basis[static_cast<std::size_t>(i)] < vars) continue;
    for (Eigen::Index j = 0; j < vars; ++j) {
      if (std::abs(tab(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 on the original costs.
  tab.row(rows).setZero();
  tab.row(rows).head(vars) = c.transpose();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index bv = basis[static_cast<std::size_t>(i)];
    const double cb = bv < vars ? c(bv) : 0.0;
    if (cb != 0.0) tab.row(rows) -= cb * tab.row(i);
  }
  run(vars);
  return -tab(rows, rhs);
}

}  // namespace detail

/// Exact optimal-transport cost between two small 1D measures by solving the coupling LP.
/// Makes no use of sorting; meant as a reference for the closed forms.
template <typename Scalar>
Scalar wasserstein_lp_oracle(const EmpiricalMeasure<Scalar>& a, const EmpiricalMeasure<Scalar>& b, int p) {
  detail::check_order(p);
  if (a.dim() != 1 || b.dim() != 1) throw InvalidInput("wasserstein_lp_oracle: measures must be one-dimensional");
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (n * m > 64) throw InvalidInput("wasserstein_lp_oracle: instance too large (n*m > 64)");

  // Row sums for every source, column sums for all but the last target (implied by total mass).
  const Eigen::Index rows = n + m - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n * m);
  Eigen::VectorXd rhs(rows);
  Eigen::VectorXd cost(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index v = i * m + j;
      A(i, v) = 1.0;
      if (j < m - 1) A(n + j, v) = 1.0;
      cost(v) = detail::abs_pow(double(a.points()(i, 0)) - double(b.points()(j, 0)), p);
    }
    rhs(i) = double(a.weights()(i));
  }
  for (Eigen::Index j = 0; j + 1 < m; ++j) rhs(n + j) = double(b.weights()(j));

  const double total = std::max(detail::simplex_minimize(A, rhs, cost), 0.0);
  return Scalar(p == 1 ? total : std::sqrt(total));
}

}  // namespace swkrr
