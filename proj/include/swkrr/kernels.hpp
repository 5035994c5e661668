#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "swkrr/error.hpp"
#include "swkrr/measures.hpp"
#include "swkrr/sliced.hpp"

namespace swkrr {

enum class DistanceKind { SW2, SW1, MMD, Hellinger, TotalVariation, EuclideanVector };

inline const char* to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::SW2: return "SW2";
    case DistanceKind::SW1: return "SW1";
    case DistanceKind::MMD: return "MMD";
    case DistanceKind::Hellinger: return "Hellinger";
    case DistanceKind::TotalVariation: return "TV";
    case DistanceKind::EuclideanVector: return "Euclidean";
  }
  return "?";
}

/// Which distance between distributions is substituted into the kernel.
template <typename Scalar>
struct DistanceSpec {
  DistanceKind kind = DistanceKind::SW2;
  Scalar inner_gamma = 0;                 // MMD only: bandwidth of exp(-g |x - y|^2)
  std::optional<std::uint64_t> basis_id;  // SW kinds: features must come from this basis

  static DistanceSpec sw2(std::optional<std::uint64_t> basis = std::nullopt) {
    return {DistanceKind::SW2, 0, basis};
  }
  static DistanceSpec sw1(std::optional<std::uint64_t> basis = std::nullopt) {
    return {DistanceKind::SW1, 0, basis};
  }
  static DistanceSpec mmd(Scalar inner_gamma) { return {DistanceKind::MMD, inner_gamma, std::nullopt}; }
  static DistanceSpec hellinger() { return {DistanceKind::Hellinger, 0, std::nullopt}; }
  static DistanceSpec total_variation() { return {DistanceKind::TotalVariation, 0, std::nullopt}; }
  static DistanceSpec euclidean() { return {DistanceKind::EuclideanVector, 0, std::nullopt}; }

  bool is_sliced() const noexcept { return kind == DistanceKind::SW2 || kind == DistanceKind::SW1; }
  int order() const noexcept { return kind == DistanceKind::SW1 ? 1 : 2; }

  void validate() const {
    if (kind == DistanceKind::MMD && !(inner_gamma > Scalar(0))) {
      throw InvalidInput("DistanceSpec: MMD inner_gamma must be positive");
    }
  }
};

/// exp(-gamma d^{2 beta}).
template <typename Scalar>
struct GaussianLike {
  Scalar gamma = 1;
  Scalar beta = 1;
};

/// 1/2 (d(x, x0)^2 + d(y, x0)^2 - d(x, y)^2) for a caller-supplied origin x0.
struct LinearWithOrigin {};

template <typename Scalar>
struct KernelSpec {
  DistanceSpec<Scalar> distance;
  std::variant<GaussianLike<Scalar>, LinearWithOrigin> form = GaussianLike<Scalar>{};

  void validate() const {
    distance.validate();
    if (const auto* g = std::get_if<GaussianLike<Scalar>>(&form)) {
      if (!(g->gamma > Scalar(0))) throw InvalidInput("KernelSpec: gamma must be positive");
      if (!(g->beta > Scalar(0)) || g->beta > Scalar(1)) throw InvalidInput("KernelSpec: beta must lie in (0, 1]");
    }
  }
};

using KernelSpecd = KernelSpec<double>;

/// Whether the (distance, beta) pairing is one for which exp(-gamma d^{2 beta}) is positive definite.
template <typename Scalar>
bool is_hilbertian_pairing(const KernelSpec<Scalar>& spec) {
  const auto* g = std::get_if<GaussianLike<Scalar>>(&spec.form);
  if (g == nullptr) return spec.distance.kind != DistanceKind::SW1 && spec.distance.kind != DistanceKind::TotalVariation;
  switch (spec.distance.kind) {
    case DistanceKind::SW1:
    case DistanceKind::TotalVariation:
      return g->beta <= Scalar(0.5);
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
Scalar mmd_cross_term(const EmpiricalMeasure<Scalar>& a, const EmpiricalMeasure<Scalar>& b, Scalar gamma) {
  const auto& xa = a.points();
  const auto& xb = b.points();
  const auto& wa = a.weights();
  const auto& wb = b.weights();
  const Eigen::Index r = xa.cols();
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < xa.rows(); ++i) {
    Scalar row = 0;
    for (Eigen::Index j = 0; j < xb.rows(); ++j) {
      Scalar sq = 0;
      for (Eigen::Index k = 0; k < r; ++k) {
        const Scalar d = xa(i, k) - xb(j, k);
        sq += d * d;
      }
      row += wb(j) * std::exp(-gamma * sq);
    }
    acc += wa(i) * row;
  }
  return acc;
}

template <typename Scalar>
Scalar mmd_from_terms(Scalar self_a, Scalar self_b, Scalar cross) {
  return std::sqrt(std::max(Scalar(0), self_a + self_b - Scalar(2) * cross));
}

template <typename Derived>
void check_probability_vector(const Eigen::MatrixBase<Derived>& w, const char* who) {
  if ((w.array() < 0).any() || std::abs(double(w.sum()) - 1.0) > 1e-9) {
    throw InvalidInput(std::string(who) + ": weights must form a probability vector");
  }
}

}  // namespace detail

/// MMD with inner Gaussian kernel exp(-inner_gamma |x - y|^2), evaluated by the empirical double sums.
template <typename Scalar>
Scalar mmd_distance(const EmpiricalMeasure<Scalar>& a, const EmpiricalMeasure<Scalar>& b, Scalar inner_gamma) {
  if (a.dim() != b.dim()) throw InvalidInput("mmd_distance: measures live in different dimensions");
  if (!(inner_gamma > Scalar(0))) throw InvalidInput("mmd_distance: inner_gamma must be positive");
  return detail::mmd_from_terms(detail::mmd_cross_term(a, a, inner_gamma), detail::mmd_cross_term(b, b, inner_gamma),
                                detail::mmd_cross_term(a, b, inner_gamma));
}

/// Hellinger distance between probability vectors on a common indexed support.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar hellinger_distance(const Eigen::MatrixBase<DerivedA>& wa,
                                             const Eigen::MatrixBase<DerivedB>& wb) {
  if (wa.size() != wb.size()) throw InvalidInput("hellinger_distance: supports differ in length");
  detail::check_probability_vector(wa, "hellinger_distance");
  detail::check_probability_vector(wb, "hellinger_distance");
  using Scalar = typename DerivedA::Scalar;
  const Scalar sq = (wa.array().sqrt() - wb.array().sqrt()).square().sum();
  return std::sqrt(Scalar(0.5) * sq);
}

/// Total variation distance 1/2 |a - b|_1 on a common indexed support.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar tv_distance(const Eigen::MatrixBase<DerivedA>& wa, const Eigen::MatrixBase<DerivedB>& wb) {
  if (wa.size() != wb.size()) throw InvalidInput("tv_distance: supports differ in length");
  detail::check_probability_vector(wa, "tv_distance");
  detail::check_probability_vector(wb, "tv_distance");
  using Scalar = typename DerivedA::Scalar;
  return Scalar(0.5) * (wa - wb).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Kernel forms
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar kernel_eval(const GaussianLike<Scalar>& form, Scalar d) {
  if (d < Scalar(0)) throw ContractViolation("kernel_eval: negative distance");
  if (form.beta == Scalar(1)) return std::exp(-form.gamma * d * d);
  if (form.beta == Scalar(0.5)) return std::exp(-form.gamma * d);
  return std::exp(-form.gamma * std::pow(d, Scalar(2) * form.beta));
}

template <typename Scalar>
Scalar kernel_eval(const LinearWithOrigin&, Scalar d_x_origin, Scalar d_y_origin, Scalar d_xy) {
  if (d_x_origin < Scalar(0) || d_y_origin < Scalar(0) || d_xy < Scalar(0)) {
    throw ContractViolation("kernel_eval: negative distance");
  }
  return Scalar(0.5) * (d_x_origin * d_x_origin + d_y_origin * d_y_origin - d_xy * d_xy);
}

template <typename Scalar>
Scalar kernel_eval(const KernelSpec<Scalar>& spec, Scalar d) {
  const auto* g = std::get_if<GaussianLike<Scalar>>(&spec.form);
  if (g == nullptr) throw ContractViolation("kernel_eval: LinearWithOrigin needs three distances");
  return kernel_eval(*g, d);
}

/// Elementwise exp(-gamma D^{2 beta}).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> substitute(
    const Eigen::MatrixBase<Derived>& distances, const GaussianLike<typename Derived::Scalar>& form) {
  using Scalar = typename Derived::Scalar;
  if ((distances.array() < Scalar(0)).any()) throw ContractViolation("substitute: negative distance");
  if (form.beta == Scalar(1)) return (-form.gamma * distances.array().square()).exp().matrix();
  if (form.beta == Scalar(0.5)) return (-form.gamma * distances.array()).exp().matrix();
  return (-form.gamma * distances.array().pow(Scalar(2) * form.beta)).exp().matrix();
}

// ---------------------------------------------------------------------------
// Pairwise distance matrices. Only the upper triangle is computed; the lower is mirrored,
// so the result is exactly symmetric with a zero diagonal.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar, typename PairFn>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> symmetric_fill(Eigen::Index n, PairFn&& fn) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> D = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) D(i, j) = fn(i, j);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) D(j, i) = D(i, j);
  }
  return D;
}

template <typename Scalar, typename PairFn>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rect_fill(Eigen::Index rows, Eigen::Index cols, PairFn&& fn) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> D(rows, cols);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) D(i, j) = fn(i, j);
  }
  return D;
}

template <typename Scalar>
void check_sliced(const std::vector<SlicedFeature<Scalar>>& items, const DistanceSpec<Scalar>& spec) {
  if (!spec.is_sliced()) throw ContractViolation(std::string("sliced features cannot serve distance ") + to_string(spec.kind));
  for (const auto& f : items) {
    const bool mismatch = spec.basis_id ? f.basis_id != *spec.basis_id : f.basis_id != items.front().basis_id;
    if (mismatch) throw ContractViolation("gram: sliced features come from different slice bases");
  }
}

template <typename Scalar>
void check_measures(const std::vector<EmpiricalMeasure<Scalar>>& items, const DistanceSpec<Scalar>& spec) {
  if (spec.kind != DistanceKind::MMD) {
    throw ContractViolation(std::string("measures are only accepted for MMD, not ") + to_string(spec.kind));
  }
  spec.validate();
  for (const auto& m : items) {
    if (m.dim() != items.front().dim()) throw InvalidInput("gram: measures live in different dimensions");
  }
}

template <typename Derived>
void check_vectors(const Eigen::MatrixBase<Derived>& rows, const DistanceSpec<typename Derived::Scalar>& spec) {
  switch (spec.kind) {
    case DistanceKind::Hellinger:
    case DistanceKind::TotalVariation:
      for (Eigen::Index i = 0; i < rows.rows(); ++i) check_probability_vector(rows.row(i), to_string(spec.kind));
      return;
    case DistanceKind::EuclideanVector:
      return;
    default:
      throw ContractViolation(std::string("vector items cannot serve distance ") + to_string(spec.kind));
  }
}

template <typename RowA, typename RowB>
auto vector_distance(const RowA& a, const RowB& b, DistanceKind kind) {
  using Scalar = typename RowA::Scalar;
  switch (kind) {
    case DistanceKind::Hellinger:
      return std::sqrt(Scalar(0.5) * (a.array().sqrt() - b.array().sqrt()).square().sum());
    case DistanceKind::TotalVariation:
      return Scalar(0.5) * (a - b).cwiseAbs().sum();
    default:
      return (a - b).norm();
  }
}

}  // namespace detail

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_distances(
    const std::vector<SlicedFeature<Scalar>>& items, const DistanceSpec<Scalar>& spec) {
  if (items.empty()) return {};
  detail::check_sliced(items, spec);
  const int p = spec.order();
  return detail::symmetric_fill<Scalar>(static_cast<Eigen::Index>(items.size()), [&](Eigen::Index i, Eigen::Index j) {
    return sliced_distance(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)], p);
  });
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cross_distances(
    const std::vector<SlicedFeature<Scalar>>& test, const std::vector<SlicedFeature<Scalar>>& train,
    const DistanceSpec<Scalar>& spec) {
  detail::check_sliced(test, spec);
  detail::check_sliced(train, spec);
  if (!test.empty() && !train.empty() && test.front().basis_id != train.front().basis_id) {
    throw ContractViolation("cross_gram: test and train features come from different slice bases");
  }
  const int p = spec.order();
  return detail::rect_fill<Scalar>(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(train.size()),
                                   [&](Eigen::Index i, Eigen::Index j) {
                                     return sliced_distance(test[static_cast<std::size_t>(i)],
                                                            train[static_cast<std::size_t>(j)], p);
                                   });
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_distances(
    const std::vector<EmpiricalMeasure<Scalar>>& items, const DistanceSpec<Scalar>& spec) {
  if (items.empty()) return {};
  detail::check_measures(items, spec);
  const Scalar g = spec.inner_gamma;
  const auto n = static_cast<Eigen::Index>(items.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> self(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = items[static_cast<std::size_t>(i)];
    self(i) = detail::mmd_cross_term(m, m, g);
  }
  return detail::symmetric_fill<Scalar>(n, [&](Eigen::Index i, Eigen::Index j) {
    return detail::mmd_from_terms(
        self(i), self(j),
        detail::mmd_cross_term(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)], g));
  });
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cross_distances(
    const std::vector<EmpiricalMeasure<Scalar>>& test, const std::vector<EmpiricalMeasure<Scalar>>& train,
    const DistanceSpec<Scalar>& spec) {
  detail::check_measures(test, spec);
  detail::check_measures(train, spec);
  if (!test.empty() && !train.empty() && test.front().dim() != train.front().dim()) {
    throw InvalidInput("cross_gram: measures live in different dimensions");
  }
  const Scalar g = spec.inner_gamma;
  auto self_terms = [g](const std::vector<EmpiricalMeasure<Scalar>>& items) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) s(static_cast<Eigen::Index>(i)) = detail::mmd_cross_term(items[i], items[i], g);
    return s;
  };
  const auto st = self_terms(test);
  const auto sr = self_terms(train);
  return detail::rect_fill<Scalar>(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(train.size()),
                                   [&](Eigen::Index i, Eigen::Index j) {
                                     return detail::mmd_from_terms(
                                         st(i), sr(j),
                                         detail::mmd_cross_term(test[static_cast<std::size_t>(i)],
                                                                train[static_cast<std::size_t>(j)], g));
                                   });
}

/// Items are the rows of `rows` (weight vectors for Hellinger/TV, flattened images for Euclidean).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_distances(
    const Eigen::MatrixBase<Derived>& rows, const DistanceSpec<typename Derived::Scalar>& spec) {
  using Scalar = typename Derived::Scalar;
  detail::check_vectors(rows, spec);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> X = rows;
  const auto kind = spec.kind;
  return detail::symmetric_fill<Scalar>(X.rows(), [&](Eigen::Index i, Eigen::Index j) {
    return detail::vector_distance(X.row(i), X.row(j), kind);
  });
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> cross_distances(
    const Eigen::MatrixBase<DerivedA>& test, const Eigen::MatrixBase<DerivedB>& train,
    const DistanceSpec<typename DerivedA::Scalar>& spec) {
  using Scalar = typename DerivedA::Scalar;
  if (test.cols() != train.cols()) throw InvalidInput("cross_gram: vector items differ in length");
  detail::check_vectors(test, spec);
  detail::check_vectors(train, spec);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A = test;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> B = train;
  const auto kind = spec.kind;
  return detail::rect_fill<Scalar>(A.rows(), B.rows(), [&](Eigen::Index i, Eigen::Index j) {
    return detail::vector_distance(A.row(i), B.row(j), kind);
  });
}

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

/// [K]_{tl} = K(item_t, item_l) for a GaussianLike spec.
template <typename Items, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram_matrix(const Items& items, const KernelSpec<Scalar>& spec) {
  spec.validate();
  const auto* g = std::get_if<GaussianLike<Scalar>>(&spec.form);
  if (g == nullptr) throw ContractViolation("gram_matrix: LinearWithOrigin needs an origin item");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> K = substitute(pairwise_distances(items, spec.distance), *g);
  K.diagonal().setOnes();
  return K;
}

/// Linear-with-origin Gram: 1/2 (d(x_t, x0)^2 + d(x_l, x0)^2 - d(x_t, x_l)^2).
template <typename Items, typename Origin, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram_matrix(const Items& items, const KernelSpec<Scalar>& spec,
                                                                  const Origin& origin) {
  spec.validate();
  if (!std::holds_alternative<LinearWithOrigin>(spec.form)) {
    throw ContractViolation("gram_matrix: an origin is only meaningful for LinearWithOrigin");
  }
  const auto D = pairwise_distances(items, spec.distance);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d0 = cross_distances(items, origin, spec.distance).col(0);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sq = d0.array().square();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> K =
      Scalar(0.5) * ((sq.replicate(1, D.cols()) + sq.transpose().replicate(D.rows(), 1)).array() - D.array().square()).matrix();
  return K;
}

/// Rows are the kernel vectors k_P = (K(P, train_1), ..., K(P, train_T)) for each test item.
template <typename Items, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cross_gram(const Items& test, const Items& train,
                                                                 const KernelSpec<Scalar>& spec) {
  spec.validate();
  const auto* g = std::get_if<GaussianLike<Scalar>>(&spec.form);
  if (g == nullptr) throw ContractViolation("cross_gram: LinearWithOrigin is only supported by gram_matrix");
  return substitute(cross_distances(test, train, spec.distance), *g);
}

// ---------------------------------------------------------------------------
// MMD for histograms on a shared rectangular grid.
// ---------------------------------------------------------------------------

/// Exact feature map for the Gaussian-inner MMD between weight grids on a fixed H x W lattice.
///
/// On a lattice the inner kernel factorizes, k((r, c), (r', c')) = G_row(r, r') G_col(c, c'),
/// so with G = A A^T the embedding E(w) = A_row^T w A_col satisfies
/// MMD(w, v) = |E(w) - E(v)|_F. Lattice coordinates follow the histogram convention
/// i -> -1 + 2 i / (n - 1).
template <typename Scalar>
class GridMmdEmbedding {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridMmdEmbedding(Eigen::Index height, Eigen::Index width, Scalar inner_gamma)
      : height_(height), width_(width), row_factor_(factor(height, inner_gamma)),
        col_factor_(height == width ? row_factor_ : factor(width, inner_gamma)) {}

  /// `weights` is an H x W grid of masses (row-major flattening accepted as a vector).
  template <typename Derived>
  Vector embed(const Eigen::MatrixBase<Derived>& weights) const {
    if (weights.size() != height_ * width_) throw InvalidInput("GridMmdEmbedding: grid size mismatch");
    const Vector flat = Eigen::Map<const Vector>(weights.derived().eval().data(), weights.size());
    const Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> grid(
        flat.data(), height_, width_);
    const Matrix E = row_factor_.transpose() * grid * col_factor_;
    return Eigen::Map<const Vector>(E.data(), E.size());
  }

 private:
  static Matrix factor(Eigen::Index n, Scalar gamma) {
    if (n < 1) throw InvalidInput("GridMmdEmbedding: empty lattice");
    if (!(gamma > Scalar(0))) throw InvalidInput("GridMmdEmbedding: inner_gamma must be positive");
    Matrix G(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar d = lattice_coordinate<Scalar>(i, n) - lattice_coordinate<Scalar>(j, n);
        G(i, j) = std::exp(-gamma * d * d);
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
    const Vector root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
  }

  Eigen::Index height_;
  Eigen::Index width_;
  Matrix row_factor_;
  Matrix col_factor_;
};

}  // namespace swkrr
