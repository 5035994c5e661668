#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "swkrr/error.hpp"

namespace swkrr {

enum class TargetEncoding { Scalar, OneHot };

/// Kernel ridge regression in the dual. Predictions are k_P^T alpha with
/// alpha = (K + lambda T I)^{-1} Y.
template <typename Scalar>
struct KrrModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix dual_coefficients;  // T x q
  Scalar lambda = 0;
  TargetEncoding encoding = TargetEncoding::Scalar;
  Scalar jitter = 0;      // diagonal shift added on the retry path, 0 when the first factorization succeeded
  Scalar residual = 0;    // |(K + lambda T I) alpha - Y|_inf

  Eigen::Index train_size() const noexcept { return dual_coefficients.rows(); }
  Eigen::Index outputs() const noexcept { return dual_coefficients.cols(); }
};

using KrrModeld = KrrModel<double>;

/// Solves (K + lambda T I) alpha = Y by Cholesky. On failure retries once with
/// 1e-10 trace(K) / T added to the diagonal.
template <typename DerivedK, typename DerivedY>
KrrModel<typename DerivedK::Scalar> fit(const Eigen::MatrixBase<DerivedK>& gram, const Eigen::MatrixBase<DerivedY>& targets,
                                        typename DerivedK::Scalar lambda,
                                        TargetEncoding encoding = TargetEncoding::Scalar) {
  using Scalar = typename DerivedK::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index T = gram.rows();
  if (T < 1 || gram.cols() != T) throw InvalidInput("krr::fit: Gram matrix must be square and non-empty");
  if (targets.rows() != T) throw InvalidInput("krr::fit: need one target row per training item");
  if (!(lambda > Scalar(0))) throw InvalidInput("krr::fit: lambda must be positive");
  if (!targets.allFinite() || !gram.allFinite()) throw InvalidInput("krr::fit: non-finite input");

  Matrix A = gram;
  A.diagonal().array() += lambda * Scalar(T);

  KrrModel<Scalar> model;
  model.lambda = lambda;
  model.encoding = encoding;

  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    model.jitter = Scalar(1e-10) * gram.trace() / Scalar(T);
    A.diagonal().array() += model.jitter;
    llt.compute(A);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("krr::fit: Cholesky factorization failed after jitter retry");
    }
  }
  model.dual_coefficients = llt.solve(targets.derived().template cast<Scalar>());
  // One step of refinement against the unjittered system.
  Matrix A0 = gram;
  A0.diagonal().array() += lambda * Scalar(T);
  Matrix r = targets - A0 * model.dual_coefficients;
  model.dual_coefficients += llt.solve(r);
  r = targets - A0 * model.dual_coefficients;
  model.residual = r.size() ? r.cwiseAbs().maxCoeff() : Scalar(0);
  return model;
}

/// Each row of `k_rows` is a kernel vector against the training set; returns one prediction row per input row.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> predict(const KrrModel<Scalar>& model,
                                                              const Eigen::MatrixBase<Derived>& k_rows) {
  if (k_rows.cols() != model.train_size()) {
    throw InvalidInput("krr::predict: kernel rows have length " + std::to_string(k_rows.cols()) + ", model has " +
                       std::to_string(model.train_size()) + " training items");
  }
  return k_rows * model.dual_coefficients;
}

inline Eigen::MatrixXd encode_one_hot(const std::vector<int>& labels, int num_classes) {
  if (num_classes < 1) throw InvalidInput("encode_one_hot: need at least one class");
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] < 0 || labels[t] >= num_classes) {
      throw InvalidInput("encode_one_hot: label " + std::to_string(labels[t]) + " outside [0, " +
                         std::to_string(num_classes) + ")");
    }
    Y(static_cast<Eigen::Index>(t), labels[t]) = 1.0;
  }
  return Y;
}

/// Index of the largest coordinate; the lowest index wins ties.
template <typename Derived>
int decode_argmax(const Eigen::MatrixBase<Derived>& prediction) {
  if (prediction.size() < 1) throw InvalidInput("decode_argmax: empty prediction");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < prediction.size(); ++i) {
    if (prediction(i) > prediction(best)) best = i;
  }
  return static_cast<int>(best);
}

template <typename Derived>
std::vector<int> decode_argmax_rows(const Eigen::MatrixBase<Derived>& predictions) {
  std::vector<int> out(static_cast<std::size_t>(predictions.rows()));
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) out[static_cast<std::size_t>(i)] = decode_argmax(predictions.row(i));
  return out;
}

template <typename DerivedA, typename DerivedB>
double rmse(const Eigen::MatrixBase<DerivedA>& pred, const Eigen::MatrixBase<DerivedB>& truth) {
  if (pred.size() != truth.size()) throw InvalidInput("rmse: length mismatch");
  if (pred.size() == 0) throw InvalidInput("rmse: empty input");
  return std::sqrt((pred - truth).squaredNorm() / double(pred.size()));
}

inline double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw InvalidInput("accuracy: length mismatch");
  if (pred.empty()) throw InvalidInput("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return double(hits) / double(pred.size());
}

}  // namespace swkrr
