#pragma once

#include <rklda/common.hpp>
#include <rklda/labels.hpp>
#include <rklda/matrix.hpp>

#include <Eigen/SVD>

#include <string>
#include <vector>

namespace rklda::testing {

inline DenseMatrix gaussian(Index rows, Index cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = standard_normal(rng);
  }
  return m;
}

/// Labels with every one of g classes present; the first g rows seed each class.
inline LabelVector random_labels(Index n, Index g, Rng& rng) {
  std::vector<Index> cls(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    cls[static_cast<std::size_t>(i)] =
        i < g ? i : static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(g)));
  }
  std::vector<std::string> names;
  for (Index j = 0; j < g; ++j) names.push_back("c" + std::to_string(j));
  return LabelVector::from_indices(std::move(cls), std::move(names));
}

inline LabelVector labels_from(std::vector<Index> cls) {
  Index g = 0;
  for (Index c : cls) g = std::max(g, c + 1);
  std::vector<std::string> names;
  for (Index j = 0; j < g; ++j) names.push_back("c" + std::to_string(j));
  return LabelVector::from_indices(std::move(cls), std::move(names));
}

/// Dense column-centering, written independently of CenteredMatrixView.
inline DenseMatrix center_columns(const DenseMatrix& X) {
  DenseMatrix out = X;
  for (Index j = 0; j < X.cols(); ++j) {
    double mean = 0.0;
    for (Index i = 0; i < X.rows(); ++i) mean += X(i, j);
    mean /= static_cast<double>(X.rows());
    for (Index i = 0; i < X.rows(); ++i) out(i, j) -= mean;
  }
  return out;
}

/// Orthonormal basis of the row space of X (numerical rank by relative cutoff).
inline DenseMatrix row_space_basis(const DenseMatrix& X, double rel = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(X), Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s[r] > rel * s[0]) ++r;
  return svd.matrixV().leftCols(r);
}

/// Moore-Penrose inverse via a full SVD, independent of pinv_oracle.
inline DenseMatrix pinv_reference(const DenseMatrix& X, double rel = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(X), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.cols(), X.rows());
  for (Index j = 0; j < s.size(); ++j) {
    if (s[j] > rel * s[0]) out += svd.matrixV().col(j) * svd.matrixU().col(j).transpose() / s[j];
  }
  return out;
}

}  // namespace rklda::testing
