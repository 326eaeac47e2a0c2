#pragma once

#include <rklda/common.hpp>

#include <span>
#include <variant>
#include <vector>

namespace rklda {

/// An n x d real data matrix held either densely (row-major) or as compressed
/// sparse rows. Construction validates shape, finiteness and, for sparse input,
/// in-bounds deduplicated indices.
class RawMatrix {
 public:
  static RawMatrix dense(DenseMatrix values);
  static RawMatrix sparse(SparseMatrix values);

  /// Builds a sparse matrix from (row, col, value) triplets. Duplicate
  /// coordinates are rejected with InvalidData.
  static RawMatrix from_triplets(Index rows, Index cols,
                                 std::vector<Eigen::Triplet<double, std::int64_t>> triplets);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }

  const DenseMatrix& dense_values() const { return std::get<DenseMatrix>(storage_); }
  const SparseMatrix& sparse_values() const { return std::get<SparseMatrix>(storage_); }

  /// Densified copy of the stored values (no centering).
  DenseMatrix to_dense() const;

  /// New matrix made of the given rows, in order, keeping the storage kind.
  RawMatrix select_rows(std::span<const Index> rows) const;

 private:
  explicit RawMatrix(std::variant<DenseMatrix, SparseMatrix> storage)
      : storage_(std::move(storage)) {}

  std::variant<DenseMatrix, SparseMatrix> storage_;
};

enum class Centering {
  kColumnMeans,  // subtract column means (the normal case)
  kNone,         // data is already centered, use as-is
};

/// One row of the centered matrix: the stored row plus a dense offset of -mu.
/// For sparse storage the stored part is a list of (column, value) pairs, so a
/// product costs O(nnz(row)) plus O(d) only for the offset term.
class CenteredRow {
 public:
  CenteredRow(std::span<const std::int64_t> cols, std::span<const double> vals,
              const Vector* offset, Index d)
      : cols_(cols), vals_(vals), dense_(nullptr), offset_(offset), d_(d) {}
  CenteredRow(const double* dense, const Vector* offset, Index d)
      : dense_(dense), offset_(offset), d_(d) {}

  bool is_sparse() const { return dense_ == nullptr; }
  Index size() const { return d_; }

  /// x_i - mu as a dense vector.
  Vector to_dense() const;

  /// (x_i - mu)^T W for a d x g matrix W.
  RowVector dot(const DenseMatrix& W) const;
  double dot(const Vector& v) const;

  /// W += (x_i - mu) * coeff, a rank-one update with a length-g row.
  void add_outer_to(DenseMatrix& W, const RowVector& coeff) const;

 private:
  std::span<const std::int64_t> cols_;
  std::span<const double> vals_;
  const double* dense_;
  const Vector* offset_;  // column means, or nullptr when not centering
  Index d_;
};

/// Column-centered view of a RawMatrix. Centering is implicit: the centered
/// matrix is never formed for sparse storage. Immutable after construction.
class CenteredMatrixView {
 public:
  explicit CenteredMatrixView(RawMatrix base, Centering centering = Centering::kColumnMeans);

  Index rows() const { return base_.rows(); }
  Index cols() const { return base_.cols(); }
  const RawMatrix& base() const { return base_; }
  bool centered() const { return centered_; }

  const Vector& column_means() const { return means_; }
  const Vector& centered_row_norms_sq() const { return norms_sq_; }
  double frob_norm_sq() const { return frob_norm_sq_; }

  /// Throws IndexError when i is out of range.
  CenteredRow centered_row(Index i) const;

  /// (X - 1 mu^T) v
  Vector multiply(const Vector& v) const;
  /// (X - 1 mu^T)^T u
  Vector multiply_transpose(const Vector& u) const;
  /// (X - 1 mu^T) W for a d x g W.
  DenseMatrix multiply(const DenseMatrix& W) const;

  /// Dense centered matrix. Intended for small-instance oracles only.
  DenseMatrix to_dense() const;

 private:
  RawMatrix base_;
  bool centered_;
  Vector means_;
  Vector norms_sq_;
  double frob_norm_sq_ = 0.0;
};

inline CenteredMatrixView build_centered_view(RawMatrix base,
                                              Centering centering = Centering::kColumnMeans) {
  return CenteredMatrixView(std::move(base), centering);
}

struct RowNormProfile {
  const Vector& norms_sq;
  double frob_norm_sq;
};

inline RowNormProfile row_norm_profile(const CenteredMatrixView& view) {
  return {view.centered_row_norms_sq(), view.frob_norm_sq()};
}

}  // namespace rklda
