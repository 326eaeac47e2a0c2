#include <rklda/matrix.hpp>

#include <algorithm>
#include <string>

namespace rklda {

namespace {

void check_shape(Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw InvalidData("matrix must have at least one row and one column, got " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_finite(const double* data, Index count) {
  for (Index k = 0; k < count; ++k) {
    if (!std::isfinite(data[k])) throw InvalidData("non-finite entry in data matrix");
  }
}

}  // namespace

RawMatrix RawMatrix::dense(DenseMatrix values) {
  check_shape(values.rows(), values.cols());
  check_finite(values.data(), values.size());
  return RawMatrix(std::move(values));
}

RawMatrix RawMatrix::sparse(SparseMatrix values) {
  check_shape(values.rows(), values.cols());
  values.makeCompressed();
  check_finite(values.valuePtr(), values.nonZeros());
  for (Index i = 0; i < values.outerSize(); ++i) {
    const auto begin = values.outerIndexPtr()[i];
    const auto end = values.outerIndexPtr()[i + 1];
    for (auto k = begin; k < end; ++k) {
      const auto col = values.innerIndexPtr()[k];
      if (col < 0 || col >= values.cols()) throw InvalidData("sparse column index out of range");
      if (k > begin && values.innerIndexPtr()[k - 1] >= col) {
        throw InvalidData("sparse row " + std::to_string(i) + " has unsorted or duplicate columns");
      }
    }
  }
  return RawMatrix(std::move(values));
}

RawMatrix RawMatrix::from_triplets(Index rows, Index cols,
                                   std::vector<Eigen::Triplet<double, std::int64_t>> triplets) {
  check_shape(rows, cols);
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
      throw InvalidData("entry (" + std::to_string(t.row()) + "," + std::to_string(t.col()) +
                        ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  for (std::size_t k = 1; k < triplets.size(); ++k) {
    if (triplets[k].row() == triplets[k - 1].row() && triplets[k].col() == triplets[k - 1].col()) {
      throw InvalidData("duplicate entry at (" + std::to_string(triplets[k].row()) + "," +
                        std::to_string(triplets[k].col()) + ")");
    }
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return sparse(std::move(m));
}

Index RawMatrix::rows() const {
  return std::visit([](const auto& m) -> Index { return m.rows(); }, storage_);
}

Index RawMatrix::cols() const {
  return std::visit([](const auto& m) -> Index { return m.cols(); }, storage_);
}

DenseMatrix RawMatrix::to_dense() const {
  if (is_sparse()) return DenseMatrix(sparse_values());
  return dense_values();
}

RawMatrix RawMatrix::select_rows(std::span<const Index> rows) const {
  for (Index r : rows) {
    if (r < 0 || r >= this->rows()) throw IndexError("row " + std::to_string(r) + " out of range");
  }
  if (!is_sparse()) {
    const auto& src = dense_values();
    DenseMatrix out(static_cast<Index>(rows.size()), src.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = src.row(rows[k]);
    return dense(std::move(out));
  }
  const auto& src = sparse_values();
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (SparseMatrix::InnerIterator it(src, rows[k]); it; ++it) {
      triplets.emplace_back(static_cast<std::int64_t>(k), it.col(), it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(rows.size()), src.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return sparse(std::move(out));
}

// CenteredRow

Vector CenteredRow::to_dense() const {
  Vector x;
  if (dense_ != nullptr) {
    x = Eigen::Map<const Vector>(dense_, d_);
  } else {
    x = Vector::Zero(d_);
    for (std::size_t k = 0; k < cols_.size(); ++k) x[cols_[k]] = vals_[k];
  }
  if (offset_ != nullptr) x -= *offset_;
  return x;
}

RowVector CenteredRow::dot(const DenseMatrix& W) const {
  RowVector out;
  if (dense_ != nullptr) {
    Eigen::Map<const RowVector> x(dense_, d_);
    if (offset_ != nullptr) {
      out = (x - offset_->transpose()) * W;
    } else {
      out = x * W;
    }
    return out;
  }
  out = RowVector::Zero(W.cols());
  for (std::size_t k = 0; k < cols_.size(); ++k) out += vals_[k] * W.row(cols_[k]);
  if (offset_ != nullptr) out.noalias() -= offset_->transpose() * W;
  return out;
}

double CenteredRow::dot(const Vector& v) const {
  double out = 0.0;
  if (dense_ != nullptr) {
    out = Eigen::Map<const Vector>(dense_, d_).dot(v);
  } else {
    for (std::size_t k = 0; k < cols_.size(); ++k) out += vals_[k] * v[cols_[k]];
  }
  if (offset_ != nullptr) out -= offset_->dot(v);
  return out;
}

void CenteredRow::add_outer_to(DenseMatrix& W, const RowVector& coeff) const {
  if (dense_ != nullptr) {
    Eigen::Map<const Vector> x(dense_, d_);
    if (offset_ != nullptr) {
      W.noalias() += (x - *offset_) * coeff;
    } else {
      W.noalias() += x * coeff;
    }
    return;
  }
  for (std::size_t k = 0; k < cols_.size(); ++k) W.row(cols_[k]) += vals_[k] * coeff;
  if (offset_ != nullptr) W.noalias() -= *offset_ * coeff;
}

// CenteredMatrixView

CenteredMatrixView::CenteredMatrixView(RawMatrix base, Centering centering)
    : base_(std::move(base)), centered_(centering == Centering::kColumnMeans) {
  const Index n = base_.rows();
  const Index d = base_.cols();
  means_ = Vector::Zero(d);
  norms_sq_ = Vector::Zero(n);

  if (!base_.is_sparse()) {
    const auto& X = base_.dense_values();
    if (centered_) means_ = X.colwise().mean().transpose();
    for (Index i = 0; i < n; ++i) norms_sq_[i] = (X.row(i) - means_.transpose()).squaredNorm();
  } else {
    const auto& X = base_.sparse_values();
    if (centered_) {
      for (Index i = 0; i < n; ++i) {
        for (SparseMatrix::InnerIterator it(X, i); it; ++it) means_[it.col()] += it.value();
      }
      means_ /= static_cast<double>(n);
    }
    // ||x - mu||^2 = sum over stored (x_j - mu_j)^2 + sum over unstored mu_j^2,
    // the latter as ||mu||^2 minus the stored part.
    const double mu_sq = means_.squaredNorm();
    for (Index i = 0; i < n; ++i) {
      double stored = 0.0;
      double mu_stored = 0.0;
      for (SparseMatrix::InnerIterator it(X, i); it; ++it) {
        const double diff = it.value() - means_[it.col()];
        stored += diff * diff;
        mu_stored += means_[it.col()] * means_[it.col()];
      }
      double rest = mu_sq - mu_stored;
      if (rest <= 4.0 * kMachineEps * static_cast<double>(d) * mu_sq) rest = 0.0;
      norms_sq_[i] = stored + rest;
    }
  }
  frob_norm_sq_ = norms_sq_.sum();
}

CenteredRow CenteredMatrixView::centered_row(Index i) const {
  if (i < 0 || i >= rows()) {
    throw IndexError("row " + std::to_string(i) + " out of range [0, " + std::to_string(rows()) +
                     ")");
  }
  const Vector* offset = centered_ ? &means_ : nullptr;
  if (!base_.is_sparse()) {
    return CenteredRow(base_.dense_values().row(i).data(), offset, cols());
  }
  const auto& X = base_.sparse_values();
  const auto begin = X.outerIndexPtr()[i];
  const auto count = static_cast<std::size_t>(X.outerIndexPtr()[i + 1] - begin);
  return CenteredRow(std::span<const std::int64_t>(X.innerIndexPtr() + begin, count),
                     std::span<const double>(X.valuePtr() + begin, count), offset, cols());
}

Vector CenteredMatrixView::multiply(const Vector& v) const {
  Vector out = base_.is_sparse() ? Vector(base_.sparse_values() * v)
                                 : Vector(base_.dense_values() * v);
  if (centered_) out.array() -= means_.dot(v);
  return out;
}

Vector CenteredMatrixView::multiply_transpose(const Vector& u) const {
  Vector out = base_.is_sparse() ? Vector(base_.sparse_values().transpose() * u)
                                 : Vector(base_.dense_values().transpose() * u);
  if (centered_) out -= means_ * u.sum();
  return out;
}

DenseMatrix CenteredMatrixView::multiply(const DenseMatrix& W) const {
  DenseMatrix out = base_.is_sparse() ? DenseMatrix(base_.sparse_values() * W)
                                      : DenseMatrix(base_.dense_values() * W);
  if (centered_) out.rowwise() -= means_.transpose() * W;
  return out;
}

DenseMatrix CenteredMatrixView::to_dense() const {
  DenseMatrix X = base_.to_dense();
  if (centered_) X.rowwise() -= means_.transpose();
  return X;
}

}  // namespace rklda
