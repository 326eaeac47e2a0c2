#include <rklda/scatter.hpp>

namespace rklda {

namespace {

void check_labels(const DenseMatrix& X, const LabelVector& labels) {
  if (labels.size() != X.rows()) {
    throw InvalidData("label count " + std::to_string(labels.size()) + " does not match " +
                      std::to_string(X.rows()) + " observations");
  }
}

}  // namespace

DenseMatrix class_centroids(const DenseMatrix& X, const LabelVector& labels) {
  check_labels(X, labels);
  DenseMatrix centroids = DenseMatrix::Zero(labels.num_classes(), X.cols());
  for (Index i = 0; i < X.rows(); ++i) centroids.row(labels.class_of(i)) += X.row(i);
  for (Index j = 0; j < labels.num_classes(); ++j) {
    centroids.row(j) /= static_cast<double>(labels.counts()[static_cast<std::size_t>(j)]);
  }
  return centroids;
}

ScatterSet scatter_matrices(const DenseMatrix& X, const LabelVector& labels) {
  check_labels(X, labels);
  const double n = static_cast<double>(X.rows());
  const double d = static_cast<double>(X.cols());
  if (n * d * d > kScatterLimit) {
    throw TooLarge("scatter matrices need n*d^2 <= 1e8, got " + std::to_string(n * d * d));
  }

  ScatterSet s;
  s.centroids = class_centroids(X, labels);
  s.grand_centroid = X.colwise().mean().transpose();

  DenseMatrix within_dev = X;
  for (Index i = 0; i < X.rows(); ++i) within_dev.row(i) -= s.centroids.row(labels.class_of(i));
  DenseMatrix total_dev = X.rowwise() - s.grand_centroid.transpose();
  DenseMatrix between_dev = s.centroids.rowwise() - s.grand_centroid.transpose();
  for (Index j = 0; j < between_dev.rows(); ++j) {
    between_dev.row(j) *= std::sqrt(static_cast<double>(labels.counts()[static_cast<std::size_t>(j)]));
  }

  s.within = (within_dev.transpose() * within_dev) / n;
  s.total = (total_dev.transpose() * total_dev) / n;
  s.between = (between_dev.transpose() * between_dev) / n;
  for (Eigen::MatrixXd* m : {&s.within, &s.total, &s.between}) {
    *m = 0.5 * (*m + m->transpose()).eval();
  }
  return s;
}

ScatterTraces scatter_traces(const DenseMatrix& X, const LabelVector& labels) {
  const DenseMatrix centroids = class_centroids(X, labels);
  const RowVector grand = X.colwise().mean();
  const double n = static_cast<double>(X.rows());

  ScatterTraces t;
  for (Index i = 0; i < X.rows(); ++i) {
    t.within += (X.row(i) - centroids.row(labels.class_of(i))).squaredNorm();
  }
  for (Index j = 0; j < centroids.rows(); ++j) {
    t.between += static_cast<double>(labels.counts()[static_cast<std::size_t>(j)]) *
                 (centroids.row(j) - grand).squaredNorm();
  }
  t.within /= n;
  t.between /= n;
  return t;
}

}  // namespace rklda
