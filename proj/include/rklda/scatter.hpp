#pragma once

#include <rklda/labels.hpp>

namespace rklda {

/// Within-class, between-class and total scatter, each scaled by 1/n.
struct ScatterSet {
  Eigen::MatrixXd within;   // S_w
  Eigen::MatrixXd between;  // S_b
  Eigen::MatrixXd total;    // S_t
  DenseMatrix centroids;    // g x d class means
  Vector grand_centroid;    // length d
};

struct ScatterTraces {
  double within = 0.0;
  double between = 0.0;
};

inline constexpr double kScatterLimit = 1e8;  // n * d^2

/// Raw (uncentered) observations in, centroid subtraction done here.
/// Throws TooLarge when n * d^2 exceeds 1e8.
ScatterSet scatter_matrices(const DenseMatrix& X, const LabelVector& labels);

/// trace(S_w) and trace(S_b) from the distance formulas, with no d x d work.
ScatterTraces scatter_traces(const DenseMatrix& X, const LabelVector& labels);

/// Class centroids (g x d) of raw observations.
DenseMatrix class_centroids(const DenseMatrix& X, const LabelVector& labels);

}  // namespace rklda
