#include <rklda/scatter.hpp>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"

namespace rklda {
namespace {

using testing::gaussian;

Index numerical_rank(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Vector& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = static_cast<double>(S.rows()) * kMachineEps * top * 10.0;
  return (ev.array() > tol).count();
}

// Definition-level oracle: explicit sums of outer products.
Eigen::MatrixXd within_reference(const DenseMatrix& X, const std::vector<Index>& cls, Index g) {
  const Index d = X.cols();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (Index j = 0; j < g; ++j) {
    Vector c = Vector::Zero(d);
    Index nj = 0;
    for (Index i = 0; i < X.rows(); ++i) {
      if (cls[static_cast<std::size_t>(i)] == j) {
        c += X.row(i).transpose();
        ++nj;
      }
    }
    c /= static_cast<double>(nj);
    for (Index i = 0; i < X.rows(); ++i) {
      if (cls[static_cast<std::size_t>(i)] == j) {
        const Vector dev = X.row(i).transpose() - c;
        S += dev * dev.transpose();
      }
    }
  }
  return S / static_cast<double>(X.rows());
}

TEST(Scatter, FourPointHandExample) {
  DenseMatrix X(4, 2);
  X << 0, 0, 2, 0, 0, 2, 2, 2;
  const ScatterSet s = scatter_matrices(X, testing::labels_from({0, 0, 1, 1}));
  Eigen::MatrixXd within(2, 2), between(2, 2);
  within << 1, 0, 0, 0;
  between << 0, 0, 0, 1;
  EXPECT_LE((s.within - within).norm(), 1e-15);
  EXPECT_LE((s.between - between).norm(), 1e-15);
  EXPECT_LE((s.total - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(s.centroids.row(0), RowVector((RowVector(2) << 1, 0).finished()));
  EXPECT_EQ(s.centroids.row(1), RowVector((RowVector(2) << 1, 2).finished()));
  EXPECT_EQ(s.grand_centroid, Vector::Ones(2));
  const ScatterTraces t = scatter_traces(X, testing::labels_from({0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(t.within, 1.0);
  EXPECT_DOUBLE_EQ(t.between, 1.0);
}

TEST(Scatter, IdenticalObservationsGiveZero) {
  const DenseMatrix X = DenseMatrix::Constant(5, 3, 2.5);
  const LabelVector labels = testing::labels_from({0, 1, 0, 1, 1});
  const ScatterSet s = scatter_matrices(X, labels);
  EXPECT_EQ(s.within.norm(), 0.0);
  EXPECT_EQ(s.between.norm(), 0.0);
  EXPECT_EQ(s.total.norm(), 0.0);
  const ScatterTraces t = scatter_traces(X, labels);
  EXPECT_EQ(t.within, 0.0);
  EXPECT_EQ(t.between, 0.0);
}

TEST(Scatter, OneObservationPerClass) {
  Rng rng = make_rng(61, 0);
  const DenseMatrix X = gaussian(4, 3, rng);
  const ScatterSet s = scatter_matrices(X, testing::labels_from({0, 1, 2, 3}));
  EXPECT_LE(s.within.norm(), 1e-15);
  EXPECT_LE((s.total - s.between).norm(), 1e-14);
}

TEST(Scatter, RandomInstancesSatisfyInvariants) {
  Rng rng = make_rng(62, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index g = 2 + static_cast<Index>(uniform_below(rng, 4));
    const Index n = g + static_cast<Index>(uniform_below(rng, 60));
    const Index d = 1 + static_cast<Index>(uniform_below(rng, 20));
    const LabelVector labels = testing::random_labels(n, g, rng);
    const DenseMatrix X = gaussian(n, d, rng) * 3.0 + DenseMatrix::Constant(n, d, 7.0);
    const ScatterSet s = scatter_matrices(X, labels);
    EXPECT_LE((s.total - s.within - s.between).norm(), 1e-10 * s.total.norm());
    EXPECT_LE(numerical_rank(s.between), g - 1);
    EXPECT_LE((s.within - within_reference(X, labels.class_indices(), g)).norm(), 1e-10 * s.within.norm());
    for (const Eigen::MatrixXd* m : {&s.within, &s.between, &s.total}) {
      EXPECT_LE((*m - m->transpose()).norm(), 1e-12 * std::max(1.0, m->norm()));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*m);
      EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * std::max(m->trace(), 1e-300));
    }
    const ScatterTraces t = scatter_traces(X, labels);
    EXPECT_NEAR(t.within, s.within.trace(), 1e-10 * std::max(1.0, t.within));
    EXPECT_NEAR(t.between, s.between.trace(), 1e-10 * std::max(1.0, t.between));
  }
}

TEST(Scatter, TranslationInvariance) {
  Rng rng = make_rng(63, 0);
  const DenseMatrix X = gaussian(25, 6, rng);
  const LabelVector labels = testing::random_labels(25, 3, rng);
  const RowVector shift = gaussian(1, 6, rng) * 100.0;
  const DenseMatrix moved = X.rowwise() + shift;
  const ScatterSet a = scatter_matrices(X, labels);
  const ScatterSet b = scatter_matrices(moved, labels);
  EXPECT_LE((a.within - b.within).norm(), 1e-9 * a.within.norm());
  EXPECT_LE((a.between - b.between).norm(), 1e-9 * a.between.norm());
  EXPECT_LE((a.total - b.total).norm(), 1e-9 * a.total.norm());
}

TEST(Scatter, Guards) {
  EXPECT_THROW(scatter_matrices(DenseMatrix::Zero(3, 2), testing::labels_from({0, 1})), InvalidData);
  EXPECT_THROW(scatter_traces(DenseMatrix::Zero(3, 2), testing::labels_from({0, 1})), InvalidData);
  // 2 * 7072^2 exceeds 1e8 while the data itself stays small.
  const DenseMatrix wide = DenseMatrix::Zero(2, 7072);
  EXPECT_THROW(scatter_matrices(wide, testing::labels_from({0, 1})), TooLarge);
  EXPECT_NO_THROW(scatter_traces(wide, testing::labels_from({0, 1})));
}

}  // namespace
}  // namespace rklda
