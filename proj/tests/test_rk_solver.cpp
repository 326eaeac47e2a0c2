#include <rklda/baselines.hpp>
#include <rklda/diagnostics.hpp>
#include <rklda/rk_solver.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace rklda {
namespace {

using testing::gaussian;

struct Planted {
  CenteredMatrixView view;
  DenseMatrix Y;
  DenseMatrix W_star;
};

// Consistent system: Y = X_c W_bar, so W* = X_c^+ Y is the row-space part of W_bar.
Planted planted(Index n, Index d, Index g, Rng& rng) {
  CenteredMatrixView view(RawMatrix::dense(gaussian(n, d, rng)));
  const DenseMatrix Xc = view.to_dense();
  const DenseMatrix Y = Xc * gaussian(d, g, rng);
  return {std::move(view), Y, testing::pinv_reference(Xc) * Y};
}

TEST(RkStep, ProjectsZeroIterate) {
  DenseMatrix X(1, 2);
  X << 2, 0;
  const CenteredMatrixView view(RawMatrix::dense(X), Centering::kNone);
  DenseMatrix Y(1, 2);
  Y << 1, -1;
  const DenseMatrix W = rk_step(DenseMatrix::Zero(2, 2), view, Y, 0);
  DenseMatrix expected(2, 2);
  expected << 0.5, -0.5, 0, 0;
  EXPECT_LE((W - expected).norm(), 1e-15);
}

TEST(RkStep, EvaluatesUpdateFormula) {
  DenseMatrix X(1, 2);
  X << 1, 1;
  const CenteredMatrixView view(RawMatrix::dense(X), Centering::kNone);
  const DenseMatrix Y = DenseMatrix::Constant(1, 1, 4.0);
  const DenseMatrix W = rk_step(DenseMatrix::Zero(2, 1), view, Y, 0);
  EXPECT_DOUBLE_EQ(W(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(W(1, 0), 2.0);
  EXPECT_DOUBLE_EQ((X * W)(0, 0), 4.0);
}

TEST(RkStep, FixedPointWhenEquationHolds) {
  Rng rng = make_rng(31, 0);
  const CenteredMatrixView view(RawMatrix::dense(gaussian(5, 4, rng)));
  const DenseMatrix W = gaussian(4, 3, rng);
  const DenseMatrix Y = view.multiply(W);
  for (Index i = 0; i < 5; ++i) EXPECT_LE((rk_step(W, view, Y, i) - W).norm(), 1e-13);
}

TEST(RkStep, SatisfiesSampledEquation) {
  Rng rng = make_rng(32, 0);
  const CenteredMatrixView view(RawMatrix::dense(gaussian(6, 9, rng)));
  const DenseMatrix Y = gaussian(6, 2, rng);
  const DenseMatrix W0 = gaussian(9, 2, rng);
  for (Index i = 0; i < 6; ++i) {
    const DenseMatrix W = rk_step(W0, view, Y, i);
    EXPECT_LE((view.centered_row(i).dot(W) - Y.row(i)).norm(), 1e-12);
  }
}

TEST(RkStep, ZeroRowAndIndexErrors) {
  // Identical rows center to zero.
  const CenteredMatrixView view(RawMatrix::dense(DenseMatrix::Ones(3, 2)));
  EXPECT_THROW(rk_step(DenseMatrix::Zero(2, 1), view, DenseMatrix::Ones(3, 1), 0), ZeroRowError);
  EXPECT_THROW(rk_step(DenseMatrix::Zero(2, 1), view, DenseMatrix::Ones(3, 1), 3), IndexError);
}

TEST(SolveRk, OrthogonalRowsConvergeExactly) {
  const CenteredMatrixView view(RawMatrix::dense(DenseMatrix::Identity(2, 2)), Centering::kNone);
  DenseMatrix Y(2, 1);
  Y << 3, 4;
  SolverConfig config;
  config.max_iters = 60;
  config.seed = 5;
  const SolveResult r = solve_rk(view, Y, config);
  EXPECT_EQ(r.W(0, 0), 3.0);
  EXPECT_EQ(r.W(1, 0), 4.0);
}

TEST(SolveRk, SingleIterationIsOneStep) {
  Rng rng = make_rng(33, 0);
  const CenteredMatrixView view(RawMatrix::dense(gaussian(7, 5, rng)));
  const DenseMatrix Y = gaussian(7, 2, rng);
  SolverConfig config;
  config.max_iters = 1;
  config.seed = 8;
  const SolveResult r = solve_rk(view, Y, config);
  Rng replay = make_rng(8, 0);
  const Index i = build_sampler(view).sample(replay);
  EXPECT_EQ(r.W, rk_step(DenseMatrix::Zero(5, 2), view, Y, i));
  config.max_iters = 0;
  EXPECT_THROW(solve_rk(view, Y, config), InvalidData);
}

TEST(SolveRk, PlantedConsistentSystemReachesLeastNormSolution) {
  Rng rng = make_rng(34, 0);
  const Planted p = planted(20, 100, 3, rng);
  const ConditionProfile profile = condition_profile(p.view.to_dense());
  const double eps0 = p.W_star.squaredNorm();
  SolverConfig config;
  config.max_iters = iterations_for_tolerance(1e-10 * eps0, eps0, profile.kappa);
  config.seed = 1;
  const SolveResult r = solve_rk(p.view, p.Y, config);
  EXPECT_LT((r.W - p.W_star).norm() / p.W_star.norm(), 1e-3);
}

TEST(SolveRk, IteratesStayInRowSpace) {
  Rng rng = make_rng(35, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const CenteredMatrixView view(RawMatrix::dense(gaussian(12, 30, rng)));
    const DenseMatrix Y = gaussian(12, 3, rng);
    const DenseMatrix V = testing::row_space_basis(view.to_dense());
    SolverConfig config;
    config.max_iters = 300;
    config.checkpoint_every = 7;
    config.trace_iterates = true;
    config.seed = static_cast<std::uint64_t>(trial);
    const SolveResult r = solve_rk(view, Y, config);
    for (const auto& point : r.trace) {
      const DenseMatrix& W = *point.iterate;
      EXPECT_LE((W - V * (V.transpose() * W)).norm(), 1e-8 * std::max(1.0, W.norm()));
    }
  }
}

TEST(SolveRk, MonotoneTowardsSolutionOnConsistentSystem) {
  Rng rng = make_rng(36, 0);
  const Planted p = planted(15, 40, 2, rng);
  const SamplingDistribution sampler = build_sampler(p.view);
  DenseMatrix W = DenseMatrix::Zero(40, 2);
  double previous = (W - p.W_star).norm();
  for (int k = 0; k < 500; ++k) {
    rk_step_inplace(W, p.view, p.Y, sampler.sample(rng));
    const double now = (W - p.W_star).norm();
    EXPECT_LE(now, previous * (1.0 + 1e-12) + 1e-14);
    previous = now;
  }
}

TEST(SolveRk, ExpectedOneStepContraction) {
  Rng rng = make_rng(37, 0);
  const Planted p = planted(10, 25, 2, rng);
  const ConditionProfile profile = condition_profile(p.view.to_dense());
  const SamplingDistribution sampler = build_sampler(p.view);
  // Exact expectation over the sampling distribution, from several row-space starts.
  const DenseMatrix V = testing::row_space_basis(p.view.to_dense());
  for (int start = 0; start < 5; ++start) {
    const DenseMatrix W = V * gaussian(V.cols(), 2, rng);
    double expected = 0.0;
    for (Index i = 0; i < 10; ++i) {
      expected += sampler.probs()[i] * (rk_step(W, p.view, p.Y, i) - p.W_star).squaredNorm();
    }
    EXPECT_LE(expected, (1.0 - 1.0 / profile.kappa) * (W - p.W_star).squaredNorm() * (1 + 1e-12));
  }
}

TEST(SolveRk, DeterministicForEqualSeeds) {
  Rng rng = make_rng(38, 0);
  const CenteredMatrixView view(RawMatrix::dense(gaussian(30, 12, rng)));
  const DenseMatrix Y = gaussian(30, 3, rng);
  SolverConfig config;
  config.max_iters = 400;
  config.seed = 77;
  config.checkpoint_every = 50;
  const SolveResult a = solve_rk(view, Y, config);
  const SolveResult b = solve_rk(view, Y, config);
  EXPECT_EQ(a.W, b.W);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t t = 0; t < a.trace.size(); ++t) {
    EXPECT_EQ(a.trace[t].sampled_residual_sq, b.trace[t].sampled_residual_sq);
  }
  config.seed = 78;
  EXPECT_NE(solve_rk(view, Y, config).W, a.W);
}

TEST(SolveRk, SparseAndDenseGiveSameIterates) {
  Rng rng = make_rng(39, 0);
  DenseMatrix X = gaussian(25, 40, rng);
  std::vector<Eigen::Triplet<double, std::int64_t>> t;
  for (Index i = 0; i < 25; ++i) {
    for (Index j = 0; j < 40; ++j) {
      if (uniform01(rng) < 0.75) X(i, j) = 0.0;
      if (X(i, j) != 0.0) t.emplace_back(i, j, X(i, j));
    }
  }
  const CenteredMatrixView dense(RawMatrix::dense(X));
  const CenteredMatrixView sparse(RawMatrix::from_triplets(25, 40, t));
  const DenseMatrix Y = gaussian(25, 2, rng);
  SolverConfig config;
  config.max_iters = 300;
  config.seed = 3;
  EXPECT_LE((solve_rk(dense, Y, config).W - solve_rk(sparse, Y, config).W).norm(), 1e-9);
}

TEST(SolveRk, TraceScheduleAndSummaries) {
  Rng rng = make_rng(40, 0);
  const CenteredMatrixView view(RawMatrix::dense(gaussian(10, 5, rng)));
  const DenseMatrix Y = gaussian(10, 2, rng);
  SolverConfig config;
  config.max_iters = 23;
  config.checkpoint_every = 10;
  const SolveResult r = solve_rk(view, Y, config);
  ASSERT_EQ(r.trace.size(), 4u);
  EXPECT_EQ(r.trace[0].iteration, 0);
  EXPECT_EQ(r.trace[1].iteration, 10);
  EXPECT_EQ(r.trace[3].iteration, 23);
  EXPECT_FALSE(r.trace[1].iterate.has_value());
  EXPECT_DOUBLE_EQ(r.trace[3].frob_norm, r.W.norm());
  EXPECT_GT(r.trace[1].sampled_residual_sq, 0.0);
}

TEST(SolveRk, TailAverageIsUniformMeanAfterBurnIn) {
  Rng rng = make_rng(41, 0);
  const CenteredMatrixView view(RawMatrix::dense(gaussian(8, 4, rng)));
  const DenseMatrix Y = gaussian(8, 2, rng);
  SolverConfig config;
  config.max_iters = 40;
  config.seed = 4;
  config.checkpoint_every = 1;
  config.trace_iterates = true;
  const SolveResult plain = solve_rk(view, Y, config);
  config.tail_average = 0.5;
  const SolveResult averaged = solve_rk(view, Y, config);
  DenseMatrix mean = DenseMatrix::Zero(4, 2);
  for (Index k = 21; k <= 40; ++k) mean += *plain.trace[static_cast<std::size_t>(k)].iterate;
  mean /= 20.0;
  EXPECT_LE((averaged.W - mean).norm(), 1e-12 * mean.norm());
  config.tail_average = 1.0;
  EXPECT_THROW(solve_rk(view, Y, config), InvalidData);
}

TEST(SolveRk, ZeroRowsReported) {
  DenseMatrix X(4, 2);
  X << 1, 0, 0, 2, 0.5, 1, 0.5, 1;  // rows 2 and 3 equal the column means
  const CenteredMatrixView view(RawMatrix::dense(X));
  ASSERT_NEAR(view.centered_row_norms_sq()[2], 0.0, 1e-15);
  DenseMatrix Y = DenseMatrix::Zero(4, 1);
  Y(3, 0) = 1.0;
  SolverConfig config;
  config.max_iters = 20;
  const SolveResult r = solve_rk(view, Y, config);
  EXPECT_EQ(r.excluded_rows, (std::vector<Index>{2, 3}));
  EXPECT_EQ(r.inconsistent_zero_rows, (std::vector<Index>{3}));
}

TEST(SolveRk, RejectsMismatchedShapes) {
  const CenteredMatrixView view(RawMatrix::dense(DenseMatrix::Identity(3, 3)));
  SolverConfig config;
  EXPECT_THROW(solve_rk(view, DenseMatrix::Ones(2, 1), config), InvalidData);
  config.initial = DenseMatrix::Zero(2, 1);
  EXPECT_THROW(solve_rk(view, DenseMatrix::Ones(3, 1), config), InvalidData);
}

TEST(SolveRk, DivergenceDetected) {
  DenseMatrix X(2, 1);
  X << 0, 1;
  const CenteredMatrixView view(RawMatrix::dense(X));
  DenseMatrix Y(2, 1);
  Y << 0, std::numeric_limits<double>::max();
  SolverConfig config;
  config.max_iters = 50;
  config.initial = DenseMatrix::Constant(1, 1, -std::numeric_limits<double>::max());
  EXPECT_THROW(solve_rk(view, Y, config), NumericalDivergence);
}

}  // namespace
}  // namespace rklda
