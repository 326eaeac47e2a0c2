#pragma once

#include <rklda/labels.hpp>
#include <rklda/matrix.hpp>
#include <rklda/sampling.hpp>

#include <optional>
#include <vector>

namespace rklda {

struct SolverConfig {
  /// Iteration budget K; must be at least 1.
  Index max_iters = 1;
  std::uint64_t seed = 0;
  /// Substream of `seed` used for this solve (replicates and trials use distinct ids).
  std::uint64_t stream = 0;
  /// Trace cadence; 0 disables tracing.
  Index checkpoint_every = 0;
  /// Store full iterates at checkpoints, not just summary statistics.
  bool trace_iterates = false;
  /// Burn-in fraction in [0, 1); when set, the uniform average of the iterates
  /// after iteration floor(fraction * K) is returned instead of the last one.
  std::optional<double> tail_average;
  /// Starting iterate (d x g). Must lie in the row space of the centered data;
  /// the default zero matrix always does.
  std::optional<DenseMatrix> initial;
  SamplingMethod sampling = SamplingMethod::kAlias;
};

/// Default iteration budget when the caller gives none: 20 passes worth of rows.
inline Index default_iterations(Index n) { return 20 * n; }

struct TracePoint {
  Index iteration = 0;
  /// Mean of ||y_i^T - x_i^T W||^2 over the rows sampled since the previous checkpoint.
  double sampled_residual_sq = 0.0;
  double frob_norm = 0.0;
  std::optional<DenseMatrix> iterate;
};

struct SolveResult {
  DenseMatrix W;
  Index iterations_run = 0;
  std::vector<TracePoint> trace;
  std::uint64_t rng_seed = 0;
  /// Rows never sampled because their centered norm is zero.
  std::vector<Index> excluded_rows;
  /// Subset of excluded_rows whose right-hand side is nonzero (0 = y_i^T cannot hold).
  std::vector<Index> inconsistent_zero_rows;
};

/// One Kaczmarz projection onto the solution set of row i:
///   W + (x_i / ||x_i||^2) (y_i^T - x_i^T W)
/// with x_i the centered row. Throws ZeroRowError when ||x_i|| = 0.
DenseMatrix rk_step(const DenseMatrix& W, const CenteredMatrixView& view, const DenseMatrix& Y,
                    Index i);

/// In-place form of rk_step; returns the pre-update residual y_i^T - x_i^T W.
RowVector rk_step_inplace(DenseMatrix& W, const CenteredMatrixView& view, const DenseMatrix& Y,
                          Index i);

/// Randomized Kaczmarz for min ||X_c W - Y||_F with norm-proportional row
/// sampling. Deterministic for fixed (data, config).
SolveResult solve_rk(const CenteredMatrixView& view, const DenseMatrix& Y,
                     const SolverConfig& config);

inline SolveResult solve_rk(const CenteredMatrixView& view, const IndicatorMatrix& Y,
                            const SolverConfig& config) {
  return solve_rk(view, Y.values(), config);
}

/// Same, reusing a prebuilt sampler (used by repeated trials on one data set).
SolveResult solve_rk(const CenteredMatrixView& view, const DenseMatrix& Y,
                     const SolverConfig& config, const SamplingDistribution& sampler);

}  // namespace rklda
