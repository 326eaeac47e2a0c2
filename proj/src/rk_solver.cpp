#include <rklda/rk_solver.hpp>

#include <cmath>

namespace rklda {

namespace {

void check_dimensions(const CenteredMatrixView& view, const DenseMatrix& Y) {
  if (Y.rows() != view.rows()) {
    throw InvalidData("right-hand side has " + std::to_string(Y.rows()) + " rows, data has " +
                      std::to_string(view.rows()));
  }
  if (Y.cols() < 1) throw InvalidData("right-hand side has no columns");
}

bool all_finite(const DenseMatrix& W) { return W.allFinite(); }

}  // namespace

RowVector rk_step_inplace(DenseMatrix& W, const CenteredMatrixView& view, const DenseMatrix& Y,
                          Index i) {
  const double norm_sq = view.centered_row_norms_sq()[i];
  const CenteredRow row = view.centered_row(i);
  if (!(norm_sq > 0.0)) throw ZeroRowError("row " + std::to_string(i) + " has zero centered norm");
  RowVector residual = Y.row(i) - row.dot(W);
  row.add_outer_to(W, residual / norm_sq);
  return residual;
}

DenseMatrix rk_step(const DenseMatrix& W, const CenteredMatrixView& view, const DenseMatrix& Y,
                    Index i) {
  if (W.rows() != view.cols() || W.cols() != Y.cols()) {
    throw InvalidData("iterate shape does not match data and right-hand side");
  }
  if (i < 0 || i >= view.rows()) throw IndexError("row " + std::to_string(i) + " out of range");
  DenseMatrix out = W;
  rk_step_inplace(out, view, Y, i);
  return out;
}

SolveResult solve_rk(const CenteredMatrixView& view, const DenseMatrix& Y,
                     const SolverConfig& config) {
  check_dimensions(view, Y);
  return solve_rk(view, Y, config, build_sampler(view, config.sampling));
}

SolveResult solve_rk(const CenteredMatrixView& view, const DenseMatrix& Y,
                     const SolverConfig& config, const SamplingDistribution& sampler) {
  check_dimensions(view, Y);
  if (config.max_iters < 1) throw InvalidData("max_iters must be at least 1");
  if (config.checkpoint_every < 0) throw InvalidData("checkpoint_every must be non-negative");
  if (config.tail_average && !(*config.tail_average >= 0.0 && *config.tail_average < 1.0)) {
    throw InvalidData("tail-average burn-in fraction must lie in [0, 1)");
  }
  if (sampler.probs().size() != view.rows()) {
    throw InvalidData("sampler was built for a different matrix");
  }

  const Index d = view.cols();
  const Index g = Y.cols();
  const Index K = config.max_iters;

  SolveResult result;
  result.rng_seed = config.seed;
  if (config.initial) {
    if (config.initial->rows() != d || config.initial->cols() != g) {
      throw InvalidData("initial iterate must be " + std::to_string(d) + "x" + std::to_string(g));
    }
    result.W = *config.initial;
  } else {
    result.W = DenseMatrix::Zero(d, g);
  }
  for (Index i = 0; i < view.rows(); ++i) {
    if (sampler.probs()[i] == 0.0) {
      result.excluded_rows.push_back(i);
      if (Y.row(i).squaredNorm() > 0.0) result.inconsistent_zero_rows.push_back(i);
    }
  }

  Rng rng = make_rng(config.seed, config.stream);
  DenseMatrix& W = result.W;

  const Index burn_in =
      config.tail_average ? static_cast<Index>(std::floor(*config.tail_average * K)) : K;
  DenseMatrix average;
  Index averaged = 0;

  auto record = [&](Index k, double window_sq, Index window) {
    TracePoint point;
    point.iteration = k;
    point.sampled_residual_sq = window > 0 ? window_sq / static_cast<double>(window) : 0.0;
    point.frob_norm = W.norm();
    if (config.trace_iterates) point.iterate = W;
    result.trace.push_back(std::move(point));
  };

  double window_sq = 0.0;
  Index window = 0;
  if (config.checkpoint_every > 0) record(0, 0.0, 0);

  for (Index k = 1; k <= K; ++k) {
    const Index i = sampler.sample(rng);
    const RowVector residual = rk_step_inplace(W, view, Y, i);
    const double r_sq = residual.squaredNorm();
    if (!std::isfinite(r_sq)) {
      throw NumericalDivergence("non-finite residual at iteration " + std::to_string(k));
    }
    window_sq += r_sq;
    ++window;

    if (k > burn_in) {
      if (averaged == 0) {
        average = W;
      } else {
        average += (W - average) / static_cast<double>(averaged + 1);
      }
      ++averaged;
    }
    if (config.checkpoint_every > 0 && (k % config.checkpoint_every == 0 || k == K)) {
      record(k, window_sq, window);
      window_sq = 0.0;
      window = 0;
    }
  }
  result.iterations_run = K;
  if (averaged > 0) W = std::move(average);
  if (!all_finite(W)) {
    throw NumericalDivergence("non-finite entries in final iterate after " + std::to_string(K) +
                              " iterations");
  }
  return result;
}

}  // namespace rklda
