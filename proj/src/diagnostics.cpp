#include <rklda/baselines.hpp>
#include <rklda/diagnostics.hpp>
#include <rklda/parallel.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace rklda {

ConditionProfile condition_profile(const DenseMatrix& X, double rank_tol) {
  if (static_cast<double>(X.rows()) * static_cast<double>(X.cols()) > kDenseOracleLimit) {
    throw TooLarge("condition profile needs a dense SVD; n*d exceeds 1e7");
  }
  if (rank_tol <= 0.0) rank_tol = default_rank_tol(X.rows(), X.cols());
  const Eigen::MatrixXd A = X;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  const Vector& sigma = svd.singularValues();
  if (sigma.size() == 0 || !(sigma[0] > 0.0)) throw DegenerateMatrix("matrix is zero");

  ConditionProfile p;
  while (p.rank < sigma.size() && sigma[p.rank] > rank_tol * sigma[0]) ++p.rank;
  p.sigma_plus_min = sigma[p.rank - 1];
  p.frob_norm_sq = A.squaredNorm();
  p.beta = 1.0 / (p.sigma_plus_min * p.sigma_plus_min);
  p.kappa = p.frob_norm_sq * p.beta;
  return p;
}

double error_bound(const ConditionProfile& profile, double eps0, double resid_norm_sq, Index k) {
  if (k < 0) throw InvalidData("iteration count must be non-negative");
  const double contraction = std::max(0.0, 1.0 - 1.0 / profile.kappa);
  const double decay = k == 0 ? 1.0 : std::pow(contraction, static_cast<double>(k));
  return decay * eps0 + profile.beta * resid_norm_sq;
}

Index iterations_for_tolerance(double eps, double eps0, double kappa) {
  if (!(eps > 0.0)) throw InvalidData("tolerance must be positive");
  if (eps >= eps0) return 0;
  if (kappa <= 1.0) return 1;
  const double k = (std::log(eps) - std::log(eps0)) / std::log1p(-1.0 / kappa);
  return static_cast<Index>(std::ceil(k));
}

Residual residual_at(const DenseMatrix& W, const CenteredMatrixView& view, const DenseMatrix& Y) {
  if (W.rows() != view.cols() || Y.rows() != view.rows() || W.cols() != Y.cols()) {
    throw InvalidData("residual_at: dimension mismatch");
  }
  Residual r;
  r.frob = (Y - view.multiply(W)).norm();
  const double y_norm = Y.norm();
  r.relative = y_norm > 0.0 ? r.frob / y_norm : 0.0;
  return r;
}

ExpectedStepCheck expected_step_check(const CenteredMatrixView& view, const DenseMatrix& Y,
                                      const DenseMatrix& W, Index m, Rng& rng) {
  if (m < 1) throw InvalidData("sample count must be at least 1");
  const SamplingDistribution sampler = build_sampler(view);
  const double frob_sq = view.frob_norm_sq();

  ExpectedStepCheck out;
  out.empirical_mean_step = DenseMatrix::Zero(W.rows(), W.cols());
  // Sum the steps by row index first: step_i depends only on i, so the mean is
  // sum_i counts_i * step_i / m.
  std::vector<Index> counts(static_cast<std::size_t>(view.rows()), 0);
  for (Index s = 0; s < m; ++s) ++counts[static_cast<std::size_t>(sampler.sample(rng))];

  const DenseMatrix residual = Y - view.multiply(W);  // rows r_i^T = y_i^T - x_i^T W
  double second_moment = 0.0;
  for (Index i = 0; i < view.rows(); ++i) {
    const double norm_sq = view.centered_row_norms_sq()[i];
    if (!(norm_sq > 0.0)) continue;
    second_moment += residual.row(i).squaredNorm() / frob_sq;
    const Index c = counts[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    view.centered_row(i).add_outer_to(out.empirical_mean_step,
                                      residual.row(i) * (static_cast<double>(c) / norm_sq));
  }
  out.empirical_mean_step /= static_cast<double>(m);

  out.analytic_step = DenseMatrix(W.rows(), W.cols());
  for (Index j = 0; j < W.cols(); ++j) {
    out.analytic_step.col(j) = view.multiply_transpose(residual.col(j)) / frob_sq;
  }
  out.deviation = (out.empirical_mean_step - out.analytic_step).norm();
  const double variance = std::max(0.0, second_moment - out.analytic_step.squaredNorm());
  out.predicted_deviation = std::sqrt(variance / static_cast<double>(m));
  return out;
}

DenseMatrix spectral_expected_step(const DenseMatrix& X, const DenseMatrix& W,
                                   const DenseMatrix& W_star) {
  const Eigen::MatrixXd A = X;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = default_rank_tol(X.rows(), X.cols()) * (sigma.size() ? sigma[0] : 0.0);
  const Eigen::MatrixXd diff = W - W_star;
  DenseMatrix step = DenseMatrix::Zero(W.rows(), W.cols());
  for (Index j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] > cutoff)) continue;
    const Vector v = svd.matrixV().col(j);
    const RowVector gamma = v.transpose() * diff;
    step.noalias() += (sigma[j] * sigma[j]) * v * gamma;
  }
  return step / -A.squaredNorm();
}

ConvergenceReport run_convergence_study(const CenteredMatrixView& view, const DenseMatrix& Y,
                                        Index trials, const SolverConfig& config,
                                        unsigned threads) {
  if (trials < 1) throw InvalidData("need at least one trial");
  if (Y.rows() != view.rows()) throw InvalidData("right-hand side rows do not match data");

  const DenseMatrix X = view.to_dense();
  const Subspace star = pinv_oracle(X, Y);
  const DenseMatrix& W_star = star.basis;

  ConvergenceReport report;
  report.trials = trials;
  report.profile = condition_profile(X);
  const DenseMatrix R = Y - X * W_star;
  report.residual_norm_sq = R.squaredNorm();
  report.residual_floor = report.profile.beta * report.residual_norm_sq;
  const double y_norm = Y.norm();
  report.relative_residual = y_norm > 0.0 ? std::sqrt(report.residual_norm_sq) / y_norm : 0.0;
  report.consistent = report.relative_residual < kConsistencyThreshold;

  const DenseMatrix W0 = config.initial ? *config.initial : DenseMatrix::Zero(X.cols(), Y.cols());
  report.eps0 = (W0 - W_star).squaredNorm();

  SolverConfig trial_config = config;
  trial_config.trace_iterates = true;
  trial_config.tail_average.reset();
  if (trial_config.checkpoint_every <= 0) {
    trial_config.checkpoint_every = std::max<Index>(1, config.max_iters / 50);
  }

  const SamplingDistribution sampler = build_sampler(view, config.sampling);
  std::vector<std::vector<double>> errors(static_cast<std::size_t>(trials));
  std::vector<Index> iterations;

  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    SolverConfig c = trial_config;
    c.stream = config.stream + t;
    const SolveResult result = solve_rk(view, Y, c, sampler);
    auto& errs = errors[t];
    errs.reserve(result.trace.size());
    for (const auto& point : result.trace) errs.push_back((*point.iterate - W_star).squaredNorm());
  });

  {
    // Checkpoint schedule is identical across trials; rebuild it without storing iterates.
    const Index every = trial_config.checkpoint_every;
    iterations.push_back(0);
    for (Index k = every; k <= config.max_iters; k += every) iterations.push_back(k);
    if (iterations.back() != config.max_iters) iterations.push_back(config.max_iters);
  }

  const double t_count = static_cast<double>(trials);
  for (std::size_t c = 0; c < iterations.size(); ++c) {
    // Shifted by the first trial so identical errors (k = 0) average exactly.
    const double shift = errors.front()[c];
    double sum = 0.0;
    for (const auto& errs : errors) sum += errs[c] - shift;
    const double offset = sum / t_count;
    Checkpoint point;
    point.iteration = iterations[c];
    point.mean_error = shift + offset;
    double spread = 0.0;
    for (const auto& errs : errors) {
      const double dev = (errs[c] - shift) - offset;
      spread += dev * dev;
    }
    const double var = trials > 1 ? spread / (t_count - 1.0) : 0.0;
    point.std_error = std::sqrt(var / t_count);
    point.bound = error_bound(report.profile, report.eps0, report.residual_norm_sq, point.iteration);
    report.checkpoints.push_back(point);
  }
  return report;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "k,empirical,std_error,bound\n";
  for (const auto& c : report.checkpoints) {
    out << c.iteration << ',' << c.mean_error << ',' << c.std_error << ',' << c.bound << '\n';
  }
  return out.str();
}

}  // namespace rklda
