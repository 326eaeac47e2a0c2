#pragma once

#include <rklda/matrix.hpp>
#include <rklda/rk_solver.hpp>

#include <string>
#include <vector>

namespace rklda {

/// Spectral quantities that drive the Kaczmarz error bound.
struct ConditionProfile {
  double kappa = 0.0;           // ||X||_F^2 / sigma_min+^2
  double sigma_plus_min = 0.0;  // smallest nonzero singular value
  double frob_norm_sq = 0.0;
  double beta = 0.0;            // 1 / sigma_min+^2
  Index rank = 0;
};

/// Dense SVD of X exactly as given. Throws DegenerateMatrix for X = 0 and
/// TooLarge beyond the dense oracle limit.
ConditionProfile condition_profile(const DenseMatrix& X, double rank_tol = 0.0);

/// (1 - 1/kappa)^k eps0 + beta * resid_norm_sq
double error_bound(const ConditionProfile& profile, double eps0, double resid_norm_sq, Index k);

/// Smallest k with k >= (log eps - log eps0) / log(1 - 1/kappa).
/// Returns 0 when eps >= eps0 and 1 when kappa <= 1.
Index iterations_for_tolerance(double eps, double eps0, double kappa);

struct Residual {
  double frob = 0.0;      // ||Y - X_c W||_F
  double relative = 0.0;  // frob / ||Y||_F
};

Residual residual_at(const DenseMatrix& W, const CenteredMatrixView& view, const DenseMatrix& Y);

struct ExpectedStepCheck {
  DenseMatrix empirical_mean_step;
  DenseMatrix analytic_step;  // -X^T (X W - Y) / ||X||_F^2
  double deviation = 0.0;     // ||empirical - analytic||_F
  /// sqrt(E||step - E step||_F^2 / m), the deviation expected from sampling noise.
  double predicted_deviation = 0.0;
};

/// Averages m independent single Kaczmarz steps taken from the fixed iterate W.
ExpectedStepCheck expected_step_check(const CenteredMatrixView& view, const DenseMatrix& Y,
                                      const DenseMatrix& W, Index m, Rng& rng);

/// -(1/||X||_F^2) sum_j sigma_j^2 v_j gamma_j^T with gamma_j^T = v_j^T (W - W_star),
/// evaluated from a dense SVD of X (as given). Equals the analytic expected step.
DenseMatrix spectral_expected_step(const DenseMatrix& X, const DenseMatrix& W,
                                   const DenseMatrix& W_star);

struct Checkpoint {
  Index iteration = 0;
  double mean_error = 0.0;  // mean over trials of ||W_k - W*||_F^2
  double std_error = 0.0;   // standard error of that mean
  double bound = 0.0;       // error_bound at this k
};

struct ConvergenceReport {
  std::vector<Checkpoint> checkpoints;
  ConditionProfile profile;
  double eps0 = 0.0;
  double residual_norm_sq = 0.0;  // ||R*||_F^2
  double residual_floor = 0.0;    // beta ||R*||_F^2
  double relative_residual = 0.0;
  bool consistent = false;
  Index trials = 0;
};

inline constexpr double kConsistencyThreshold = 1e-10;

/// Independent seeded Kaczmarz restarts (substreams 0..trials-1) compared with
/// the pseudoinverse solution at every checkpoint. Aggregation is in trial
/// order, so the report does not depend on `threads`.
ConvergenceReport run_convergence_study(const CenteredMatrixView& view, const DenseMatrix& Y,
                                        Index trials, const SolverConfig& config,
                                        unsigned threads = 1);

std::string convergence_csv(const ConvergenceReport& report);

}  // namespace rklda
