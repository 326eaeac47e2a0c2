#pragma once

#include <rklda/labels.hpp>
#include <rklda/matrix.hpp>

#include <string_view>

namespace rklda {

enum class SubspaceOrigin { kRK, kLSQR, kPINV, kULDA };

std::string_view to_string(SubspaceOrigin origin);

/// A d x c coefficient / transformation matrix together with how it was made.
struct Subspace {
  DenseMatrix basis;
  SubspaceOrigin origin = SubspaceOrigin::kRK;
  /// Relative tolerance for column-rank decisions: singular values at or below
  /// rank_tol * sigma_max count as zero. Zero selects max(rows, cols) * eps.
  double rank_tol = 0.0;
  /// False when an iterative solver stopped at its iteration cap.
  bool converged = true;
  Index iterations = 0;
};

/// max(rows, cols) * machine epsilon, the default relative rank tolerance.
double default_rank_tol(Index rows, Index cols);

/// Least-norm least-squares solution of X_c B = Y, one LSQR solve per column of
/// Y, touching the data only through products with X_c and X_c^T.
/// `max_iters` = 0 picks 4 * min(n, d) + 100 per column.
Subspace solve_lsqr(const CenteredMatrixView& view, const DenseMatrix& Y, double tol = 1e-12,
                    Index max_iters = 0);

/// Dense n*d limit for the SVD-based oracles.
inline constexpr double kDenseOracleLimit = 1e7;

/// X^+ Y from a dense SVD with rank truncation. X is used exactly as given
/// (centering is the caller's business). Throws TooLarge when n*d > 1e7.
Subspace pinv_oracle(const DenseMatrix& X, const DenseMatrix& Y, double rank_tol = 0.0);

/// Eigenvectors of S_t^+ S_b with nonzero eigenvalue (at most g - 1), from raw
/// (uncentered) observations. Throws DegenerateSubspace when S_b vanishes.
Subspace ulda_oracle(const DenseMatrix& X, const LabelVector& labels, double rank_tol = 0.0);

/// Orthonormal basis for the column space of M with rank truncation.
DenseMatrix orthonormal_basis(const DenseMatrix& M, double rank_tol = 0.0);

/// Principal angles between range(A) and range(B), ascending, in [0, pi/2];
/// min(rank A, rank B) of them. Small angles are taken from sines so they are
/// accurate near zero. Throws DegenerateSubspace when either range is {0}.
Vector principal_angles(const Subspace& A, const Subspace& B);

/// All principal angles below `tol` radians.
bool equivalent_subspaces(const Subspace& A, const Subspace& B, double tol = 1e-8);

}  // namespace rklda
