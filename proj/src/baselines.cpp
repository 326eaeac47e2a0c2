#include <rklda/baselines.hpp>
#include <rklda/scatter.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rklda {

std::string_view to_string(SubspaceOrigin origin) {
  switch (origin) {
    case SubspaceOrigin::kRK:
      return "rk";
    case SubspaceOrigin::kLSQR:
      return "lsqr";
    case SubspaceOrigin::kPINV:
      return "pinv";
    case SubspaceOrigin::kULDA:
      return "ulda";
  }
  return "unknown";
}

double default_rank_tol(Index rows, Index cols) {
  return static_cast<double>(std::max(rows, cols)) * kMachineEps;
}

namespace {

struct LsqrOutcome {
  Vector x;
  Index iterations = 0;
  bool converged = false;
};

// Paige & Saunders bidiagonalization with the usual two stopping rules:
// compatible systems (||r|| small) and least-squares (||A^T r|| small).
LsqrOutcome lsqr_column(const CenteredMatrixView& A, const Vector& b, double tol, Index max_iters) {
  LsqrOutcome out;
  out.x = Vector::Zero(A.cols());

  Vector u = b;
  double beta = u.norm();
  if (beta == 0.0) {
    out.converged = true;
    return out;
  }
  u /= beta;
  Vector v = A.multiply_transpose(u);
  double alpha = v.norm();
  if (alpha == 0.0) {
    // b is orthogonal to range(A); x = 0 is the least-norm minimizer.
    out.converged = true;
    return out;
  }
  v /= alpha;

  Vector w = v;
  double phi_bar = beta;
  double rho_bar = alpha;
  const double b_norm = beta;
  double a_norm_sq = alpha * alpha;

  for (Index it = 1; it <= max_iters; ++it) {
    u = A.multiply(v) - alpha * u;
    beta = u.norm();
    if (beta > 0.0) {
      u /= beta;
      a_norm_sq += beta * beta;
    }
    v = A.multiply_transpose(u) - beta * v;
    alpha = v.norm();
    if (alpha > 0.0) {
      v /= alpha;
      a_norm_sq += alpha * alpha;
    }

    const double rho = std::hypot(rho_bar, beta);
    const double c = rho_bar / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rho_bar = -c * alpha;
    const double phi = c * phi_bar;
    phi_bar = s * phi_bar;

    out.x += (phi / rho) * w;
    w = v - (theta / rho) * w;
    out.iterations = it;

    const double a_norm = std::sqrt(a_norm_sq);
    const double r_norm = std::abs(phi_bar);
    const double ar_norm = std::abs(phi_bar * alpha * c);
    if (r_norm <= tol * b_norm + tol * a_norm * out.x.norm() || ar_norm <= tol * a_norm * r_norm ||
        alpha == 0.0) {
      out.converged = true;
      break;
    }
  }
  return out;
}

void check_oracle_size(Index rows, Index cols) {
  if (static_cast<double>(rows) * static_cast<double>(cols) > kDenseOracleLimit) {
    throw TooLarge("dense oracle needs n*d <= 1e7, got " + std::to_string(rows) + "x" +
                   std::to_string(cols));
  }
}

}  // namespace

Subspace solve_lsqr(const CenteredMatrixView& view, const DenseMatrix& Y, double tol,
                    Index max_iters) {
  if (Y.rows() != view.rows()) throw InvalidData("right-hand side rows do not match data");
  if (max_iters <= 0) max_iters = 4 * std::min(view.rows(), view.cols()) + 100;

  Subspace out;
  out.origin = SubspaceOrigin::kLSQR;
  out.basis.resize(view.cols(), Y.cols());
  out.rank_tol = default_rank_tol(view.cols(), Y.cols());
  for (Index j = 0; j < Y.cols(); ++j) {
    LsqrOutcome col = lsqr_column(view, Y.col(j), tol, max_iters);
    out.basis.col(j) = col.x;
    out.converged = out.converged && col.converged;
    out.iterations = std::max(out.iterations, col.iterations);
  }
  return out;
}

Subspace pinv_oracle(const DenseMatrix& X, const DenseMatrix& Y, double rank_tol) {
  check_oracle_size(X.rows(), X.cols());
  if (Y.rows() != X.rows()) throw InvalidData("right-hand side rows do not match data");
  if (rank_tol <= 0.0) rank_tol = default_rank_tol(X.rows(), X.cols());

  const Eigen::MatrixXd A = X;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rank_tol * sigma[0] : 0.0;

  Eigen::MatrixXd coeff = svd.matrixU().transpose() * Y;  // r x g
  for (Index j = 0; j < sigma.size(); ++j) {
    coeff.row(j) *= (sigma[j] > cutoff && sigma[j] > 0.0) ? 1.0 / sigma[j] : 0.0;
  }

  Subspace out;
  out.origin = SubspaceOrigin::kPINV;
  out.basis = svd.matrixV() * coeff;
  out.rank_tol = default_rank_tol(X.cols(), Y.cols());
  return out;
}

Subspace ulda_oracle(const DenseMatrix& X, const LabelVector& labels, double rank_tol) {
  check_oracle_size(X.rows(), X.cols());
  const ScatterSet s = scatter_matrices(X, labels);
  const Index d = X.cols();
  if (rank_tol <= 0.0) rank_tol = default_rank_tol(X.rows(), d);

  // S_t^+ S_b shares its nonzero eigenpairs with the symmetric T^T S_b T where
  // T = V_r diag(lambda_r^{-1/2}) is a square root of S_t^+ on range(S_t):
  // if T^T S_b T u = lambda u then S_t^+ S_b (T u) = lambda (T u).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> total(s.total);
  const Vector& lambda = total.eigenvalues();
  const double lambda_max = lambda.size() > 0 ? std::max(lambda.maxCoeff(), 0.0) : 0.0;
  std::vector<Index> keep;
  for (Index j = 0; j < d; ++j) {
    if (lambda[j] > rank_tol * lambda_max && lambda[j] > 0.0) keep.push_back(j);
  }
  if (keep.empty()) throw DegenerateSubspace("total scatter is zero");

  Eigen::MatrixXd T(d, static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    T.col(static_cast<Index>(k)) = total.eigenvectors().col(keep[k]) / std::sqrt(lambda[keep[k]]);
  }
  Eigen::MatrixXd M = T.transpose() * s.between * T;
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> reduced(M);
  const Vector& mu = reduced.eigenvalues();  // ascending
  const double mu_max = std::max(mu.maxCoeff(), 0.0);

  const Index cap = labels.num_classes() - 1;
  std::vector<Index> picked;
  for (Index j = mu.size() - 1; j >= 0 && static_cast<Index>(picked.size()) < cap; --j) {
    if (mu[j] > rank_tol * std::max(mu_max, 1.0) && mu[j] > 0.0) picked.push_back(j);
  }
  if (picked.empty()) throw DegenerateSubspace("between-class scatter is zero (equal class means)");

  Subspace out;
  out.origin = SubspaceOrigin::kULDA;
  out.basis.resize(d, static_cast<Index>(picked.size()));
  for (std::size_t k = 0; k < picked.size(); ++k) {
    Vector g = T * reduced.eigenvectors().col(picked[k]);
    out.basis.col(static_cast<Index>(k)) = g / g.norm();
  }
  out.rank_tol = default_rank_tol(d, out.basis.cols());
  return out;
}

DenseMatrix orthonormal_basis(const DenseMatrix& M, double rank_tol) {
  if (rank_tol <= 0.0) rank_tol = default_rank_tol(M.rows(), M.cols());
  const Eigen::MatrixXd A = M;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  Index rank = 0;
  if (sigma.size() > 0 && sigma[0] > 0.0) {
    while (rank < sigma.size() && sigma[rank] > rank_tol * sigma[0]) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

Vector principal_angles(const Subspace& A, const Subspace& B) {
  if (A.basis.rows() != B.basis.rows()) throw InvalidData("subspaces live in different dimensions");
  Eigen::MatrixXd Qa = orthonormal_basis(A.basis, A.rank_tol);
  Eigen::MatrixXd Qb = orthonormal_basis(B.basis, B.rank_tol);
  if (Qa.cols() == 0 || Qb.cols() == 0) throw DegenerateSubspace("subspace has rank zero");
  if (Qb.cols() > Qa.cols()) std::swap(Qa, Qb);

  const Eigen::MatrixXd C = Qa.transpose() * Qb;
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(C);
  const Vector cosines = cos_svd.singularValues();  // descending
  const Eigen::MatrixXd residual = Qb - Qa * C;      // (I - Qa Qa^T) Qb
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);
  const Vector sines_desc = sin_svd.singularValues();

  const Index q = Qb.cols();
  Vector angles(q);
  for (Index k = 0; k < q; ++k) {
    const double c = std::min(cosines[k], 1.0);
    const double s = std::min(sines_desc[q - 1 - k], 1.0);
    angles[k] = (c * c >= 0.5) ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.data(), angles.data() + q);
  return angles;
}

bool equivalent_subspaces(const Subspace& A, const Subspace& B, double tol) {
  const Vector angles = principal_angles(A, B);
  return (angles.array() < tol).all();
}

}  // namespace rklda
