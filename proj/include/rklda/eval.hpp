#pragma once

#include <rklda/baselines.hpp>
#include <rklda/labels.hpp>
#include <rklda/matrix.hpp>
#include <rklda/rk_solver.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rklda {

/// Dimension-reduction methods compared by the experiment harness. kFull
/// classifies the centered data with no reduction.
enum class Method { kFull, kRK, kLSQR, kPINV, kULDA };

std::string_view to_string(Method method);
/// Accepts full, rk, lsqr, pinv, ulda (case-insensitive); throws InvalidData otherwise.
Method parse_method(std::string_view name);

struct Split {
  std::vector<Index> train;  // ascending
  std::vector<Index> test;   // ascending
};

/// Uniform partition with |train| = round(fraction * n), clamped to [1, n - 1].
Split split(Index n, double train_fraction, Rng& rng);

/// As split(), redrawing (up to 100 times) until every class appears in the
/// training part. Throws ClassCoverageError when that never happens.
Split split_covering_classes(const LabelVector& labels, double train_fraction, Rng& rng);

/// (rows - 1 mu^T) B, centering each row with the *training* means.
DenseMatrix project(const RawMatrix& rows, const DenseMatrix& B, const Vector& train_means);

/// Euclidean kNN. Neighbors are ordered by (distance, training index); vote
/// ties go to the class whose nearest neighbor is closest, then the smaller
/// class index. Throws InvalidData for an empty training set or k out of range.
std::vector<Index> knn_classify(const DenseMatrix& train_Z, std::span<const Index> train_labels,
                                const DenseMatrix& test_Z, Index k);

/// Fraction of exact matches; throws InvalidData on empty or mismatched input.
double accuracy(std::span<const Index> predicted, std::span<const Index> truth);

struct ExperimentConfig {
  std::vector<Method> methods = {Method::kFull, Method::kRK, Method::kLSQR};
  Index replicates = 30;
  double train_fraction = 0.7;
  std::vector<Index> knn_ks = {1, 5, 10};
  std::uint64_t seed = 0;
  /// Kaczmarz settings; max_iters <= 0 means 20 * (training rows).
  SolverConfig rk = [] {
    SolverConfig c;
    c.max_iters = 0;
    return c;
  }();
  double lsqr_tol = 1e-12;
  Index lsqr_max_iters = 0;
  /// When false every `seconds` field is reported as 0 so reports are byte-stable.
  bool record_timing = true;
  unsigned threads = 1;
};

struct ReplicateRow {
  Method method = Method::kFull;
  Index replicate = 0;
  Index k = 0;
  double accuracy = 0.0;
  double seconds = 0.0;
};

struct MethodSummary {
  Method method = Method::kFull;
  Index k = 0;
  double median_accuracy = 0.0;
  double std_accuracy = 0.0;
  double median_seconds = 0.0;
  double std_seconds = 0.0;
  Index completed = 0;
  Index failed = 0;
};

struct ReplicateFailure {
  Method method = Method::kFull;
  Index replicate = 0;
  std::string error;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicateRow> rows;        // sorted by (method order, replicate, k)
  std::vector<MethodSummary> summaries;  // one per (method, k) with >= 1 completed replicate
  std::vector<ReplicateFailure> failures;
  std::vector<Method> failed_methods;    // methods with no completed replicate
};

/// Fits the method's subspace on the training rows. kFull returns the d x d identity.
DenseMatrix fit_subspace(Method method, const RawMatrix& train, const LabelVector& train_labels,
                         const ExperimentConfig& config, std::uint64_t rk_stream);

/// Repeated split / fit / project / classify protocol.
ExperimentReport run_experiment(const RawMatrix& data, const LabelVector& labels,
                                const ExperimentConfig& config);

/// Median of a non-empty sample (mean of the middle pair for even sizes).
double median(std::vector<double> values);
/// Population standard deviation.
double stddev(const std::vector<double>& values);

}  // namespace rklda
