#pragma once

#include <rklda/matrix.hpp>

#include <vector>

namespace rklda {

enum class SamplingMethod {
  kAlias,       // Walker/Vose alias table, O(1) per draw
  kCumulative,  // prefix sums + binary search, O(log n) per draw
};

/// Row-sampling distribution p_i = ||x_i - mu||^2 / ||X - 1 mu^T||_F^2.
/// Rows with zero centered norm get p_i = 0 and are never drawn.
class SamplingDistribution {
 public:
  SamplingDistribution(const Vector& weights, SamplingMethod method);

  const Vector& probs() const { return probs_; }
  const std::vector<Index>& active_rows() const { return active_; }
  SamplingMethod method() const { return method_; }

  /// Draws a row index with probability p_i.
  Index sample(Rng& rng) const;

  /// Inverse-CDF lookup used by the cumulative method: the smallest active i
  /// whose cumulative probability exceeds u, for u in [0, 1).
  Index index_for_uniform(double u) const;

 private:
  Vector probs_;
  std::vector<Index> active_;
  SamplingMethod method_;
  std::vector<double> cumulative_;  // over active rows
  std::vector<double> alias_prob_;  // over active rows
  std::vector<std::size_t> alias_;
};

/// Throws DegenerateMatrix when every centered row is zero.
SamplingDistribution build_sampler(const CenteredMatrixView& view,
                                   SamplingMethod method = SamplingMethod::kAlias);

inline Index sample_row(const SamplingDistribution& dist, Rng& rng) { return dist.sample(rng); }

}  // namespace rklda
