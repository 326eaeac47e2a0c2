#include <rklda/sampling.hpp>

#include <algorithm>

namespace rklda {

SamplingDistribution::SamplingDistribution(const Vector& weights, SamplingMethod method)
    : method_(method) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateMatrix("all centered rows are zero; nothing to sample");
  }
  probs_ = Vector::Zero(weights.size());
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw InvalidData("negative sampling weight");
    if (weights[i] > 0.0) {
      probs_[i] = weights[i] / total;
      active_.push_back(i);
    }
  }

  const std::size_t m = active_.size();
  cumulative_.resize(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running += probs_[active_[k]];
    cumulative_[k] = running;
  }
  // Guard against the last prefix sum rounding just below 1.
  cumulative_.back() = 1.0;

  // Vose's alias construction over the active rows.
  alias_prob_.assign(m, 1.0);
  alias_.resize(m);
  std::vector<double> scaled(m);
  std::vector<std::size_t> small, large;
  for (std::size_t k = 0; k < m; ++k) {
    scaled[k] = probs_[active_[k]] * static_cast<double>(m);
    alias_[k] = k;
    (scaled[k] < 1.0 ? small : large).push_back(k);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t lo = small.back();
    small.pop_back();
    const std::size_t hi = large.back();
    alias_prob_[lo] = scaled[lo];
    alias_[lo] = hi;
    scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0;
    if (scaled[hi] < 1.0) {
      large.pop_back();
      small.push_back(hi);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t k : small) alias_prob_[k] = 1.0;
  for (std::size_t k : large) alias_prob_[k] = 1.0;
}

Index SamplingDistribution::index_for_uniform(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cumulative_.begin(), static_cast<std::ptrdiff_t>(active_.size()) - 1));
  return active_[k];
}

Index SamplingDistribution::sample(Rng& rng) const {
  if (method_ == SamplingMethod::kCumulative) return index_for_uniform(uniform01(rng));
  const std::size_t column = uniform_below(rng, active_.size());
  const double coin = uniform01(rng);
  return active_[coin < alias_prob_[column] ? column : alias_[column]];
}

SamplingDistribution build_sampler(const CenteredMatrixView& view, SamplingMethod method) {
  if (!(view.frob_norm_sq() > 0.0)) {
    throw DegenerateMatrix("centered data matrix is zero (frob_norm_sq = 0)");
  }
  return SamplingDistribution(view.centered_row_norms_sq(), method);
}

}  // namespace rklda
