#include <rklda/eval.hpp>
#include <rklda/parallel.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>

namespace rklda {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kFull:
      return "full";
    case Method::kRK:
      return "rk";
    case Method::kLSQR:
      return "lsqr";
    case Method::kPINV:
      return "pinv";
    case Method::kULDA:
      return "ulda";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Method m : {Method::kFull, Method::kRK, Method::kLSQR, Method::kPINV, Method::kULDA}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidData("unknown method '" + std::string(name) + "'");
}

Split split(Index n, double train_fraction, Rng& rng) {
  if (n < 2) throw InvalidData("need at least two observations to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidData("train fraction must lie in (0, 1)");
  }
  const Index n_train = std::clamp<Index>(static_cast<Index>(std::llround(train_fraction * n)), 1, n - 1);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Partial Fisher-Yates: the first n_train slots become the training set.
  for (Index i = 0; i < n_train; ++i) {
    const auto j = i + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  Split out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.test.assign(order.begin() + n_train, order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split split_covering_classes(const LabelVector& labels, double train_fraction, Rng& rng) {
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Split s = split(labels.size(), train_fraction, rng);
    std::vector<bool> seen(static_cast<std::size_t>(labels.num_classes()), false);
    for (Index i : s.train) seen[static_cast<std::size_t>(labels.class_of(i))] = true;
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) return s;
  }
  throw ClassCoverageError("no split with every class in the training set after 100 draws");
}

DenseMatrix project(const RawMatrix& rows, const DenseMatrix& B, const Vector& train_means) {
  if (B.rows() != rows.cols() || train_means.size() != rows.cols()) {
    throw InvalidData("projection: subspace or means do not match data width");
  }
  DenseMatrix Z = rows.is_sparse() ? DenseMatrix(rows.sparse_values() * B)
                                   : DenseMatrix(rows.dense_values() * B);
  Z.rowwise() -= train_means.transpose() * B;
  return Z;
}

std::vector<Index> knn_classify(const DenseMatrix& train_Z, std::span<const Index> train_labels,
                                const DenseMatrix& test_Z, Index k) {
  const Index n_train = train_Z.rows();
  if (n_train == 0) throw InvalidData("empty training set");
  if (static_cast<Index>(train_labels.size()) != n_train) {
    throw InvalidData("training labels do not match training rows");
  }
  if (k < 1 || k > n_train) {
    throw InvalidData("k = " + std::to_string(k) + " outside [1, " + std::to_string(n_train) + "]");
  }
  if (test_Z.cols() != train_Z.cols()) throw InvalidData("train and test embeddings differ in width");

  const Index g = *std::max_element(train_labels.begin(), train_labels.end()) + 1;

  std::vector<Index> predicted(static_cast<std::size_t>(test_Z.rows()));
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n_train));
  std::vector<Index> votes(static_cast<std::size_t>(g));
  std::vector<double> nearest(static_cast<std::size_t>(g));

  for (Index t = 0; t < test_Z.rows(); ++t) {
    for (Index i = 0; i < n_train; ++i) {
      dist[static_cast<std::size_t>(i)] = {(train_Z.row(i) - test_Z.row(t)).squaredNorm(), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    std::fill(votes.begin(), votes.end(), 0);
    std::fill(nearest.begin(), nearest.end(), std::numeric_limits<double>::infinity());
    for (Index r = 0; r < k; ++r) {
      const auto [d, i] = dist[static_cast<std::size_t>(r)];
      const auto c = static_cast<std::size_t>(train_labels[static_cast<std::size_t>(i)]);
      ++votes[c];
      nearest[c] = std::min(nearest[c], d);
    }
    Index best = 0;
    for (Index c = 1; c < g; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      const auto bu = static_cast<std::size_t>(best);
      if (votes[cu] > votes[bu] || (votes[cu] == votes[bu] && nearest[cu] < nearest[bu])) best = c;
    }
    predicted[static_cast<std::size_t>(t)] = best;
  }
  return predicted;
}

double accuracy(std::span<const Index> predicted, std::span<const Index> truth) {
  if (predicted.size() != truth.size()) throw InvalidData("prediction and truth lengths differ");
  if (predicted.empty()) throw InvalidData("no predictions to score");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidData("median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double stddev(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

DenseMatrix fit_subspace(Method method, const RawMatrix& train, const LabelVector& train_labels,
                         const ExperimentConfig& config, std::uint64_t rk_stream) {
  const Index d = train.cols();
  if (method == Method::kFull) return DenseMatrix::Identity(d, d);
  if (method == Method::kULDA) return ulda_oracle(train.to_dense(), train_labels).basis;

  const CenteredMatrixView view(train);
  const IndicatorMatrix Y = encode_labels(train_labels);
  switch (method) {
    case Method::kRK: {
      SolverConfig rk = config.rk;
      if (rk.max_iters <= 0) rk.max_iters = default_iterations(train.rows());
      rk.seed = config.seed;
      rk.stream = rk_stream;
      rk.checkpoint_every = 0;
      return solve_rk(view, Y, rk).W;
    }
    case Method::kLSQR:
      return solve_lsqr(view, Y.values(), config.lsqr_tol, config.lsqr_max_iters).basis;
    case Method::kPINV:
      return pinv_oracle(view.to_dense(), Y.values()).basis;
    default:
      break;
  }
  throw InvalidData("unsupported method");
}

namespace {

struct ReplicateOutcome {
  std::vector<ReplicateRow> rows;
  std::vector<ReplicateFailure> failures;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ReplicateOutcome run_replicate(const RawMatrix& data, const LabelVector& labels,
                               const ExperimentConfig& config, Index replicate) {
  ReplicateOutcome out;
  // Even substreams draw splits, odd ones drive the Kaczmarz sampler.
  Rng split_rng = make_rng(config.seed, 2 * static_cast<std::uint64_t>(replicate));
  const Split s = split_covering_classes(labels, config.train_fraction, split_rng);

  const RawMatrix train = data.select_rows(s.train);
  const RawMatrix test = data.select_rows(s.test);
  const LabelVector train_labels = labels.subset(s.train);
  std::vector<Index> test_truth;
  test_truth.reserve(s.test.size());
  for (Index i : s.test) test_truth.push_back(labels.class_of(i));
  const Vector train_means = CenteredMatrixView(train).column_means();

  for (Method method : config.methods) {
    try {
      const auto start = Clock::now();
      DenseMatrix train_Z, test_Z;
      if (method == Method::kFull) {
        train_Z = train.to_dense().rowwise() - train_means.transpose();
        test_Z = test.to_dense().rowwise() - train_means.transpose();
      } else {
        const DenseMatrix B = fit_subspace(method, train, train_labels, config,
                                           2 * static_cast<std::uint64_t>(replicate) + 1);
        train_Z = project(train, B, train_means);
        test_Z = project(test, B, train_means);
      }
      const double fit_seconds = seconds_since(start);

      for (Index k : config.knn_ks) {
        const auto classify_start = Clock::now();
        const auto predicted = knn_classify(train_Z, train_labels.class_indices(), test_Z, k);
        const double seconds = fit_seconds + seconds_since(classify_start);
        out.rows.push_back({method, replicate, k, accuracy(predicted, test_truth),
                            config.record_timing ? seconds : 0.0});
      }
    } catch (const Error& e) {
      out.failures.push_back({method, replicate, e.what()});
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const RawMatrix& data, const LabelVector& labels,
                                const ExperimentConfig& config) {
  if (labels.size() != data.rows()) throw InvalidData("label count does not match data rows");
  if (config.replicates < 1) throw InvalidData("replicates must be at least 1");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw InvalidData("train fraction must lie in (0, 1)");
  }
  if (config.methods.empty()) throw InvalidData("no methods selected");
  if (config.knn_ks.empty()) throw InvalidData("no kNN sizes selected");
  for (Index k : config.knn_ks) {
    if (k < 1) throw InvalidData("kNN sizes must be at least 1");
  }

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(config.replicates));
  parallel_for(outcomes.size(), config.threads, [&](std::size_t r) {
    outcomes[r] = run_replicate(data, labels, config, static_cast<Index>(r));
  });

  ExperimentReport report;
  report.config = config;
  for (Method method : config.methods) {
    for (const auto& o : outcomes) {
      for (const auto& row : o.rows) {
        if (row.method == method) report.rows.push_back(row);
      }
      for (const auto& f : o.failures) {
        if (f.method == method) report.failures.push_back(f);
      }
    }
  }

  for (Method method : config.methods) {
    Index failed = 0;
    for (const auto& f : report.failures) failed += f.method == method ? 1 : 0;
    bool any = false;
    for (Index k : config.knn_ks) {
      std::vector<double> acc, secs;
      for (const auto& row : report.rows) {
        if (row.method == method && row.k == k) {
          acc.push_back(row.accuracy);
          secs.push_back(row.seconds);
        }
      }
      if (acc.empty()) continue;
      any = true;
      report.summaries.push_back({method, k, median(acc), stddev(acc), median(secs), stddev(secs),
                                  static_cast<Index>(acc.size()), failed});
    }
    if (!any) report.failed_methods.push_back(method);
  }
  return report;
}

}  // namespace rklda
