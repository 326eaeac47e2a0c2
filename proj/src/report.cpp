#include <rklda/report.hpp>

#include <cstdio>
#include <iomanip>
#include <sstream>

namespace rklda {

using nlohmann::json;

json to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const ConditionProfile& p) {
  return {{"kappa", p.kappa},
          {"sigma_plus_min", p.sigma_plus_min},
          {"frob_norm_sq", p.frob_norm_sq},
          {"beta", p.beta},
          {"rank", p.rank}};
}

json to_json(const ConvergenceReport& r) {
  json checkpoints = json::array();
  for (const auto& c : r.checkpoints) {
    checkpoints.push_back({{"k", c.iteration},
                           {"empirical", c.mean_error},
                           {"std_error", c.std_error},
                           {"bound", c.bound}});
  }
  return {{"trials", r.trials},
          {"condition", to_json(r.profile)},
          {"eps0", r.eps0},
          {"residual_norm_sq", r.residual_norm_sq},
          {"residual_floor", r.residual_floor},
          {"relative_residual", r.relative_residual},
          {"consistent", r.consistent},
          {"checkpoints", std::move(checkpoints)}};
}

json to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  json rk = {{"max_iters", c.rk.max_iters}, {"checkpoint_every", c.rk.checkpoint_every}};
  rk["tail_average"] = c.rk.tail_average ? json(*c.rk.tail_average) : json(nullptr);
  return {{"methods", std::move(methods)},
          {"replicates", c.replicates},
          {"train_fraction", c.train_fraction},
          {"knn_ks", c.knn_ks},
          {"seed", c.seed},
          {"rk", std::move(rk)},
          {"lsqr", {{"tol", c.lsqr_tol}, {"max_iters", c.lsqr_max_iters}}},
          {"record_timing", c.record_timing}};
}

json to_json(const ExperimentReport& r) {
  json summaries = json::array();
  for (const auto& s : r.summaries) {
    summaries.push_back({{"method", std::string(to_string(s.method))},
                         {"classifier", "knn-" + std::to_string(s.k)},
                         {"k", s.k},
                         {"median_accuracy", s.median_accuracy},
                         {"std_accuracy", s.std_accuracy},
                         {"median_seconds", s.median_seconds},
                         {"std_seconds", s.std_seconds},
                         {"completed", s.completed},
                         {"failed", s.failed}});
  }
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"method", std::string(to_string(row.method))},
                    {"replicate", row.replicate},
                    {"k", row.k},
                    {"accuracy", row.accuracy},
                    {"seconds", row.seconds}});
  }
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"method", std::string(to_string(f.method))},
                        {"replicate", f.replicate},
                        {"error", f.error}});
  }
  json failed = json::array();
  for (Method m : r.failed_methods) failed.push_back(std::string(to_string(m)));
  return {{"config", to_json(r.config)},
          {"summaries", std::move(summaries)},
          {"failed_methods", std::move(failed)},
          {"failures", std::move(failures)},
          {"replicates", std::move(rows)}};
}

json to_json(const ScatterTraces& t) {
  return {{"trace_within", t.within}, {"trace_between", t.between}};
}

json to_json(const ScatterSet& s) {
  const auto square = [](const Eigen::MatrixXd& m) { return to_json(DenseMatrix(m)); };
  json j = {{"trace_within", s.within.trace()},
            {"trace_between", s.between.trace()},
            {"trace_total", s.total.trace()},
            {"within", square(s.within)},
            {"between", square(s.between)},
            {"total", square(s.total)},
            {"centroids", to_json(s.centroids)}};
  j["grand_centroid"] = std::vector<double>(s.grand_centroid.data(),
                                            s.grand_centroid.data() + s.grand_centroid.size());
  return j;
}

std::string experiment_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "method,replicate,k,accuracy,seconds\n";
  out << std::setprecision(17);
  for (const auto& row : r.rows) {
    out << to_string(row.method) << ',' << row.replicate << ',' << row.k << ',' << row.accuracy
        << ',' << row.seconds << '\n';
  }
  return out.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace rklda
