#include <rklda/baselines.hpp>
#include <rklda/cli.hpp>
#include <rklda/diagnostics.hpp>
#include <rklda/eval.hpp>
#include <rklda/labels.hpp>
#include <rklda/matrix_io.hpp>
#include <rklda/parallel.hpp>
#include <rklda/report.hpp>
#include <rklda/rk_solver.hpp>
#include <rklda/scatter.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace rklda::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string sibling_with_extension(const std::string& path, const std::string& ext) {
  fs::path p(path);
  p.replace_extension(ext);
  return p.string();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct InputOptions {
  std::string data;
  std::string data_format = "auto";
  bool csv_header = false;
  std::string labels;
  int label_column = -1;
  bool label_header = false;
};

class Run {
 public:
  Run(std::string subcommand, const CLI::App* app) : subcommand_(std::move(subcommand)), app_(app) {
    started_ = utc_now();
  }

  void digest(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role},
                       {"path", path},
                       {"fnv1a64", hex_digest(fnv1a64(io::read_file(path)))}});
  }
  void resolved(const std::string& key, json value) { resolved_[key] = std::move(value); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  /// Atomically writes `contents` to `path` and records it as an artifact.
  void emit(const std::string& path, std::string_view contents) {
    io::write_file_atomic(path, contents);
    outputs_.push_back({{"path", path}, {"fnv1a64", hex_digest(fnv1a64(contents))}});
  }

  /// Writes one manifest per artifact, each listing every artifact of the run.
  void finish() {
    json flags = json::object();
    for (const CLI::Option* opt : app_->get_options()) {
      if (opt->get_name() == "--help") continue;
      const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& results = opt->results();
        flags[name] = results.size() == 1 ? json(results.front()) : json(results);
      } else if (!opt->get_default_str().empty()) {
        flags[name] = opt->get_default_str();
      }
    }
    json manifest = {{"subcommand", subcommand_},
                     {"flags", std::move(flags)},
                     {"resolved", resolved_},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"seed", seed_ ? json(*seed_) : json(nullptr)},
                     {"tool_version", std::string(kToolVersion)},
                     {"format_version", io::kRkm1Version},
                     {"started_at", started_},
                     {"finished_at", utc_now()}};
    const std::string text = dump(manifest);
    for (const auto& o : outputs_) io::write_file_atomic(manifest_path(o["path"]), text);
  }

 private:
  std::string subcommand_;
  const CLI::App* app_;
  std::string started_;
  json resolved_ = json::object();
  json inputs_ = json::array();
  json outputs_ = json::array();
  std::optional<std::uint64_t> seed_;
};

void add_data_options(CLI::App* sub, InputOptions& in) {
  sub->add_option("--data", in.data, "Data matrix (CSV, Matrix Market or RKM1)")->required();
  sub->add_option("--data-format", in.data_format, "auto|csv|mtx|rkm1");
  sub->add_flag("--csv-header", in.csv_header, "CSV data has a header row");
}

void add_label_options(CLI::App* sub, InputOptions& in) {
  sub->add_option("--labels", in.labels, "Label file, one token per line, or a CSV")->required();
  sub->add_option("--label-column", in.label_column, "Read labels from this 0-based CSV column");
  sub->add_flag("--label-header", in.label_header, "Label CSV has a header row");
}

RawMatrix load_data(const InputOptions& in, Run& run) {
  RawMatrix X = io::read_matrix(in.data, io::parse_matrix_format(in.data_format), in.csv_header);
  run.digest("data", in.data);
  return X;
}

LabelVector load_labels(const InputOptions& in, Run& run) {
  const auto raw = in.label_column >= 0
                       ? io::read_label_column(in.labels, static_cast<std::size_t>(in.label_column),
                                               in.label_header)
                       : io::read_labels(in.labels);
  run.digest("labels", in.labels);
  return index_labels(raw);
}

void check_rows(const RawMatrix& X, const LabelVector& labels) {
  if (X.rows() != labels.size()) {
    throw InvalidData("data has " + std::to_string(X.rows()) + " rows but " +
                      std::to_string(labels.size()) + " labels were read");
  }
}

// ---- subcommands ----

struct EncodeArgs {
  InputOptions in;
  std::string out;
};

void run_encode(const EncodeArgs& a, const CLI::App* app, std::ostream& out) {
  Run run("encode", app);
  const LabelVector labels = load_labels(a.in, run);
  const IndicatorMatrix Y = encode_labels(labels);
  run.resolved("classes", labels.class_names());
  run.resolved("counts", labels.counts());
  run.emit(a.out, io::encode_rkm1(Y.values()));
  run.finish();
  out << labels.size() << " labels, " << labels.num_classes() << " classes -> " << a.out << '\n';
}

struct SolveArgs {
  InputOptions in;
  std::string method = "rk";
  Index iters = 0;
  std::uint64_t seed = 0;
  std::optional<double> tail_average;
  Index checkpoint_every = 0;
  std::optional<double> iters_from_tolerance;
  std::vector<double> iters_from_kappa;
  bool no_center = false;
  std::string sampling = "alias";
  double lsqr_tol = 1e-12;
  Index lsqr_max_iters = 0;
  double rank_tol = 0.0;
  std::string trace_out;
  std::string out;
  unsigned threads = 1;
};

void run_solve(const SolveArgs& a, const CLI::App* app, std::ostream& out) {
  Run run("solve", app);
  const Method method = parse_method(a.method);
  if (method == Method::kFull) throw InvalidData("solve supports rk, lsqr, pinv and ulda");
  const RawMatrix X = load_data(a.in, run);
  const LabelVector labels = load_labels(a.in, run);
  check_rows(X, labels);
  const CenteredMatrixView view(X, a.no_center ? Centering::kNone : Centering::kColumnMeans);
  const IndicatorMatrix Y = encode_labels(labels);

  DenseMatrix W;
  json summary = {{"method", a.method}, {"rows", X.rows()}, {"cols", X.cols()},
                  {"classes", labels.num_classes()}};
  if (method == Method::kRK) {
    run.set_seed(a.seed);
    SolverConfig config;
    config.seed = a.seed;
    config.checkpoint_every = a.checkpoint_every;
    config.tail_average = a.tail_average;
    config.sampling = a.sampling == "cumulative" ? SamplingMethod::kCumulative : SamplingMethod::kAlias;
    config.max_iters = a.iters > 0 ? a.iters : default_iterations(X.rows());
    if (a.iters_from_tolerance) {
      const DenseMatrix Xd = view.to_dense();
      const ConditionProfile profile = condition_profile(Xd, a.rank_tol);
      const double eps0 = pinv_oracle(Xd, Y.values(), a.rank_tol).basis.squaredNorm();
      config.max_iters = std::max<Index>(
          1, iterations_for_tolerance(*a.iters_from_tolerance * eps0, eps0, profile.kappa));
      run.resolved("kappa", profile.kappa);
      run.resolved("eps0", eps0);
    } else if (!a.iters_from_kappa.empty()) {
      const double eps = a.iters_from_kappa[0], eps0 = a.iters_from_kappa[1];
      const double kappa = a.iters_from_kappa[2];
      config.max_iters = std::max<Index>(1, iterations_for_tolerance(eps, eps0, kappa));
    }
    run.resolved("iters", config.max_iters);
    const SolveResult result = solve_rk(view, Y, config);
    W = result.W;
    summary["iterations"] = result.iterations_run;
    summary["excluded_rows"] = result.excluded_rows;
    summary["inconsistent_zero_rows"] = result.inconsistent_zero_rows;
    if (!a.trace_out.empty()) {
      std::ostringstream csv;
      csv << std::setprecision(17) << "k,sampled_residual_sq,frob_norm\n";
      for (const auto& p : result.trace) {
        csv << p.iteration << ',' << p.sampled_residual_sq << ',' << p.frob_norm << '\n';
      }
      run.emit(a.trace_out, csv.str());
    }
  } else if (method == Method::kLSQR) {
    const Subspace s = solve_lsqr(view, Y.values(), a.lsqr_tol, a.lsqr_max_iters);
    W = s.basis;
    summary["iterations"] = s.iterations;
    summary["converged"] = s.converged;
  } else if (method == Method::kPINV) {
    W = pinv_oracle(view.to_dense(), Y.values(), a.rank_tol).basis;
  } else {
    W = ulda_oracle(X.to_dense(), labels, a.rank_tol).basis;
  }
  const Residual r = residual_at(method == Method::kULDA ? DenseMatrix::Zero(X.cols(), Y.cols()) : W,
                                 view, Y.values());
  if (method != Method::kULDA) summary["relative_residual"] = r.relative;
  summary["frob_norm"] = W.norm();
  run.resolved("summary", summary);
  run.emit(a.out, io::encode_rkm1(W));
  run.finish();
  out << dump(summary);
}

struct TransformArgs {
  InputOptions in;
  std::string subspace;
  std::string means;
  std::string train_data;
  std::string out;
};

void run_transform(const TransformArgs& a, const CLI::App* app, std::ostream& out) {
  Run run("transform", app);
  const RawMatrix X = load_data(a.in, run);
  const DenseMatrix B = io::read_rkm1(a.subspace);
  run.digest("subspace", a.subspace);
  if (!a.means.empty() && !a.train_data.empty()) {
    throw InvalidData("give at most one of --means and --train-data");
  }
  Vector mu;
  if (!a.means.empty()) {
    const DenseMatrix M = io::read_rkm1(a.means);
    run.digest("means", a.means);
    if (M.size() != X.cols()) throw InvalidData("means length does not match data width");
    mu = Eigen::Map<const Vector>(M.data(), M.size());
  } else if (!a.train_data.empty()) {
    const RawMatrix T = io::read_matrix(a.train_data, io::parse_matrix_format(a.in.data_format),
                                        a.in.csv_header);
    run.digest("train_data", a.train_data);
    mu = CenteredMatrixView(T).column_means();
  } else {
    mu = CenteredMatrixView(X).column_means();
  }
  const DenseMatrix Z = project(X, B, mu);
  run.emit(a.out, io::encode_rkm1(Z));
  run.finish();
  out << Z.rows() << " x " << Z.cols() << " -> " << a.out << '\n';
}

struct ScatterArgs {
  InputOptions in;
  bool traces_only = false;
  std::string out;
};

void run_scatter(const ScatterArgs& a, const CLI::App* app, std::ostream& out) {
  Run run("scatter", app);
  const RawMatrix X = load_data(a.in, run);
  const LabelVector labels = load_labels(a.in, run);
  check_rows(X, labels);
  const DenseMatrix Xd = X.to_dense();
  const json j = a.traces_only ? to_json(scatter_traces(Xd, labels))
                               : to_json(scatter_matrices(Xd, labels));
  const std::string text = dump(j);
  if (a.out.empty()) {
    out << text;
    return;
  }
  run.emit(a.out, text);
  run.finish();
}

struct DiagnoseArgs {
  InputOptions in;
  Index trials = 200;
  Index iters = 0;
  Index checkpoint_every = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string csv_out;
  unsigned threads = 1;
};

void run_diagnose(const DiagnoseArgs& a, const CLI::App* app, std::ostream& out) {
  Run run("diagnose", app);
  run.set_seed(a.seed);
  const RawMatrix X = load_data(a.in, run);
  const LabelVector labels = load_labels(a.in, run);
  check_rows(X, labels);
  const CenteredMatrixView view(X);
  SolverConfig config;
  config.seed = a.seed;
  config.max_iters = a.iters > 0 ? a.iters : default_iterations(X.rows());
  config.checkpoint_every = a.checkpoint_every;
  run.resolved("iters", config.max_iters);
  const ConvergenceReport report =
      run_convergence_study(view, encode_labels(labels).values(), a.trials, config, a.threads);
  const std::string csv_path = a.csv_out.empty() ? sibling_with_extension(a.out, ".csv") : a.csv_out;
  run.emit(a.out, dump(to_json(report)));
  run.emit(csv_path, convergence_csv(report));
  run.finish();
  out << "kappa " << report.profile.kappa << ", " << report.checkpoints.size() << " checkpoints -> "
      << a.out << ", " << csv_path << '\n';
}

struct ExperimentArgs {
  InputOptions in;
  std::string methods = "full,rk,lsqr";
  Index replicates = 30;
  double train_frac = 0.7;
  std::string knn = "1,5,10";
  std::uint64_t seed = 0;
  Index iters = 0;
  std::optional<double> tail_average;
  double lsqr_tol = 1e-12;
  bool no_timing = false;
  std::string out;
  std::string csv_out;
  unsigned threads = 1;
};

void run_experiment_cmd(const ExperimentArgs& a, const CLI::App* app, std::ostream& out) {
  Run run("experiment", app);
  run.set_seed(a.seed);
  ExperimentConfig config;
  config.methods.clear();
  for (const auto& m : split_list(a.methods)) config.methods.push_back(parse_method(m));
  config.knn_ks.clear();
  for (const auto& k : split_list(a.knn)) {
    try {
      config.knn_ks.push_back(std::stol(k));
    } catch (const std::exception&) {
      throw InvalidData("bad kNN size '" + k + "'");
    }
  }
  config.replicates = a.replicates;
  config.train_fraction = a.train_frac;
  config.seed = a.seed;
  config.rk.max_iters = a.iters;
  config.rk.tail_average = a.tail_average;
  config.lsqr_tol = a.lsqr_tol;
  config.record_timing = !a.no_timing;
  config.threads = a.threads;

  const RawMatrix X = load_data(a.in, run);
  const LabelVector labels = load_labels(a.in, run);
  check_rows(X, labels);
  const ExperimentReport report = run_experiment(X, labels, config);
  const std::string csv_path = a.csv_out.empty() ? sibling_with_extension(a.out, ".csv") : a.csv_out;
  run.emit(a.out, dump(to_json(report)));
  run.emit(csv_path, experiment_csv(report));
  run.finish();
  for (const auto& s : report.summaries) {
    out << to_string(s.method) << " knn-" << s.k << ": median accuracy " << s.median_accuracy
        << " (sd " << s.std_accuracy << ")\n";
  }
  for (Method m : report.failed_methods) out << to_string(m) << ": every replicate failed\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reduced-rank LDA subspaces via randomized Kaczmarz", "rklda"};
  app.option_defaults()->always_capture_default();
  bool version = false;
  app.add_flag("--version", version, "Print tool and format versions");
  app.require_subcommand(0, 1);

  const unsigned default_threads = default_thread_count();

  EncodeArgs encode;
  CLI::App* encode_cmd = app.add_subcommand("encode", "Write the class indicator matrix");
  add_label_options(encode_cmd, encode.in);
  encode_cmd->add_option("--out", encode.out, "Output RKM1 file")->required();

  SolveArgs solve;
  solve.threads = default_threads;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Compute a discriminant subspace");
  solve_cmd->add_option("--method", solve.method, "rk|lsqr|pinv|ulda");
  add_data_options(solve_cmd, solve.in);
  add_label_options(solve_cmd, solve.in);
  solve_cmd->add_option("--iters", solve.iters, "Kaczmarz iterations (default 20 n)");
  solve_cmd->add_option("--iters-from-tolerance", solve.iters_from_tolerance,
                        "Choose K so the expected error falls to this fraction of the initial error");
  auto* from_kappa = solve_cmd->add_option("--iters-from-kappa", solve.iters_from_kappa,
                                         "EPS EPS0 KAPPA: iteration count for a target error")
                       ->expected(3);
  from_kappa->excludes("--iters-from-tolerance");
  solve_cmd->add_flag("--no-center", solve.no_center, "Data is already column-centered");
  solve_cmd->add_option("--seed", solve.seed);
  solve_cmd->add_option("--tail-average", solve.tail_average, "Average iterates after this fraction of K")
      ->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--checkpoint-every", solve.checkpoint_every);
  solve_cmd->add_option("--sampling", solve.sampling)->check(CLI::IsMember({"alias", "cumulative"}));
  solve_cmd->add_option("--lsqr-tol", solve.lsqr_tol);
  solve_cmd->add_option("--lsqr-max-iters", solve.lsqr_max_iters);
  solve_cmd->add_option("--rank-tol", solve.rank_tol, "Relative singular value cutoff (0 = default)");
  solve_cmd->add_option("--trace-out", solve.trace_out, "CSV of trace checkpoints");
  solve_cmd->add_option("--out", solve.out, "Output RKM1 subspace")->required();
  solve_cmd->add_option("--threads", solve.threads);

  TransformArgs transform;
  CLI::App* transform_cmd = app.add_subcommand("transform", "Project rows onto a subspace");
  add_data_options(transform_cmd, transform.in);
  transform_cmd->add_option("--subspace", transform.subspace, "RKM1 subspace (d x c)")->required();
  transform_cmd->add_option("--means", transform.means, "RKM1 training column means (1 x d)");
  transform_cmd->add_option("--train-data", transform.train_data, "Training data to take means from");
  transform_cmd->add_option("--out", transform.out, "Output RKM1 matrix")->required();

  ScatterArgs scatter;
  CLI::App* scatter_cmd = app.add_subcommand("scatter", "Scatter matrices as JSON");
  add_data_options(scatter_cmd, scatter.in);
  add_label_options(scatter_cmd, scatter.in);
  scatter_cmd->add_flag("--traces-only", scatter.traces_only);
  scatter_cmd->add_option("--out", scatter.out, "Output JSON (default: standard output)");

  DiagnoseArgs diagnose;
  diagnose.threads = default_threads;
  CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "Monte Carlo convergence study");
  add_data_options(diagnose_cmd, diagnose.in);
  add_label_options(diagnose_cmd, diagnose.in);
  diagnose_cmd->add_option("--trials", diagnose.trials);
  diagnose_cmd->add_option("--iters", diagnose.iters);
  diagnose_cmd->add_option("--checkpoint-every", diagnose.checkpoint_every);
  diagnose_cmd->add_option("--seed", diagnose.seed);
  diagnose_cmd->add_option("--out", diagnose.out, "Output JSON report")->required();
  diagnose_cmd->add_option("--csv-out", diagnose.csv_out, "Plot table (default: --out with .csv)");
  diagnose_cmd->add_option("--threads", diagnose.threads);

  ExperimentArgs experiment;
  experiment.threads = default_threads;
  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Split / fit / classify benchmark");
  add_data_options(experiment_cmd, experiment.in);
  add_label_options(experiment_cmd, experiment.in);
  experiment_cmd->add_option("--methods", experiment.methods, "Comma list of full,rk,lsqr,pinv,ulda");
  experiment_cmd->add_option("--replicates", experiment.replicates);
  experiment_cmd->add_option("--train-frac", experiment.train_frac);
  experiment_cmd->add_option("--knn", experiment.knn, "Comma list of neighbor counts");
  experiment_cmd->add_option("--seed", experiment.seed);
  experiment_cmd->add_option("--iters", experiment.iters, "Kaczmarz iterations (default 20 n_train)");
  experiment_cmd->add_option("--tail-average", experiment.tail_average)->check(CLI::Range(0.0, 1.0));
  experiment_cmd->add_option("--lsqr-tol", experiment.lsqr_tol);
  experiment_cmd->add_flag("--no-timing", experiment.no_timing, "Report 0 seconds for stable bytes");
  experiment_cmd->add_option("--out", experiment.out, "Output JSON report")->required();
  experiment_cmd->add_option("--csv-out", experiment.csv_out, "Per-replicate CSV (default: --out with .csv)");
  experiment_cmd->add_option("--threads", experiment.threads);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* failed = &app;
    for (CLI::App* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kUsage;
  }

  if (version) {
    out << "rklda " << kToolVersion << " (RKM1 format " << io::kRkm1Version << ")\n";
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    err << "error: a subcommand is required\n" << app.help();
    return kUsage;
  }

  try {
    if (encode_cmd->parsed()) run_encode(encode, encode_cmd, out);
    if (solve_cmd->parsed()) run_solve(solve, solve_cmd, out);
    if (transform_cmd->parsed()) run_transform(transform, transform_cmd, out);
    if (scatter_cmd->parsed()) run_scatter(scatter, scatter_cmd, out);
    if (diagnose_cmd->parsed()) run_diagnose(diagnose, diagnose_cmd, out);
    if (experiment_cmd->parsed()) run_experiment_cmd(experiment, experiment_cmd, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.error_class() == ErrorClass::kNumerical ? kNumericalError : kDataError;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace rklda::cli
