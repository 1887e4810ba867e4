// Command-line front end: CSV ingestion, global/partial significance
// tests, fits/predictions and the Monte Carlo simulation harness.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frechet/io.hpp"
#include "frechet/presets.hpp"
#include "frechet/version.hpp"

namespace {

using nlohmann::json;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FRECHET_INFER_LOG");
    if (!env) return LogLevel::Error;
    const std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string default_manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(frechet::io::RunManifest manifest, const std::string& path) {
  frechet::io::write_json(path, frechet::io::manifest_to_json(manifest));
  log_info("manifest written to " + path);
}

// ---------------------------------------------------------------------------
// Option structs; serialized into the manifest so a run can be replayed.

struct SpaceFlags {
  std::string space;
  int m = 0;
  int levels = 0;
  double edge_bound = 0;
  double lo = 0, hi = 0;

  frechet::io::SpaceSpec spec() const { return {space, m, levels, edge_bound, lo, hi}; }
};

void to_json(json& j, const SpaceFlags& s) {
  j = json{{"space", s.space}, {"m", s.m},  {"M", s.levels},
           {"edge_bound", s.edge_bound}, {"lo", s.lo}, {"hi", s.hi}};
}
void from_json(const json& j, SpaceFlags& s) {
  j.at("space").get_to(s.space);
  j.at("m").get_to(s.m);
  j.at("M").get_to(s.levels);
  j.at("edge_bound").get_to(s.edge_bound);
  j.at("lo").get_to(s.lo);
  j.at("hi").get_to(s.hi);
}

struct TestOptions {
  std::string kind;  // global | partial
  std::string x_path, y_path;
  SpaceFlags space;
  std::vector<int> base;  // 1-based predictor indices of the base model
  int K = 50;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = "report.json";
  std::string manifest;
};

void to_json(json& j, const TestOptions& o) {
  j = json{{"kind", o.kind},     {"x", o.x_path},   {"y", o.y_path}, {"space_spec", o.space},
           {"base", o.base},     {"K", o.K},        {"alpha", o.alpha}, {"seed", o.seed},
           {"threads", o.threads}, {"out", o.out}};
}
void from_json(const json& j, TestOptions& o) {
  j.at("kind").get_to(o.kind);
  j.at("x").get_to(o.x_path);
  j.at("y").get_to(o.y_path);
  j.at("space_spec").get_to(o.space);
  j.at("base").get_to(o.base);
  j.at("K").get_to(o.K);
  j.at("alpha").get_to(o.alpha);
  j.at("seed").get_to(o.seed);
  j.at("threads").get_to(o.threads);
  j.at("out").get_to(o.out);
}

struct FitOptions {
  std::string x_path, y_path;
  SpaceFlags space;
  std::string query_path;  // empty for `fit`
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string summary;  // predict only
  std::string manifest;
};

void to_json(json& j, const FitOptions& o) {
  j = json{{"x", o.x_path}, {"y", o.y_path},       {"space_spec", o.space}, {"query", o.query_path},
           {"seed", o.seed}, {"threads", o.threads}, {"out", o.out},          {"summary", o.summary}};
}
void from_json(const json& j, FitOptions& o) {
  j.at("x").get_to(o.x_path);
  j.at("y").get_to(o.y_path);
  j.at("space_spec").get_to(o.space);
  j.at("query").get_to(o.query_path);
  j.at("seed").get_to(o.seed);
  j.at("threads").get_to(o.threads);
  j.at("out").get_to(o.out);
  j.at("summary").get_to(o.summary);
}

struct SimulateOptions {
  std::string preset;
  std::vector<int> n_filter;
  int m = 0;     // node-count override (network presets)
  int B = 0;     // 0 keeps the preset default
  int K = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = "power.csv";
  std::string manifest;
};

void to_json(json& j, const SimulateOptions& o) {
  j = json{{"preset", o.preset}, {"n", o.n_filter}, {"m", o.m},           {"B", o.B},
           {"K", o.K},           {"alpha", o.alpha}, {"seed", o.seed},     {"threads", o.threads},
           {"out", o.out}};
}
void from_json(const json& j, SimulateOptions& o) {
  j.at("preset").get_to(o.preset);
  j.at("n").get_to(o.n_filter);
  j.at("m").get_to(o.m);
  j.at("B").get_to(o.B);
  j.at("K").get_to(o.K);
  j.at("alpha").get_to(o.alpha);
  j.at("seed").get_to(o.seed);
  j.at("threads").get_to(o.threads);
  j.at("out").get_to(o.out);
}

// ---------------------------------------------------------------------------
// Runners. Each writes its outputs plus a manifest and returns exit code 0.

int run_test(const TestOptions& opt) {
  Timer timer;
  const frechet::Dataset data = frechet::io::ingest(opt.x_path, opt.y_path, opt.space.spec());
  log_info("ingested n=" + std::to_string(data.n()) + " p=" + std::to_string(data.p()) +
           " space=" + frechet::space_kind_name(data.space.kind));

  frechet::MultiplierConfig mcfg;
  mcfg.K = opt.K;
  mcfg.seed = opt.seed;

  frechet::TestReport report;
  if (opt.kind == "global") {
    report = frechet::test_global(data, mcfg, opt.threads);
  } else if (opt.kind == "partial") {
    if (opt.base.empty()) throw std::invalid_argument("test partial requires --base");
    std::vector<int> base0;
    for (int idx : opt.base) {
      if (idx < 1 || idx > data.p())
        throw std::invalid_argument("--base index out of range: " + std::to_string(idx));
      base0.push_back(idx - 1);
    }
    report = frechet::test_partial(data, base0, mcfg, opt.threads);
  } else {
    throw std::invalid_argument("test kind must be global or partial");
  }

  frechet::io::write_json(opt.out, frechet::io::report_to_json(report));
  log_info("report written to " + opt.out + " (p_value " + frechet::io::format_double(report.p_value) + ")");

  frechet::io::RunManifest manifest;
  manifest.command = "test";
  manifest.config = opt;
  manifest.seed = opt.seed;
  manifest.duration_seconds = timer.seconds();
  manifest.diagnostics = {{"nonconverged", report.diagnostics.nonconverged},
                          {"degenerate", report.diagnostics.degenerate}};
  manifest.outputs = {opt.out};
  write_manifest(manifest, opt.manifest.empty() ? default_manifest_path(opt.out) : opt.manifest);
  return 0;
}

int run_fit_or_predict(const FitOptions& opt, bool predict_mode) {
  Timer timer;
  const frechet::Dataset data = frechet::io::ingest(opt.x_path, opt.y_path, opt.space.spec());
  const frechet::RegressionModel model = frechet::fit(data);
  const frechet::ObjectiveMatrix om = frechet::objective_matrix(model, nullptr, data, opt.threads);
  int nonconverged = om.nonconverged;

  json summary;
  summary["r_squared"] = frechet::r_squared_global(om.a, om.b);
  summary["n"] = data.n();
  summary["p"] = data.p();
  summary["space"] = frechet::io::space_to_json(data.space);

  std::vector<std::string> outputs;
  if (predict_mode) {
    const frechet::io::Csv queries = frechet::io::read_csv(opt.query_path);
    if (queries.values.cols() != data.p())
      throw std::invalid_argument("query file must have p = " + std::to_string(data.p()) + " columns");
    Eigen::MatrixXd rows(queries.values.rows(), frechet::io::response_width(data.space));
    for (Eigen::Index r = 0; r < queries.values.rows(); ++r) {
      auto result = frechet::predict_detail(model, queries.values.row(r).transpose());
      if (!result.converged) ++nonconverged;
      rows.row(r) = frechet::io::encode_response(data.space, result.point).transpose();
    }
    frechet::io::write_csv(opt.out, frechet::io::response_header(data.space), rows);
    outputs.push_back(opt.out);
    log_info("predictions written to " + opt.out);
  }

  summary["nonconverged"] = nonconverged;
  const std::string summary_path = predict_mode
                                       ? (opt.summary.empty() ? opt.out + ".summary.json" : opt.summary)
                                       : opt.out;
  frechet::io::write_json(summary_path, summary);
  outputs.push_back(summary_path);

  frechet::io::RunManifest manifest;
  manifest.command = predict_mode ? "predict" : "fit";
  manifest.config = opt;
  manifest.seed = opt.seed;
  manifest.duration_seconds = timer.seconds();
  manifest.diagnostics = {{"nonconverged", nonconverged}};
  manifest.outputs = outputs;
  write_manifest(manifest, opt.manifest.empty() ? default_manifest_path(opt.out) : opt.manifest);
  return 0;
}

int run_simulate(const SimulateOptions& opt) {
  Timer timer;
  auto study = frechet::sim::preset_study(opt.preset);
  if (!study) throw std::invalid_argument("unknown preset: " + opt.preset);

  if (!opt.n_filter.empty()) {
    std::vector<frechet::sim::PowerCell> kept;
    for (const auto& cell : study->cells)
      for (int n : opt.n_filter)
        if (cell.n == n) kept.push_back(cell);
    if (kept.empty()) throw std::invalid_argument("--n filter removed every grid cell");
    study->cells = kept;
  }
  if (opt.m > 0) study->network.m = opt.m;
  if (opt.B > 0) study->B = opt.B;
  if (opt.K > 0) study->K = opt.K;
  study->alpha = opt.alpha;
  study->seed = opt.seed;
  study->threads = opt.threads;

  const frechet::sim::PowerStudyResult result = frechet::sim::run_power_study(*study);
  int failures = 0;
  for (const auto& cell : result.cells) {
    failures += cell.failures;
    log_info("cell beta=" + frechet::io::format_double(cell.cell.beta) +
             " gamma=" + frechet::io::format_double(cell.cell.gamma) + " n=" + std::to_string(cell.cell.n) +
             " rate=" + frechet::io::format_double(cell.rate) + " failures=" + std::to_string(cell.failures));
  }
  frechet::io::write_power_csv(opt.out, result);
  log_info("power table written to " + opt.out);

  frechet::io::RunManifest manifest;
  manifest.command = "simulate";
  manifest.config = opt;
  manifest.seed = opt.seed;
  manifest.duration_seconds = timer.seconds();
  manifest.diagnostics = {{"failures", failures}};
  manifest.outputs = {opt.out};
  write_manifest(manifest, opt.manifest.empty() ? default_manifest_path(opt.out) : opt.manifest);
  return 0;
}

int run_replay(const std::string& manifest_path, const std::string& out_override) {
  const frechet::io::RunManifest manifest =
      frechet::io::manifest_from_json(frechet::io::read_json(manifest_path));
  log_info("replaying " + manifest.command + " from " + manifest_path);
  if (manifest.command == "test") {
    TestOptions opt = manifest.config.get<TestOptions>();
    if (!out_override.empty()) opt.out = out_override;
    opt.manifest = opt.out + ".replay.manifest.json";
    return run_test(opt);
  }
  if (manifest.command == "fit" || manifest.command == "predict") {
    FitOptions opt = manifest.config.get<FitOptions>();
    if (!out_override.empty()) opt.out = out_override;
    opt.manifest = opt.out + ".replay.manifest.json";
    return run_fit_or_predict(opt, manifest.command == "predict");
  }
  if (manifest.command == "simulate") {
    SimulateOptions opt = manifest.config.get<SimulateOptions>();
    if (!out_override.empty()) opt.out = out_override;
    opt.manifest = opt.out + ".replay.manifest.json";
    return run_simulate(opt);
  }
  throw std::invalid_argument("manifest has unknown command: " + manifest.command);
}

void add_space_flags(CLI::App* cmd, SpaceFlags& flags) {
  cmd->add_option("--space", flags.space, "Response space: euclidean|sphere|laplacian|simplex|wasserstein")
      ->required();
  cmd->add_option("--m", flags.m, "Node count (laplacian)");
  cmd->add_option("--M", flags.levels, "Quantile grid levels (wasserstein)");
  cmd->add_option("--edge-bound", flags.edge_bound, "Laplacian edge-weight bound C (default: from data)");
  cmd->add_option("--lo", flags.lo, "Quantile domain lower end (default: from data)");
  cmd->add_option("--hi", flags.hi, "Quantile domain upper end (default: from data)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frechet regression significance testing"};
  app.set_version_flag("--version", frechet::kVersion);
  app.require_subcommand(1);

  TestOptions test_opt;
  bool test_seed_given = false;
  auto* test_cmd = app.add_subcommand("test", "Run a global or partial significance test");
  test_cmd->add_option("kind", test_opt.kind, "global or partial")->required();
  test_cmd->add_option("--x", test_opt.x_path, "Predictor CSV")->required();
  test_cmd->add_option("--y", test_opt.y_path, "Response CSV")->required();
  add_space_flags(test_cmd, test_opt.space);
  test_cmd->add_option("--base", test_opt.base, "Base-model predictor columns, 1-based")->delimiter(',');
  test_cmd->add_option("--K", test_opt.K, "Randomization count")->capture_default_str();
  test_cmd->add_option("--alpha", test_opt.alpha, "Significance level (recorded)")->capture_default_str();
  test_cmd->add_option("--seed", test_opt.seed, "Randomization seed");
  test_cmd->add_option("--threads", test_opt.threads, "Worker threads, 0 = auto")->capture_default_str();
  test_cmd->add_option("--out", test_opt.out, "Report JSON path")->capture_default_str();
  test_cmd->add_option("--manifest", test_opt.manifest, "Manifest path");

  FitOptions fit_opt, predict_opt;
  auto* fit_cmd = app.add_subcommand("fit", "Fit and report the Frechet R-squared");
  fit_cmd->add_option("--x", fit_opt.x_path, "Predictor CSV")->required();
  fit_cmd->add_option("--y", fit_opt.y_path, "Response CSV")->required();
  add_space_flags(fit_cmd, fit_opt.space);
  fit_cmd->add_option("--threads", fit_opt.threads, "Worker threads, 0 = auto")->capture_default_str();
  fit_opt.out = "fit.json";
  fit_cmd->add_option("--out", fit_opt.out, "Summary JSON path")->capture_default_str();
  fit_cmd->add_option("--manifest", fit_opt.manifest, "Manifest path");

  auto* predict_cmd = app.add_subcommand("predict", "Predict responses at query predictor values");
  predict_cmd->add_option("--x", predict_opt.x_path, "Predictor CSV")->required();
  predict_cmd->add_option("--y", predict_opt.y_path, "Response CSV")->required();
  add_space_flags(predict_cmd, predict_opt.space);
  predict_cmd->add_option("--query", predict_opt.query_path, "Query predictor CSV")->required();
  predict_cmd->add_option("--threads", predict_opt.threads, "Worker threads, 0 = auto")->capture_default_str();
  predict_opt.out = "predictions.csv";
  predict_cmd->add_option("--out", predict_opt.out, "Predictions CSV path")->capture_default_str();
  predict_cmd->add_option("--summary", predict_opt.summary, "Sidecar summary JSON path");
  predict_cmd->add_option("--manifest", predict_opt.manifest, "Manifest path");

  SimulateOptions sim_opt;
  bool sim_seed_given = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo size/power study");
  sim_cmd->add_option("--preset", sim_opt.preset, "One of: paper-network-global, paper-network-partial, paper-sphere-global, paper-sphere-partial")
      ->required();
  sim_cmd->add_option("--n", sim_opt.n_filter, "Keep only grid cells with these sample sizes")->delimiter(',');
  sim_cmd->add_option("--m", sim_opt.m, "Node-count override (network presets)");
  sim_cmd->add_option("--B", sim_opt.B, "Monte Carlo replications (0 keeps preset default)")->capture_default_str();
  sim_cmd->add_option("--K", sim_opt.K, "Randomization count (0 keeps preset default)")->capture_default_str();
  sim_cmd->add_option("--alpha", sim_opt.alpha, "Significance level")->capture_default_str();
  sim_cmd->add_option("--seed", sim_opt.seed, "Study seed");
  sim_cmd->add_option("--threads", sim_opt.threads, "Worker threads, 0 = auto")->capture_default_str();
  sim_cmd->add_option("--out", sim_opt.out, "Power table CSV path")->capture_default_str();
  sim_cmd->add_option("--manifest", sim_opt.manifest, "Manifest path");

  std::string replay_path, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded manifest");
  replay_cmd->add_option("manifest", replay_path, "Manifest JSON path")->required();
  replay_cmd->add_option("--out", replay_out, "Override the output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  test_seed_given = test_cmd->count("--seed") > 0;
  sim_seed_given = sim_cmd->count("--seed") > 0;

  try {
    if (test_cmd->parsed()) {
      if (!test_seed_given) test_opt.seed = entropy_seed();
      log_debug("seed " + std::to_string(test_opt.seed));
      return run_test(test_opt);
    }
    if (fit_cmd->parsed()) return run_fit_or_predict(fit_opt, false);
    if (predict_cmd->parsed()) return run_fit_or_predict(predict_opt, true);
    if (sim_cmd->parsed()) {
      if (!sim_seed_given) sim_opt.seed = entropy_seed();
      log_debug("seed " + std::to_string(sim_opt.seed));
      return run_simulate(sim_opt);
    }
    if (replay_cmd->parsed()) return run_replay(replay_path, replay_out);
  } catch (const frechet::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
