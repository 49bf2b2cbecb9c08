#include "app.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nmixprev/errors.hpp"
#include "nmixprev/genprocess.hpp"
#include "nmixprev/io.hpp"
#include "nmixprev/mle.hpp"
#include "nmixprev/prevalence.hpp"
#include "nmixprev/rng.hpp"
#include "nmixprev/version.hpp"

namespace nmixprev::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitDegenerate = 5;

json config_to_json(const FitConfig& config) {
  json grid = json::array();
  for (int n : config.n_max_grid) grid.push_back(n);
  return json{{"s_bounds", {config.s_bounds.first, config.s_bounds.second}},
              {"p_bounds", {config.p_bounds.first, config.p_bounds.second}},
              {"n_max_grid", grid},
              {"n_max_ceiling", config.n_max_ceiling},
              {"multistart_points", config.multistart_points},
              {"rel_tol", config.rel_tol},
              {"max_iters", config.max_iters},
              {"truncated", config.truncated},
              {"interval_level", config.interval_level},
              {"threads", config.threads}};
}

json make_manifest(const std::string& command,
                   const std::vector<std::string>& argv, json config,
                   std::optional<std::uint64_t> seed,
                   std::optional<std::string> input_digest) {
  return json{{"command", command},
              {"argv", argv},
              {"config", std::move(config)},
              {"seed", seed ? json(*seed) : json(nullptr)},
              {"input_digest", input_digest ? json(*input_digest) : json(nullptr)},
              {"tool_version", std::string(kToolVersion)},
              {"generator", std::string(kGeneratorName)},
              {"schema_version", kSchemaVersion}};
}

json fit_to_json(const FitResult& fit) {
  json profile = json::array();
  for (const auto& point : fit.profile)
    profile.push_back(json{{"n_max", point.n_max},
                           {"s", point.s},
                           {"p", point.p},
                           {"loglik", point.loglik},
                           {"converged", point.converged}});
  return json{{"s_hat", fit.params.pl.s},
              {"p_hat", fit.params.p},
              {"n_max_hat", fit.params.pl.n_max},
              {"loglik", fit.loglik},
              {"converged", fit.converged},
              {"flat_likelihood", fit.flat_likelihood},
              {"boundary", fit.boundary},
              {"n_evaluations", fit.n_evaluations},
              {"profile", profile}};
}

json prevalence_to_json(const PrevalenceEstimate& est) {
  return json{{"p_zero", est.p_zero},
              {"o_hat", est.o_hat},
              {"t_hat", est.t_hat},
              {"r", est.r}};
}

json interval_to_json(const Interval& iv) {
  return json{{"lo", iv.lo}, {"hi", iv.hi}};
}

json bootstrap_to_json(const BootstrapResult& boot) {
  json replicates = json::array();
  for (const auto& rep : boot.replicates) {
    replicates.push_back(json{{"s", rep.fit.params.pl.s},
                              {"p", rep.fit.params.p},
                              {"n_max", rep.fit.params.pl.n_max},
                              {"p_zero", rep.prevalence.p_zero},
                              {"o_hat", rep.prevalence.o_hat},
                              {"t_hat", rep.prevalence.t_hat},
                              {"converged", rep.converged}});
  }
  return json{{"b", static_cast<int>(boot.replicates.size())},
              {"level", boot.level},
              {"n_failed", boot.n_failed},
              {"unreliable", boot.unreliable},
              {"intervals",
               json{{"s", interval_to_json(boot.intervals.s)},
                    {"p", interval_to_json(boot.intervals.p)},
                    {"n_max", interval_to_json(boot.intervals.n_max)},
                    {"p_zero", interval_to_json(boot.intervals.p_zero)},
                    {"o_hat", interval_to_json(boot.intervals.o_hat)},
                    {"t_hat", interval_to_json(boot.intervals.t_hat)}}},
              {"replicates", replicates}};
}

void emit_json(const json& doc, const std::optional<std::string>& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path)
    atomic_write_file(*out_path, text);
  else
    std::cout << text;
}

// CSV artifacts cannot embed their manifest; they get a sidecar.
void write_with_manifest(const std::string& path, const std::string& contents,
                         const json& manifest) {
  atomic_write_file(path, contents);
  atomic_write_file(path + ".manifest.json", manifest.dump(2) + "\n");
}

int data_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitData;
}

struct FitFlags {
  std::string input;
  std::optional<std::string> out;
  std::vector<int> n_max_grid;
  int n_max_ceiling = 50000;
  int boot = 0;
  std::optional<std::uint64_t> seed;
  double level = 0.95;
  bool no_truncation = false;
  std::pair<double, double> s_bounds{0.05, 6.0};
  std::pair<double, double> p_bounds{1e-6, 1.0};
  int multistart = 8;
  double rel_tol = 1e-8;
  int max_iters = 1000;
  int threads = 1;
};

int run_fit(const FitFlags& flags, const std::vector<std::string>& argv) {
  std::string bytes;
  ReportHistogram hist;
  try {
    bytes = read_file(flags.input);
    std::istringstream in(bytes);
    hist = parse_histogram(in);
  } catch (const std::exception& e) {
    return data_error(e);
  }

  FitConfig config;
  config.n_max_grid = flags.n_max_grid;
  config.n_max_ceiling = flags.n_max_ceiling;
  config.truncated = !flags.no_truncation;
  config.s_bounds = flags.s_bounds;
  config.p_bounds = flags.p_bounds;
  config.multistart_points = flags.multistart;
  config.rel_tol = flags.rel_tol;
  config.max_iters = flags.max_iters;
  config.interval_level = flags.level;
  config.threads = flags.threads;
  try {
    config.validate();
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const json manifest =
      make_manifest("fit", argv, config_to_json(config), flags.seed,
                    fnv1a64_hex(bytes));

  json doc{{"schema_version", kSchemaVersion}, {"manifest", manifest}};
  int exit_code = kExitOk;
  try {
    FitResult fitted;
    try {
      fitted = fit(hist, config);
    } catch (const ConvergenceError& e) {
      std::cerr << "error: " << e.what() << "\n";
      doc["fit"] = fit_to_json(e.partial());
      doc["prevalence"] = nullptr;
      emit_json(doc, flags.out);
      return kExitConvergence;
    }
    doc["fit"] = fit_to_json(fitted);
    if (fitted.converged) {
      doc["prevalence"] = prevalence_to_json(estimate_prevalence(hist, fitted));
    } else {
      doc["prevalence"] = nullptr;
      exit_code = kExitConvergence;
    }
    if (flags.boot > 0 && fitted.converged) {
      doc["bootstrap"] =
          bootstrap_to_json(bootstrap(hist, fitted, config, flags.boot, *flags.seed));
    }
  } catch (const DegenerateModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const InfeasibleSupportError& e) {
    return data_error(e);
  } catch (const InsufficientDataError& e) {
    return data_error(e);
  }

  emit_json(doc, flags.out);
  return exit_code;
}

struct AttachmentFlags {
  double q = 0.1;
  long steps = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::optional<std::string> loglog;
  std::optional<std::string> summary;
};

int run_attachment(const AttachmentFlags& flags,
                   const std::vector<std::string>& argv) {
  SyntheticTruth truth;
  try {
    truth = simulate_attachment({flags.q, flags.steps}, flags.seed);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  ReportHistogram hist;
  for (int c : truth.target_counts) hist.add(c);

  const json manifest = make_manifest(
      "simulate attachment", argv,
      json{{"q", flags.q}, {"steps", flags.steps}}, flags.seed, std::nullopt);

  if (flags.out)
    write_with_manifest(*flags.out, histogram_to_csv(hist), manifest);
  if (flags.loglog)
    write_with_manifest(*flags.loglog,
                        loglog_points_to_csv(loglog_points(hist)), manifest);

  json summary{{"schema_version", kSchemaVersion},
               {"truth", json{{"o_true", truth.o_true()},
                              {"t_true", truth.t_true()}}},
               {"manifest", manifest}};
  std::vector<std::pair<double, double>> bins;
  for (const auto& [v, c] : hist.counts())
    bins.emplace_back(v, static_cast<double>(c));
  if (bins.size() >= 2) {
    const auto line = loglog_slope(bins);
    summary["loglog"] = json{{"slope", line.slope},
                             {"intercept", line.intercept},
                             {"r_squared", line.r_squared}};
  }
  emit_json(summary, flags.summary);
  return kExitOk;
}

struct ModelSimFlags {
  double s = 2.5;
  double p = 0.1;
  int n_max = 1;
  std::int64_t offenders = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::optional<std::string> summary;
};

int run_model_sim(const ModelSimFlags& flags,
                  const std::vector<std::string>& argv) {
  SyntheticTruth truth;
  ReportDraw draw;
  try {
    const ModelParams params{{flags.s, flags.n_max}, flags.p};
    truth = generate_model_truth(params, flags.offenders,
                                 derive_seed(flags.seed, 0));
    draw = simulate_reports(truth, flags.p, derive_seed(flags.seed, 1));
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const json manifest = make_manifest(
      "simulate model", argv,
      json{{"s", flags.s},
           {"p", flags.p},
           {"n_max", flags.n_max},
           {"offenders", flags.offenders}},
      flags.seed, std::nullopt);

  if (flags.out)
    write_with_manifest(*flags.out, histogram_to_csv(draw.hist), manifest);

  json summary{{"schema_version", kSchemaVersion},
               {"truth", json{{"o_true", truth.o_true()},
                              {"t_true", truth.t_true()},
                              {"s", flags.s},
                              {"p", flags.p},
                              {"n_max", flags.n_max}}},
               {"reports", json{{"r", draw.hist.r()},
                                {"m", draw.hist.m()},
                                {"zero_count", draw.zero_count}}},
               {"manifest", manifest}};
  emit_json(summary, flags.summary);
  return kExitOk;
}

struct StudyFlags {
  std::vector<double> s_list;
  std::vector<double> p_list;
  int n_max = 1;
  std::int64_t offenders = 1;
  int replicas = 1;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  int n_max_ceiling = 0;  // 0: study default (2 * n_max)
  int multistart = 8;
  bool no_truncation = false;
};

int run_study_cmd(const StudyFlags& flags,
                  const std::vector<std::string>& argv) {
  StudyOptions options;
  options.n_max = flags.n_max;
  options.o_true = flags.offenders;
  options.replicas = flags.replicas;
  options.seed = flags.seed;
  options.threads = flags.threads;
  options.fit.multistart_points = flags.multistart;
  options.fit.truncated = !flags.no_truncation;
  if (flags.n_max_ceiling > 0)
    options.fit.n_max_ceiling = flags.n_max_ceiling;

  std::vector<StudySetting> settings;
  for (double s : flags.s_list)
    for (double p : flags.p_list) settings.push_back({s, p});

  std::vector<StudyRow> rows;
  try {
    rows = run_study(settings, options);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const json manifest = make_manifest(
      "study", argv,
      json{{"s_list", flags.s_list},
           {"p_list", flags.p_list},
           {"n_max", flags.n_max},
           {"offenders", flags.offenders},
           {"replicas", flags.replicas},
           {"threads", flags.threads},
           {"fit", config_to_json(options.fit)}},
      flags.seed, std::nullopt);

  write_with_manifest(flags.out, study_to_csv(rows), manifest);

  int converged = 0;
  for (const auto& row : rows) converged += row.converged ? 1 : 0;
  json summary{{"schema_version", kSchemaVersion},
               {"rows", static_cast<int>(rows.size())},
               {"converged", converged},
               {"manifest", manifest}};
  emit_json(summary, std::nullopt);
  return kExitOk;
}

struct LogLogFlags {
  std::string input;
  std::optional<std::string> out;
};

int run_loglog(const LogLogFlags& flags,
               const std::vector<std::string>& argv) {
  std::string bytes;
  ReportHistogram hist;
  LogLogFit line;
  try {
    bytes = read_file(flags.input);
    std::istringstream in(bytes);
    hist = parse_histogram(in);
    std::vector<std::pair<double, double>> bins;
    for (const auto& [v, c] : hist.counts())
      bins.emplace_back(v, static_cast<double>(c));
    line = loglog_slope(bins);
  } catch (const std::exception& e) {
    return data_error(e);
  }

  const json manifest = make_manifest("loglog", argv, json::object(),
                                      std::nullopt, fnv1a64_hex(bytes));
  if (flags.out)
    write_with_manifest(*flags.out,
                        loglog_points_to_csv(loglog_points(hist)), manifest);

  json summary{{"schema_version", kSchemaVersion},
               {"loglog", json{{"slope", line.slope},
                               {"intercept", line.intercept},
                               {"r_squared", line.r_squared}}},
               {"manifest", manifest}};
  emit_json(summary, std::nullopt);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  const std::vector<std::string> argv_copy(argv, argv + argc);

  CLI::App app{"Power-law-binomial N-mixture prevalence estimation from "
               "report-count histograms"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit (s, n_max, p) to a histogram CSV, estimate prevalence");
  fit_cmd->add_option("--input", fit_flags.input, "histogram CSV")->required();
  fit_cmd->add_option("--out", fit_flags.out, "output JSON path (default: stdout)");
  fit_cmd->add_option("--nmax-grid", fit_flags.n_max_grid,
                      "explicit n_max profile grid")->delimiter(',');
  fit_cmd->add_option("--nmax-ceiling", fit_flags.n_max_ceiling,
                      "cap for the derived n_max grid");
  fit_cmd->add_option("--boot", fit_flags.boot, "bootstrap replicates (0: off)");
  fit_cmd->add_option("--seed", fit_flags.seed, "bootstrap seed");
  fit_cmd->add_option("--level", fit_flags.level, "bootstrap interval level");
  fit_cmd->add_flag("--no-truncation", fit_flags.no_truncation,
                    "use the raw likelihood instead of the zero-truncated one");
  fit_cmd->add_option("--s-bounds", fit_flags.s_bounds, "s search bounds");
  fit_cmd->add_option("--p-bounds", fit_flags.p_bounds, "p search bounds");
  fit_cmd->add_option("--multistart", fit_flags.multistart, "optimizer starts");
  fit_cmd->add_option("--rel-tol", fit_flags.rel_tol, "optimizer tolerance");
  fit_cmd->add_option("--max-iters", fit_flags.max_iters, "optimizer iterations");
  fit_cmd->add_option("--threads", fit_flags.threads, "bootstrap threads");

  auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic data");
  sim_cmd->require_subcommand(1);

  AttachmentFlags at_flags;
  auto* at_cmd = sim_cmd->add_subcommand(
      "attachment", "Run the pair-list attachment process");
  at_cmd->add_option("--q", at_flags.q, "new-offender probability")->required();
  at_cmd->add_option("--steps", at_flags.steps, "pairs to generate")->required();
  at_cmd->add_option("--seed", at_flags.seed, "random seed")->required();
  at_cmd->add_option("--out", at_flags.out, "histogram CSV path");
  at_cmd->add_option("--loglog", at_flags.loglog, "log-log points CSV path");
  at_cmd->add_option("--summary", at_flags.summary,
                     "summary JSON path (default: stdout)");

  ModelSimFlags model_flags;
  auto* model_cmd = sim_cmd->add_subcommand(
      "model", "Draw offenders from the fitted-model family and thin");
  model_cmd->add_option("--s", model_flags.s, "power-law exponent")->required();
  model_cmd->add_option("--p", model_flags.p, "reporting rate")->required();
  model_cmd->add_option("--nmax", model_flags.n_max, "support bound")->required();
  model_cmd->add_option("--offenders", model_flags.offenders,
                        "number of offenders")->required();
  model_cmd->add_option("--seed", model_flags.seed, "random seed")->required();
  model_cmd->add_option("--out", model_flags.out, "histogram CSV path");
  model_cmd->add_option("--summary", model_flags.summary,
                        "summary JSON path (default: stdout)");

  StudyFlags study_flags;
  auto* study_cmd = app.add_subcommand(
      "study", "Recovery study over an (s, p) grid");
  study_cmd->add_option("--s-list", study_flags.s_list, "s values")
      ->delimiter(',')->required();
  study_cmd->add_option("--p-list", study_flags.p_list, "p values")
      ->delimiter(',')->required();
  study_cmd->add_option("--nmax", study_flags.n_max, "true n_max")->required();
  study_cmd->add_option("--offenders", study_flags.offenders,
                        "true offender count")->required();
  study_cmd->add_option("--replicas", study_flags.replicas,
                        "replicas per setting")->required();
  study_cmd->add_option("--seed", study_flags.seed, "random seed")->required();
  study_cmd->add_option("--out", study_flags.out, "study CSV path")->required();
  study_cmd->add_option("--threads", study_flags.threads, "worker threads");
  study_cmd->add_option("--nmax-ceiling", study_flags.n_max_ceiling,
                        "fit grid ceiling (default: 2x true n_max)");
  study_cmd->add_option("--multistart", study_flags.multistart,
                        "optimizer starts per fit");
  study_cmd->add_flag("--no-truncation", study_flags.no_truncation,
                      "fit with the raw likelihood");

  LogLogFlags loglog_flags;
  auto* loglog_cmd = app.add_subcommand(
      "loglog", "Log-log plot data and OLS slope for a histogram");
  loglog_cmd->add_option("--input", loglog_flags.input, "histogram CSV")
      ->required();
  loglog_cmd->add_option("--out", loglog_flags.out, "points CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      if (fit_flags.boot > 0 && !fit_flags.seed) {
        std::cerr << "error: --boot requires --seed (seeded runs only)\n";
        return kExitUsage;
      }
      return run_fit(fit_flags, argv_copy);
    }
    if (at_cmd->parsed()) return run_attachment(at_flags, argv_copy);
    if (model_cmd->parsed()) return run_model_sim(model_flags, argv_copy);
    if (study_cmd->parsed()) return run_study_cmd(study_flags, argv_copy);
    if (loglog_cmd->parsed()) return run_loglog(loglog_flags, argv_copy);
  } catch (const FileError& e) {
    return data_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nmixprev::cli
