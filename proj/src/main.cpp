// Command-line front end: simulate datasets, fit the Gibbs or variational
// engine, run posterior variable selection, and reproduce the replicated
// benchmarks, all through headerless CSV and JSON files.
//
// Exit codes: 0 success; 2 bad flags, malformed input, or an unsupported
// request; 3 numerical failure inside an engine; 4 file I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "infhs/gibbs.hpp"
#include "infhs/io.hpp"
#include "infhs/metrics.hpp"
#include "infhs/selection.hpp"
#include "infhs/simulate.hpp"
#include "infhs/threads.hpp"
#include "infhs/types.hpp"
#include "infhs/vb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infhs;

namespace {

int exit_code_for(const Error& e) {
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const BadFlag*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const UnsupportedCombination*>(&e) ||
      dynamic_cast<const InvalidHyper*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e) ||
      dynamic_cast<const MissingIntercept*>(&e) ||
      dynamic_cast<const InvalidBinaryResponse*>(&e)) {
    return 2;
  }
  return 3;  // numerical failure
}

Task parse_task(const std::string& name) {
  if (name == "linear") return Task::linear;
  if (name == "probit") return Task::probit;
  throw BadFlag("unknown task: " + name);
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vec vec_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw ParseError(what + ": expected an array");
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ParseError(what + ": expected numbers");
    v(static_cast<int>(i)) = arr[i].get<double>();
  }
  return v;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const fs::path& dir) {
  Dataset data;
  data.y = io::read_csv_vector((dir / "y.csv").string());
  data.X = io::read_csv_matrix((dir / "X.csv").string());
  for (int d = 1;; ++d) {
    const fs::path z = dir / ("Z_" + std::to_string(d) + ".csv");
    if (!fs::exists(z)) break;
    data.Z.push_back(io::read_csv_matrix(z.string()));
  }
  return data;
}

// Engine and hyperparameter settings shared by fit and benchmark; a JSON
// config (field names exactly as in the structs) seeds the values and
// explicitly passed flags override it.
struct FitSettings {
  Hyperparameters hyper;
  GibbsConfig gibbs;
  VBConfig vb;
};

void apply_config_file(const std::string& path, FitSettings& st) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  try {
    if (j.contains("v")) st.hyper.v = j.at("v").get<double>();
    if (j.contains("q")) st.hyper.q = j.at("q").get<double>();
    if (j.contains("s0_sq")) st.hyper.s0_sq = j.at("s0_sq").get<double>();
    if (j.contains("a")) st.hyper.a = vec_from_json(j.at("a"), "config a");
    if (j.contains("b")) st.hyper.b = vec_from_json(j.at("b"), "config b");
    if (j.contains("B")) st.gibbs.B = j.at("B").get<int>();
    if (j.contains("bn")) st.gibbs.bn = j.at("bn").get<int>();
    if (j.contains("thin")) st.gibbs.thin = j.at("thin").get<int>();
    if (j.contains("seed")) st.gibbs.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("eps")) st.vb.eps = j.at("eps").get<double>();
    if (j.contains("max_iter")) st.vb.max_iter = j.at("max_iter").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  int n = 100, p = 500, p0 = 30;
  std::string scenario = "main_G0";
  std::uint64_t seed = 1;
  std::string task = "linear";
  std::string out = ".";
};

void run_simulate(const SimulateArgs& args) {
  if (args.p0 > args.p) {
    throw BadFlag("--p0 must not exceed --p");
  }
  sim::SimSpec spec;
  spec.n = args.n;
  spec.p = args.p;
  spec.p0 = args.p0;
  spec.seed = args.seed;
  spec.task = parse_task(args.task);
  const sim::CodataScenario scenario = sim::scenario_preset(args.scenario);

  const auto [data, truth] = sim::simulate_instance(spec, scenario);

  const fs::path dir(args.out);
  fs::create_directories(dir);
  io::write_csv_vector((dir / "y.csv").string(), data.y);
  io::write_csv_matrix((dir / "X.csv").string(), data.X);
  for (std::size_t d = 0; d < data.Z.size(); ++d) {
    io::write_csv_matrix((dir / ("Z_" + std::to_string(d + 1) + ".csv")).string(),
                         data.Z[d]);
  }
  json j;
  j["beta"] = vec_to_json(truth);
  j["n"] = args.n;
  j["p"] = args.p;
  j["p0"] = args.p0;
  j["scenario"] = args.scenario;
  j["seed"] = args.seed;
  j["task"] = args.task;
  write_text_file(dir / "truth.json", j.dump(2) + "\n");
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string dir = ".";
  std::string out;  // defaults to dir
  std::string engine;
  std::string task = "linear";
  bool save_draws = false;
  std::string config;
  FitSettings settings;
};

json fit_common_json(const std::string& engine, const std::string& task,
                     const Dataset& data) {
  json j;
  j["engine"] = engine;
  j["task"] = task;
  j["n"] = data.n();
  j["p"] = data.p();
  return j;
}

void run_fit(const FitArgs& args) {
  const Dataset data = load_dataset(args.dir);
  const Task task = parse_task(args.task);
  const fs::path out_dir(args.out.empty() ? args.dir : args.out);
  fs::create_directories(out_dir);

  if (args.engine == "gibbs") {
    if (task == Task::probit) {
      throw UnsupportedCombination(
          "probit outcomes are fit variationally only; use --engine vb");
    }
    const PosteriorDraws draws =
        run_gibbs(data, args.settings.hyper, args.settings.gibbs);
    const FitSummary summary = summarize(draws);

    json j = fit_common_json("gibbs", args.task, data);
    j["beta_mean"] = vec_to_json(summary.beta_mean);
    j["beta_sd"] = vec_to_json(summary.beta_sd);
    j["beta_q025"] = vec_to_json(summary.beta_q025);
    j["beta_q50"] = vec_to_json(summary.beta_q50);
    j["beta_q975"] = vec_to_json(summary.beta_q975);
    j["sigma_sq_mean"] = summary.sigma_sq_mean;
    j["tau_sq_mean"] = summary.tau_sq_mean;
    j["gamma_mean"] = vec_to_json(summary.gamma_mean);
    j["kappa_sq_mean"] = vec_to_json(summary.kappa_sq_mean);
    j["inclusion"] = vec_to_json(summary.inclusion);
    j["retained_draws"] = static_cast<int>(draws.draws.size());
    write_text_file(out_dir / "fit.json", j.dump(2) + "\n");

    if (args.save_draws) {
      Mat beta_draws(static_cast<int>(draws.draws.size()), data.p() + 1);
      for (std::size_t i = 0; i < draws.draws.size(); ++i) {
        beta_draws.row(static_cast<int>(i)) = draws.draws[i].beta.transpose();
      }
      io::write_csv_matrix((out_dir / "draws.csv").string(), beta_draws);
    }
    return;
  }
  if (args.engine != "vb") {
    throw BadFlag("unknown engine: " + args.engine);
  }

  const auto [state, trace] =
      task == Task::linear
          ? run_cavi_linear(data, args.settings.hyper, args.settings.vb)
          : run_cavi_probit(data, args.settings.hyper, args.settings.vb);

  json j = fit_common_json("vb", args.task, data);
  j["beta_mean"] = vec_to_json(state.mu_beta);
  const Vec beta_sd =
      (state.scale_beta * state.diag_sigma_beta).cwiseSqrt();
  j["beta_sd"] = vec_to_json(beta_sd);
  j["gamma_mean"] = vec_to_json(state.mu_gamma);
  // posterior mean of kappa_d^2 under IG(e*, f*)
  Vec kappa_sq(state.e_star.size());
  for (int d = 0; d < state.e_star.size(); ++d) {
    kappa_sq(d) = state.f_star(d) / (state.e_star(d) - 1.0);
  }
  j["kappa_sq_mean"] = vec_to_json(kappa_sq);
  j["inclusion"] = vec_to_json(inclusion_probs(state));
  j["elbo"] = trace.back();
  j["iterations"] = static_cast<int>(trace.size());
  write_text_file(out_dir / "fit.json", j.dump(2) + "\n");

  Vec elbo(static_cast<int>(trace.size()));
  for (std::size_t i = 0; i < trace.size(); ++i) {
    elbo(static_cast<int>(i)) = trace[i];
  }
  io::write_csv_vector((out_dir / "elbo.csv").string(), elbo);
}

// ------------------------------------------------------------------ select

struct SelectArgs {
  std::string dir = ".";
  std::string out;  // defaults to dir
  std::string method = "threshold";
  double threshold = 0.5;
  int folds = 5;
  std::vector<double> lambdas;
  bool exempt_intercept = false;
};

void run_select(const SelectArgs& args) {
  const fs::path dir(args.dir);
  const json fit = read_json_file(dir / "fit.json");
  Vec scores, beta_mean;
  try {
    scores = vec_from_json(fit.at("inclusion"), "fit.json inclusion");
    beta_mean = vec_from_json(fit.at("beta_mean"), "fit.json beta_mean");
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit.json: ") + e.what());
  }

  const fs::path out_dir(args.out.empty() ? args.dir : args.out);
  fs::create_directories(out_dir);

  json j;
  j["scores"] = vec_to_json(scores);
  if (args.method == "threshold") {
    const std::vector<bool> selected =
        threshold_select(scores, args.threshold);
    j["method"] = "threshold";
    j["threshold"] = args.threshold;
    j["selected"] = json(selected);
  } else if (args.method == "dss") {
    const Dataset data = load_dataset(dir);
    const std::vector<double> grid =
        args.lambdas.empty()
            ? default_lambda_grid(data.X, beta_mean, args.exempt_intercept)
            : args.lambdas;
    const SelectionResult result = dss_cv(data, beta_mean, scores, grid,
                                          args.folds, args.exempt_intercept);
    j["method"] = "dss";
    j["dss_lambda"] = *result.dss_lambda;
    j["selected"] = json(result.selected);
  } else {
    throw BadFlag("unknown selection method: " + args.method);
  }
  write_text_file(out_dir / "selection.json", j.dump(2) + "\n");
}

// --------------------------------------------------------------- benchmark

struct BenchmarkArgs {
  std::string out = ".";
  std::string scenarios = "main_G0,main_G1,main_G2,main_G3,main_G4";
  int n = 100, p = 500, p0 = 30;
  int replicates = 5;
  std::string engines = "vb";
  std::string task = "linear";
  std::uint64_t seed = 1;
  std::string config;
  FitSettings settings;
};

// Expands "main_G0..main_G3" into main_G0,main_G1,main_G2,main_G3; plain
// names pass through.
std::vector<std::string> expand_scenarios(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string token = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma == std::string::npos ? csv.size() + 1 : comma + 1;
    if (token.empty()) continue;
    const std::size_t dots = token.find("..");
    if (dots == std::string::npos) {
      out.push_back(token);
      continue;
    }
    const std::string lhs = token.substr(0, dots);
    const std::string rhs = token.substr(dots + 2);
    const auto split = [](const std::string& s) {
      std::size_t cut = s.size();
      while (cut > 0 && std::isdigit(static_cast<unsigned char>(s[cut - 1]))) {
        --cut;
      }
      return std::pair<std::string, std::string>(s.substr(0, cut),
                                                 s.substr(cut));
    };
    const auto [lp, ln] = split(lhs);
    const auto [rp, rn] = split(rhs);
    if (lp.empty() || lp != rp || ln.empty() || rn.empty()) {
      throw BadFlag("malformed scenario range: " + token);
    }
    const int lo = std::stoi(ln), hi = std::stoi(rn);
    if (hi < lo) throw BadFlag("descending scenario range: " + token);
    for (int k = lo; k <= hi; ++k) out.push_back(lp + std::to_string(k));
  }
  if (out.empty()) throw BadFlag("no scenarios given");
  return out;
}

struct RepResult {
  double auc_vb = 0.0;
  double auc_gibbs = 0.0;
  double mse = 0.0;
  Vec sd_gibbs, sd_vb;
};

void run_benchmark(const BenchmarkArgs& args) {
  if (args.replicates < 1) throw BadFlag("--replicates must be positive");
  if (args.p0 > args.p) throw BadFlag("--p0 must not exceed --p");
  const std::vector<std::string> scenario_names =
      expand_scenarios(args.scenarios);
  const Task task = parse_task(args.task);
  const bool want_vb = args.engines == "vb" || args.engines == "both";
  const bool want_gibbs = args.engines == "gibbs" || args.engines == "both";
  if (!want_vb && !want_gibbs) {
    throw BadFlag("--engines must be vb, gibbs, or both");
  }
  if (want_gibbs && task == Task::probit) {
    throw UnsupportedCombination(
        "probit outcomes are fit variationally only; use --engines vb");
  }

  // validate every scenario name up front
  std::vector<sim::CodataScenario> scenarios;
  scenarios.reserve(scenario_names.size());
  for (const std::string& name : scenario_names) {
    scenarios.push_back(sim::scenario_preset(name));
  }

  std::vector<std::vector<RepResult>> results(scenario_names.size());
  for (std::size_t s = 0; s < scenario_names.size(); ++s) {
    results[s].assign(args.replicates, RepResult{});
    threads::parallel_for(args.replicates, [&, s](int r) {
      sim::SimSpec spec;
      spec.n = args.n;
      spec.p = args.p;
      spec.p0 = args.p0;
      spec.seed = args.seed + static_cast<std::uint64_t>(r);
      spec.task = task;
      const auto [data, truth] = sim::simulate_instance(spec, scenarios[s]);
      std::vector<bool> support(args.p);
      for (int j = 1; j <= args.p; ++j) support[j - 1] = truth(j) != 0.0;

      RepResult& slot = results[s][r];
      VBState vb_state;
      FitSummary gibbs_summary;
      if (want_vb) {
        const auto [state, trace] =
            task == Task::linear
                ? run_cavi_linear(data, args.settings.hyper, args.settings.vb)
                : run_cavi_probit(data, args.settings.hyper, args.settings.vb);
        vb_state = state;
        slot.auc_vb = metrics::auc(inclusion_probs(state), support);
      }
      if (want_gibbs) {
        GibbsConfig cfg = args.settings.gibbs;
        cfg.seed = spec.seed;
        gibbs_summary = summarize(run_gibbs(data, args.settings.hyper, cfg));
        slot.auc_gibbs = metrics::auc(gibbs_summary.inclusion, support);
      }
      if (want_vb && want_gibbs) {
        slot.mse =
            metrics::mse_beta(gibbs_summary.beta_mean, vb_state.mu_beta);
        slot.sd_gibbs = gibbs_summary.beta_sd;
        slot.sd_vb =
            (vb_state.scale_beta * vb_state.diag_sigma_beta).cwiseSqrt();
      }
    });
  }

  const fs::path dir(args.out);
  fs::create_directories(dir);
  std::ofstream auc_csv(dir / "auc_by_scenario.csv");
  std::ofstream mse_csv(dir / "gs_vs_vb_mse.csv");
  std::ofstream sd_csv(dir / "sd_comparison.csv");
  if (!auc_csv || !mse_csv || !sd_csv) {
    throw IoError("cannot open benchmark outputs under " + dir.string());
  }
  for (std::size_t s = 0; s < scenario_names.size(); ++s) {
    for (int r = 0; r < args.replicates; ++r) {
      const RepResult& slot = results[s][r];
      if (want_vb) {
        auc_csv << scenario_names[s] << ",vb," << r << ','
                << io::format_double(slot.auc_vb) << '\n';
      }
      if (want_gibbs) {
        auc_csv << scenario_names[s] << ",gibbs," << r << ','
                << io::format_double(slot.auc_gibbs) << '\n';
      }
      if (want_vb && want_gibbs) {
        mse_csv << scenario_names[s] << ',' << r << ','
                << io::format_double(slot.mse) << '\n';
        for (int j = 0; j < slot.sd_gibbs.size(); ++j) {
          sd_csv << scenario_names[s] << ',' << r << ',' << j << ','
                 << io::format_double(slot.sd_gibbs(j)) << ','
                 << io::format_double(slot.sd_vb(j)) << '\n';
        }
      }
    }
  }
  if (!auc_csv.flush() || !mse_csv.flush() || !sd_csv.flush()) {
    throw IoError("write failed under " + dir.string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "informative-horseshoe regression: simulation, fitting, selection, "
      "and benchmarks"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a synthetic dataset");
  sim_cmd->add_option("--n", sim_args.n, "observations");
  sim_cmd->add_option("--p", sim_args.p, "covariates (excluding intercept)");
  sim_cmd->add_option("--p0", sim_args.p0, "true nonzero covariates");
  sim_cmd->add_option("--scenario", sim_args.scenario,
                      "co-data scenario preset (main_G0..main_G4, "
                      "appendix_G0..appendix_G3)");
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed");
  sim_cmd->add_option("--task", sim_args.task, "linear or probit")
      ->check(CLI::IsMember({"linear", "probit"}));
  sim_cmd->add_option("--out", sim_args.out, "output directory");
  sim_cmd->callback([&] { run_simulate(sim_args); });

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to CSV inputs");
  fit_cmd->add_option("--dir", fit_args.dir, "directory with y.csv/X.csv/Z_*.csv");
  fit_cmd->add_option("--out", fit_args.out, "output directory (default --dir)");
  fit_cmd->add_option("--engine", fit_args.engine, "gibbs or vb")
      ->required()
      ->check(CLI::IsMember({"gibbs", "vb"}));
  fit_cmd->add_option("--task", fit_args.task, "linear or probit")
      ->check(CLI::IsMember({"linear", "probit"}));
  fit_cmd->add_option("--config", fit_args.config,
                      "JSON config (v,q,a,b,s0_sq,B,bn,thin,seed,eps,max_iter)");
  CLI::Option* fit_b = fit_cmd->add_option("--B", fit_args.settings.gibbs.B,
                                           "Gibbs iterations");
  CLI::Option* fit_bn = fit_cmd->add_option("--bn", fit_args.settings.gibbs.bn,
                                            "Gibbs burn-in");
  CLI::Option* fit_thin = fit_cmd->add_option(
      "--thin", fit_args.settings.gibbs.thin, "Gibbs thinning stride");
  CLI::Option* fit_seed = fit_cmd->add_option(
      "--seed", fit_args.settings.gibbs.seed, "Gibbs RNG seed");
  CLI::Option* fit_eps = fit_cmd->add_option("--eps", fit_args.settings.vb.eps,
                                             "CAVI stopping tolerance");
  CLI::Option* fit_max_iter = fit_cmd->add_option(
      "--max-iter", fit_args.settings.vb.max_iter, "CAVI sweep cap");
  fit_cmd->add_flag("--save-draws", fit_args.save_draws,
                    "write retained coefficient draws (Gibbs)");
  fit_cmd->callback([&] {
    FitSettings defaults;  // (re)apply config, then explicit flags win
    const FitSettings flag_values = fit_args.settings;
    fit_args.settings = defaults;
    if (!fit_args.config.empty()) {
      apply_config_file(fit_args.config, fit_args.settings);
    }
    if (fit_b->count()) fit_args.settings.gibbs.B = flag_values.gibbs.B;
    if (fit_bn->count()) fit_args.settings.gibbs.bn = flag_values.gibbs.bn;
    if (fit_thin->count()) fit_args.settings.gibbs.thin = flag_values.gibbs.thin;
    if (fit_seed->count()) fit_args.settings.gibbs.seed = flag_values.gibbs.seed;
    if (fit_eps->count()) fit_args.settings.vb.eps = flag_values.vb.eps;
    if (fit_max_iter->count()) {
      fit_args.settings.vb.max_iter = flag_values.vb.max_iter;
    }
    run_fit(fit_args);
  });

  SelectArgs select_args;
  CLI::App* select_cmd =
      app.add_subcommand("select", "variable selection from a stored fit");
  select_cmd->add_option("--dir", select_args.dir,
                         "directory with fit.json (and X.csv for dss)");
  select_cmd->add_option("--out", select_args.out,
                         "output directory (default --dir)");
  select_cmd->add_option("--method", select_args.method, "threshold or dss")
      ->check(CLI::IsMember({"threshold", "dss"}));
  select_cmd->add_option("--threshold", select_args.threshold,
                         "inclusion-probability cut");
  select_cmd->add_option("--folds", select_args.folds, "cross-validation folds");
  select_cmd->add_option("--lambda", select_args.lambdas,
                         "explicit penalty grid (repeatable)");
  select_cmd->add_flag("--exempt-intercept", select_args.exempt_intercept,
                       "leave the intercept unpenalized in dss");
  select_cmd->callback([&] { run_select(select_args); });

  BenchmarkArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand(
      "benchmark", "replicated simulate-fit-score comparison");
  bench_cmd->add_option("--out", bench_args.out, "output directory");
  bench_cmd->add_option("--scenarios", bench_args.scenarios,
                        "comma list, ranges allowed (main_G0..main_G4)");
  bench_cmd->add_option("--n", bench_args.n, "observations");
  bench_cmd->add_option("--p", bench_args.p, "covariates");
  bench_cmd->add_option("--p0", bench_args.p0, "true nonzero covariates");
  bench_cmd->add_option("--replicates", bench_args.replicates,
                        "replicates per scenario");
  bench_cmd->add_option("--engines", bench_args.engines, "vb, gibbs, or both")
      ->check(CLI::IsMember({"vb", "gibbs", "both"}));
  bench_cmd->add_option("--task", bench_args.task, "linear or probit")
      ->check(CLI::IsMember({"linear", "probit"}));
  bench_cmd->add_option("--seed", bench_args.seed, "base RNG seed");
  bench_cmd->add_option("--config", bench_args.config,
                        "JSON config (v,q,a,b,s0_sq,B,bn,thin,seed,eps,max_iter)");
  CLI::Option* bench_b = bench_cmd->add_option(
      "--B", bench_args.settings.gibbs.B, "Gibbs iterations");
  CLI::Option* bench_bn = bench_cmd->add_option(
      "--bn", bench_args.settings.gibbs.bn, "Gibbs burn-in");
  CLI::Option* bench_eps = bench_cmd->add_option(
      "--eps", bench_args.settings.vb.eps, "CAVI stopping tolerance");
  CLI::Option* bench_max_iter = bench_cmd->add_option(
      "--max-iter", bench_args.settings.vb.max_iter, "CAVI sweep cap");
  bench_cmd->callback([&] {
    FitSettings defaults;
    const FitSettings flag_values = bench_args.settings;
    bench_args.settings = defaults;
    if (!bench_args.config.empty()) {
      apply_config_file(bench_args.config, bench_args.settings);
    }
    if (bench_b->count()) bench_args.settings.gibbs.B = flag_values.gibbs.B;
    if (bench_bn->count()) bench_args.settings.gibbs.bn = flag_values.gibbs.bn;
    if (bench_eps->count()) bench_args.settings.vb.eps = flag_values.vb.eps;
    if (bench_max_iter->count()) {
      bench_args.settings.vb.max_iter = flag_values.vb.max_iter;
    }
    run_benchmark(bench_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 0;
}
