// risk_rfe: command-line front end for risk-based recursive feature elimination.
//
// Exit codes: 0 success, 2 input/validation error, 3 numerical failure,
// 130 simulation interrupted (partial results written).

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "riskrfe/core.hpp"
#include "riskrfe/io.hpp"
#include "riskrfe/rfe.hpp"
#include "riskrfe/scree.hpp"
#include "riskrfe/simlab.hpp"
#include "riskrfe/stopping.hpp"
#include "riskrfe/tuning.hpp"
#include "scree_svg.hpp"

namespace fs = std::filesystem;
using namespace riskrfe;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInterrupted = 130;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct Options {
  std::string data;
  std::string task = "classification";
  std::string kernel = "gaussian";
  std::string loss;
  std::string learner = "kernel";
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::string params;
  double epsilon = 0.1;
  std::vector<double> grid_c{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> grid_gamma{1.0, 2.0, 3.0, 4.0};
  Index folds = 5;
  std::uint64_t seed = 0;
  Index cycle_size = 1;
  std::string rule = "fixed";
  std::optional<double> delta;
  double c = 1.0;
  double beta = 1.0;
  Index min_left = 2;
  Index min_right = 3;
  double tolerance = 1e-8;
  long max_iterations = 100000;
  bool no_bias = false;
  bool has_header = false;
  bool coerce_labels = false;
  bool force = false;
  bool strict = false;
  std::string out = ".";
  unsigned threads = 0;
};

unsigned threads_of(const Options& o) { return o.threads > 0 ? o.threads : default_thread_count(); }

void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files,
                   bool force) {
  fs::create_directories(dir);
  if (!force) {
    for (const auto& [name, body] : files) {
      if (fs::exists(dir / name))
        throw ValidationError("refusing to overwrite " + (dir / name).string() + " (use --force)");
    }
  }
  for (const auto& [name, body] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (dir / name).string());
    out << body;
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

Dataset load(const Options& o) {
  return load_dataset(o.data, {task_from_string(o.task), o.has_header, o.coerce_labels});
}

LossSpec loss_of(const Options& o, Task task) {
  std::string name = o.loss;
  if (name.empty()) name = task == Task::Classification ? "hinge" : "epsilon-insensitive";
  if (name == "hinge") return LossSpec::hinge();
  if (name == "squared") return LossSpec::squared_error();
  if (name == "epsilon-insensitive" || name == "epsilon") return LossSpec::epsilon_insensitive(o.epsilon);
  throw ValidationError("unknown loss '" + name + "'");
}

CvConfig cv_of(const Options& o) {
  if (o.folds < 2) throw ValidationError("--folds must be at least 2");
  CvConfig cv;
  cv.folds = o.folds;
  cv.grid_c = o.grid_c;
  cv.grid_gamma = o.grid_gamma;
  cv.seed = o.seed;
  return cv;
}

SolverOptions solver_of(const Options& o) { return {o.tolerance, o.max_iterations, !o.no_bias}; }

StoppingRule rule_of(const Options& o) {
  if (o.rule == "fixed") {
    if (!o.delta) throw ValidationError("--rule fixed requires --delta");
    return FixedThreshold{*o.delta};
  }
  if (o.rule == "erm-rate") return ErmRate{o.c};
  if (o.rule == "svm-rate") return SvmRate{o.c, o.beta};
  if (o.rule == "rank-all") return RankAll{};
  if (o.rule == "change-point") return ChangePoint{o.min_left, o.min_right};
  throw ValidationError("unknown rule '" + o.rule + "'");
}

// Resolves (lambda, gamma) from --params, explicit flags, or cross-validation.
RunConfig config_of(const Options& o, const Dataset& data) {
  RunConfig config;
  config.loss = loss_of(o, data.task());
  config.cycle_size = o.cycle_size;
  config.seed = o.seed;
  config.solver_tolerance = o.tolerance;
  config.max_solver_iterations = o.max_iterations;
  config.use_bias = !o.no_bias;
  config.threads = threads_of(o);
  if (o.learner == "linear-erm") {
    config.learner = LearnerKind::LinearErm;
    return config;
  }
  if (o.learner != "kernel") throw ValidationError("unknown learner '" + o.learner + "'");

  auto family = kernel_family_from_string(o.kernel);
  std::optional<double> lambda = o.lambda, gamma = o.gamma;
  if (!o.params.empty()) {
    const auto p = read_json_file(o.params);
    try {
      if (!lambda) lambda = p.at("lambda").get<double>();
      if (!gamma && p.contains("gamma") && !p.at("gamma").is_null()) gamma = p.at("gamma").get<double>();
      if (p.contains("kernel")) family = kernel_family_from_string(p.at("kernel").get<std::string>());
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed params file: ") + e.what());
    }
  }
  if (!lambda || (family == KernelFamily::Gaussian && !gamma)) {
    const auto tuned = cross_validate(data, family, config.loss, cv_of(o), solver_of(o), threads_of(o));
    if (!lambda) lambda = tuned.lambda;
    if (!gamma) gamma = tuned.gamma;
    std::cerr << "cross-validated lambda=" << *lambda;
    if (gamma) std::cerr << " gamma=" << *gamma;
    std::cerr << "\n";
  }
  config.lambda = *lambda;
  config.kernel = family == KernelFamily::Gaussian ? KernelSpec::gaussian(*gamma) : KernelSpec::linear();
  return config;
}

void check_convergence(const Options& o, const RfeTrace& trace) {
  bool warn = false;
  for (const auto& c : trace.cycles) warn |= c.nonconverged_warning;
  if (!warn) return;
  if (o.strict) throw NumericalError("solver did not reach the tolerance within --max-iter iterations");
  std::cerr << "warning: some fits hit the iteration cap; their objectives are flagged in the trace\n";
}

std::string one_based(const std::vector<Index>& features) {
  std::ostringstream s;
  for (std::size_t k = 0; k < features.size(); ++k) s << (k ? " " : "") << features[k] + 1;
  return s.str();
}

json run_summary(const RunConfig& config, Index n) {
  json j{{"kernel", config.kernel}, {"loss", config.loss}, {"lambda", config.lambda},
         {"cycle_size", config.cycle_size}, {"stopping", config.stopping}, {"n", n},
         {"learner", config.learner == LearnerKind::LinearErm ? "linear-erm" : "kernel"},
         {"bias", config.use_bias}, {"solver_tolerance", config.solver_tolerance}};
  return j;
}

int cmd_cv(const Options& o) {
  const Dataset data = load(o);
  const auto family = kernel_family_from_string(o.kernel);
  const LossSpec loss = loss_of(o, data.task());
  const auto result = cross_validate(data, family, loss, cv_of(o), solver_of(o), threads_of(o));
  json chosen = result;
  chosen["kernel"] = to_string(family);
  chosen["loss"] = loss;
  chosen["task"] = to_string(data.task());
  chosen["folds"] = o.folds;
  chosen["seed"] = o.seed;
  write_outputs(o.out, {{"cv_table.csv", cv_table_csv(result)}, {"chosen_params.json", dump(chosen)}}, o.force);
  std::cout << "lambda=" << format_real(result.lambda);
  if (result.gamma) std::cout << " gamma=" << format_real(*result.gamma);
  std::cout << " score=" << format_real(result.best_score) << "\n";
  return 0;
}

int cmd_rank(const Options& o) {
  const Dataset data = load(o);
  RunConfig config = config_of(o, data);
  config.stopping = RankAll{};
  const auto result = run_rfe(data, config);
  check_convergence(o, result.trace);

  json ranking = result.ranking;
  ranking["config"] = run_summary(config, data.n());
  ranking["survivor_order_note"] = "features never removed are ordered by their last candidate objective";
  json trace = result.trace;
  trace["config"] = run_summary(config, data.n());
  write_outputs(o.out,
                {{"ranking.json", dump(ranking)}, {"trace.json", dump(trace)}, {"scree.csv", scree_csv(result.trace)}},
                o.force);
  std::cout << "elimination order (1-based, first removed first): " << one_based(result.ranking.order) << "\n";
  return 0;
}

int cmd_select(const Options& o) {
  const Dataset data = load(o);
  RunConfig config = config_of(o, data);
  const StoppingRule rule = rule_of(o);
  json out{{"index_base", 0}, {"rule", rule}};

  std::vector<Index> retained, eliminated;
  if (const auto* cp = std::get_if<ChangePoint>(&rule.variant())) {
    if (data.d() < cp->min_left + cp->min_right)
      throw ValidationError("change-point selection needs d >= min_left + min_right");
    config.stopping = RankAll{};
    const auto result = run_rfe(data, config);
    check_convergence(o, result.trace);
    const auto sel = select_by_change_point(result.trace, cp->min_left, cp->min_right);
    retained = sel.retained;
    eliminated = sel.eliminated.removed();
    out["change_point"] = sel.fit;
    out["change_cycle_rule"] = "features removed in cycles 0..change_index are eliminated";
    out["trace"] = result.trace;
  } else if (rule.is_in_loop()) {
    config.stopping = rule;
    const auto result = run_rfe(data, config);
    check_convergence(o, result.trace);
    retained = result.trace.final_mask.active();
    eliminated = result.trace.final_mask.removed();
    out["threshold"] = *result.trace.threshold;
    out["stopped_early"] = result.trace.stopped_early;
    out["stop_reason"] = to_string(result.trace.stop_reason);
    out["trace"] = result.trace;
  } else {
    throw ValidationError("select needs --rule fixed, erm-rate, svm-rate or change-point");
  }
  out["retained"] = retained;
  out["eliminated"] = eliminated;
  out["config"] = run_summary(config, data.n());
  write_outputs(o.out, {{"selected_features.json", dump(out)}}, o.force);
  std::cout << "retained features (1-based): " << one_based(retained) << "\n";
  return 0;
}

int cmd_simulate(const Options& o, const std::string& scenario_path) {
  const auto plan = parse_simulation_plan(read_json_file(scenario_path));
  std::signal(SIGINT, on_sigint);

  std::vector<Table1Cell> cells;
  std::vector<std::vector<ReplicationRecord>> records;
  bool interrupted = false;
  for (const auto& [d, d0] : plan.settings) {
    for (Index n : plan.sample_sizes) {
      if (g_interrupted.load()) {
        interrupted = true;
        break;
      }
      SimulationScenario scenario = plan.base;
      scenario.d = d;
      scenario.d0 = d0;
      scenario.n = n;
      const auto result = run_scenario(scenario, plan.method, threads_of(o), &g_interrupted);
      cells.push_back({d, d0, n, result.tally});
      records.push_back(result.records);
      interrupted |= result.interrupted;
      std::cerr << "d=" << d << " d0=" << d0 << " n=" << n << ": none=" << result.tally.none_count
                << " one=" << result.tally.one_count << " many=" << result.tally.many_count << "\n";
    }
  }
  write_outputs(o.out,
                {{"table1.csv", table1_csv(cells)},
                 {"archive.json", dump(replication_archive(plan, cells, records, interrupted))}},
                o.force);
  return interrupted ? kExitInterrupted : 0;
}

int cmd_scree(const Options& o, const std::string& trace_path) {
  RfeTrace trace;
  try {
    trace = read_json_file(trace_path).get<RfeTrace>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed trace file: ") + e.what());
  }
  const Vector scree = scree_values(trace);
  const auto fit = fit_change_point(scree, o.min_left, o.min_right);
  json report = fit;
  report["retained"] = change_point_mask(trace, fit.change_index).active();
  write_outputs(o.out,
                {{"scree.svg", tools::render_scree_svg(scree, fit, "Reverse scree graph")},
                 {"changepoint.json", dump(report)}},
                o.force);
  std::cout << "change point at cycle " << fit.change_index << " (0-based), sse=" << format_real(fit.sse) << "\n";
  return 0;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output directory (created if absent)");
  cmd->add_flag("--force", o.force, "Overwrite existing result files");
  cmd->add_option("--threads", o.threads, "Worker threads (default: RISK_RFE_THREADS or 1)");
}

void add_data(CLI::App* cmd, Options& o) {
  cmd->add_option("data", o.data, "Target-last CSV file")->required();
  cmd->add_option("--task", o.task, "classification | regression");
  cmd->add_flag("--has-header", o.has_header, "First CSV row is a header");
  cmd->add_flag("--coerce-labels", o.coerce_labels, "Map {0,1} class labels to {-1,+1}");
}

void add_model(CLI::App* cmd, Options& o) {
  cmd->add_option("--kernel", o.kernel, "gaussian | linear");
  cmd->add_option("--loss", o.loss, "hinge | squared | epsilon-insensitive");
  cmd->add_option("--learner", o.learner, "kernel | linear-erm");
  cmd->add_option("--gamma", o.gamma, "Gaussian kernel width");
  cmd->add_option("--lambda", o.lambda, "Regularization constant");
  cmd->add_option("--params", o.params, "chosen_params.json from the cv command");
  cmd->add_option("--epsilon", o.epsilon, "Epsilon of the epsilon-insensitive loss");
  cmd->add_option("--grid-c", o.grid_c, "Grid of g = 2/(n lambda)")->delimiter(',')->allow_extra_args(false);
  cmd->add_option("--grid-gamma", o.grid_gamma, "Grid of kernel widths")->delimiter(',')->allow_extra_args(false);
  cmd->add_option("--folds", o.folds, "Cross-validation folds");
  cmd->add_option("--seed", o.seed, "Seed for fold assignment");
  cmd->add_option("--cycle-size", o.cycle_size, "Features removed per cycle");
  cmd->add_option("--tol", o.tolerance, "Solver KKT tolerance");
  cmd->add_option("--max-iter", o.max_iterations, "Solver iteration cap");
  cmd->add_flag("--no-bias", o.no_bias, "Fit without an offset term");
  cmd->add_flag("--strict", o.strict, "Treat solver non-convergence as a failure (exit 3)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-based recursive feature elimination for kernel machines and least squares"};
  app.require_subcommand(1);
  Options o;
  std::string scenario_path, trace_path;

  auto* cv = app.add_subcommand("cv", "Cross-validate (lambda, gamma) over the grid");
  add_data(cv, o);
  add_model(cv, o);
  add_common(cv, o);

  auto* rank = app.add_subcommand("rank", "Rank all features by risk-based elimination");
  add_data(rank, o);
  add_model(rank, o);
  add_common(rank, o);

  auto* select = app.add_subcommand("select", "Select features with a stopping rule");
  add_data(select, o);
  add_model(select, o);
  add_common(select, o);
  select->add_option("--rule", o.rule, "fixed | erm-rate | svm-rate | change-point");
  select->add_option("--delta", o.delta, "Threshold for --rule fixed");
  select->add_option("--c", o.c, "Rate constant c");
  select->add_option("--beta", o.beta, "Exponent beta for --rule svm-rate");
  select->add_option("--min-left", o.min_left, "Change point: minimum left segment length");
  select->add_option("--min-right", o.min_right, "Change point: minimum right segment length");

  auto* simulate = app.add_subcommand("simulate", "Run a simulation plan and tabulate ranking accuracy");
  simulate->add_option("scenario", scenario_path, "Simulation plan JSON")->required();
  add_common(simulate, o);

  auto* scree = app.add_subcommand("scree", "Change-point analysis and SVG of a trace's scree");
  scree->add_option("trace", trace_path, "trace.json from rank")->required();
  scree->add_option("--min-left", o.min_left, "Minimum left segment length");
  scree->add_option("--min-right", o.min_right, "Minimum right segment length");
  add_common(scree, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*cv) return cmd_cv(o);
    if (*rank) return cmd_rank(o);
    if (*select) return cmd_select(o);
    if (*simulate) return cmd_simulate(o, scenario_path);
    if (*scree) return cmd_scree(o, trace_path);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitValidation;
}
