#include "riskrfe/io.hpp"

#include <cstdio>

#include "riskrfe/scree.hpp"

namespace riskrfe {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void to_json(json& j, const FeatureMask& mask) {
  j = json{{"d", mask.d()}, {"removed", mask.removed()}};
}

void from_json(const json& j, FeatureMask& mask) {
  mask = FeatureMask(j.at("d").get<Index>(), j.at("removed").get<std::vector<Index>>());
}

void to_json(json& j, const ObjectiveValue& v) {
  j = json{{"empirical_risk", v.empirical_risk},
           {"rkhs_norm_sq", v.rkhs_norm_sq},
           {"regularized", v.regularized}};
}

void from_json(const json& j, ObjectiveValue& v) {
  v.empirical_risk = j.at("empirical_risk").get<double>();
  v.rkhs_norm_sq = j.at("rkhs_norm_sq").get<double>();
  v.regularized = j.at("regularized").get<double>();
}

void to_json(json& j, const KernelSpec& spec) {
  j = json{{"type", spec.name()}};
  if (auto g = std::get_if<GaussianRbf>(&spec.variant())) j["gamma"] = g->gamma;
  if (auto w = std::get_if<WeightedGaussian>(&spec.variant())) {
    j["gamma"] = w->gamma;
    j["weights"] = std::vector<double>(w->weights.begin(), w->weights.end());
  }
}

void from_json(const json& j, KernelSpec& spec) {
  const auto type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    spec = KernelSpec::gaussian(j.at("gamma").get<double>());
  } else if (type == "linear") {
    spec = KernelSpec::linear();
  } else if (type == "weighted-gaussian") {
    const auto w = j.at("weights").get<std::vector<double>>();
    spec = KernelSpec::weighted_gaussian(j.at("gamma").get<double>(),
                                         Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size())));
  } else {
    throw ValidationError("unknown kernel type '" + type + "'");
  }
}

void to_json(json& j, const LossSpec& spec) {
  j = json{{"type", spec.name()}};
  if (std::holds_alternative<EpsilonInsensitive>(spec.variant())) j["epsilon"] = spec.epsilon();
}

void from_json(const json& j, LossSpec& spec) {
  const auto type = j.at("type").get<std::string>();
  if (type == "hinge") spec = LossSpec::hinge();
  else if (type == "squared") spec = LossSpec::squared_error();
  else if (type == "epsilon-insensitive") spec = LossSpec::epsilon_insensitive(j.value("epsilon", 0.1));
  else throw ValidationError("unknown loss type '" + type + "'");
}

void to_json(json& j, const StoppingRule& rule) {
  j = json{{"type", rule.name()}};
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FixedThreshold>) j["delta"] = r.delta;
        else if constexpr (std::is_same_v<R, ErmRate>) j["c"] = r.c;
        else if constexpr (std::is_same_v<R, SvmRate>) {
          j["c"] = r.c;
          j["beta"] = r.beta;
        } else if constexpr (std::is_same_v<R, ChangePoint>) {
          j["min_left"] = r.min_left;
          j["min_right"] = r.min_right;
        }
      },
      rule.variant());
}

void to_json(json& j, const CycleRecord& rec) {
  json cands = json::array();
  for (const auto& [feature, c] : rec.candidates)
    cands.push_back(json{{"feature", feature}, {"objective", c.objective}, {"converged", c.converged}});
  j = json{{"cycle_index", rec.cycle_index},
           {"removed", rec.removed},
           {"objective_before", rec.objective_before},
           {"before_converged", rec.before_converged},
           {"best_delta", rec.best_delta},
           {"nonconverged_warning", rec.nonconverged_warning},
           {"candidates", std::move(cands)}};
}

void from_json(const json& j, CycleRecord& rec) {
  rec.cycle_index = j.at("cycle_index").get<Index>();
  rec.removed = j.at("removed").get<std::vector<Index>>();
  rec.objective_before = j.at("objective_before").get<ObjectiveValue>();
  rec.before_converged = j.value("before_converged", true);
  rec.best_delta = j.at("best_delta").get<double>();
  rec.nonconverged_warning = j.value("nonconverged_warning", false);
  rec.candidates.clear();
  for (const auto& c : j.at("candidates"))
    rec.candidates.emplace(c.at("feature").get<Index>(),
                           CandidateObjective{c.at("objective").get<ObjectiveValue>(),
                                              c.value("converged", true), Vector()});
}

void to_json(json& j, const RfeTrace& trace) {
  j = json{{"index_base", 0},
           {"cycles", trace.cycles},
           {"final_mask", trace.final_mask},
           {"stopped_early", trace.stopped_early},
           {"stop_reason", to_string(trace.stop_reason)}};
  j["threshold"] = trace.threshold ? json(*trace.threshold) : json(nullptr);
}

void from_json(const json& j, RfeTrace& trace) {
  trace.cycles = j.at("cycles").get<std::vector<CycleRecord>>();
  trace.final_mask = j.at("final_mask").get<FeatureMask>();
  trace.stopped_early = j.at("stopped_early").get<bool>();
  trace.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
  if (j.contains("threshold") && !j.at("threshold").is_null()) trace.threshold = j.at("threshold").get<double>();
  else trace.threshold.reset();
}

void to_json(json& j, const Ranking& ranking) {
  j = json{{"index_base", 0},
           {"order", ranking.order},
           {"importance_rank", ranking.importance_rank},
           {"survivors_extended", ranking.survivors_extended}};
}

void to_json(json& j, const RegularizedModel& model) {
  j = json{{"index_base", 0},
           {"dual_coefficients", std::vector<double>(model.dual_coefficients.begin(), model.dual_coefficients.end())},
           {"bias", model.bias},
           {"mask", model.mask},
           {"lambda", model.lambda},
           {"kernel", model.kernel},
           {"loss", model.loss},
           {"objective", model.objective},
           {"converged", model.converged},
           {"iterations", model.iterations},
           {"max_violation", model.max_violation},
           {"singular_system", model.singular_system}};
}

void to_json(json& j, const LinearModel& model) {
  j = json{{"index_base", 0},
           {"weights", std::vector<double>(model.weights.begin(), model.weights.end())},
           {"bias", model.bias},
           {"mask", model.mask},
           {"empirical_risk", model.empirical_risk},
           {"rank_deficient", model.rank_deficient}};
}

void to_json(json& j, const ChangePointFit& fit) {
  json profile = json::array();
  for (const auto& [t, sse] : fit.sse_by_index) profile.push_back(json{{"index", t}, {"sse", sse}});
  j = json{{"index_base", 0},
           {"change_index", fit.change_index},
           {"left_coeffs", {fit.left_coeffs[0], fit.left_coeffs[1]}},
           {"right_coeffs", {fit.right_coeffs[0], fit.right_coeffs[1], fit.right_coeffs[2]}},
           {"sse", fit.sse},
           {"sse_by_index", std::move(profile)}};
}

void to_json(json& j, const CvResult& result) {
  j = json{{"lambda", result.lambda}, {"g", result.g}, {"best_score", result.best_score}};
  j["gamma"] = result.gamma ? json(*result.gamma) : json(nullptr);
}

void to_json(json& j, const Dataset& dataset) {
  json rows = json::array();
  for (Index i = 0; i < dataset.n(); ++i) {
    const auto r = dataset.features().row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j = json{{"task", to_string(dataset.task())},
           {"features", std::move(rows)},
           {"targets", std::vector<double>(dataset.targets().begin(), dataset.targets().end())},
           {"feature_names", dataset.feature_names()}};
}

void from_json(const json& j, Dataset& dataset) {
  const auto rows = j.at("features").get<std::vector<std::vector<double>>>();
  const auto targets = j.at("targets").get<std::vector<double>>();
  if (rows.empty()) throw ValidationError("empty dataset");
  Matrix X(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Index>(rows[i].size()) != X.cols()) throw ValidationError("ragged feature rows");
    for (std::size_t k = 0; k < rows[i].size(); ++k) X(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  }
  dataset = Dataset(std::move(X), Eigen::Map<const Vector>(targets.data(), static_cast<Index>(targets.size())),
                    task_from_string(j.at("task").get<std::string>()),
                    j.value("feature_names", std::vector<std::string>{}));
}

std::string scree_csv(const RfeTrace& trace) {
  std::string out = "cycle_index,objective_after,best_delta\n";
  if (trace.cycles.empty()) return out;
  const Vector scree = scree_values(trace);
  for (std::size_t k = 0; k < trace.cycles.size(); ++k) {
    const auto& cycle = trace.cycles[k];
    out += std::to_string(cycle.cycle_index) + "," + format_real(scree[static_cast<Index>(k)]) + "," +
           format_real(cycle.best_delta) + "\n";
  }
  return out;
}

std::string cv_table_csv(const CvResult& result) {
  std::string out = "g,gamma,lambda,mean_score";
  const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_scores.size();
  for (std::size_t f = 0; f < k; ++f) out += ",fold_" + std::to_string(f + 1);
  out += '\n';
  for (const auto& pt : result.table) {
    out += format_real(pt.g) + "," + (pt.gamma ? format_real(*pt.gamma) : std::string("NA")) + "," +
           format_real(pt.lambda) + "," + format_real(pt.mean_score);
    for (double s : pt.fold_scores) out += "," + format_real(s);
    out += '\n';
  }
  return out;
}

SimulationPlan parse_simulation_plan(const json& j) {
  try {
    SimulationPlan plan;
    plan.name = j.value("name", std::string("simulation"));
    plan.task = task_from_string(j.at("task").get<std::string>());

    for (const auto& s : j.at("settings"))
      plan.settings.emplace_back(s.at("d").get<Index>(), s.at("d0").get<Index>());
    plan.sample_sizes = j.at("sample_sizes").get<std::vector<Index>>();
    if (plan.settings.empty() || plan.sample_sizes.empty())
      throw ValidationError("simulation needs at least one setting and one sample size");

    auto& base = plan.base;
    base.task = plan.task;
    base.replications = j.value("replications", Index{100});
    base.seed = j.value("seed", std::uint64_t{0});
    base.epsilon = j.value("epsilon", 0.1);
    base.noise_scale = j.value("noise_scale", 1.0 / 3.0);
    if (j.contains("coefficient_pool")) base.coefficient_pool = j.at("coefficient_pool").get<std::vector<double>>();

    auto& m = plan.method;
    const auto learner = j.value("learner", std::string("kernel"));
    if (learner == "kernel") m.learner = LearnerKind::KernelMachine;
    else if (learner == "linear-erm") m.learner = LearnerKind::LinearErm;
    else throw ValidationError("unknown learner '" + learner + "'");
    m.kernel = kernel_family_from_string(
        j.value("kernel", std::string(plan.task == Task::Classification ? "gaussian" : "linear")));
    if (j.contains("loss")) {
      const auto loss = j.at("loss").get<std::string>();
      if (loss == "hinge") m.loss = LossSpec::hinge();
      else if (loss == "squared") m.loss = LossSpec::squared_error();
      else if (loss == "epsilon-insensitive") m.loss = LossSpec::epsilon_insensitive(base.epsilon);
      else throw ValidationError("unknown loss '" + loss + "'");
    }
    if (j.contains("cv")) {
      const auto& cv = j.at("cv");
      m.cv.folds = cv.value("folds", m.cv.folds);
      if (cv.contains("grid_c")) m.cv.grid_c = cv.at("grid_c").get<std::vector<double>>();
      if (cv.contains("grid_gamma")) m.cv.grid_gamma = cv.at("grid_gamma").get<std::vector<double>>();
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      m.solver.tolerance = s.value("tolerance", m.solver.tolerance);
      m.solver.max_iterations = s.value("max_iterations", m.solver.max_iterations);
      m.solver.use_bias = s.value("bias", m.solver.use_bias);
    }
    m.cycle_size = j.value("cycle_size", Index{1});
    if (j.contains("lambda")) m.fixed_lambda = j.at("lambda").get<double>();
    if (j.contains("gamma")) m.fixed_gamma = j.at("gamma").get<double>();

    for (const auto& [d, d0] : plan.settings) {
      SimulationScenario probe = base;
      probe.d = d;
      probe.d0 = d0;
      for (Index n : plan.sample_sizes) {
        probe.n = n;
        probe.validate();
      }
    }
    return plan;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed simulation file: ") + e.what());
  }
}

std::string table1_csv(const std::vector<Table1Cell>& cells) {
  std::string out = "metric";
  for (const auto& c : cells)
    out += ",d=" + std::to_string(c.d) + " d0=" + std::to_string(c.d0) + " n=" + std::to_string(c.n);
  out += '\n';
  auto row = [&](const char* label, auto proportion) {
    out += label;
    for (const auto& c : cells) out += "," + format_real(proportion(c.tally));
    out += '\n';
  };
  row("no_errors", [](const ErrorTally& t) { return t.none_proportion(); });
  row("one_error", [](const ErrorTally& t) { return t.one_proportion(); });
  row("more_than_one_error", [](const ErrorTally& t) { return t.many_proportion(); });
  return out;
}

json replication_archive(const SimulationPlan& plan, const std::vector<Table1Cell>& cells,
                         const std::vector<std::vector<ReplicationRecord>>& records, bool interrupted) {
  json out{{"name", plan.name}, {"index_base", 0}, {"task", to_string(plan.task)},
           {"interrupted", interrupted}, {"cells", json::array()}};
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& c = cells[k];
    json reps = json::array();
    if (k < records.size()) {
      for (const auto& r : records[k]) {
        json rec{{"replication", r.replication},
                 {"data_seed", r.data_seed},
                 {"lambda", r.lambda},
                 {"order", r.order},
                 {"errors", r.errors.errors},
                 {"nonconverged_warning", r.nonconverged_warning}};
        rec["gamma"] = r.gamma ? json(*r.gamma) : json(nullptr);
        reps.push_back(std::move(rec));
      }
    }
    out["cells"].push_back(json{{"d", c.d},
                                {"d0", c.d0},
                                {"n", c.n},
                                {"none", c.tally.none_count},
                                {"one", c.tally.one_count},
                                {"many", c.tally.many_count},
                                {"replications", c.tally.replications},
                                {"records", std::move(reps)}});
  }
  return out;
}

}  // namespace riskrfe
