#include "riskrfe/simlab.hpp"

#include <cmath>
#include <random>

namespace riskrfe {

void SimulationScenario::validate() const {
  if (d < 1) throw ValidationError("scenario d must be positive");
  if (d0 < 1 || d0 > d) throw ValidationError("scenario d0 must lie in [1, d]");
  if (n < 1) throw ValidationError("scenario n must be positive");
  if (replications < 1) throw ValidationError("scenario needs at least one replication");
  if (coefficient_pool.empty()) throw ValidationError("empty coefficient pool");
  for (double c : coefficient_pool)
    if (c == 0.0 || !std::isfinite(c)) throw ValidationError("coefficient pool must not contain zero");
  if (!(noise_scale >= 0.0)) throw ValidationError("noise scale must be nonnegative");
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be nonnegative");
}

namespace {

std::mt19937_64 replication_engine(const SimulationScenario& s, Index replication) {
  return std::mt19937_64(derive_seed({s.seed, "replication"}, static_cast<std::uint64_t>(replication)));
}

Vector draw_coefficients(const SimulationScenario& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, s.coefficient_pool.size() - 1);
  Vector w = Vector::Zero(s.d);
  for (Index j = 0; j < s.d0; ++j) w[j] = s.coefficient_pool[pick(rng)];
  return w;
}

Matrix draw_features(const SimulationScenario& s, const Vector& w, std::mt19937_64& rng,
                     bool avoid_zero_margin) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix X(s.n, s.d);
  for (Index i = 0; i < s.n; ++i) {
    do {
      for (Index j = 0; j < s.d; ++j) X(i, j) = unif(rng);
    } while (avoid_zero_margin && X.row(i).dot(w) == 0.0);
  }
  return X;
}

}  // namespace

Vector scenario_coefficients(const SimulationScenario& scenario, Index replication) {
  scenario.validate();
  auto rng = replication_engine(scenario, replication);
  return draw_coefficients(scenario, rng);
}

Dataset generate_classification(const SimulationScenario& scenario, Index replication) {
  scenario.validate();
  if (scenario.task != Task::Classification) throw ValidationError("scenario is not a classification task");
  auto rng = replication_engine(scenario, replication);
  const Vector w = draw_coefficients(scenario, rng);
  Matrix X = draw_features(scenario, w, rng, true);
  Vector y = (X * w).unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
  return Dataset(std::move(X), std::move(y), Task::Classification);
}

Dataset generate_regression(const SimulationScenario& scenario, Index replication) {
  scenario.validate();
  if (scenario.task != Task::Regression) throw ValidationError("scenario is not a regression task");
  auto rng = replication_engine(scenario, replication);
  const Vector w = draw_coefficients(scenario, rng);
  Matrix X = draw_features(scenario, w, rng, false);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y = X * w;
  for (Index i = 0; i < scenario.n; ++i) y[i] += scenario.noise_scale * normal(rng);
  return Dataset(std::move(X), std::move(y), Task::Regression);
}

Dataset generate(const SimulationScenario& scenario, Index replication) {
  return scenario.task == Task::Classification ? generate_classification(scenario, replication)
                                               : generate_regression(scenario, replication);
}

ErrorCount count_errors(const Ranking& ranking, Index d0) {
  const auto d = static_cast<Index>(ranking.importance_rank.size());
  if (d0 < 1 || d0 > d) throw ValidationError("d0 must lie in [1, d]");
  Index first_important = d;
  for (Index f = 0; f < d0; ++f)
    first_important = std::min(first_important, ranking.importance_rank[static_cast<std::size_t>(f)]);
  ErrorCount out;
  for (Index f = d0; f < d; ++f)
    if (ranking.importance_rank[static_cast<std::size_t>(f)] > first_important) ++out.errors;
  out.cls = out.errors == 0 ? ErrorClass::None : out.errors == 1 ? ErrorClass::One : ErrorClass::Many;
  return out;
}

void ErrorTally::add(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::None: ++none_count; break;
    case ErrorClass::One: ++one_count; break;
    case ErrorClass::Many: ++many_count; break;
  }
  ++replications;
}

double ErrorTally::none_proportion() const {
  return replications ? static_cast<double>(none_count) / static_cast<double>(replications) : 0.0;
}
double ErrorTally::one_proportion() const {
  return replications ? static_cast<double>(one_count) / static_cast<double>(replications) : 0.0;
}
double ErrorTally::many_proportion() const {
  return replications ? static_cast<double>(many_count) / static_cast<double>(replications) : 0.0;
}

LossSpec scenario_loss(const SimulationScenario& scenario, const ScenarioTemplate& tmpl) {
  if (tmpl.loss) return *tmpl.loss;
  if (scenario.task == Task::Classification) return LossSpec::hinge();
  if (tmpl.learner == LearnerKind::LinearErm) return LossSpec::squared_error();
  return LossSpec::epsilon_insensitive(scenario.epsilon);
}

ReplicationRecord run_replication(const SimulationScenario& scenario, const ScenarioTemplate& tmpl,
                                  Index replication) {
  const Dataset data = generate(scenario, replication);
  const LossSpec loss = scenario_loss(scenario, tmpl);

  ReplicationRecord rec;
  rec.replication = replication;
  rec.data_seed = derive_seed({scenario.seed, "replication"}, static_cast<std::uint64_t>(replication));

  RunConfig config;
  config.loss = loss;
  config.learner = tmpl.learner;
  config.cycle_size = tmpl.cycle_size;
  config.stopping = RankAll{};
  config.seed = scenario.seed;
  config.solver_tolerance = tmpl.solver.tolerance;
  config.max_solver_iterations = tmpl.solver.max_iterations;
  config.use_bias = tmpl.solver.use_bias;

  if (tmpl.learner == LearnerKind::KernelMachine) {
    const bool gaussian = tmpl.kernel == KernelFamily::Gaussian;
    if (tmpl.fixed_lambda && (!gaussian || tmpl.fixed_gamma)) {
      rec.lambda = *tmpl.fixed_lambda;
      if (gaussian) rec.gamma = tmpl.fixed_gamma;
    } else {
      CvConfig cv = tmpl.cv;
      cv.seed = derive_seed({scenario.seed, "fold"}, static_cast<std::uint64_t>(replication));
      const auto tuned = cross_validate(data, tmpl.kernel, loss, cv, tmpl.solver);
      rec.lambda = tuned.lambda;
      rec.gamma = tuned.gamma;
    }
    config.lambda = rec.lambda;
    config.kernel = gaussian ? KernelSpec::gaussian(*rec.gamma) : KernelSpec::linear();
  }

  const auto result = run_rfe(data, config);
  rec.order = result.ranking.order;
  rec.errors = count_errors(result.ranking, scenario.d0);
  for (const auto& c : result.trace.cycles) rec.nonconverged_warning |= c.nonconverged_warning;
  return rec;
}

ScenarioResult run_scenario(const SimulationScenario& scenario, const ScenarioTemplate& tmpl,
                            unsigned threads, const std::atomic<bool>* cancel) {
  scenario.validate();
  std::vector<std::optional<ReplicationRecord>> slots(static_cast<std::size_t>(scenario.replications));
  parallel_for(scenario.replications, threads, [&](Index r) {
    if (cancel && cancel->load()) return;
    slots[static_cast<std::size_t>(r)] = run_replication(scenario, tmpl, r);
  });

  ScenarioResult result;
  for (auto& slot : slots) {
    if (!slot) {
      result.interrupted = true;
      continue;
    }
    result.tally.add(slot->errors.cls);
    result.records.push_back(std::move(*slot));
  }
  return result;
}

}  // namespace riskrfe
