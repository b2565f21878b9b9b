#pragma once

#include <atomic>
#include <optional>

#include "riskrfe/core.hpp"
#include "riskrfe/rfe.hpp"
#include "riskrfe/tuning.hpp"

namespace riskrfe {

/// Synthetic sparse-linear problems: X ~ U[-1,1]^d, the first d0 coefficients
/// drawn from coefficient_pool, the rest zero.
struct SimulationScenario {
  Index d = 15;
  Index d0 = 4;
  Index n = 100;
  Task task = Task::Classification;
  std::vector<double> coefficient_pool{-1.0, -0.5, 0.5, 1.0};
  double noise_scale = 1.0 / 3.0;
  Index replications = 100;
  std::uint64_t seed = 0;
  double epsilon = 0.1;

  void validate() const;
};

/// Y = sign(w'X); rows with w'X = 0 are redrawn.
Dataset generate_classification(const SimulationScenario& scenario, Index replication);

/// Y = w'X + noise_scale * z, one scalar z ~ N(0,1) per sample.
Dataset generate_regression(const SimulationScenario& scenario, Index replication);

Dataset generate(const SimulationScenario& scenario, Index replication);

/// The coefficient vector used for the given replication.
Vector scenario_coefficients(const SimulationScenario& scenario, Index replication);

enum class ErrorClass { None, One, Many };

struct ErrorCount {
  Index errors = 0;
  ErrorClass cls = ErrorClass::None;
};

/// Counts unimportant features (index >= d0) removed after the first
/// important feature was removed.
ErrorCount count_errors(const Ranking& ranking, Index d0);

struct ErrorTally {
  Index none_count = 0;
  Index one_count = 0;
  Index many_count = 0;
  Index replications = 0;

  void add(ErrorClass cls);
  double none_proportion() const;
  double one_proportion() const;
  double many_proportion() const;
};

/// What a replication runs after data generation.
struct ScenarioTemplate {
  LearnerKind learner = LearnerKind::KernelMachine;
  KernelFamily kernel = KernelFamily::Gaussian;
  /// Hinge for classification; epsilon-insensitive (scenario epsilon) when unset for regression.
  std::optional<LossSpec> loss;
  CvConfig cv;
  SolverOptions solver;
  Index cycle_size = 1;
  /// Skip cross-validation when both (or lambda alone, for linear) are set.
  std::optional<double> fixed_lambda;
  std::optional<double> fixed_gamma;
};

struct ReplicationRecord {
  Index replication = 0;
  std::uint64_t data_seed = 0;
  double lambda = 0.0;
  std::optional<double> gamma;
  std::vector<Index> order;
  ErrorCount errors;
  bool nonconverged_warning = false;
};

struct ScenarioResult {
  ErrorTally tally;
  std::vector<ReplicationRecord> records;
  bool interrupted = false;
};

LossSpec scenario_loss(const SimulationScenario& scenario, const ScenarioTemplate& tmpl);

/// One replication: generate -> tune -> rank all -> count errors.
ReplicationRecord run_replication(const SimulationScenario& scenario, const ScenarioTemplate& tmpl,
                                  Index replication);

/// Replications run independently (possibly in parallel); each is fully
/// determined by (scenario.seed, replication). Setting `cancel` stops new
/// replications from starting; completed ones are kept and counted.
ScenarioResult run_scenario(const SimulationScenario& scenario, const ScenarioTemplate& tmpl,
                            unsigned threads = 1, const std::atomic<bool>* cancel = nullptr);

}  // namespace riskrfe
