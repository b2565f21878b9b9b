#pragma once

#include <map>
#include <optional>

#include "riskrfe/core.hpp"
#include "riskrfe/kernels.hpp"
#include "riskrfe/learner.hpp"
#include "riskrfe/stopping.hpp"

namespace riskrfe {

enum class LearnerKind {
  /// Regularized kernel machine; compares lambda ||f||^2 + R_{L,D}(f).
  KernelMachine,
  /// Unregularized linear least squares; compares R_{L,D}(f) = RSS / n.
  LinearErm,
};

struct RunConfig {
  KernelSpec kernel = KernelSpec::linear();
  LossSpec loss = LossSpec::hinge();
  double lambda = 1.0;
  Index cycle_size = 1;
  StoppingRule stopping = RankAll{};
  std::uint64_t seed = 0;
  double solver_tolerance = 1e-8;
  long max_solver_iterations = 100000;
  bool use_bias = true;
  LearnerKind learner = LearnerKind::KernelMachine;
  unsigned threads = 1;

  void validate(const Dataset& dataset) const;
  SolverOptions solver_options() const {
    return {solver_tolerance, max_solver_iterations, use_bias, {}};
  }
};

struct CandidateObjective {
  ObjectiveValue objective;
  bool converged = true;
  Vector dual_variables;  // dual solution, kept in memory only; empty for ridge and least squares
};

using CandidateMap = std::map<Index, CandidateObjective>;

struct CycleRecord {
  Index cycle_index = 0;
  CandidateMap candidates;
  std::vector<Index> removed;
  ObjectiveValue objective_before;
  bool before_converged = true;
  double best_delta = 0.0;
  /// Some fit in this cycle hit the iteration cap.
  bool nonconverged_warning = false;
};

enum class StopReason { ThresholdExceeded, AllRemoved, RuleRankAll };

std::string to_string(StopReason reason);
StopReason stop_reason_from_string(const std::string& name);

struct RfeTrace {
  std::vector<CycleRecord> cycles;
  FeatureMask final_mask;
  bool stopped_early = false;
  StopReason stop_reason = StopReason::RuleRankAll;
  /// Threshold used by in-loop rules.
  std::optional<double> threshold;
};

struct Ranking {
  /// Earliest-removed first; survivors last, least important first.
  std::vector<Index> order;
  /// importance_rank[f] = position of f in order (higher = more important).
  std::vector<Index> importance_rank;
  /// Survivors exist and were ordered by their last candidate objectives.
  bool survivors_extended = false;
};

/// Objective of the current model for the given mask.
CandidateObjective evaluate_mask(const Dataset& dataset, const RunConfig& config,
                                 const FeatureMask& mask);

/// Refits with each active feature additionally removed.
/// `warm_start` is the dual solution of the current mask (see SolverOptions).
CandidateMap evaluate_candidates(const Dataset& dataset, const RunConfig& config,
                                 const FeatureMask& current_mask, const Vector& warm_start = {});

struct StepResult {
  std::vector<Index> removed;
  double best_delta = 0.0;
};

/// Removes the min(cycle_size, |candidates|) smallest candidates by regularized
/// objective, ties to the lowest feature index.
StepResult rfe_step(const CandidateMap& candidates, const ObjectiveValue& objective_before,
                    Index cycle_size);

Ranking make_ranking(const RfeTrace& trace);

struct RfeResult {
  RfeTrace trace;
  Ranking ranking;
};

RfeResult run_rfe(const Dataset& dataset, const RunConfig& config);

}  // namespace riskrfe
