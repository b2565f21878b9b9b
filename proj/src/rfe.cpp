#include "riskrfe/rfe.hpp"

#include <algorithm>

namespace riskrfe {

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ThresholdExceeded: return "threshold_exceeded";
    case StopReason::AllRemoved: return "all_removed";
    case StopReason::RuleRankAll: return "rank_all";
  }
  return "rank_all";
}

StopReason stop_reason_from_string(const std::string& name) {
  if (name == "threshold_exceeded") return StopReason::ThresholdExceeded;
  if (name == "all_removed") return StopReason::AllRemoved;
  if (name == "rank_all") return StopReason::RuleRankAll;
  throw ValidationError("unknown stop reason '" + name + "'");
}

void RunConfig::validate(const Dataset& dataset) const {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (!(solver_tolerance > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (max_solver_iterations < 1) throw ValidationError("max solver iterations must be positive");
  if (cycle_size < 1 || cycle_size > dataset.d())
    throw ValidationError("cycle size must lie in [1, d]");
  if (learner == LearnerKind::LinearErm) {
    if (dataset.task() != Task::Regression)
      throw ValidationError("the linear ERM learner requires a regression dataset");
    return;
  }
  const bool hinge = std::holds_alternative<Hinge>(loss.variant());
  if (dataset.task() == Task::Classification && !hinge)
    throw ValidationError("classification requires the hinge loss");
  if (dataset.task() == Task::Regression && hinge)
    throw ValidationError("regression requires squared or epsilon-insensitive loss");
  if (auto w = std::get_if<WeightedGaussian>(&kernel.variant()); w && w->weights.size() != dataset.d())
    throw ValidationError("kernel weight count does not match d");
}

namespace {

CandidateObjective from_solution(const KernelSolution& sol) {
  return {sol.objective, sol.converged, sol.dual_variables};
}

}  // namespace

CandidateObjective evaluate_mask(const Dataset& dataset, const RunConfig& config,
                                 const FeatureMask& mask) {
  if (config.learner == LearnerKind::LinearErm) {
    const auto model = fit_linear_erm(dataset, mask);
    return {ObjectiveValue::make(0.0, 0.0, model.empirical_risk), true, Vector()};
  }
  const Matrix gram = gram_matrix(config.kernel, mask, dataset.features());
  return from_solution(
      fit_gram(gram, dataset.targets(), config.loss, config.lambda, config.solver_options()));
}

CandidateMap evaluate_candidates(const Dataset& dataset, const RunConfig& config,
                                 const FeatureMask& current_mask, const Vector& warm_start) {
  const auto active = current_mask.active();
  if (active.empty()) throw ValidationError("no active features left to evaluate");

  // The linear kernel's projected Gram loses exactly x_f x_f^T per masked feature.
  Matrix base_gram;
  const bool downdate = config.learner == LearnerKind::KernelMachine && config.kernel.is_linear();
  if (downdate) base_gram = gram_matrix(config.kernel, current_mask, dataset.features());

  SolverOptions options = config.solver_options();
  options.warm_start = warm_start;

  std::vector<CandidateObjective> slots(active.size());
  parallel_for(static_cast<Index>(active.size()), config.threads, [&](Index k) {
    const Index feature = active[static_cast<std::size_t>(k)];
    if (downdate) {
      const Matrix gram = linear_gram_without(base_gram, dataset.features(), feature);
      slots[static_cast<std::size_t>(k)] =
          from_solution(fit_gram(gram, dataset.targets(), config.loss, config.lambda, options));
    } else if (config.learner == LearnerKind::KernelMachine) {
      const Matrix gram = gram_matrix(config.kernel, current_mask.with_removed(feature), dataset.features());
      slots[static_cast<std::size_t>(k)] =
          from_solution(fit_gram(gram, dataset.targets(), config.loss, config.lambda, options));
    } else {
      slots[static_cast<std::size_t>(k)] =
          evaluate_mask(dataset, config, current_mask.with_removed(feature));
    }
  });

  CandidateMap out;
  for (std::size_t k = 0; k < active.size(); ++k) out.emplace(active[k], slots[k]);
  return out;
}

StepResult rfe_step(const CandidateMap& candidates, const ObjectiveValue& objective_before,
                    Index cycle_size) {
  if (candidates.empty()) throw ValidationError("rfe_step needs at least one candidate");
  if (cycle_size < 1) throw ValidationError("cycle size must be positive");
  std::vector<std::pair<double, Index>> ranked;
  ranked.reserve(candidates.size());
  for (const auto& [feature, cand] : candidates) ranked.emplace_back(cand.objective.regularized, feature);
  std::sort(ranked.begin(), ranked.end());

  StepResult step;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(cycle_size), ranked.size());
  for (std::size_t k = 0; k < take; ++k) step.removed.push_back(ranked[k].second);
  step.best_delta = ranked.front().first - objective_before.regularized;
  return step;
}

Ranking make_ranking(const RfeTrace& trace) {
  const Index d = trace.final_mask.d();
  Ranking ranking;
  for (const auto& cycle : trace.cycles)
    ranking.order.insert(ranking.order.end(), cycle.removed.begin(), cycle.removed.end());

  auto survivors = trace.final_mask.active();
  if (!survivors.empty()) {
    ranking.survivors_extended = true;
    const CandidateMap* last = trace.cycles.empty() ? nullptr : &trace.cycles.back().candidates;
    auto key = [&](Index f) {
      if (last) {
        if (auto it = last->find(f); it != last->end()) return it->second.objective.regularized;
      }
      return 0.0;
    };
    std::stable_sort(survivors.begin(), survivors.end(),
                     [&](Index a, Index b) { return key(a) < key(b); });
    ranking.order.insert(ranking.order.end(), survivors.begin(), survivors.end());
  }

  if (static_cast<Index>(ranking.order.size()) != d)
    throw Error("internal error: ranking is not a permutation");
  ranking.importance_rank.assign(static_cast<std::size_t>(d), 0);
  for (std::size_t p = 0; p < ranking.order.size(); ++p)
    ranking.importance_rank[static_cast<std::size_t>(ranking.order[p])] = static_cast<Index>(p);
  return ranking;
}

RfeResult run_rfe(const Dataset& dataset, const RunConfig& config) {
  config.validate(dataset);
  const bool in_loop = config.stopping.is_in_loop();

  RfeResult result;
  RfeTrace& trace = result.trace;
  if (in_loop) trace.threshold = stopping_threshold(config.stopping, dataset.n());

  FeatureMask mask(dataset.d());
  CandidateObjective before = evaluate_mask(dataset, config, mask);
  for (Index cycle = 0; mask.active_count() > 0; ++cycle) {
    CycleRecord rec;
    rec.cycle_index = cycle;
    rec.candidates = evaluate_candidates(dataset, config, mask, before.dual_variables);
    rec.objective_before = before.objective;
    rec.before_converged = before.converged;
    rec.nonconverged_warning = !before.converged;
    for (const auto& [f, c] : rec.candidates) rec.nonconverged_warning |= !c.converged;

    const auto step = rfe_step(rec.candidates, before.objective, config.cycle_size);
    rec.best_delta = step.best_delta;
    if (in_loop && should_stop(config.stopping, step.best_delta, dataset.n())) {
      trace.cycles.push_back(std::move(rec));
      trace.stopped_early = true;
      trace.stop_reason = StopReason::ThresholdExceeded;
      break;
    }

    rec.removed = step.removed;
    mask = mask.with_removed(std::span<const Index>(step.removed));
    before = step.removed.size() == 1 ? rec.candidates.at(step.removed.front())
                                      : evaluate_mask(dataset, config, mask);
    for (auto& [f, c] : rec.candidates) c.dual_variables = Vector();
    trace.cycles.push_back(std::move(rec));
  }
  if (!trace.stopped_early) trace.stop_reason = in_loop ? StopReason::AllRemoved : StopReason::RuleRankAll;
  trace.final_mask = mask;
  result.ranking = make_ranking(trace);
  return result;
}

}  // namespace riskrfe
