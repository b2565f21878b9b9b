#pragma once

#include <json.hpp>

#include "riskrfe/core.hpp"
#include "riskrfe/learner.hpp"
#include "riskrfe/rfe.hpp"
#include "riskrfe/simlab.hpp"
#include "riskrfe/stopping.hpp"
#include "riskrfe/tuning.hpp"

namespace riskrfe {

using json = nlohmann::json;

// Machine JSON uses 0-based feature indices; top-level documents carry
// "index_base": 0.

void to_json(json& j, const FeatureMask& mask);
void from_json(const json& j, FeatureMask& mask);
void to_json(json& j, const ObjectiveValue& v);
void from_json(const json& j, ObjectiveValue& v);
void to_json(json& j, const KernelSpec& spec);
void from_json(const json& j, KernelSpec& spec);
void to_json(json& j, const LossSpec& spec);
void from_json(const json& j, LossSpec& spec);
void to_json(json& j, const StoppingRule& rule);
void to_json(json& j, const CycleRecord& rec);
void from_json(const json& j, CycleRecord& rec);
void to_json(json& j, const RfeTrace& trace);
void from_json(const json& j, RfeTrace& trace);
void to_json(json& j, const Ranking& ranking);
void to_json(json& j, const RegularizedModel& model);
void to_json(json& j, const LinearModel& model);
void to_json(json& j, const ChangePointFit& fit);
void to_json(json& j, const CvResult& result);
void to_json(json& j, const Dataset& dataset);
void from_json(const json& j, Dataset& dataset);

/// cycle_index,objective_after,best_delta (objective_after = best candidate objective).
std::string scree_csv(const RfeTrace& trace);

/// g,gamma,lambda,mean_score,fold_1,...,fold_k
std::string cv_table_csv(const CvResult& result);

/// A simulation file: one or more (d, d0) settings crossed with sample sizes.
struct SimulationPlan {
  std::string name = "simulation";
  Task task = Task::Classification;
  std::vector<std::pair<Index, Index>> settings;  // (d, d0)
  std::vector<Index> sample_sizes;
  SimulationScenario base;   // d/d0/n overwritten per cell
  ScenarioTemplate method;
};

SimulationPlan parse_simulation_plan(const json& j);

struct Table1Cell {
  Index d = 0;
  Index d0 = 0;
  Index n = 0;
  ErrorTally tally;
};

/// One result column per cell, rows: no errors / one error / more than one error.
std::string table1_csv(const std::vector<Table1Cell>& cells);

json replication_archive(const SimulationPlan& plan, const std::vector<Table1Cell>& cells,
                         const std::vector<std::vector<ReplicationRecord>>& records, bool interrupted);

/// %.17g
std::string format_real(double v);

}  // namespace riskrfe
