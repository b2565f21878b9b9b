#include "riskrfe/scree.hpp"

#include <algorithm>
#include <limits>

namespace riskrfe {

Vector scree_values(const RfeTrace& trace) {
  if (trace.cycles.empty()) throw ValidationError("empty trace has no scree values");
  Vector out(static_cast<Index>(trace.cycles.size()));
  for (std::size_t k = 0; k < trace.cycles.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [f, c] : trace.cycles[k].candidates) best = std::min(best, c.objective.regularized);
    out[static_cast<Index>(k)] = best;
  }
  return out;
}

FeatureMask change_point_mask(const RfeTrace& trace, Index change_index) {
  std::vector<Index> removed;
  for (const auto& cycle : trace.cycles) {
    if (cycle.cycle_index > change_index) break;
    removed.insert(removed.end(), cycle.removed.begin(), cycle.removed.end());
  }
  return FeatureMask(trace.final_mask.d(), std::move(removed));
}

ChangePointSelection select_by_change_point(const RfeTrace& trace, Index min_left, Index min_right) {
  ChangePointSelection sel;
  sel.fit = fit_change_point(scree_values(trace), min_left, min_right);
  sel.eliminated = change_point_mask(trace, sel.fit.change_index);
  sel.retained = sel.eliminated.active();
  return sel;
}

}  // namespace riskrfe
