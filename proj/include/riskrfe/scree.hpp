#pragma once

#include "riskrfe/rfe.hpp"
#include "riskrfe/stopping.hpp"

namespace riskrfe {

/// Best candidate objective per cycle (the reverse scree sequence).
Vector scree_values(const RfeTrace& trace);

/// Features removed in cycles 0..change_index: the redundant set of a change-point fit.
FeatureMask change_point_mask(const RfeTrace& trace, Index change_index);

struct ChangePointSelection {
  ChangePointFit fit;
  FeatureMask eliminated;
  std::vector<Index> retained;
};

/// Runs fit_change_point on the trace's scree and splits features accordingly.
ChangePointSelection select_by_change_point(const RfeTrace& trace, Index min_left, Index min_right);

}  // namespace riskrfe
