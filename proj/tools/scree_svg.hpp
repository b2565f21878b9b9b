#pragma once

#include <string>

#include "riskrfe/stopping.hpp"

namespace riskrfe::tools {

/// Static scatter of the scree sequence with the fitted line (left) and
/// quadratic (right) overlaid; the change point is drawn as a bold dot.
std::string render_scree_svg(const Vector& scree, const ChangePointFit& fit, const std::string& title);

}  // namespace riskrfe::tools
