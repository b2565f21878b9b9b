#pragma once

#include <vector>

#include "riskrfe/core.hpp"

namespace riskrfe::detail {

// min_beta 0.5 beta^T Q beta + p^T beta,  0 <= beta <= C,  [z^T beta = 0]
// with Q(t,u) = z_t z_u K(t mod n, u mod n), z_t in {-1,+1} and m in {n, 2n}.
struct BoxQp {
  const Matrix* kernel = nullptr;
  const Vector* initial = nullptr;  // feasible starting point, or zero
  Vector sign;
  Vector linear;
  double bound = 0.0;
  bool equality = true;
};

struct BoxQpResult {
  Vector beta;
  Vector gradient;
  bool converged = false;
  long iterations = 0;
  double max_violation = 0.0;
  double rho = 0.0;  // decision offset estimate: f = sum alpha K - rho
};

// Two-variable working-set descent: the maximal KKT violator paired with the
// partner of largest second-order gain (ties to the lowest index); stops when
// the maximal violating pair's gap is within tolerance. Without the equality constraint the single most violating
// coordinate is minimized exactly instead.
BoxQpResult solve_box_qp(const BoxQp& problem, double tolerance, long max_iterations);

}  // namespace riskrfe::detail
