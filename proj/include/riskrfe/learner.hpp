#pragma once

#include <memory>
#include <variant>

#include "riskrfe/core.hpp"
#include "riskrfe/kernels.hpp"

namespace riskrfe {

/// max{0, 1 - y t}
struct Hinge {};
/// (t - y)^2
struct SquaredError {};
/// max{0, |y - t| - epsilon}
struct EpsilonInsensitive {
  double epsilon = 0.1;
};

class LossSpec {
 public:
  using Variant = std::variant<Hinge, SquaredError, EpsilonInsensitive>;

  LossSpec() : variant_(Hinge{}) {}
  LossSpec(Variant v);  // NOLINT(google-explicit-constructor)
  template <typename Alt>
    requires std::is_constructible_v<Variant, Alt> && (!std::is_same_v<std::decay_t<Alt>, Variant>)
  LossSpec(Alt alt) : LossSpec(Variant(std::move(alt))) {}  // NOLINT(google-explicit-constructor)

  static LossSpec hinge() { return LossSpec(Hinge{}); }
  static LossSpec squared_error() { return LossSpec(SquaredError{}); }
  static LossSpec epsilon_insensitive(double epsilon) {
    return LossSpec(EpsilonInsensitive{epsilon});
  }

  const Variant& variant() const noexcept { return variant_; }
  std::string name() const;
  /// epsilon for EpsilonInsensitive, 0 otherwise.
  double epsilon() const noexcept;

 private:
  Variant variant_;
};

double loss_value(const LossSpec& spec, double y, double t);

/// Mean of loss_value over (targets[i], predictions[i]).
double empirical_risk(const LossSpec& spec, const Eigen::Ref<const Vector>& predictions,
                      const Eigen::Ref<const Vector>& targets);

/// lambda * ||f||_H^2 + R_{L,D}(f), stored with its two parts.
struct ObjectiveValue {
  double empirical_risk = 0.0;
  double rkhs_norm_sq = 0.0;
  double regularized = 0.0;

  static ObjectiveValue make(double lambda, double rkhs_norm_sq, double empirical_risk) {
    return {empirical_risk, rkhs_norm_sq, lambda * rkhs_norm_sq + empirical_risk};
  }
};

struct SolverOptions {
  double tolerance = 1e-8;
  long max_iterations = 100000;
  bool use_bias = true;
  Vector warm_start;  // dual_variables of an earlier fit with the same targets, loss and lambda; ignored if infeasible
};

/// Solution of the regularized problem on a fixed Gram matrix.
struct KernelSolution {
  Vector alpha;           // expansion coefficients of k(., x_i)
  double bias = 0.0;
  ObjectiveValue objective;
  bool converged = true;
  long iterations = 0;
  double max_violation = 0.0;
  bool singular_system = false;
  /// Raw box-constrained dual variables (hinge: n, epsilon-insensitive: 2n
  /// ordered [a; a*]); empty for squared error.
  Vector dual_variables;
  double box_bound = 0.0;  // C = 1/(2 n lambda)
};

/// Fits f = sum_i alpha_i k(., x_i) + b minimizing lambda alpha^T G alpha + mean loss.
///
/// Hinge and epsilon-insensitive losses go through the box-constrained dual
/// with C = 1/(2 n lambda) and maximal-violating-pair working sets; squared
/// error solves the bordered system [G + n lambda I, 1; 1^T, 0] directly.
/// The bias is then set to the exact minimizer of the empirical risk given
/// G alpha, and the objective is re-evaluated from (G, alpha, b).
KernelSolution fit_gram(const Matrix& gram, const Vector& targets, const LossSpec& loss,
                        double lambda, const SolverOptions& options = {});

/// lambda alpha^T G alpha + empirical_risk(G alpha + b).
ObjectiveValue evaluate_objective(const Matrix& gram, const Vector& alpha, double bias,
                                  const Vector& targets, const LossSpec& loss, double lambda);

/// Exact argmin over b of the empirical risk of scores + b. Piecewise-linear
/// losses pick the minimizing interval point closest to `hint`.
double optimal_bias(const LossSpec& loss, const Vector& scores, const Vector& targets,
                    double hint = 0.0);

struct RegularizedModel {
  Vector dual_coefficients;
  double bias = 0.0;
  FeatureMask mask;
  double lambda = 1.0;
  KernelSpec kernel;
  LossSpec loss;
  std::shared_ptr<const Matrix> training_points;
  ObjectiveValue objective;
  bool converged = true;
  long iterations = 0;
  double max_violation = 0.0;
  bool singular_system = false;
};

RegularizedModel fit(const Dataset& dataset, const FeatureMask& mask, const KernelSpec& kernel,
                     const LossSpec& loss, double lambda, const SolverOptions& options = {});

/// Decision values f(x_j) for the rows of X.
Vector predict(const RegularizedModel& model, const Matrix& X);

/// sign(f), with sign(0) = +1.
Vector classify(const Vector& decision_values);

struct LinearModel {
  Vector weights;  // zero at removed features
  double bias = 0.0;
  FeatureMask mask;
  double empirical_risk = 0.0;  // RSS / n
  bool rank_deficient = false;
};

/// Ordinary least squares with intercept on the active columns. Rank-deficient
/// designs fall back to the minimum-norm solution (threshold 1e-10 sigma_max).
LinearModel fit_linear_erm(const Dataset& dataset, const FeatureMask& mask);

Vector predict(const LinearModel& model, const Matrix& X);

}  // namespace riskrfe
