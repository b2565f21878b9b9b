#pragma once

#include <variant>

#include "riskrfe/core.hpp"

namespace riskrfe {

struct FixedThreshold {
  double delta = 0.0;
};

/// delta_n = c n^{-1/2}
struct ErmRate {
  double c = 1.0;
};

/// delta_n = c n^{-beta/(2 beta + 1)}, beta in (0, 1]
struct SvmRate {
  double c = 1.0;
  double beta = 1.0;
};

struct RankAll {};

/// Post-hoc linear/quadratic change-point fit over a RankAll scree.
struct ChangePoint {
  Index min_left = 2;
  Index min_right = 3;
};

class StoppingRule {
 public:
  using Variant = std::variant<FixedThreshold, ErmRate, SvmRate, RankAll, ChangePoint>;

  StoppingRule() : variant_(RankAll{}) {}
  StoppingRule(Variant v);  // NOLINT(google-explicit-constructor)
  template <typename Alt>
    requires std::is_constructible_v<Variant, Alt> && (!std::is_same_v<std::decay_t<Alt>, Variant>)
  StoppingRule(Alt alt) : StoppingRule(Variant(std::move(alt))) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const noexcept { return variant_; }
  std::string name() const;
  /// True for rules checked inside the elimination loop.
  bool is_in_loop() const noexcept;

 private:
  Variant variant_;
};

/// delta_n for ErmRate / SvmRate; any other rule is rejected.
double delta_schedule(const StoppingRule& rule, Index n);

/// The in-loop threshold: delta for FixedThreshold, delta_schedule for the rates.
double stopping_threshold(const StoppingRule& rule, Index n);

/// best_delta > threshold (strict).
bool should_stop(const StoppingRule& rule, double best_delta, Index n);

struct ChangePointFit {
  Index change_index = 0;
  Eigen::Vector2d left_coeffs;   // intercept, slope over cycle index
  Eigen::Vector3d right_coeffs;  // intercept, linear, quadratic over cycle index
  double sse = 0.0;
  /// Total SSE for every admissible change index, in order.
  std::vector<std::pair<Index, double>> sse_by_index;
};

/// Segmented OLS over x = 0..len-1: a line on [0, t], a quadratic on [t+1, end].
/// Exhaustive over admissible t; minimal total SSE wins, ties to the smallest t.
ChangePointFit fit_change_point(const Vector& scree, Index min_left = 2, Index min_right = 3);

/// Residual sum of squares of the degree-`degree` OLS polynomial through
/// (x_k, values_k), x_k = first + k. Coefficients written to `coeffs` when given.
double polynomial_sse(const Vector& values, Index first, Index degree, Vector* coeffs = nullptr);

}  // namespace riskrfe
