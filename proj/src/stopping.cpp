#include "riskrfe/stopping.hpp"

#include <cmath>
#include <limits>

namespace riskrfe {

StoppingRule::StoppingRule(Variant v) : variant_(std::move(v)) {
  std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FixedThreshold>) {
          if (!(r.delta > 0.0)) throw ValidationError("fixed threshold delta must be positive");
        } else if constexpr (std::is_same_v<R, ErmRate>) {
          if (!(r.c > 0.0) || !std::isfinite(r.c)) throw ValidationError("rate constant c must be positive");
        } else if constexpr (std::is_same_v<R, SvmRate>) {
          if (!(r.c > 0.0) || !std::isfinite(r.c)) throw ValidationError("rate constant c must be positive");
          if (!(r.beta > 0.0 && r.beta <= 1.0)) throw ValidationError("beta must lie in (0, 1]");
        } else if constexpr (std::is_same_v<R, ChangePoint>) {
          if (r.min_left < 1 || r.min_right < 1)
            throw ValidationError("change-point segment minima must be positive");
        }
      },
      variant_);
}

std::string StoppingRule::name() const {
  switch (variant_.index()) {
    case 0: return "fixed";
    case 1: return "erm-rate";
    case 2: return "svm-rate";
    case 3: return "rank-all";
    default: return "change-point";
  }
}

bool StoppingRule::is_in_loop() const noexcept {
  return std::holds_alternative<FixedThreshold>(variant_) ||
         std::holds_alternative<ErmRate>(variant_) || std::holds_alternative<SvmRate>(variant_);
}

double delta_schedule(const StoppingRule& rule, Index n) {
  if (n < 1) throw ValidationError("sample size must be positive");
  const auto nn = static_cast<double>(n);
  if (auto r = std::get_if<ErmRate>(&rule.variant())) return r->c / std::sqrt(nn);
  if (auto r = std::get_if<SvmRate>(&rule.variant()))
    return r->c * std::pow(nn, -r->beta / (2.0 * r->beta + 1.0));
  throw ValidationError("stopping rule '" + rule.name() + "' has no delta schedule");
}

double stopping_threshold(const StoppingRule& rule, Index n) {
  if (auto r = std::get_if<FixedThreshold>(&rule.variant())) return r->delta;
  return delta_schedule(rule, n);
}

bool should_stop(const StoppingRule& rule, double best_delta, Index n) {
  if (!rule.is_in_loop())
    throw ValidationError("stopping rule '" + rule.name() + "' is not an in-loop test");
  return best_delta > stopping_threshold(rule, n);
}

double polynomial_sse(const Vector& values, Index first, Index degree, Vector* coeffs) {
  const Index m = values.size();
  Matrix V(m, degree + 1);
  for (Index k = 0; k < m; ++k) {
    const auto x = static_cast<double>(first + k);
    double p = 1.0;
    for (Index j = 0; j <= degree; ++j) {
      V(k, j) = p;
      p *= x;
    }
  }
  const Vector c = V.colPivHouseholderQr().solve(values);
  if (coeffs) *coeffs = c;
  return (values - V * c).squaredNorm();
}

ChangePointFit fit_change_point(const Vector& scree, Index min_left, Index min_right) {
  if (min_left < 1 || min_right < 1) throw ValidationError("segment minima must be positive");
  const Index len = scree.size();
  if (len < min_left + min_right)
    throw ValidationError("scree of length " + std::to_string(len) +
                          " is too short for min_left=" + std::to_string(min_left) +
                          ", min_right=" + std::to_string(min_right));

  const double tie = 1e-12 * std::max(1.0, scree.squaredNorm());
  ChangePointFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (Index t = min_left - 1; len - t - 1 >= min_right; ++t) {
    Vector left, right;
    const double sse = polynomial_sse(scree.head(t + 1), 0, 1, &left) +
                       polynomial_sse(scree.tail(len - t - 1), t + 1, 2, &right);
    best.sse_by_index.emplace_back(t, sse);
    if (sse < best.sse - tie) {
      best.sse = sse;
      best.change_index = t;
      best.left_coeffs = left;
      best.right_coeffs = right;
    }
  }
  return best;
}

}  // namespace riskrfe
