#pragma once

#include <cmath>
#include <variant>

#include "riskrfe/core.hpp"

namespace riskrfe {

/// k(x,y) = exp(-||x-y||^2 / gamma^2)
struct GaussianRbf {
  double gamma = 1.0;
};

/// k(x,y) = <x,y>
struct LinearKernel {};

/// k(x,y) = exp(-sum_i w_i (x_i-y_i)^2 / gamma^2), weights fixed at construction.
struct WeightedGaussian {
  double gamma = 1.0;
  Vector weights;
};

class KernelSpec {
 public:
  using Variant = std::variant<GaussianRbf, LinearKernel, WeightedGaussian>;

  KernelSpec() : variant_(LinearKernel{}) {}
  KernelSpec(Variant v);  // NOLINT(google-explicit-constructor)
  template <typename Alt>
    requires std::is_constructible_v<Variant, Alt> && (!std::is_same_v<std::decay_t<Alt>, Variant>)
  KernelSpec(Alt alt) : KernelSpec(Variant(std::move(alt))) {}  // NOLINT(google-explicit-constructor)

  static KernelSpec gaussian(double gamma) { return KernelSpec(GaussianRbf{gamma}); }
  static KernelSpec linear() { return KernelSpec(LinearKernel{}); }
  static KernelSpec weighted_gaussian(double gamma, Vector weights) {
    return KernelSpec(WeightedGaussian{gamma, std::move(weights)});
  }

  const Variant& variant() const noexcept { return variant_; }
  bool is_linear() const noexcept { return std::holds_alternative<LinearKernel>(variant_); }
  /// gamma for the Gaussian variants, NaN for Linear.
  double gamma() const noexcept;
  std::string name() const;

 private:
  Variant variant_;
};

namespace detail {

void throw_dimension_mismatch(Index expected, Index got);

inline void check_dims(const KernelSpec& spec, Index dx, Index dy) {
  if (dx != dy) throw_dimension_mismatch(dx, dy);
  if (auto w = std::get_if<WeightedGaussian>(&spec.variant()); w && w->weights.size() != dx)
    throw_dimension_mismatch(w->weights.size(), dx);
}

}  // namespace detail

/// Zeroes the coordinates listed in mask.removed().
template <typename Derived>
Vector project_point(const Eigen::MatrixBase<Derived>& x, const FeatureMask& mask) {
  if (x.size() != mask.d()) detail::throw_dimension_mismatch(mask.d(), x.size());
  Vector out = x;
  for (Index i : mask.removed()) out[i] = 0.0;
  return out;
}

template <typename DerivedX, typename DerivedY>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<DerivedX>& x,
                   const Eigen::MatrixBase<DerivedY>& y) {
  detail::check_dims(spec, x.size(), y.size());
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LinearKernel>) {
          return x.dot(y);
        } else if constexpr (std::is_same_v<K, GaussianRbf>) {
          return std::exp(-(x - y).squaredNorm() / (k.gamma * k.gamma));
        } else {
          return std::exp(-(k.weights.array() * (x - y).array().square()).sum() /
                          (k.gamma * k.gamma));
        }
      },
      spec.variant());
}

/// k(pi(x), pi(y)) where pi zeroes the removed coordinates.
template <typename DerivedX, typename DerivedY>
double eval_projected_kernel(const KernelSpec& spec, const FeatureMask& mask,
                             const Eigen::MatrixBase<DerivedX>& x,
                             const Eigen::MatrixBase<DerivedY>& y) {
  return eval_kernel(spec, project_point(x, mask), project_point(y, mask));
}

/// Kernel on the active subvectors only: removed columns (and their weights)
/// are physically deleted before evaluating the kernel formula.
double deleted_kernel_equivalent(const KernelSpec& spec, const FeatureMask& mask,
                                 const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& y);

/// G(i,j) = k(pi(X_i), pi(X_j)); each unordered pair evaluated once.
Matrix gram_matrix(const KernelSpec& spec, const FeatureMask& mask, const Matrix& X);

/// K(i,j) = k(pi(A_i), pi(B_j)).
Matrix cross_gram(const KernelSpec& spec, const FeatureMask& mask, const Matrix& A, const Matrix& B);

/// Linear-kernel Gram after additionally masking `feature`: G - x_f x_f^T.
Matrix linear_gram_without(const Matrix& gram, const Matrix& X, Index feature);

}  // namespace riskrfe
