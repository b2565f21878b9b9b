#include "riskrfe/kernels.hpp"

#include <limits>

namespace riskrfe {

namespace detail {

void throw_dimension_mismatch(Index expected, Index got) {
  throw ValidationError("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                        std::to_string(got));
}

}  // namespace detail

KernelSpec::KernelSpec(Variant v) : variant_(std::move(v)) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (!std::is_same_v<K, LinearKernel>) {
          if (!(k.gamma > 0.0) || !std::isfinite(k.gamma))
            throw ValidationError("kernel width gamma must be positive");
        }
        if constexpr (std::is_same_v<K, WeightedGaussian>) {
          if (k.weights.size() == 0 || !(k.weights.array() > 0.0).all() || !k.weights.allFinite())
            throw ValidationError("kernel weights must be positive");
        }
      },
      variant_);
}

double KernelSpec::gamma() const noexcept {
  if (auto g = std::get_if<GaussianRbf>(&variant_)) return g->gamma;
  if (auto w = std::get_if<WeightedGaussian>(&variant_)) return w->gamma;
  return std::numeric_limits<double>::quiet_NaN();
}

std::string KernelSpec::name() const {
  switch (variant_.index()) {
    case 0: return "gaussian";
    case 1: return "linear";
    default: return "weighted-gaussian";
  }
}

double deleted_kernel_equivalent(const KernelSpec& spec, const FeatureMask& mask,
                                 const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& y) {
  if (x.size() != mask.d()) detail::throw_dimension_mismatch(mask.d(), x.size());
  if (y.size() != mask.d()) detail::throw_dimension_mismatch(mask.d(), y.size());
  const auto active = mask.active();
  const auto m = static_cast<Index>(active.size());
  Vector xs(m), ys(m);
  for (Index k = 0; k < m; ++k) {
    xs[k] = x[active[static_cast<std::size_t>(k)]];
    ys[k] = y[active[static_cast<std::size_t>(k)]];
  }
  if (auto w = std::get_if<WeightedGaussian>(&spec.variant())) {
    if (w->weights.size() != mask.d()) detail::throw_dimension_mismatch(w->weights.size(), mask.d());
    double acc = 0.0;
    for (Index k = 0; k < m; ++k) {
      const double diff = xs[k] - ys[k];
      acc += w->weights[active[static_cast<std::size_t>(k)]] * diff * diff;
    }
    return std::exp(-acc / (w->gamma * w->gamma));
  }
  return eval_kernel(spec, xs, ys);
}

namespace {

// Projected points as columns (d x n, removed coordinates zeroed); the weighted
// variant folds sqrt(w) in so that squared distances come out weighted.
Matrix projected_points(const KernelSpec& spec, const FeatureMask& mask, const Matrix& X) {
  if (X.cols() != mask.d()) detail::throw_dimension_mismatch(mask.d(), X.cols());
  const auto* w = std::get_if<WeightedGaussian>(&spec.variant());
  if (w && w->weights.size() != mask.d()) detail::throw_dimension_mismatch(w->weights.size(), mask.d());
  Matrix P = X.transpose();
  if (w) P = w->weights.cwiseSqrt().asDiagonal() * P;
  for (Index i : mask.removed()) P.row(i).setZero();
  return P;
}

template <typename Entry>
Matrix symmetric_fill(Index n, Entry entry) {
  Matrix G(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = entry(i, j);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

}  // namespace

Matrix gram_matrix(const KernelSpec& spec, const FeatureMask& mask, const Matrix& X) {
  const Matrix P = projected_points(spec, mask, X);
  const Index n = X.rows();
  if (spec.is_linear()) {
    return symmetric_fill(n, [&](Index i, Index j) { return P.col(i).dot(P.col(j)); });
  }
  const double inv_g2 = 1.0 / (spec.gamma() * spec.gamma());
  return symmetric_fill(n, [&](Index i, Index j) {
    return i == j ? 1.0 : std::exp(-(P.col(i) - P.col(j)).squaredNorm() * inv_g2);
  });
}

Matrix cross_gram(const KernelSpec& spec, const FeatureMask& mask, const Matrix& A, const Matrix& B) {
  const Matrix PA = projected_points(spec, mask, A);
  const Matrix PB = projected_points(spec, mask, B);
  Matrix K(A.rows(), B.rows());
  if (spec.is_linear()) {
    K.noalias() = PA.transpose() * PB;
    return K;
  }
  const double inv_g2 = 1.0 / (spec.gamma() * spec.gamma());
  for (Index j = 0; j < B.rows(); ++j)
    for (Index i = 0; i < A.rows(); ++i)
      K(i, j) = std::exp(-(PA.col(i) - PB.col(j)).squaredNorm() * inv_g2);
  return K;
}

Matrix linear_gram_without(const Matrix& gram, const Matrix& X, Index feature) {
  Matrix G = gram;
  const auto col = X.col(feature);
  for (Index j = 0; j < G.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = gram(i, j) - col[i] * col[j];
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

}  // namespace riskrfe
