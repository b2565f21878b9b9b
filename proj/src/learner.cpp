#include "riskrfe/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smo.hpp"

namespace riskrfe {

LossSpec::LossSpec(Variant v) : variant_(std::move(v)) {
  if (auto e = std::get_if<EpsilonInsensitive>(&variant_); e && !(e->epsilon >= 0.0))
    throw ValidationError("epsilon must be nonnegative");
}

std::string LossSpec::name() const {
  switch (variant_.index()) {
    case 0: return "hinge";
    case 1: return "squared";
    default: return "epsilon-insensitive";
  }
}

double LossSpec::epsilon() const noexcept {
  if (auto e = std::get_if<EpsilonInsensitive>(&variant_)) return e->epsilon;
  return 0.0;
}

double loss_value(const LossSpec& spec, double y, double t) {
  return std::visit(
      [&](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Hinge>) {
          return std::max(0.0, 1.0 - y * t);
        } else if constexpr (std::is_same_v<L, SquaredError>) {
          return (t - y) * (t - y);
        } else {
          return std::max(0.0, std::abs(y - t) - l.epsilon);
        }
      },
      spec.variant());
}

double empirical_risk(const LossSpec& spec, const Eigen::Ref<const Vector>& predictions,
                      const Eigen::Ref<const Vector>& targets) {
  if (predictions.size() != targets.size())
    throw ValidationError("prediction/target length mismatch");
  if (targets.size() == 0) throw ValidationError("empirical risk of an empty sample");
  double sum = 0.0;
  for (Index i = 0; i < targets.size(); ++i) sum += loss_value(spec, targets[i], predictions[i]);
  return sum / static_cast<double>(targets.size());
}

ObjectiveValue evaluate_objective(const Matrix& gram, const Vector& alpha, double bias,
                                  const Vector& targets, const LossSpec& loss, double lambda) {
  const Vector scores = gram * alpha;
  const double norm_sq = std::max(0.0, alpha.dot(scores));
  const Vector f = scores.array() + bias;
  return ObjectiveValue::make(lambda, norm_sq, empirical_risk(loss, f, targets));
}

double optimal_bias(const LossSpec& loss, const Vector& scores, const Vector& targets,
                    double hint) {
  const Index n = targets.size();
  if (std::holds_alternative<SquaredError>(loss.variant()))
    return (targets - scores).mean();

  // Convex piecewise-linear risk: slope starts at `slope` for b -> -inf and
  // rises by one at every breakpoint. The minimizers are where it hits zero.
  std::vector<double> breaks;
  Index slope = 0;
  if (std::holds_alternative<Hinge>(loss.variant())) {
    breaks.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      breaks.push_back(targets[i] - scores[i]);
      if (targets[i] > 0) --slope;
    }
  } else {
    const double eps = loss.epsilon();
    breaks.reserve(static_cast<std::size_t>(2 * n));
    for (Index i = 0; i < n; ++i) {
      breaks.push_back(targets[i] - scores[i] - eps);
      breaks.push_back(targets[i] - scores[i] + eps);
    }
    slope = -n;
  }
  std::sort(breaks.begin(), breaks.end());
  const auto k = static_cast<std::size_t>(-slope);
  const double lo = k == 0 ? -std::numeric_limits<double>::infinity() : breaks[k - 1];
  const double hi = k == breaks.size() ? std::numeric_limits<double>::infinity() : breaks[k];
  return std::clamp(hint, lo, hi);
}

namespace {

void validate_problem(const Matrix& gram, const Vector& targets, double lambda) {
  if (gram.rows() != gram.cols() || gram.rows() != targets.size())
    throw ValidationError("Gram matrix shape does not match target count");
  if (targets.size() == 0) throw ValidationError("empty training sample");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
}

KernelSolution solve_dual(const Matrix& gram, const Vector& targets, const LossSpec& loss,
                          double lambda, const SolverOptions& options) {
  const Index n = targets.size();
  detail::BoxQp qp;
  qp.kernel = &gram;
  qp.bound = 1.0 / (2.0 * static_cast<double>(n) * lambda);
  qp.equality = options.use_bias;

  const bool hinge = std::holds_alternative<Hinge>(loss.variant());
  if (hinge) {
    for (Index i = 0; i < n; ++i) {
      if (targets[i] != 1.0 && targets[i] != -1.0)
        throw ValidationError("hinge loss requires targets in {-1,+1}");
    }
    qp.sign = targets;
    qp.linear = Vector::Constant(n, -1.0);
  } else {
    const double eps = loss.epsilon();
    qp.sign.resize(2 * n);
    qp.linear.resize(2 * n);
    for (Index i = 0; i < n; ++i) {
      qp.sign[i] = 1.0;
      qp.sign[n + i] = -1.0;
      qp.linear[i] = eps - targets[i];
      qp.linear[n + i] = eps + targets[i];
    }
  }

  const Vector& w = options.warm_start;
  if (w.size() == qp.sign.size() && (w.array() >= 0.0).all() && (w.array() <= qp.bound).all() &&
      (!qp.equality || std::abs(w.dot(qp.sign)) <= 1e-9 * qp.bound * static_cast<double>(w.size())))
    qp.initial = &w;

  const auto res = detail::solve_box_qp(qp, options.tolerance, options.max_iterations);

  KernelSolution sol;
  sol.alpha = hinge ? Vector(targets.cwiseProduct(res.beta))
                    : Vector(res.beta.head(n) - res.beta.tail(n));
  sol.converged = res.converged;
  sol.iterations = res.iterations;
  sol.max_violation = res.max_violation;
  sol.dual_variables = res.beta;
  sol.box_bound = qp.bound;
  if (options.use_bias) {
    const Vector scores = gram * sol.alpha;
    sol.bias = optimal_bias(loss, scores, targets, -res.rho);
  }
  return sol;
}

KernelSolution solve_ridge(const Matrix& gram, const Vector& targets, double lambda,
                           const SolverOptions& options) {
  const Index n = targets.size();
  Matrix A = gram;
  A.diagonal().array() += static_cast<double>(n) * lambda;

  KernelSolution sol;
  Eigen::LLT<Matrix> llt(A);
  Vector u, v;
  if (llt.info() == Eigen::Success) {
    u = llt.solve(targets);
    if (options.use_bias) v = llt.solve(Vector::Ones(n));
  } else {
    sol.singular_system = true;
    A.diagonal().array() += 1e-12;
    Eigen::LDLT<Matrix> ldlt(A);
    u = ldlt.solve(targets);
    if (options.use_bias) v = ldlt.solve(Vector::Ones(n));
  }
  if (options.use_bias) {
    const double b = u.sum() / v.sum();
    sol.alpha = u - b * v;
    sol.bias = b;
  } else {
    sol.alpha = u;
  }
  return sol;
}

}  // namespace

KernelSolution fit_gram(const Matrix& gram, const Vector& targets, const LossSpec& loss,
                        double lambda, const SolverOptions& options) {
  validate_problem(gram, targets, lambda);
  KernelSolution sol = std::holds_alternative<SquaredError>(loss.variant())
                           ? solve_ridge(gram, targets, lambda, options)
                           : solve_dual(gram, targets, loss, lambda, options);
  sol.objective = evaluate_objective(gram, sol.alpha, sol.bias, targets, loss, lambda);
  return sol;
}

RegularizedModel fit(const Dataset& dataset, const FeatureMask& mask, const KernelSpec& kernel,
                     const LossSpec& loss, double lambda, const SolverOptions& options) {
  if (mask.d() != dataset.d()) throw ValidationError("mask dimension does not match dataset");
  const bool hinge = std::holds_alternative<Hinge>(loss.variant());
  if (dataset.task() == Task::Classification && !hinge)
    throw ValidationError("classification requires the hinge loss");
  if (dataset.task() == Task::Regression && hinge)
    throw ValidationError("regression requires squared or epsilon-insensitive loss");

  const Matrix gram = gram_matrix(kernel, mask, dataset.features());
  KernelSolution sol = fit_gram(gram, dataset.targets(), loss, lambda, options);

  RegularizedModel model;
  model.dual_coefficients = std::move(sol.alpha);
  model.bias = sol.bias;
  model.mask = mask;
  model.lambda = lambda;
  model.kernel = kernel;
  model.loss = loss;
  model.training_points = std::make_shared<const Matrix>(dataset.features());
  model.objective = sol.objective;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  model.max_violation = sol.max_violation;
  model.singular_system = sol.singular_system;
  return model;
}

Vector predict(const RegularizedModel& model, const Matrix& X) {
  if (!model.training_points) throw ValidationError("model has no training points");
  if (X.cols() != model.mask.d())
    throw ValidationError("prediction input has " + std::to_string(X.cols()) +
                          " columns, model expects " + std::to_string(model.mask.d()));
  const Matrix K = cross_gram(model.kernel, model.mask, X, *model.training_points);
  Vector f = K * model.dual_coefficients;
  f.array() += model.bias;
  return f;
}

Vector classify(const Vector& decision_values) {
  return decision_values.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

LinearModel fit_linear_erm(const Dataset& dataset, const FeatureMask& mask) {
  if (mask.d() != dataset.d()) throw ValidationError("mask dimension does not match dataset");
  if (dataset.task() != Task::Regression)
    throw ValidationError("linear least-squares ERM requires a regression dataset");
  const auto active = mask.active();
  const Index n = dataset.n();
  const auto m = static_cast<Index>(active.size());

  Matrix design(n, m + 1);
  for (Index k = 0; k < m; ++k) design.col(k) = dataset.features().col(active[static_cast<std::size_t>(k)]);
  design.col(m).setOnes();

  Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Vector coef = svd.solve(dataset.targets());

  LinearModel model;
  model.mask = mask;
  model.weights = Vector::Zero(dataset.d());
  for (Index k = 0; k < m; ++k) model.weights[active[static_cast<std::size_t>(k)]] = coef[k];
  model.bias = coef[m];
  model.rank_deficient = svd.rank() < m + 1;
  const Vector residual = dataset.targets() - design * coef;
  model.empirical_risk = residual.squaredNorm() / static_cast<double>(n);
  return model;
}

Vector predict(const LinearModel& model, const Matrix& X) {
  if (X.cols() != model.weights.size())
    throw ValidationError("prediction input column count does not match model");
  Vector f = X * model.weights;
  f.array() += model.bias;
  return f;
}

}  // namespace riskrfe
