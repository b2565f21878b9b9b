#include "riskrfe/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "riskrfe/kernels.hpp"

namespace riskrfe {

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Gaussian ? "gaussian" : "linear";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian" || name == "rbf") return KernelFamily::Gaussian;
  if (name == "linear") return KernelFamily::Linear;
  throw ValidationError("unknown kernel '" + name + "' (expected gaussian or linear)");
}

double lambda_from_grid(double g, Index n) {
  if (!(g > 0.0)) throw ValidationError("grid value must be positive");
  if (n < 1) throw ValidationError("sample size must be positive");
  return 2.0 / (static_cast<double>(n) * g);
}

std::vector<std::vector<Index>> kfold_split(Index n, Index folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (folds > n)
    throw ValidationError("folds (" + std::to_string(folds) + ") exceed sample size (" +
                          std::to_string(n) + ")");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(derive_seed({seed, "kfold"}, static_cast<std::uint64_t>(n)));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  const Index base = n / folds, extra = n % folds;
  auto it = perm.begin();
  for (Index f = 0; f < folds; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    out[static_cast<std::size_t>(f)].assign(it, it + size);
    it += size;
  }
  return out;
}

namespace {

Matrix take(const Matrix& full, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out(static_cast<Index>(i), static_cast<Index>(j)) = full(rows[i], cols[j]);
  return out;
}

Vector take(const Vector& full, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = full[rows[i]];
  return out;
}

}  // namespace

CvResult cross_validate(const Dataset& dataset, KernelFamily family, const LossSpec& loss,
                        const CvConfig& cv, const SolverOptions& solver, unsigned threads) {
  if (cv.grid_c.empty()) throw ValidationError("empty regularization grid");
  if (family == KernelFamily::Gaussian && cv.grid_gamma.empty())
    throw ValidationError("empty kernel-width grid");
  const Index n = dataset.n();
  const auto folds = kfold_split(n, cv.folds, cv.seed);
  const CvScore score = cv.score.value_or(
      dataset.task() == Task::Classification ? CvScore::ZeroOneError : CvScore::MeanLoss);

  std::vector<std::optional<double>> gammas;
  if (family == KernelFamily::Gaussian) gammas.assign(cv.grid_gamma.begin(), cv.grid_gamma.end());
  else gammas.push_back(std::nullopt);
  for (const auto& g : gammas)
    if (g && !(*g > 0.0)) throw ValidationError("kernel width must be positive");

  // One full Gram per kernel width; fold problems are sub-blocks of it.
  std::vector<Matrix> grams(gammas.size());
  const FeatureMask none(dataset.d());
  parallel_for(static_cast<Index>(gammas.size()), threads, [&](Index k) {
    const auto& g = gammas[static_cast<std::size_t>(k)];
    const KernelSpec spec = g ? KernelSpec::gaussian(*g) : KernelSpec::linear();
    grams[static_cast<std::size_t>(k)] = gram_matrix(spec, none, dataset.features());
  });

  std::vector<std::vector<Index>> train(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t o = 0; o < folds.size(); ++o)
      if (o != f) train[f].insert(train[f].end(), folds[o].begin(), folds[o].end());
    std::sort(train[f].begin(), train[f].end());
  }

  const auto n_g = cv.grid_c.size(), n_gamma = gammas.size(), n_folds = folds.size();
  std::vector<double> fold_score(n_g * n_gamma * n_folds);
  parallel_for(static_cast<Index>(fold_score.size()), threads, [&](Index job) {
    const auto idx = static_cast<std::size_t>(job);
    const auto f = idx % n_folds;
    const auto gk = (idx / n_folds) % n_gamma;
    const auto ck = idx / (n_folds * n_gamma);
    const double lambda = lambda_from_grid(cv.grid_c[ck], n);
    const Matrix& G = grams[gk];

    const Matrix train_gram = take(G, train[f], train[f]);
    const Vector train_y = take(dataset.targets(), train[f]);
    const auto sol = fit_gram(train_gram, train_y, loss, lambda, solver);

    const Matrix cross = take(G, folds[f], train[f]);
    Vector decision = cross * sol.alpha;
    decision.array() += sol.bias;
    const Vector valid_y = take(dataset.targets(), folds[f]);
    double s;
    if (score == CvScore::ZeroOneError) {
      const Vector labels = classify(decision);
      s = (labels.array() != valid_y.array()).cast<double>().mean();
    } else {
      s = empirical_risk(loss, decision, valid_y);
    }
    fold_score[idx] = s;
  });

  CvResult result;
  bool have_best = false;
  for (std::size_t ck = 0; ck < n_g; ++ck) {
    for (std::size_t gk = 0; gk < n_gamma; ++gk) {
      GridPoint pt;
      pt.g = cv.grid_c[ck];
      pt.gamma = gammas[gk];
      pt.lambda = lambda_from_grid(pt.g, n);
      const auto first = fold_score.begin() + static_cast<std::ptrdiff_t>((ck * n_gamma + gk) * n_folds);
      pt.fold_scores.assign(first, first + static_cast<std::ptrdiff_t>(n_folds));
      pt.mean_score = std::accumulate(pt.fold_scores.begin(), pt.fold_scores.end(), 0.0) /
                      static_cast<double>(n_folds);

      auto key = [](const GridPoint& p) {
        return std::make_tuple(p.mean_score, p.g, p.gamma.value_or(0.0));
      };
      if (!have_best || key(pt) < std::make_tuple(result.best_score, result.g, result.gamma.value_or(0.0))) {
        have_best = true;
        result.best_score = pt.mean_score;
        result.g = pt.g;
        result.gamma = pt.gamma;
        result.lambda = pt.lambda;
      }
      result.table.push_back(std::move(pt));
    }
  }
  return result;
}

}  // namespace riskrfe
