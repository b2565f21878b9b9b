#pragma once

#include <optional>

#include "riskrfe/core.hpp"
#include "riskrfe/learner.hpp"

namespace riskrfe {

enum class KernelFamily { Gaussian, Linear };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

enum class CvScore { ZeroOneError, MeanLoss };

struct CvConfig {
  Index folds = 5;
  /// Values of g = 2/(n lambda).
  std::vector<double> grid_c{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> grid_gamma{1.0, 2.0, 3.0, 4.0};
  std::uint64_t seed = 0;
  /// Defaults to ZeroOneError for classification, MeanLoss for regression.
  std::optional<CvScore> score;
};

/// lambda = 2 / (n g)
double lambda_from_grid(double g, Index n);

/// Seeded shuffle, then a contiguous partition; the first n % folds folds get
/// one extra index.
std::vector<std::vector<Index>> kfold_split(Index n, Index folds, std::uint64_t seed);

struct GridPoint {
  double g = 0.0;
  std::optional<double> gamma;
  double lambda = 0.0;
  double mean_score = 0.0;
  std::vector<double> fold_scores;
};

struct CvResult {
  double lambda = 0.0;
  std::optional<double> gamma;
  double g = 0.0;
  double best_score = 0.0;
  std::vector<GridPoint> table;
};

/// Grid search over (g, gamma); gamma is ignored for the linear family.
/// Argmin of the mean validation score, ties to smaller g then smaller gamma.
CvResult cross_validate(const Dataset& dataset, KernelFamily family, const LossSpec& loss,
                        const CvConfig& cv, const SolverOptions& solver = {},
                        unsigned threads = 1);

}  // namespace riskrfe
