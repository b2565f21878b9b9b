#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace riskrfe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. ValidationError maps to CLI exit code 2, NumericalError to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NonNumericCell : public ValidationError {
 public:
  NonNumericCell(Index row, Index col, const std::string& cell);
  Index row() const noexcept { return row_; }
  Index col() const noexcept { return col_; }

 private:
  Index row_;
  Index col_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class Task { Classification, Regression };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

/// Feature matrix (one sample per row) with its targets. Immutable once built;
/// the constructor enforces finiteness and, for classification, labels in {-1,+1}.
class Dataset {
 public:
  Dataset(Matrix features, Vector targets, Task task,
          std::vector<std::string> feature_names = {});

  const Matrix& features() const noexcept { return features_; }
  const Vector& targets() const noexcept { return targets_; }
  Task task() const noexcept { return task_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  Index n() const noexcept { return features_.rows(); }
  Index d() const noexcept { return features_.cols(); }

  /// Rows selected by `rows`, in the given order.
  Dataset subset(std::span<const Index> rows) const;

 private:
  Matrix features_;
  Vector targets_;
  Task task_;
  std::vector<std::string> names_;
};

/// The set J of eliminated features over {0, ..., d-1}.
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(Index d);
  FeatureMask(Index d, std::vector<Index> removed);

  Index d() const noexcept { return d_; }
  const std::vector<Index>& removed() const noexcept { return removed_; }
  std::vector<Index> active() const;
  Index active_count() const noexcept { return d_ - static_cast<Index>(removed_.size()); }
  bool is_removed(Index feature) const;
  bool empty() const noexcept { return removed_.empty(); }

  FeatureMask with_removed(Index feature) const;
  FeatureMask with_removed(std::span<const Index> features) const;
  FeatureMask with_restored(Index feature) const;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  Index d_ = 0;
  std::vector<Index> removed_;
};

struct LoadOptions {
  Task task = Task::Regression;
  bool has_header = false;
  /// Map {0,1} targets to {-1,+1} for classification.
  bool coerce_binary_labels = false;
};

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options);
Dataset parse_dataset(const std::string& text, const LoadOptions& options);

/// Writes target-last CSV with 17 significant digits; a header row is
/// emitted when the dataset carries feature names.
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
std::string format_dataset(const Dataset& dataset);

struct SeedStream {
  std::uint64_t root_seed = 0;
  std::string stream_label;
};

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t splitmix64(std::uint64_t state) noexcept;

/// splitmix64 finalizer over (root_seed ^ fnv1a64(label)) + index.
std::uint64_t derive_seed(const SeedStream& stream, std::uint64_t index) noexcept;

/// Worker count: RISK_RFE_THREADS if set and positive, else 1.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; results must be written to per-index slots. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& body);

}  // namespace riskrfe
