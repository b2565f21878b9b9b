#include "riskrfe/core.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace riskrfe {

NonNumericCell::NonNumericCell(Index row, Index col, const std::string& cell)
    : ValidationError("non-numeric cell at row " + std::to_string(row) + ", column " +
                      std::to_string(col) + ": '" + cell + "'"),
      row_(row),
      col_(col) {}

std::string to_string(Task task) {
  return task == Task::Classification ? "classification" : "regression";
}

Task task_from_string(const std::string& name) {
  if (name == "classification") return Task::Classification;
  if (name == "regression") return Task::Regression;
  throw ValidationError("unknown task '" + name + "' (expected classification or regression)");
}

Dataset::Dataset(Matrix features, Vector targets, Task task, std::vector<std::string> feature_names)
    : features_(std::move(features)),
      targets_(std::move(targets)),
      task_(task),
      names_(std::move(feature_names)) {
  if (features_.rows() < 1 || features_.cols() < 1)
    throw ValidationError("dataset needs at least one row and one feature column");
  if (targets_.size() != features_.rows())
    throw ValidationError("target count does not match row count");
  if (!names_.empty() && static_cast<Index>(names_.size()) != features_.cols())
    throw ValidationError("feature name count does not match column count");
  if (!features_.allFinite() || !targets_.allFinite())
    throw ValidationError("dataset contains NaN or Inf");
  if (task_ == Task::Classification) {
    for (Index i = 0; i < targets_.size(); ++i) {
      if (targets_[i] != 1.0 && targets_[i] != -1.0)
        throw ValidationError("classification target at row " + std::to_string(i) +
                              " is not in {-1,+1}");
    }
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Matrix x(static_cast<Index>(rows.size()), d());
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Index>(r)) = features_.row(rows[r]);
    y[static_cast<Index>(r)] = targets_[rows[r]];
  }
  return Dataset(std::move(x), std::move(y), task_, names_);
}

// ---------------------------------------------------------------------------

FeatureMask::FeatureMask(Index d) : d_(d) {
  if (d < 0) throw ValidationError("feature count must be nonnegative");
}

FeatureMask::FeatureMask(Index d, std::vector<Index> removed) : d_(d), removed_(std::move(removed)) {
  if (d < 0) throw ValidationError("feature count must be nonnegative");
  std::sort(removed_.begin(), removed_.end());
  if (std::adjacent_find(removed_.begin(), removed_.end()) != removed_.end())
    throw ValidationError("duplicate feature index in mask");
  for (Index i : removed_) {
    if (i < 0 || i >= d_)
      throw ValidationError("feature index " + std::to_string(i) + " out of range for d=" +
                            std::to_string(d_));
  }
}

std::vector<Index> FeatureMask::active() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(active_count()));
  auto it = removed_.begin();
  for (Index i = 0; i < d_; ++i) {
    if (it != removed_.end() && *it == i) {
      ++it;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

bool FeatureMask::is_removed(Index feature) const {
  return std::binary_search(removed_.begin(), removed_.end(), feature);
}

FeatureMask FeatureMask::with_removed(Index feature) const {
  if (is_removed(feature)) throw ValidationError("feature already removed");
  auto next = removed_;
  next.push_back(feature);
  return FeatureMask(d_, std::move(next));
}

FeatureMask FeatureMask::with_removed(std::span<const Index> features) const {
  auto next = removed_;
  next.insert(next.end(), features.begin(), features.end());
  return FeatureMask(d_, std::move(next));
}

FeatureMask FeatureMask::with_restored(Index feature) const {
  auto next = removed_;
  auto it = std::lower_bound(next.begin(), next.end(), feature);
  if (it == next.end() || *it != feature) throw ValidationError("feature not removed");
  next.erase(it);
  return FeatureMask(d_, std::move(next));
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                           : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Dataset parse_dataset(const std::string& text, const LoadOptions& options) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  std::size_t width = 0;
  Index line_no = 0;
  bool header_pending = options.has_header;

  std::string_view rest(text);
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    auto cells = split_row(line);
    if (header_pending) {
      header_pending = false;
      width = cells.size();
      for (std::size_t c = 0; c + 1 < cells.size(); ++c) names.emplace_back(cells[c]);
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ValidationError("ragged row at line " + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " columns, found " +
                            std::to_string(cells.size()));
    if (width < 2) throw ValidationError("need at least one feature column and a target column");

    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      auto cell = cells[c];
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, values[c]);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(values[c]))
        throw NonNumericCell(static_cast<Index>(rows.size()), static_cast<Index>(c),
                             std::string(cell));
    }
    rows.push_back(std::move(values));
  }

  if (rows.empty()) throw ValidationError("empty dataset");

  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(width - 1);
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < d; ++j) x(i, j) = r[static_cast<std::size_t>(j)];
    double t = r.back();
    if (options.task == Task::Classification) {
      if (options.coerce_binary_labels && (t == 0.0 || t == 1.0)) {
        t = t == 0.0 ? -1.0 : 1.0;
      } else if (t != 1.0 && t != -1.0) {
        throw ValidationError("classification target " + std::to_string(t) + " at row " +
                              std::to_string(i) +
                              (options.coerce_binary_labels ? " is not in {0,1} or {-1,+1}"
                                                            : " is not in {-1,+1}"));
      }
    }
    y[i] = t;
  }
  return Dataset(std::move(x), std::move(y), options.task, std::move(names));
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ValidationError("failed reading dataset file: " + path.string());
  return parse_dataset(buf.str(), options);
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string format_dataset(const Dataset& dataset) {
  std::string out;
  if (!dataset.feature_names().empty()) {
    for (const auto& name : dataset.feature_names()) out += name + ",";
    out += "target\n";
  }
  for (Index i = 0; i < dataset.n(); ++i) {
    for (Index j = 0; j < dataset.d(); ++j) {
      append_number(out, dataset.features()(i, j));
      out += ',';
    }
    append_number(out, dataset.targets()[i]);
    out += '\n';
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write dataset file: " + path.string());
  out << format_dataset(dataset);
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(const SeedStream& stream, std::uint64_t index) noexcept {
  return splitmix64((stream.root_seed ^ fnv1a64(stream.stream_label)) + index);
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("RISK_RFE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& body) {
  if (count <= 0) return;
  const auto workers = static_cast<Index>(std::max(1u, threads));
  if (workers == 1 || count == 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (Index w = 0; w < std::min(workers, count); ++w) pool.emplace_back(run);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace riskrfe
