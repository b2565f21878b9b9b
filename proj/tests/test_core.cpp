#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "riskrfe/core.hpp"

using namespace riskrfe;

namespace {

LoadOptions cls(bool coerce = false) { return {Task::Classification, false, coerce}; }

}  // namespace

TEST_CASE("parse classification csv") {
  const auto ds = parse_dataset("1.0,2.0,1\n-1.0,0.5,-1", cls());
  CHECK(ds.n() == 2);
  CHECK(ds.d() == 2);
  CHECK(ds.targets()[0] == 1.0);
  CHECK(ds.targets()[1] == -1.0);
  CHECK(ds.features()(1, 1) == 0.5);
}

TEST_CASE("binary labels coerced only on request") {
  const std::string text = "0.1,0\n0.2,1\n0.3,0";
  CHECK_THROWS_AS(parse_dataset(text, cls(false)), ValidationError);
  const auto ds = parse_dataset(text, cls(true));
  CHECK(ds.targets()[0] == -1.0);
  CHECK(ds.targets()[1] == 1.0);
  CHECK(ds.targets()[2] == -1.0);
  CHECK_THROWS_AS(parse_dataset("0.1,2\n", cls(true)), ValidationError);
}

TEST_CASE("non-numeric cell reports its position") {
  try {
    parse_dataset("1,2,3\n4,abc,6\n", {});
    FAIL("expected NonNumericCell");
  } catch (const NonNumericCell& e) {
    CHECK(e.row() == 1);
    CHECK(e.col() == 1);
  }
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_dataset("1,2,3\n4,5\n", {}), ValidationError);
  CHECK_THROWS_AS(parse_dataset("", {}), ValidationError);
  CHECK_THROWS_AS(parse_dataset("\n\n", {}), ValidationError);
  CHECK_THROWS_AS(parse_dataset("1,nan\n", {}), ValidationError);
  CHECK_THROWS_AS(parse_dataset("1,2\n", cls()), ValidationError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/data.csv", {}), ValidationError);
}

TEST_CASE("header row names the features") {
  const auto ds = parse_dataset("a,b,y\n1,2,3\n", {Task::Regression, true, false});
  REQUIRE(ds.feature_names().size() == 2);
  CHECK(ds.feature_names()[1] == "b");
  CHECK(ds.n() == 1);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset(Matrix(0, 2), Vector(0), Task::Regression), ValidationError);
  Matrix x(1, 1);
  x << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset(x, Vector::Ones(1), Task::Regression), ValidationError);
  CHECK_THROWS_AS(Dataset(Matrix::Zero(1, 1), Vector::Constant(1, 0.5), Task::Classification),
                  ValidationError);
}

TEST_CASE("save/load round trip is bit exact") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Matrix x(7, 3);
  Vector y(7);
  for (Index i = 0; i < 7; ++i) {
    for (Index j = 0; j < 3; ++j) x(i, j) = z(rng) * std::pow(10.0, static_cast<double>(j * 3 - 4));
    y[i] = z(rng);
  }
  const Dataset ds(x, y, Task::Regression);
  const auto back = parse_dataset(format_dataset(ds), {});
  CHECK(back.features() == ds.features());
  CHECK(back.targets() == ds.targets());
  CHECK(format_dataset(back) == format_dataset(ds));

  const Dataset named(x, y, Task::Regression, {"p", "q", "r"});
  const auto path = std::filesystem::path(RISK_RFE_TEST_TMP) / "roundtrip.csv";
  std::filesystem::create_directories(path.parent_path());
  save_dataset(path, named);
  const auto loaded = load_dataset(path, {Task::Regression, true, false});
  CHECK(loaded.features() == x);
  CHECK(loaded.feature_names() == named.feature_names());
}

TEST_CASE("feature mask set algebra") {
  const FeatureMask m(5, {3, 1});
  CHECK(m.removed() == std::vector<Index>{1, 3});
  CHECK(m.active() == std::vector<Index>{0, 2, 4});
  CHECK(m.active_count() == 3);
  CHECK(m.is_removed(3));
  CHECK_FALSE(m.is_removed(2));
  CHECK(m.with_removed(2).with_restored(2) == m);
  CHECK(m.with_restored(1).with_removed(1) == m);
  CHECK_THROWS_AS(FeatureMask(3, {1, 1}), ValidationError);
  CHECK_THROWS_AS(FeatureMask(3, {3}), ValidationError);
  CHECK_THROWS_AS(m.with_removed(1), ValidationError);

  // active and removed partition {0..d-1}
  std::set<Index> all;
  for (Index i : m.active()) all.insert(i);
  for (Index i : m.removed()) all.insert(i);
  CHECK(all.size() == 5);
}

TEST_CASE("derive_seed") {
  const SeedStream rep{7, "rep"};
  CHECK(derive_seed(rep, 0) == derive_seed(rep, 0));
  CHECK(derive_seed(rep, 0) != derive_seed(rep, 1));
  CHECK(derive_seed(rep, 5) != derive_seed({7, "fold"}, 5));

  // declared mixing function, evaluated independently
  auto fnv = [](std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  };
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  CHECK(derive_seed(rep, 3) == mix((7ULL ^ fnv("rep")) + 3));

  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(rep, i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](Index i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](Index i) {
                                 if (i == 7) throw ValidationError("boom");
                               }),
                  ValidationError);
}
