#include <doctest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "riskrfe/io.hpp"
#include "riskrfe/rfe.hpp"

using namespace riskrfe;

namespace {

CandidateMap map_of(std::initializer_list<std::pair<Index, double>> v) {
  CandidateMap m;
  for (auto [f, o] : v) m[f] = {ObjectiveValue::make(1.0, 0.0, o), true};
  return m;
}

Matrix zeroed(Matrix X, const std::vector<Index>& removed) {
  for (Index i : removed) X.col(i).setZero();
  return X;
}

// y = sign(x0) on n points with two noise features.
Dataset sign_toy(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix X = oracle::uniform(rng, n, 3);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(X(i, 0)) < 0.2) X(i, 0) = X(i, 0) < 0 ? -0.5 : 0.5;
    y[i] = X(i, 0) >= 0 ? 1.0 : -1.0;
  }
  return Dataset(X, y, Task::Classification);
}

double oracle_objective(const Dataset& ds, const std::vector<Index>& removed, double gamma, double lambda) {
  const Matrix G = oracle::gaussian_gram(zeroed(ds.features(), removed), gamma);
  return oracle::dual_fista(oracle::Loss::Hinge, 0.0, G, ds.targets(), lambda, true).primal;
}

RunConfig gaussian_config(double gamma, double lambda) {
  RunConfig c;
  c.kernel = KernelSpec::gaussian(gamma);
  c.loss = LossSpec::hinge();
  c.lambda = lambda;
  c.solver_tolerance = 1e-10;
  c.max_solver_iterations = 1000000;
  return c;
}

}  // namespace

TEST_CASE("rfe_step tie rule and cycle size") {
  const auto m = map_of({{2, 0.5}, {0, 0.5}, {1, 0.9}});
  const auto before = ObjectiveValue::make(1.0, 0.0, 0.3);
  const auto s1 = rfe_step(m, before, 1);
  CHECK(s1.removed == std::vector<Index>{0});
  CHECK(s1.best_delta == doctest::Approx(0.2));
  CHECK(rfe_step(m, before, 2).removed == std::vector<Index>{0, 2});
  CHECK(rfe_step(m, before, 5).removed == std::vector<Index>{0, 2, 1});
  CHECK(rfe_step(map_of({{4, 1.0}}), before, 1).removed == std::vector<Index>{4});
  CHECK_THROWS_AS(rfe_step(CandidateMap{}, before, 1), ValidationError);
}

TEST_CASE("masking an all-zero column changes nothing") {
  std::mt19937_64 rng(2);
  for (Index d : {2, 5}) {
    Matrix X = oracle::uniform(rng, 15, d);
    X.col(1).setZero();
    Vector y = X.col(0).unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    const Dataset ds(X, y, Task::Classification);
    for (const KernelSpec& k : {KernelSpec::gaussian(1.0), KernelSpec::linear()}) {
      RunConfig c;
      c.kernel = k;
      c.lambda = 0.05;
      const auto before = evaluate_mask(ds, c, FeatureMask(d));
      const auto cands = evaluate_candidates(ds, c, FeatureMask(d));
      CHECK(cands.at(1).objective.regularized == doctest::Approx(before.objective.regularized).epsilon(1e-12));
      // and masking it does not move any other candidate
      const auto after = evaluate_candidates(ds, c, FeatureMask(d, {1}));
      for (const auto& [f, v] : after)
        CHECK(v.objective.regularized ==
              doctest::Approx(evaluate_mask(ds, c, FeatureMask(d, {f})).objective.regularized).epsilon(1e-12));
    }
  }
}

TEST_CASE("single active feature gives the constant model") {
  const Dataset ds = sign_toy(10, 1);
  RunConfig c = gaussian_config(1.0, 0.1);
  const auto cands = evaluate_candidates(ds, c, FeatureMask(3, {1, 2}));
  REQUIRE(cands.size() == 1);
  CHECK(cands.count(0) == 1);
  CHECK(cands.at(0).objective.regularized ==
        doctest::Approx(evaluate_mask(ds, c, FeatureMask(3, {0, 1, 2})).objective.regularized));
}

TEST_CASE("candidate objectives on the sign toy match oracle refits") {
  const Dataset ds = sign_toy(6, 3);
  const double gamma = 1.0, lambda = 0.05;
  const RunConfig c = gaussian_config(gamma, lambda);
  const auto before = evaluate_mask(ds, c, FeatureMask(3));
  const auto cands = evaluate_candidates(ds, c, FeatureMask(3));
  CHECK(std::abs(before.objective.regularized - oracle_objective(ds, {}, gamma, lambda)) <= 1e-6);
  for (Index f = 0; f < 3; ++f)
    CHECK(std::abs(cands.at(f).objective.regularized - oracle_objective(ds, {f}, gamma, lambda)) <= 1e-6);
  const double d0 = cands.at(0).objective.regularized - before.objective.regularized;
  const double d1 = cands.at(1).objective.regularized - before.objective.regularized;
  const double d2 = cands.at(2).objective.regularized - before.objective.regularized;
  CHECK(d0 > d1);
  CHECK(d0 > d2);
  CHECK(d0 > 0.0);
}

TEST_CASE("rank-all on the sign toy matches an exhaustive oracle path") {
  const Dataset ds = sign_toy(20, 5);
  const double gamma = 1.0, lambda = 0.02;
  const auto res = run_rfe(ds, gaussian_config(gamma, lambda));
  CHECK(res.ranking.order.back() == 0);
  CHECK(res.trace.stop_reason == StopReason::RuleRankAll);

  // the greedy path through oracle objectives of all 2^3 masks
  std::map<std::vector<Index>, double> all;
  for (int bits = 0; bits < 8; ++bits) {
    std::vector<Index> r;
    for (Index f = 0; f < 3; ++f)
      if (bits & (1 << f)) r.push_back(f);
    all[r] = oracle_objective(ds, r, gamma, lambda);
  }
  std::vector<Index> removed, order;
  while (removed.size() < 3) {
    Index best = -1;
    double best_v = std::numeric_limits<double>::infinity();
    for (Index f = 0; f < 3; ++f) {
      if (std::find(removed.begin(), removed.end(), f) != removed.end()) continue;
      auto r = removed;
      r.push_back(f);
      std::sort(r.begin(), r.end());
      if (all[r] < best_v) {
        best_v = all[r];
        best = f;
      }
    }
    removed.push_back(best);
    order.push_back(best);
  }
  CHECK(order == res.ranking.order);
}

TEST_CASE("threshold boundaries with a single feature") {
  const Dataset ds = sign_toy(12, 7);
  Matrix x1 = ds.features().col(0);
  const Dataset one(x1, ds.targets(), Task::Classification);
  RunConfig c = gaussian_config(1.0, 0.05);

  c.stopping = FixedThreshold{1e-12};
  auto res = run_rfe(one, c);
  CHECK(res.trace.stopped_early);
  CHECK(res.trace.stop_reason == StopReason::ThresholdExceeded);
  REQUIRE(res.trace.cycles.size() == 1);
  CHECK(res.trace.cycles[0].removed.empty());
  CHECK(res.trace.final_mask.empty());
  CHECK(res.ranking.order == std::vector<Index>{0});
  CHECK(res.ranking.survivors_extended);
  CHECK(res.trace.cycles[0].best_delta > *res.trace.threshold);

  c.stopping = FixedThreshold{1e9};
  res = run_rfe(one, c);
  CHECK_FALSE(res.trace.stopped_early);
  CHECK(res.trace.stop_reason == StopReason::AllRemoved);
  CHECK(res.trace.final_mask.active_count() == 0);
}

TEST_CASE("duplicated feature under the linear kernel") {
  std::mt19937_64 rng(9);
  Matrix X = oracle::uniform(rng, 25, 3);
  X.col(1) = X.col(0);
  const Vector y = 2.0 * X.col(0) + 0.1 * oracle::uniform(rng, 25, 1);
  const Dataset ds(X, y, Task::Regression);
  RunConfig c;
  c.kernel = KernelSpec::linear();
  c.loss = LossSpec::epsilon_insensitive(0.1);
  c.lambda = 0.01;
  c.solver_tolerance = 1e-10;
  c.max_solver_iterations = 2000000;
  const auto res = run_rfe(ds, c);
  const auto& c0 = res.trace.cycles[0];
  // the two copies are interchangeable
  CHECK(std::abs(c0.candidates.at(0).objective.regularized - c0.candidates.at(1).objective.regularized) <= 1e-7);
  CHECK(c0.removed == std::vector<Index>{2});
  // the last survivor is one of the two copies
  CHECK((res.ranking.order.back() == 0 || res.ranking.order.back() == 1));
}

TEST_CASE("duplicated feature in the linear space leaves the minimum unchanged") {
  // Duplicating a column spans the same function space, so the unregularized
  // risk is unchanged by removing either copy.
  std::mt19937_64 rng(10);
  Matrix X = oracle::uniform(rng, 30, 3);
  X.col(1) = X.col(0);
  const Vector y = X.col(0) - 0.5 * X.col(2) + 0.1 * oracle::uniform(rng, 30, 1);
  RunConfig c;
  c.learner = LearnerKind::LinearErm;
  c.loss = LossSpec::squared_error();
  const auto res = run_rfe(Dataset(X, y, Task::Regression), c);
  CHECK(std::abs(res.trace.cycles[0].best_delta) <= 1e-10);
  CHECK(res.trace.cycles[0].removed == std::vector<Index>{0});
}

TEST_CASE("trace invariants, determinism and parallel equivalence") {
  std::mt19937_64 rng(12);
  const Matrix X = oracle::uniform(rng, 30, 6);
  const Vector y = (X.col(0) - X.col(3)).unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
  const Dataset ds(X, y, Task::Classification);
  RunConfig c = gaussian_config(1.5, 0.02);
  const auto a = run_rfe(ds, c);
  const auto b = run_rfe(ds, c);
  c.threads = 3;
  const auto p = run_rfe(ds, c);
  CHECK(json(a.trace).dump() == json(b.trace).dump());
  CHECK(json(a.trace).dump() == json(p.trace).dump());
  CHECK(a.ranking.order == p.ranking.order);

  std::set<Index> seen;
  for (const auto& cyc : a.trace.cycles) {
    for (Index f : cyc.removed) CHECK(seen.insert(f).second);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [f, v] : cyc.candidates) best = std::min(best, v.objective.regularized);
    CHECK(cyc.best_delta == best - cyc.objective_before.regularized);
    for (Index f : cyc.removed) CHECK(cyc.candidates.at(f).objective.regularized == best);
  }
  CHECK(seen == std::set<Index>(a.trace.final_mask.removed().begin(), a.trace.final_mask.removed().end()));
  std::vector<Index> sorted = a.ranking.order;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < 6; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  for (Index i = 0; i < 6; ++i)
    CHECK(a.ranking.order[static_cast<std::size_t>(a.ranking.importance_rank[static_cast<std::size_t>(i)])] == i);
}

TEST_CASE("linear-ERM learner compares the empirical risk alone") {
  std::mt19937_64 rng(13);
  const Matrix X = oracle::uniform(rng, 40, 4);
  const Vector y = 3.0 * X.col(2) + 0.2 * oracle::uniform(rng, 40, 1);
  const Dataset ds(X, y, Task::Regression);
  RunConfig c;
  c.learner = LearnerKind::LinearErm;
  c.loss = LossSpec::squared_error();
  const auto cands = evaluate_candidates(ds, c, FeatureMask(4));
  for (const auto& [f, v] : cands) {
    CHECK(v.objective.rkhs_norm_sq == 0.0);
    CHECK(v.objective.regularized == v.objective.empirical_risk);
    std::vector<Index> keep;
    for (Index j = 0; j < 4; ++j)
      if (j != f) keep.push_back(j);
    Matrix Xk(40, 3);
    for (Index j = 0; j < 3; ++j) Xk.col(j) = X.col(keep[static_cast<std::size_t>(j)]);
    CHECK(std::abs(v.objective.empirical_risk - oracle::ols_risk(Xk, y)) <= 1e-10);
  }
  const auto res = run_rfe(ds, c);
  CHECK(res.ranking.order.back() == 2);
  for (std::size_t k = 1; k < res.trace.cycles.size(); ++k)
    CHECK(res.trace.cycles[k].objective_before.regularized >=
          res.trace.cycles[k - 1].objective_before.regularized - 1e-12);
}

TEST_CASE("linear kernel objective_before is non-decreasing") {
  std::mt19937_64 rng(14);
  const Matrix X = oracle::uniform(rng, 40, 5);
  const Vector y = (X.col(0) + 0.5 * X.col(1) - 0.3 * X.col(4)).unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
  RunConfig c;
  c.kernel = KernelSpec::linear();
  c.lambda = 0.01;
  c.solver_tolerance = 1e-10;
  c.max_solver_iterations = 1000000;
  const auto res = run_rfe(Dataset(X, y, Task::Classification), c);
  for (std::size_t k = 1; k < res.trace.cycles.size(); ++k)
    CHECK(res.trace.cycles[k].objective_before.regularized >=
          res.trace.cycles[k - 1].objective_before.regularized - 1e-6);
}

TEST_CASE("cycle size two") {
  std::mt19937_64 rng(15);
  const Matrix X = oracle::uniform(rng, 25, 5);
  const Vector y = X.col(4).unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
  RunConfig c = gaussian_config(1.0, 0.05);
  c.cycle_size = 2;
  const auto res = run_rfe(Dataset(X, y, Task::Classification), c);
  REQUIRE(res.trace.cycles.size() == 3);
  CHECK(res.trace.cycles[0].removed.size() == 2);
  CHECK(res.trace.cycles[1].removed.size() == 2);
  CHECK(res.trace.cycles[2].removed.size() == 1);
  CHECK(res.ranking.order.back() == 4);
  // objective_before after a chunk is a fresh refit of the new mask
  const auto refit = evaluate_mask(Dataset(X, y, Task::Classification), c,
                                   FeatureMask(5, res.trace.cycles[0].removed));
  CHECK(res.trace.cycles[1].objective_before.regularized == refit.objective.regularized);
}

TEST_CASE("survivors follow their last candidate objectives") {
  RfeTrace t;
  CycleRecord r;
  r.candidates = map_of({{0, 0.9}, {1, 0.2}, {2, 0.5}, {3, 0.5}});
  t.cycles.push_back(r);
  t.final_mask = FeatureMask(4);
  t.stopped_early = true;
  t.stop_reason = StopReason::ThresholdExceeded;
  const auto rk = make_ranking(t);
  CHECK(rk.order == std::vector<Index>{1, 2, 3, 0});
  CHECK(rk.survivors_extended);
}

TEST_CASE("run config validation") {
  const Dataset ds = sign_toy(10, 2);
  RunConfig c;
  c.cycle_size = 4;
  CHECK_THROWS_AS(run_rfe(ds, c), ValidationError);
  c.cycle_size = 1;
  c.lambda = -1;
  CHECK_THROWS_AS(run_rfe(ds, c), ValidationError);
  c.lambda = 1;
  c.loss = LossSpec::squared_error();
  CHECK_THROWS_AS(run_rfe(ds, c), ValidationError);
  c.loss = LossSpec::hinge();
  c.learner = LearnerKind::LinearErm;
  CHECK_THROWS_AS(run_rfe(ds, c), ValidationError);
}
