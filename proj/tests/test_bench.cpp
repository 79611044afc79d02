#include <cmath>

#include "bench/bench.hpp"
#include "core/rng.hpp"
#include "doctest.h"

using namespace aqs;
using namespace aqs::bench;

namespace {

// A fast task for bench tests: tiny splits and a short schedule.
tensornet::Task fast_blobs(std::uint64_t seed) {
  tensornet::Task task = tensornet::make_task("blobs", seed);
  task.data = tensornet::make_blobs(seed, 400, 200);
  task.train_cfg.epochs = 6;
  task.train_cfg.warmup_epochs = 1;
  return task;
}

BenchmarkTable toy_table(const std::vector<double>& accs) {
  BenchmarkTable t;
  t.header.num_classes = 4;
  for (std::size_t i = 0; i < accs.size(); ++i) {
    BenchRow row;
    row.canonical = "fn_" + std::to_string(100 + i);
    row.accuracy = accs[i];
    row.valid_spectrum = true;
    t.add_row(row);
  }
  return t;
}

search::SearchSpace space_of(const BenchmarkTable& t, std::uint64_t seed) {
  search::SearchSpace space;
  core::Rng rng(seed);
  for (const auto& row : t.rows()) {
    space.candidates.push_back(
        {row.canonical, {rng.uniform(0, 10), rng.uniform(0, 10)}});
    space.all_unique.push_back(row.canonical);
  }
  space.relu_canonical = t.rows().front().canonical;
  space.chance = t.chance();
  return space;
}

}  // namespace

TEST_CASE("benchmark build records relu above chance and zero at chance") {
  tensornet::Task task = fast_blobs(31);
  BuildConfig cfg;
  cfg.runs_per_fn = 1;
  cfg.seed = 5;
  BenchmarkTable table;
  build_benchmark({"unary_relu(x)", "unary_zero(x)"}, task, cfg, table);
  REQUIRE(table.size() == 2);
  const BenchRow* relu = table.find("unary_relu(x)");
  REQUIRE(relu);
  CHECK(relu->accuracy > table.chance() + 0.1);
  CHECK(relu->valid_spectrum);
  const BenchRow* zero = table.find("unary_zero(x)");
  REQUIRE(zero);
  CHECK(zero->accuracy == doctest::Approx(table.chance()).epsilon(1e-9));
  CHECK(zero->degenerate_spectrum);
}

TEST_CASE("benchmark build is resumable and idempotent") {
  tensornet::Task task = fast_blobs(37);
  BuildConfig cfg;
  cfg.runs_per_fn = 3;
  cfg.seed = 11;
  BenchmarkTable table;
  build_benchmark({"unary_relu(x)"}, task, cfg, table);
  REQUIRE(table.size() == 1);
  const double first = table.find("unary_relu(x)")->accuracy;
  const auto runs = table.find("unary_relu(x)")->runs;
  REQUIRE(runs.size() == 3);
  // median of an odd run count is the middle sorted run
  std::vector<double> sorted = runs;
  std::sort(sorted.begin(), sorted.end());
  CHECK(first == sorted[1]);

  // resume with a superset; the existing row is not recomputed
  int emitted = 0;
  build_benchmark({"unary_relu(x)", "unary_tanh(x)"}, task, cfg, table,
                  [&](const BenchRow&) { ++emitted; });
  CHECK(emitted == 1);  // only the new function
  CHECK(table.size() == 2);
  CHECK(table.find("unary_relu(x)")->accuracy == first);

  // a fresh build with the same seed reproduces the rows exactly
  BenchmarkTable again;
  build_benchmark({"unary_relu(x)", "unary_tanh(x)"}, task, cfg, again);
  CHECK(again.find("unary_relu(x)")->accuracy == first);
  CHECK(again.find("unary_tanh(x)")->accuracy ==
        table.find("unary_tanh(x)")->accuracy);
}

TEST_CASE("replay with full-budget random search finds the table maximum") {
  BenchmarkTable table = toy_table({0.3, 0.9, 0.5, 0.25, 0.7, 0.66, 0.31, 0.42});
  search::SearchSpace space = space_of(table, 3);
  search::SearchConfig cfg;
  cfg.budget = static_cast<int>(table.size());
  cfg.trials = 1;
  cfg.seed = 9;
  AggregateCurve curve = replay("random", table, space, cfg);
  REQUIRE(curve.mean.size() == table.size());
  CHECK(curve.mean.back() == doctest::Approx(0.9));
  CHECK(curve.ci_lo.back() == curve.mean.back());  // one trial, zero width
}

TEST_CASE("replay aggregates mean and confidence intervals over trials") {
  core::Rng rng(41);
  std::vector<double> accs(40);
  for (auto& a : accs) a = rng.uniform(0.25, 0.95);
  BenchmarkTable table = toy_table(accs);
  search::SearchSpace space = space_of(table, 7);
  search::SearchConfig cfg;
  cfg.budget = 20;
  cfg.trials = 25;
  cfg.seed = 3;
  AggregateCurve knr = replay("knr", table, space, cfg);
  AggregateCurve rnd = replay("random", table, space, cfg);
  REQUIRE(knr.mean.size() == 20);
  REQUIRE(rnd.mean.size() == 20);
  for (std::size_t s = 0; s < 20; ++s) {
    CHECK(knr.ci_lo[s] <= knr.mean[s]);
    CHECK(knr.mean[s] <= knr.ci_hi[s]);
    if (s > 0) CHECK(knr.mean[s] >= knr.mean[s - 1] - 1e-12);
  }
  // both reach the optimum eventually on this tiny table
  CHECK(knr.reach_optimum.back() >= 0.0);
}

TEST_CASE("replay raises on rows missing from the table") {
  BenchmarkTable table = toy_table({0.5, 0.6});
  search::SearchSpace space = space_of(table, 5);
  space.all_unique.push_back("fn_missing");
  search::SearchConfig cfg;
  cfg.budget = 3;
  cfg.trials = 1;
  cfg.seed = 2;
  CHECK_THROWS_AS(replay("random", table, space, cfg), std::runtime_error);
}

TEST_CASE("cross-task scatter pairs shared functions") {
  BenchmarkTable a = toy_table({0.3, 0.5, 0.7});
  BenchmarkTable b = toy_table({0.3, 0.5, 0.7});
  ScatterResult self = cross_task_scatter(a, b);
  REQUIRE(self.points.size() == 3);
  for (const auto& p : self.points) CHECK(p.acc_a == p.acc_b);
  CHECK(self.pearson == doctest::Approx(1.0));

  BenchmarkTable c;
  c.header.num_classes = 4;
  BenchRow row;
  row.canonical = "other_fn";
  row.accuracy = 0.5;
  c.add_row(row);
  CHECK_THROWS_AS(cross_task_scatter(a, c), std::runtime_error);
}
