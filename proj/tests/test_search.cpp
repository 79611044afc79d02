#include <algorithm>
#include <cmath>
#include <set>

#include "core/rng.hpp"
#include "doctest.h"
#include "search/search.hpp"

using namespace aqs;
using namespace aqs::search;

namespace {

SearchSpace grid_space(int n, std::uint64_t seed) {
  SearchSpace space;
  core::Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Candidate c;
    c.canonical = "fn_" + std::to_string(1000 + i);
    c.coord = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    space.candidates.push_back(c);
    space.all_unique.push_back(c.canonical);
  }
  space.relu_canonical = space.candidates[0].canonical;
  space.chance = 0.25;
  return space;
}

}  // namespace

TEST_CASE("knr returns the exact accuracy at evaluated points") {
  SurrogateState state;
  state.evaluated = {{"a", {0, 0}, 0.7}, {"b", {1, 0}, 0.2}, {"c", {0, 1}, 0.9}};
  CHECK(knr_predict(state, {0, 0}, 3) == 0.7);
  CHECK(knr_predict(state, {1, 0}, 3) == 0.2);
  // two zero-distance matches average
  state.evaluated.push_back({"d", {0, 0}, 0.5});
  CHECK(knr_predict(state, {0, 0}, 4) == doctest::Approx(0.6));
}

TEST_CASE("knr at the midpoint of two evaluations is their mean") {
  SurrogateState state;
  state.evaluated = {{"a", {0, 0}, 0.4}, {"b", {2, 0}, 0.6}};
  CHECK(knr_predict(state, {1, 0}, 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("knr matches a brute-force weighted average oracle") {
  core::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    SurrogateState state;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i)
      state.evaluated.push_back({"e" + std::to_string(i),
                                 {rng.uniform(-5, 5), rng.uniform(-5, 5)},
                                 rng.uniform(0, 1)});
    const std::array<double, 2> q = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const int k = 1 + static_cast<int>(rng.below(5));
    const double got = knr_predict(state, q, k);

    // oracle: sort everything, take k nearest, inverse-distance weights
    std::vector<std::pair<double, double>> all;
    for (const auto& e : state.evaluated) {
      const double dx = q[0] - e.coord[0], dy = q[1] - e.coord[1];
      all.push_back({std::sqrt(dx * dx + dy * dy), e.accuracy});
    }
    std::sort(all.begin(), all.end());
    const int kk = std::min<int>(k, n);
    double want;
    if (all[0].first == 0.0) {
      double sum = 0.0;
      int cnt = 0;
      for (const auto& [d, a] : all)
        if (d == 0.0) {
          sum += a;
          ++cnt;
        }
      want = sum / cnt;
    } else {
      double ws = 0.0, as = 0.0;
      for (int i = 0; i < kk; ++i) {
        ws += 1.0 / all[i].first;
        as += all[i].second / all[i].first;
      }
      want = as / ws;
    }
    CHECK(std::fabs(got - want) <= 1e-12);
  }
}

TEST_CASE("selection is the argmax with lexicographic ties") {
  SurrogateState state;
  state.evaluated = {{"a", {0, 0}, 1.0}, {"b", {10, 10}, 0.0}};
  state.candidates = {{"zz", {5, 5}}, {"mm", {5, 5}}, {"aa", {9, 9}}};
  // zz and mm share a coordinate, hence tie on prediction; mm sorts first,
  // and aa (placed near the bad evaluation) ranks below both
  auto picks = select_next(state, 2, 2);
  REQUIRE(picks.size() == 2);
  CHECK(picks[0] == "mm");
  CHECK(picks[1] == "zz");

  state.candidates = {{"only", {1, 1}}};
  picks = select_next(state, 1, 1);
  REQUIRE(picks.size() == 1);
  CHECK(picks[0] == "only");
}

TEST_CASE("selection equals an exhaustive scan on a frozen state") {
  core::Rng rng(7);
  SurrogateState state;
  for (int i = 0; i < 12; ++i)
    state.evaluated.push_back({"e" + std::to_string(i),
                               {rng.uniform(0, 10), rng.uniform(0, 10)},
                               rng.uniform(0, 1)});
  for (int i = 0; i < 60; ++i)
    state.candidates.push_back({"c" + std::to_string(100 + i),
                                {rng.uniform(0, 10), rng.uniform(0, 10)}});
  auto picks = select_next(state, 3, 1);
  double best_pred = -1;
  std::string best_name;
  for (const auto& c : state.candidates) {
    const double p = knr_predict(state, c.coord, 3);
    if (p > best_pred || (p == best_pred && c.canonical < best_name)) {
      best_pred = p;
      best_name = c.canonical;
    }
  }
  REQUIRE(picks.size() == 1);
  CHECK(picks[0] == best_name);
}

TEST_CASE("degenerate budget evaluates exactly the init set") {
  SearchSpace space = grid_space(20, 5);
  SearchConfig cfg;
  cfg.budget = 8;
  cfg.seed = 1;
  int calls = 0;
  SearchTrace trace = run_search(
      cfg, [&](const std::string&) { return std::optional<double>(0.5 + 0.01 * calls++); },
      space);
  CHECK(trace.rows.size() == 8);
  CHECK(trace.rows[0].canonical == space.relu_canonical);
}

TEST_CASE("no function is evaluated twice and best-so-far is monotone") {
  SearchSpace space = grid_space(50, 9);
  SearchConfig cfg;
  cfg.budget = 30;
  cfg.seed = 4;
  core::Rng rng(11);
  SearchTrace trace = run_search(
      cfg, [&](const std::string&) { return std::optional<double>(rng.uniform(0, 1)); },
      space);
  CHECK(trace.rows.size() == 30);
  std::set<std::string> seen;
  double best = 0.0;
  for (const auto& row : trace.rows) {
    CHECK(!seen.count(row.canonical));
    seen.insert(row.canonical);
    CHECK(row.best_so_far >= best);
    best = row.best_so_far;
    CHECK(row.best_so_far >= row.accuracy - 1e-15);
  }
}

TEST_CASE("evaluator failures are recorded at chance and the search continues") {
  SearchSpace space = grid_space(20, 13);
  SearchConfig cfg;
  cfg.budget = 12;
  int n = 0;
  SearchTrace trace = run_search(
      cfg,
      [&](const std::string&) {
        ++n;
        return n % 3 == 0 ? std::nullopt : std::optional<double>(0.5);
      },
      space);
  CHECK(trace.rows.size() == 12);
  int chances = 0;
  for (const auto& row : trace.rows)
    if (row.accuracy == space.chance) ++chances;
  CHECK(chances == 4);
}

TEST_CASE("knr finds a planted optimum faster than random search") {
  SearchSpace space = grid_space(200, 17);
  const std::array<double, 2> planted = space.candidates[137].coord;
  const Evaluator oracle = [&](const std::string& canonical) {
    for (const auto& c : space.candidates)
      if (c.canonical == canonical) {
        const double dx = c.coord[0] - planted[0], dy = c.coord[1] - planted[1];
        return std::optional<double>(1.0 - std::sqrt(dx * dx + dy * dy) / 15.0);
      }
    return std::optional<double>(0.0);
  };

  auto steps_to_reach = [&](const SearchTrace& trace, double target) {
    for (const auto& row : trace.rows)
      if (row.best_so_far >= target) return row.step;
    return 10000;
  };

  double knr_steps = 0.0, rnd_steps = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SearchConfig cfg;
    cfg.budget = 100;
    cfg.seed = 100 + trial;
    knr_steps += steps_to_reach(run_search(cfg, oracle, space), 0.98);
    rnd_steps += steps_to_reach(random_search(cfg, oracle, space), 0.98);
  }
  CHECK(knr_steps / 20 < rnd_steps / 20);
}

TEST_CASE("random search exhausts the space exactly once and is deterministic") {
  SearchSpace space = grid_space(25, 19);
  SearchConfig cfg;
  cfg.budget = 25;
  cfg.seed = 7;
  const Evaluator one = [](const std::string&) { return std::optional<double>(0.5); };
  SearchTrace a = random_search(cfg, one, space);
  CHECK(a.rows.size() == 25);
  std::set<std::string> seen;
  for (const auto& row : a.rows) seen.insert(row.canonical);
  CHECK(seen.size() == 25);

  SearchTrace b = random_search(cfg, one, space);
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].canonical == b.rows[i].canonical);
}

TEST_CASE("random search best-so-far matches the order-statistics formula") {
  const int n = 40;
  SearchSpace space = grid_space(n, 23);
  std::vector<double> values(n);
  core::Rng rng(29);
  for (auto& v : values) v = rng.uniform(0, 1);
  const Evaluator table = [&](const std::string& canonical) {
    for (int i = 0; i < n; ++i)
      if (space.all_unique[i] == canonical) return std::optional<double>(values[i]);
    return std::optional<double>(0.0);
  };

  const int m = 7, trials = 1000;
  double mc = 0.0;
  for (int t = 0; t < trials; ++t) {
    SearchConfig cfg;
    cfg.budget = m;
    cfg.seed = 1000 + t;
    mc += random_search(cfg, table, space).rows.back().best_so_far;
  }
  mc /= trials;

  // E[max of m draws w/o replacement] over the sorted values a_(1..n):
  // P(max <= a_(i)) = C(i, m)/C(n, m)
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto prob_le = [&](int i) {  // i = count of smallest values allowed
    if (i < m) return 0.0;
    double p = 1.0;
    for (int t2 = 0; t2 < m; ++t2) p *= static_cast<double>(i - t2) / (n - t2);
    return p;
  };
  double expect = 0.0;
  for (int i = 1; i <= n; ++i)
    expect += sorted[i - 1] * (prob_le(i) - prob_le(i - 1));

  // Monte-Carlo tolerance: ~4 standard errors of the estimate
  CHECK(std::fabs(mc - expect) < 0.03);
}
