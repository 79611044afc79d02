#include <algorithm>
#include <cmath>

#include "core/rng.hpp"
#include "doctest.h"
#include "embed/embed.hpp"

using namespace aqs;
using namespace aqs::embed;

namespace {

Metric table_metric(const std::vector<std::vector<double>>& pts) {
  return [&pts](std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < pts[i].size(); ++d) {
      const double diff = pts[i][d] - pts[j][d];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };
}

std::vector<std::string> index_keys(std::size_t n, const char* prefix = "p") {
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < n; ++i)
    keys.push_back(prefix + std::string("_") + std::to_string(1000 + i));
  return keys;
}

}  // namespace

TEST_CASE("knn of collinear points picks the nearer endpoint") {
  std::vector<std::vector<double>> pts = {{0.0}, {1.0}, {3.0}};
  KnnGraph g = knn_graph(3, table_metric(pts), 1);
  CHECK(g.neighbors[1][0].index == 0);  // 1 is closer to 0 than to 3
  CHECK(g.neighbors[0][0].index == 1);
  CHECK(g.neighbors[2][0].index == 1);
}

TEST_CASE("duplicate feature vectors are mutual neighbors at distance zero") {
  std::vector<std::vector<double>> pts = {{2.0, 2.0}, {2.0, 2.0}, {5.0, 5.0}};
  KnnGraph g = knn_graph(3, table_metric(pts), 1);
  CHECK(g.neighbors[0][0].index == 1);
  CHECK(g.neighbors[0][0].distance == 0.0);
  CHECK(g.neighbors[1][0].index == 0);
  CHECK(g.neighbors[1][0].distance == 0.0);
}

TEST_CASE("knn matches a full-sort oracle on random points") {
  core::Rng rng(3);
  const std::size_t n = 500;
  std::vector<std::vector<double>> pts(n, std::vector<double>(8));
  for (auto& p : pts)
    for (auto& v : p) v = rng.normal();
  Metric m = table_metric(pts);
  const int k = 7;
  KnnGraph g = knn_graph(n, m, k);
  for (std::size_t i = 0; i < n; i += 37) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) all.push_back({m(i, j), j});
    std::sort(all.begin(), all.end());
    for (int t = 0; t < k; ++t) CHECK(g.neighbors[i][t].index == all[t].second);
  }
  CHECK_THROWS_AS(knn_graph(0, m, 1), std::invalid_argument);
  CHECK_THROWS_AS(knn_graph(3, m, 3), std::invalid_argument);
}

TEST_CASE("nearest neighbors get directed membership one") {
  core::Rng rng(5);
  const std::size_t n = 40;
  std::vector<std::vector<double>> pts(n, std::vector<double>(3));
  for (auto& p : pts)
    for (auto& v : p) v = rng.normal();
  KnnGraph knn = knn_graph(n, table_metric(pts), 5);
  FuzzyGraph g = fuzzy_set(knn);
  CHECK(g.n == n);
  // the symmetrized weight of (i, nn(i)) must be 1: a + b - ab with a = 1
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t nn = knn.neighbors[i][0].index;
    bool found = false;
    for (const FuzzyEdge& e : g.edges) {
      if ((e.i == i && e.j == nn) || (e.i == nn && e.j == i)) {
        CHECK(e.weight == doctest::Approx(1.0).epsilon(1e-12));
        found = true;
      }
    }
    CHECK(found);
  }
  for (const FuzzyEdge& e : g.edges) {
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0 + 1e-12);
    CHECK(e.i < e.j);
  }
}

TEST_CASE("sigma binary search reproduces the target row sum") {
  core::Rng rng(7);
  const std::size_t n = 64;
  std::vector<std::vector<double>> pts(n, std::vector<double>(4));
  for (auto& p : pts)
    for (auto& v : p) v = rng.normal();
  const int k = 6;
  KnnGraph knn = knn_graph(n, table_metric(pts), k);
  // recompute the row sums from the published membership values: for each
  // point the directed weights before symmetrization satisfy
  // sum exp(-(d - rho)/sigma) = log2(k)
  FuzzyGraph g = fuzzy_set(knn);
  (void)g;
  for (std::size_t i = 0; i < n; i += 9) {
    const double rho = knn.neighbors[i][0].distance;
    // reconstruct sigma by solving once more, then check the residual
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), sigma = 1.0;
    const double target = std::log2(double(k));
    for (int it = 0; it < 64; ++it) {
      double sum = 0.0;
      for (const Neighbor& nb : knn.neighbors[i]) {
        const double d = nb.distance - rho;
        sum += d <= 0.0 ? 1.0 : std::exp(-d / sigma);
      }
      if (std::fabs(sum - target) < 1e-6) break;
      if (sum > target) {
        hi = sigma;
        sigma = (lo + hi) / 2;
      } else {
        lo = sigma;
        sigma = std::isinf(hi) ? sigma * 2 : (lo + hi) / 2;
      }
    }
    double sum = 0.0;
    for (const Neighbor& nb : knn.neighbors[i]) {
      const double d = nb.distance - rho;
      sum += d <= 0.0 ? 1.0 : std::exp(-d / sigma);
    }
    CHECK(std::fabs(sum - target) < 1e-5);
  }
}

TEST_CASE("symmetrization and union follow a + b - ab") {
  FuzzyGraph a, b;
  a.n = b.n = 3;
  a.edges = {{0, 1, 0.5}, {1, 2, 1.0}};
  b.edges = {{0, 1, 0.5}, {0, 2, 0.25}};
  FuzzyGraph u = union_graphs(a, b);
  REQUIRE(u.edges.size() == 3);
  CHECK(u.edges[0].weight == doctest::Approx(0.75));   // 0.5 + 0.5 - 0.25
  CHECK(u.edges[1].weight == doctest::Approx(0.25));   // only in b
  CHECK(u.edges[2].weight == doctest::Approx(1.0));    // only in a

  // identity element and commutativity
  FuzzyGraph zero;
  zero.n = 3;
  FuzzyGraph u2 = union_graphs(a, zero);
  REQUIRE(u2.edges.size() == a.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i)
    CHECK(u2.edges[i].weight == a.edges[i].weight);

  FuzzyGraph ba = union_graphs(b, a);
  REQUIRE(ba.edges.size() == u.edges.size());
  for (std::size_t i = 0; i < u.edges.size(); ++i) {
    CHECK(ba.edges[i].i == u.edges[i].i);
    CHECK(ba.edges[i].weight == doctest::Approx(u.edges[i].weight).epsilon(1e-15));
  }

  FuzzyGraph c;
  c.n = 4;
  CHECK_THROWS_AS(union_graphs(a, c), std::invalid_argument);
}

TEST_CASE("union membership bounds and monotonicity on random graphs") {
  core::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    FuzzyGraph a, b;
    a.n = b.n = 20;
    for (std::uint32_t i = 0; i < 20; ++i)
      for (std::uint32_t j = i + 1; j < 20; ++j) {
        if (rng.uniform() < 0.3) a.edges.push_back({i, j, rng.uniform()});
        if (rng.uniform() < 0.3) b.edges.push_back({i, j, rng.uniform()});
      }
    FuzzyGraph u = union_graphs(a, b);
    auto find = [](const FuzzyGraph& g, std::uint32_t i, std::uint32_t j) {
      for (const FuzzyEdge& e : g.edges)
        if (e.i == i && e.j == j) return e.weight;
      return 0.0;
    };
    for (const FuzzyEdge& e : u.edges) {
      CHECK(e.weight >= 0.0);
      CHECK(e.weight <= 1.0);
      CHECK(e.weight >= std::fmax(find(a, e.i, e.j), find(b, e.i, e.j)) - 1e-15);
    }
  }
}

TEST_CASE("curve fit reproduces the documented constants for min_dist 0.1") {
  auto [a, b] = fit_curve(0.1);
  CHECK(a == doctest::Approx(1.576943460269765).epsilon(1e-3));
  CHECK(b == doctest::Approx(0.8950608778515733).epsilon(1e-3));
}

TEST_CASE("two points with membership one end close together") {
  FuzzyGraph g;
  g.n = 2;
  g.edges = {{0, 1, 1.0}};
  LayoutConfig cfg;
  cfg.n_neighbors = 1;
  cfg.seed = 3;
  // with two vertices every negative draw hits the pair's only neighbor,
  // so the degenerate instance is run attraction-only
  cfg.negative_sample_rate = 0;
  EmbeddingAtlas atlas = layout(g, index_keys(2), cfg);
  const double dx = atlas.coords[0][0] - atlas.coords[1][0];
  const double dy = atlas.coords[0][1] - atlas.coords[1][1];
  CHECK(std::sqrt(dx * dx + dy * dy) < cfg.min_dist + 0.5);
}

TEST_CASE("well-separated clusters embed linearly separably") {
  core::Rng rng(13);
  const std::size_t n = 60;
  std::vector<std::vector<double>> pts(n, std::vector<double>(4));
  for (std::size_t i = 0; i < n; ++i)
    for (auto& v : pts[i]) v = rng.normal() + (i < n / 2 ? 0.0 : 40.0);
  KnnGraph knn = knn_graph(n, table_metric(pts), 5);
  FuzzyGraph g = fuzzy_set(knn);
  LayoutConfig cfg;
  cfg.n_neighbors = 5;
  cfg.seed = 17;
  EmbeddingAtlas atlas = layout(g, index_keys(n), cfg);

  // project on the direction between the cluster centroids; the two
  // clusters must split cleanly by a 1-D threshold
  std::array<double, 2> c0 = {0, 0}, c1 = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = i < n / 2 ? c0 : c1;
    c[0] += atlas.coords[i][0] / (n / 2);
    c[1] += atlas.coords[i][1] / (n / 2);
  }
  const double ux = c1[0] - c0[0], uy = c1[1] - c0[1];
  double max0 = -1e300, min1 = 1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const double proj = atlas.coords[i][0] * ux + atlas.coords[i][1] * uy;
    if (i < n / 2)
      max0 = std::fmax(max0, proj);
    else
      min1 = std::fmin(min1, proj);
  }
  CHECK(max0 < min1);
}

TEST_CASE("layout is equivariant under input permutation") {
  core::Rng rng(19);
  const std::size_t n = 30;
  std::vector<std::vector<double>> pts(n, std::vector<double>(3));
  for (auto& p : pts)
    for (auto& v : p) v = rng.normal();
  std::vector<std::string> keys = index_keys(n);
  KnnGraph knn = knn_graph(n, table_metric(pts), 4);
  FuzzyGraph g = fuzzy_set(knn);
  LayoutConfig cfg;
  cfg.n_neighbors = 4;
  cfg.seed = 23;
  cfg.epochs = 50;
  EmbeddingAtlas atlas = layout(g, keys, cfg);

  // permute everything consistently
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  core::Rng prng(29);
  prng.shuffle(perm);
  std::vector<std::size_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;

  std::vector<std::vector<double>> pts2(n);
  std::vector<std::string> keys2(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts2[i] = pts[perm[i]];
    keys2[i] = keys[perm[i]];
  }
  KnnGraph knn2 = knn_graph(n, table_metric(pts2), 4);
  FuzzyGraph g2 = fuzzy_set(knn2);
  EmbeddingAtlas atlas2 = layout(g2, keys2, cfg);

  for (std::size_t i = 0; i < n; ++i) {
    CHECK(atlas2.coords[i][0] == doctest::Approx(atlas.coords[perm[i]][0]).epsilon(1e-12));
    CHECK(atlas2.coords[i][1] == doctest::Approx(atlas.coords[perm[i]][1]).epsilon(1e-12));
  }
}

TEST_CASE("embed_new pins duplicates and splits ties at the midpoint") {
  EmbeddingAtlas atlas;
  atlas.coords = {{0.0, 0.0}, {4.0, 0.0}, {10.0, 10.0}};
  atlas.curve_a = 1.577;
  atlas.curve_b = 0.895;

  // duplicate of point 1
  auto dup = embed_new(
      atlas, [](std::size_t i) { return i == 1 ? 0.0 : 7.0 + i; }, 2, 0);
  CHECK(std::fabs(dup[0] - 4.0) < 1e-6);
  CHECK(std::fabs(dup[1] - 0.0) < 1e-6);

  // equidistant to points 0 and 1, far from 2
  auto mid = embed_new(
      atlas, [](std::size_t i) { return i < 2 ? 1.0 : 50.0; }, 2, 0);
  CHECK(mid[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(mid[1] == doctest::Approx(0.0).epsilon(1e-9));

  EmbeddingAtlas empty;
  CHECK_THROWS_AS(embed_new(empty, [](std::size_t) { return 1.0; }, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("trustworthiness is high for faithful embeddings, low for shuffled") {
  core::Rng rng(31);
  const std::size_t n = 80;
  std::vector<std::vector<double>> pts(n, std::vector<double>(1));
  for (std::size_t i = 0; i < n; ++i) pts[i][0] = static_cast<double>(i);
  Metric m = table_metric(pts);
  // the identity embedding of 1-d points preserves all neighborhoods
  std::vector<std::array<double, 2>> faithful(n);
  for (std::size_t i = 0; i < n; ++i) faithful[i] = {pts[i][0], 0.0};
  CHECK(trustworthiness(n, m, faithful, 10) == doctest::Approx(1.0));

  std::vector<std::array<double, 2>> shuffled(n);
  for (std::size_t i = 0; i < n; ++i)
    shuffled[i] = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
  const double t = trustworthiness(n, m, shuffled, 10);
  CHECK(t < 0.8);
  CHECK(t > 0.2);
}

TEST_CASE("transform places held-out points better than random") {
  core::Rng rng(37);
  const std::size_t n = 120;
  std::vector<std::vector<double>> pts(n + 20, std::vector<double>(4));
  for (std::size_t i = 0; i < n + 20; ++i) {
    const double shift = (i % 3) * 25.0;
    for (auto& v : pts[i]) v = rng.normal() + shift;
  }
  std::vector<std::vector<double>> table(pts.begin(), pts.begin() + n);
  Metric m = table_metric(table);
  KnnGraph knn = knn_graph(n, m, 6);
  FuzzyGraph g = fuzzy_set(knn);
  LayoutConfig cfg;
  cfg.n_neighbors = 6;
  cfg.seed = 41;
  EmbeddingAtlas atlas = layout(g, index_keys(n), cfg);

  // held-out points should land nearer their true cluster centroid than a
  // random placement does in most trials
  double wins = 0;
  core::Rng prng(43);
  for (std::size_t h = n; h < n + 20; ++h) {
    auto coord = embed_new(
        atlas,
        [&](std::size_t i) {
          double acc = 0.0;
          for (std::size_t d = 0; d < 4; ++d) {
            const double diff = pts[h][d] - table[i][d];
            acc += diff * diff;
          }
          return std::sqrt(acc);
        },
        6);
    // centroid of the home cluster in the embedding
    std::array<double, 2> c = {0, 0};
    int cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 3 == h % 3) {
        c[0] += atlas.coords[i][0];
        c[1] += atlas.coords[i][1];
        ++cnt;
      }
    }
    c[0] /= cnt;
    c[1] /= cnt;
    const double dx = coord[0] - c[0], dy = coord[1] - c[1];
    const double d_fit = std::sqrt(dx * dx + dy * dy);
    // random placement inside the atlas bounding box
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto& q : atlas.coords) {
      lo_x = std::fmin(lo_x, q[0]);
      hi_x = std::fmax(hi_x, q[0]);
      lo_y = std::fmin(lo_y, q[1]);
      hi_y = std::fmax(hi_y, q[1]);
    }
    const double rx = prng.uniform(lo_x, hi_x) - c[0];
    const double ry = prng.uniform(lo_y, hi_y) - c[1];
    if (d_fit < std::sqrt(rx * rx + ry * ry)) ++wins;
  }
  CHECK(wins >= 14);  // clearly better than the ~10 expected by chance
}
