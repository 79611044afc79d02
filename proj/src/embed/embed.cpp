// Copyright 2026 The aqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embed/embed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "core/hash.hpp"
#include "core/rng.hpp"

namespace aqs::embed {

namespace {

constexpr double kSmoothTolerance = 1e-5;
constexpr double kMinSigmaScale = 1e-3;
constexpr double kGradClip = 4.0;

double smooth_knn_target(int k) { return std::log2(static_cast<double>(k)); }

// Solves for sigma so the shifted-exponential row sum hits the target.
double solve_sigma(const std::vector<Neighbor>& nbrs, double rho, double target) {
  double lo = 0.0, hi = std::numeric_limits<double>::infinity(), sigma = 1.0;
  for (int it = 0; it < 64; ++it) {
    double sum = 0.0;
    for (const Neighbor& nb : nbrs) {
      const double d = nb.distance - rho;
      sum += d <= 0.0 ? 1.0 : std::exp(-d / sigma);
    }
    if (std::fabs(sum - target) < kSmoothTolerance) break;
    if (sum > target) {
      hi = sigma;
      sigma = (lo + hi) / 2.0;
    } else {
      lo = sigma;
      sigma = std::isinf(hi) ? sigma * 2.0 : (lo + hi) / 2.0;
    }
  }
  double mean_dist = 0.0;
  for (const Neighbor& nb : nbrs) mean_dist += nb.distance;
  mean_dist /= std::max<std::size_t>(1, nbrs.size());
  if (mean_dist > 0.0) sigma = std::fmax(sigma, kMinSigmaScale * mean_dist);
  return sigma;
}

double clip(double v) { return std::clamp(v, -kGradClip, kGradClip); }

}  // namespace

KnnGraph knn_graph(std::size_t n_points, const Metric& metric, int k) {
  if (n_points == 0) throw std::invalid_argument("empty point table");
  if (k < 1 || static_cast<std::size_t>(k) >= n_points)
    throw std::invalid_argument("k must be in [1, n_points)");
  KnnGraph g;
  g.k = k;
  g.neighbors.resize(n_points);
  std::vector<Neighbor> row;
  for (std::size_t i = 0; i < n_points; ++i) {
    row.clear();
    row.reserve(n_points - 1);
    for (std::size_t j = 0; j < n_points; ++j) {
      if (j == i) continue;
      row.push_back({static_cast<std::uint32_t>(j), metric(i, j)});
    }
    std::partial_sort(row.begin(), row.begin() + k, row.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                        if (a.distance != b.distance) return a.distance < b.distance;
                        return a.index < b.index;
                      });
    g.neighbors[i].assign(row.begin(), row.begin() + k);
  }
  return g;
}

FuzzyGraph fuzzy_set(const KnnGraph& knn) {
  const std::size_t n = knn.neighbors.size();
  const double target = smooth_knn_target(knn.k);

  // directed memberships
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<double, double>> dir;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nbrs = knn.neighbors[i];
    const double rho = nbrs.empty() ? 0.0 : nbrs.front().distance;
    const double sigma = solve_sigma(nbrs, rho, target);
    for (const Neighbor& nb : nbrs) {
      const double d = nb.distance - rho;
      const double w = d <= 0.0 ? 1.0 : std::exp(-d / sigma);
      const std::uint32_t a = static_cast<std::uint32_t>(i), b = nb.index;
      if (a < b) {
        dir[{a, b}].first = w;
      } else {
        dir[{b, a}].second = w;
      }
    }
  }

  FuzzyGraph g;
  g.n = n;
  g.edges.reserve(dir.size());
  for (const auto& [key, w] : dir) {
    const double sym = w.first + w.second - w.first * w.second;
    if (sym > 0.0) g.edges.push_back({key.first, key.second, sym});
  }
  return g;
}

FuzzyGraph union_graphs(const FuzzyGraph& a, const FuzzyGraph& b) {
  if (a.n != b.n) throw std::invalid_argument("fuzzy graphs cover different point sets");
  FuzzyGraph out;
  out.n = a.n;
  std::size_t ia = 0, ib = 0;
  auto key = [](const FuzzyEdge& e) {
    return (static_cast<std::uint64_t>(e.i) << 32) | e.j;
  };
  while (ia < a.edges.size() || ib < b.edges.size()) {
    if (ib == b.edges.size() ||
        (ia < a.edges.size() && key(a.edges[ia]) < key(b.edges[ib]))) {
      out.edges.push_back(a.edges[ia++]);
    } else if (ia == a.edges.size() || key(b.edges[ib]) < key(a.edges[ia])) {
      out.edges.push_back(b.edges[ib++]);
    } else {
      const double wa = a.edges[ia].weight, wb = b.edges[ib].weight;
      out.edges.push_back({a.edges[ia].i, a.edges[ia].j, wa + wb - wa * wb});
      ++ia;
      ++ib;
    }
  }
  return out;
}

std::pair<double, double> fit_curve(double min_dist, double spread) {
  // target: 1 for d <= min_dist, exp(-(d - min_dist)/spread) beyond
  const int grid = 300;
  std::vector<double> xs(grid), ys(grid);
  for (int i = 0; i < grid; ++i) {
    xs[i] = 3.0 * spread * i / (grid - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  // Gauss-Newton with Levenberg damping on 1/(1 + a x^{2b})
  double a = 1.5, b = 0.9, lambda = 1e-3;
  auto residual_sq = [&](double pa, double pb) {
    double s = 0.0;
    for (int i = 0; i < grid; ++i) {
      const double f = 1.0 / (1.0 + pa * std::pow(xs[i], 2.0 * pb));
      s += (f - ys[i]) * (f - ys[i]);
    }
    return s;
  };
  double err = residual_sq(a, b);
  for (int it = 0; it < 200; ++it) {
    double jtj[2][2] = {{0, 0}, {0, 0}}, jtr[2] = {0, 0};
    for (int i = 0; i < grid; ++i) {
      const double x = xs[i];
      const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double den = 1.0 + a * p;
      const double f = 1.0 / den;
      const double r = f - ys[i];
      const double dfda = -p / (den * den);
      const double dfdb = x > 0.0 ? -2.0 * a * p * std::log(x) / (den * den) : 0.0;
      jtj[0][0] += dfda * dfda;
      jtj[0][1] += dfda * dfdb;
      jtj[1][1] += dfdb * dfdb;
      jtr[0] += dfda * r;
      jtr[1] += dfdb * r;
    }
    jtj[1][0] = jtj[0][1];
    const double d0 = jtj[0][0] * (1 + lambda), d1 = jtj[1][1] * (1 + lambda);
    const double det = d0 * d1 - jtj[0][1] * jtj[1][0];
    if (det == 0.0 || !std::isfinite(det)) break;
    const double da = -(d1 * jtr[0] - jtj[0][1] * jtr[1]) / det;
    const double db = -(-jtj[1][0] * jtr[0] + d0 * jtr[1]) / det;
    const double na = a + da, nb = b + db;
    const double nerr = (na > 0 && nb > 0) ? residual_sq(na, nb) : err + 1;
    if (nerr < err) {
      a = na;
      b = nb;
      err = nerr;
      lambda = std::fmax(lambda * 0.5, 1e-12);
      if (std::fabs(da) + std::fabs(db) < 1e-12) break;
    } else {
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
  }
  if (!std::isfinite(a) || !std::isfinite(b) || a <= 0 || b <= 0) {
    // documented constants for min_dist = 0.1, spread = 1
    return {1.576943460269765, 0.8950608778515733};
  }
  return {a, b};
}

namespace {

// Isomap-style initialization: shortest paths over the fuzzy graph with
// edge length -ln(w), double-centered and projected to the top two
// principal coordinates by power iteration.
std::vector<std::array<double, 2>> mds_init(const FuzzyGraph& g) {
  const std::size_t n = g.n;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(n);
  for (const FuzzyEdge& e : g.edges) {
    const double len = -std::log(std::clamp(e.weight, 1e-12, 1.0)) + 1e-9;
    adj[e.i].push_back({e.j, len});
    adj[e.j].push_back({e.i, len});
  }

  std::vector<double> dist2(n * n, std::numeric_limits<double>::infinity());
  std::vector<double> d(n);
  double max_finite = 0.0;
  for (std::size_t src = 0; src < n; ++src) {
    std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
    d[src] = 0.0;
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, static_cast<std::uint32_t>(src)});
    while (!pq.empty()) {
      auto [dd, u] = pq.top();
      pq.pop();
      if (dd > d[u]) continue;
      for (const auto& [v, len] : adj[u]) {
        if (dd + len < d[v]) {
          d[v] = dd + len;
          pq.push({d[v], v});
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      dist2[src * n + j] = d[j];
      if (std::isfinite(d[j])) max_finite = std::fmax(max_finite, d[j]);
    }
  }
  const double cap = max_finite > 0 ? 1.5 * max_finite : 1.0;
  for (double& v : dist2) {
    if (!std::isfinite(v)) v = cap;
    v = v * v;  // squared distances for MDS
  }

  // double centering: B = -1/2 H D2 H
  std::vector<double> row_mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += dist2[i * n + j];
    row_mean[i] /= n;
    total += row_mean[i];
  }
  total /= n;
  std::vector<double> b(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      b[i * n + j] = -0.5 * (dist2[i * n + j] - row_mean[i] - row_mean[j] + total);

  // top-2 eigenvectors by deterministic power iteration with deflation
  std::vector<std::array<double, 2>> coords(n, {0.0, 0.0});
  std::vector<double> v(n), bv(n);
  std::vector<double> first(n, 0.0);
  double first_eig = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    for (std::size_t i = 0; i < n; ++i)
      v[i] = std::sin(0.37 * (i + 1) * (comp + 2));  // fixed start vector
    double eig = 0.0;
    for (int it = 0; it < 150; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* row = b.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
        bv[i] = acc;
      }
      if (comp == 1) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += bv[i] * first[i];
        proj *= first_eig == 0.0 ? 0.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) bv[i] -= proj * first[i];
      }
      double norm = 0.0;
      for (double x : bv) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (std::size_t i = 0; i < n; ++i) v[i] = bv[i] / norm;
      eig = norm;
    }
    if (comp == 0) {
      first = v;
      first_eig = eig;
    }
    const double scale = eig > 0 ? std::sqrt(eig) : 0.0;
    for (std::size_t i = 0; i < n; ++i) coords[i][comp] = v[i] * scale;
  }

  // normalize to a [-10, 10] box like the reference initialization
  double max_abs = 0.0;
  for (const auto& c : coords) max_abs = std::fmax(max_abs, std::fmax(std::fabs(c[0]), std::fabs(c[1])));
  const double s = max_abs > 0 ? 10.0 / max_abs : 1.0;
  for (auto& c : coords) {
    c[0] *= s;
    c[1] *= s;
  }
  return coords;
}

}  // namespace

EmbeddingAtlas layout(const FuzzyGraph& g, const std::vector<std::string>& keys,
                      const LayoutConfig& cfg) {
  if (keys.size() != g.n) throw std::invalid_argument("one key per point required");
  EmbeddingAtlas atlas;
  atlas.config = cfg;
  std::tie(atlas.curve_a, atlas.curve_b) = fit_curve(cfg.min_dist);
  atlas.coords.resize(g.n);
  if (g.n == 0) return atlas;

  // canonical processing order: sort by key so the result does not depend
  // on the input permutation
  std::vector<std::uint32_t> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (keys[x] != keys[y]) return keys[x] < keys[y];
    return x < y;
  });
  std::vector<std::uint32_t> rank(g.n);
  for (std::size_t i = 0; i < g.n; ++i) rank[order[i]] = static_cast<std::uint32_t>(i);

  FuzzyGraph cg;
  cg.n = g.n;
  cg.edges.reserve(g.edges.size());
  for (const FuzzyEdge& e : g.edges) {
    std::uint32_t i = rank[e.i], j = rank[e.j];
    if (i > j) std::swap(i, j);
    cg.edges.push_back({i, j, e.weight});
  }
  std::sort(cg.edges.begin(), cg.edges.end(), [](const FuzzyEdge& a, const FuzzyEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  std::vector<std::array<double, 2>> pos = mds_init(cg);
  // seed-controlled jitter keyed to the point identity
  for (std::size_t i = 0; i < g.n; ++i) {
    core::Rng jrng(core::derive_seed(cfg.seed, core::fnv1a64(keys[order[i]])));
    pos[i][0] += jrng.uniform(-0.1, 0.1);
    pos[i][1] += jrng.uniform(-0.1, 0.1);
  }

  if (!cg.edges.empty()) {
    const double a = atlas.curve_a, b = atlas.curve_b;
    // symmetric edges are sampled in both directions; each attraction moves
    // both endpoints and each direction runs its own negative draws
    struct Directed {
      std::uint32_t from, to;
      double eps;
      double next_sample;
      double next_neg;
    };
    double w_max = 0.0;
    for (const FuzzyEdge& e : cg.edges) w_max = std::fmax(w_max, e.weight);
    std::vector<Directed> dir;
    dir.reserve(cg.edges.size() * 2);
    for (const FuzzyEdge& e : cg.edges) {
      const double eps = w_max / e.weight;
      dir.push_back({e.i, e.j, eps, eps, 0.0});
      dir.push_back({e.j, e.i, eps, eps, 0.0});
    }

    core::Rng rng(core::derive_seed(cfg.seed, 0x6e65));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      const double alpha =
          cfg.learning_rate * (1.0 - static_cast<double>(epoch - 1) / cfg.epochs);
      for (Directed& e : dir) {
        if (e.next_sample > epoch) continue;
        auto& ci = pos[e.from];
        auto& cj = pos[e.to];
        const double dx = ci[0] - cj[0], dy = ci[1] - cj[1];
        const double d2 = dx * dx + dy * dy;
        if (d2 > 0.0) {
          const double pd = std::pow(d2, b);
          const double coeff = (-2.0 * a * b * pd / d2) / (a * pd + 1.0);
          const double gx = clip(coeff * dx), gy = clip(coeff * dy);
          ci[0] += alpha * gx;
          ci[1] += alpha * gy;
          cj[0] -= alpha * gx;
          cj[1] -= alpha * gy;
        }
        e.next_sample += e.eps;

        if (cfg.negative_sample_rate <= 0) continue;
        const double eps_neg = e.eps / cfg.negative_sample_rate;
        const int n_neg = static_cast<int>((epoch - e.next_neg) / eps_neg);
        for (int t = 0; t < n_neg; ++t) {
          const std::uint32_t k = static_cast<std::uint32_t>(rng.below(g.n));
          if (k == e.from) continue;
          const double rx = ci[0] - pos[k][0], ry = ci[1] - pos[k][1];
          const double rd2 = rx * rx + ry * ry;
          if (rd2 > 0.0) {
            const double pd = std::pow(rd2, b);
            const double coeff = 2.0 * b / ((0.001 + rd2) * (a * pd + 1.0));
            ci[0] += alpha * clip(coeff * rx);
            ci[1] += alpha * clip(coeff * ry);
          } else {
            ci[0] += alpha * kGradClip;
            ci[1] += alpha * kGradClip;
          }
        }
        e.next_neg += n_neg * eps_neg;
      }
    }
  }

  for (std::size_t i = 0; i < g.n; ++i) atlas.coords[order[i]] = pos[i];
  return atlas;
}

std::vector<std::pair<std::uint32_t, double>> membership_row(
    const std::function<double(std::size_t)>& dist_to, std::size_t n, int k) {
  if (n == 0) throw std::invalid_argument("cannot place into an empty atlas");
  k = std::min<int>(k, static_cast<int>(n));

  std::vector<Neighbor> nbrs(n);
  for (std::size_t i = 0; i < n; ++i)
    nbrs[i] = {static_cast<std::uint32_t>(i), dist_to(i)};
  std::partial_sort(nbrs.begin(), nbrs.begin() + k, nbrs.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.index < b.index;
                    });
  nbrs.resize(k);

  std::vector<std::pair<std::uint32_t, double>> row;
  if (nbrs.front().distance == 0.0) {
    for (const Neighbor& nb : nbrs)
      if (nb.distance == 0.0) row.push_back({nb.index, 1.0});
    return row;
  }
  const double rho = nbrs.front().distance;
  const double sigma = solve_sigma(nbrs, rho, smooth_knn_target(k));
  for (const Neighbor& nb : nbrs) {
    const double d = nb.distance - rho;
    row.push_back({nb.index, d <= 0.0 ? 1.0 : std::exp(-d / sigma)});
  }
  return row;
}

std::array<double, 2> place_by_memberships(
    const EmbeddingAtlas& atlas,
    const std::vector<std::pair<std::uint32_t, double>>& memberships,
    int refine_epochs) {
  if (memberships.empty())
    throw std::invalid_argument("placement requires at least one membership");
  double total = 0.0;
  std::array<double, 2> p = {0.0, 0.0};
  for (const auto& [idx, w] : memberships) {
    p[0] += w * atlas.coords[idx][0];
    p[1] += w * atlas.coords[idx][1];
    total += w;
  }
  p[0] /= total;
  p[1] /= total;

  const double a = atlas.curve_a, b = atlas.curve_b;
  for (int epoch = 0; epoch < refine_epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / refine_epochs;
    for (const auto& [idx, w] : memberships) {
      const auto& q = atlas.coords[idx];
      const double dx = p[0] - q[0], dy = p[1] - q[1];
      const double d2 = dx * dx + dy * dy;
      if (d2 == 0.0) continue;
      const double pd = std::pow(d2, b);
      const double coeff = w * (-2.0 * a * b * pd / d2) / (a * pd + 1.0);
      p[0] += alpha * clip(coeff * dx);
      p[1] += alpha * clip(coeff * dy);
    }
  }
  return p;
}

std::array<double, 2> embed_new(const EmbeddingAtlas& atlas,
                                const std::function<double(std::size_t)>& dist_to,
                                int k, int refine_epochs) {
  return place_by_memberships(atlas, membership_row(dist_to, atlas.coords.size(), k),
                              refine_epochs);
}

double trustworthiness(std::size_t n, const Metric& highd,
                       const std::vector<std::array<double, 2>>& coords, int k) {
  if (coords.size() != n) throw std::invalid_argument("coords/table size mismatch");
  if (n < 2 || k < 1) return 1.0;
  k = std::min<int>(k, static_cast<int>(n) - 1);

  // ranks of every j among the high-dimensional neighbors of i
  std::vector<std::uint32_t> ranked(n - 1);
  double total_penalty = 0.0;
  std::vector<double> hd(n);
  std::vector<int> rank_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) ranked[m++] = static_cast<std::uint32_t>(j);
    for (std::size_t j = 0; j < n; ++j) hd[j] = j == i ? 0.0 : highd(i, j);
    std::sort(ranked.begin(), ranked.end(), [&](std::uint32_t x, std::uint32_t y) {
      if (hd[x] != hd[y]) return hd[x] < hd[y];
      return x < y;
    });
    for (std::size_t r = 0; r < ranked.size(); ++r) rank_of[ranked[r]] = static_cast<int>(r) + 1;

    // k nearest in the embedding
    std::vector<Neighbor> low;
    low.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = coords[i][0] - coords[j][0];
      const double dy = coords[i][1] - coords[j][1];
      low.push_back({static_cast<std::uint32_t>(j), dx * dx + dy * dy});
    }
    std::partial_sort(low.begin(), low.begin() + k, low.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                        if (a.distance != b.distance) return a.distance < b.distance;
                        return a.index < b.index;
                      });
    for (int t = 0; t < k; ++t)
      total_penalty += std::max(0, rank_of[low[t].index] - k);
  }
  const double dn = static_cast<double>(n);
  return 1.0 - 2.0 / (dn * k * (2.0 * dn - 3.0 * k - 1.0)) * total_penalty;
}

}  // namespace aqs::embed
