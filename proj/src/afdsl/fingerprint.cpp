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

#include "afdsl/fingerprint.hpp"

#include <algorithm>
#include <cassert>

#include "core/hash.hpp"
#include "core/rng.hpp"

namespace aqs::afdsl {

std::vector<double> make_probes(std::uint64_t seed, std::size_t n) {
  core::Rng rng(seed);
  std::vector<double> probes(n);
  for (auto& p : probes) p = std::clamp(rng.normal(), -5.0, 5.0);
  return probes;
}

OutputFingerprint fingerprint(const ActivationGraph& graph,
                              std::span<const double> probes) {
  OutputFingerprint fp;
  fp.values = graph.evaluate(probes);
  fp.digest = core::digest_doubles(fp.values);
  return fp;
}

std::optional<std::size_t> UniqueTable::find(std::span<const double> values,
                                             std::uint64_t digest) const {
  auto it = by_digest_.find(digest);
  if (it == by_digest_.end()) return std::nullopt;
  for (std::uint32_t idx : it->second) {
    // Digest collisions between distinct vectors are possible in principle,
    // so re-evaluate the representative and compare element-wise.
    ActivationGraph rep = ActivationGraph::parse(entries_[idx].canonical);
    std::vector<double> rep_values = rep.evaluate(probes_);
    if (core::doubles_equal(rep_values, values)) return idx;
  }
  return std::nullopt;
}

void UniqueTable::add(std::string canonical, std::uint64_t digest,
                      std::uint64_t index) {
  by_digest_[digest].push_back(static_cast<std::uint32_t>(entries_.size()));
  entries_.push_back({std::move(canonical), digest, index});
}

std::pair<std::size_t, bool> UniqueTable::insert(const ActivationGraph& graph,
                                                 std::span<const double> values,
                                                 std::uint64_t digest,
                                                 std::uint64_t index) {
  if (auto existing = find(values, digest)) return {*existing, false};
  add(graph.render(), digest, index);
  return {entries_.size() - 1, true};
}

std::optional<std::size_t> UniqueTable::find_graph(
    const ActivationGraph& graph) const {
  std::vector<double> values = graph.evaluate(probes_);
  return find(values, core::digest_doubles(values));
}

namespace {

// Streaming evaluator for whole spaces. Output vectors of the unary and
// unary-of-unary subexpressions are shared across graphs, which cuts the
// four-node sweep from ~4e9 to ~7e8 scalar operator applications. The
// composition order matches ActivationGraph::evaluate exactly, so vectors
// are bit-identical to a direct evaluation of the same graph.
class SpaceSweeper {
 public:
  SpaceSweeper(std::span<const double> probes) : probes_(probes), n_(probes.size()) {
    u_.resize(kNumUnary);
    for (int a = 0; a < kNumUnary; ++a) {
      u_[a].resize(n_);
      for (std::size_t i = 0; i < n_; ++i)
        u_[a][i] = apply(static_cast<UnaryOp>(a), probes_[i]);
    }
  }

  // Ensures the unary-of-unary table exists (four-node forms only).
  void build_uu() {
    if (!uu_.empty()) return;
    uu_.resize(static_cast<std::size_t>(kNumUnary) * kNumUnary);
    for (int a = 0; a < kNumUnary; ++a) {
      for (int b = 0; b < kNumUnary; ++b) {
        auto& dst = uu_[static_cast<std::size_t>(a) * kNumUnary + b];
        dst.resize(n_);
        const auto& src = u_[b];
        for (std::size_t i = 0; i < n_; ++i)
          dst[i] = apply(static_cast<UnaryOp>(a), src[i]);
      }
    }
  }

  const std::vector<double>& u(int a) const { return u_[a]; }
  const std::vector<double>& uu(int outer, int inner) const {
    return uu_[static_cast<std::size_t>(outer) * kNumUnary + inner];
  }

  std::span<const double> probes() const { return probes_; }
  std::size_t n() const { return n_; }

 private:
  std::span<const double> probes_;
  std::size_t n_;
  std::vector<std::vector<double>> u_;
  std::vector<std::vector<double>> uu_;
};

using Sink = std::function<void(std::uint64_t index, const ActivationGraph&,
                                std::span<const double> values)>;

void sweep_three_node(SpaceSweeper& sw, const Sink& sink) {
  const std::size_t n = sw.n();
  std::vector<double> out(n);
  std::uint64_t index = 0;
  for (int b = 0; b < kNumBinary; ++b) {
    for (int u1 = 0; u1 < kNumUnary; ++u1) {
      const auto& left = sw.u(u1);
      for (int u2 = 0; u2 < kNumUnary; ++u2) {
        const auto& right = sw.u(u2);
        for (std::size_t i = 0; i < n; ++i)
          out[i] = apply(static_cast<BinaryOp>(b), left[i], right[i]);
        sink(index++,
             ActivationGraph::three_node(static_cast<BinaryOp>(b),
                                         static_cast<UnaryOp>(u1),
                                         static_cast<UnaryOp>(u2)),
             out);
      }
    }
  }
}

void sweep_four_node(SpaceSweeper& sw, const Sink& sink) {
  sw.build_uu();
  const std::size_t n = sw.n();
  std::vector<double> out(n);
  std::vector<double> tmp(n);
  std::uint64_t index = 0;

  // binary(unary(unary(x)), unary(x))
  for (int b = 0; b < kNumBinary; ++b)
    for (int outer = 0; outer < kNumUnary; ++outer)
      for (int inner = 0; inner < kNumUnary; ++inner) {
        const auto& left = sw.uu(outer, inner);
        for (int right = 0; right < kNumUnary; ++right) {
          const auto& rv = sw.u(right);
          for (std::size_t i = 0; i < n; ++i)
            out[i] = apply(static_cast<BinaryOp>(b), left[i], rv[i]);
          sink(index++,
               ActivationGraph::four_node_left(
                   static_cast<BinaryOp>(b), static_cast<UnaryOp>(inner),
                   static_cast<UnaryOp>(outer), static_cast<UnaryOp>(right)),
               out);
        }
      }

  // binary(unary(x), unary(unary(x)))
  for (int b = 0; b < kNumBinary; ++b)
    for (int left = 0; left < kNumUnary; ++left) {
      const auto& lv = sw.u(left);
      for (int inner = 0; inner < kNumUnary; ++inner)
        for (int outer = 0; outer < kNumUnary; ++outer) {
          const auto& rv = sw.uu(outer, inner);
          for (std::size_t i = 0; i < n; ++i)
            out[i] = apply(static_cast<BinaryOp>(b), lv[i], rv[i]);
          sink(index++,
               ActivationGraph::four_node_right(
                   static_cast<BinaryOp>(b), static_cast<UnaryOp>(left),
                   static_cast<UnaryOp>(inner), static_cast<UnaryOp>(outer)),
               out);
        }
    }

  // nary(unary(x), unary(x), unary(x))
  for (int nop = 0; nop < kNumNary; ++nop)
    for (int u1 = 0; u1 < kNumUnary; ++u1)
      for (int u2 = 0; u2 < kNumUnary; ++u2) {
        const auto& a = sw.u(u1);
        const auto& b2 = sw.u(u2);
        for (int u3 = 0; u3 < kNumUnary; ++u3) {
          const auto& c = sw.u(u3);
          for (std::size_t i = 0; i < n; ++i)
            out[i] = apply(static_cast<NaryOp>(nop), a[i], b2[i], c[i]);
          sink(index++,
               ActivationGraph::four_node_nary(
                   static_cast<NaryOp>(nop), static_cast<UnaryOp>(u1),
                   static_cast<UnaryOp>(u2), static_cast<UnaryOp>(u3)),
               out);
        }
      }

  // unary(binary(unary(x), unary(x)))
  for (int outer = 0; outer < kNumUnary; ++outer)
    for (int b = 0; b < kNumBinary; ++b)
      for (int u1 = 0; u1 < kNumUnary; ++u1) {
        const auto& lv = sw.u(u1);
        for (int u2 = 0; u2 < kNumUnary; ++u2) {
          const auto& rv = sw.u(u2);
          for (std::size_t i = 0; i < n; ++i)
            tmp[i] = apply(static_cast<BinaryOp>(b), lv[i], rv[i]);
          for (std::size_t i = 0; i < n; ++i)
            out[i] = apply(static_cast<UnaryOp>(outer), tmp[i]);
          sink(index++,
               ActivationGraph::four_node_wrap(
                   static_cast<UnaryOp>(outer), static_cast<BinaryOp>(b),
                   static_cast<UnaryOp>(u1), static_cast<UnaryOp>(u2)),
               out);
        }
      }

  // unary(unary(unary(unary(x)))). The inner three-unary chains are shared
  // by all 27 outermost operators; precompute them once (~160 MB).
  std::vector<std::vector<double>> uuu(
      static_cast<std::size_t>(kNumUnary) * kNumUnary * kNumUnary);
  for (int u2 = 0; u2 < kNumUnary; ++u2)
    for (int u3 = 0; u3 < kNumUnary; ++u3)
      for (int u4 = 0; u4 < kNumUnary; ++u4) {
        auto& dst = uuu[(static_cast<std::size_t>(u2) * kNumUnary + u3) * kNumUnary + u4];
        dst.resize(n);
        const auto& base = sw.uu(u3, u4);
        for (std::size_t i = 0; i < n; ++i)
          dst[i] = apply(static_cast<UnaryOp>(u2), base[i]);
      }
  for (int u1 = 0; u1 < kNumUnary; ++u1)
    for (int u2 = 0; u2 < kNumUnary; ++u2)
      for (int u3 = 0; u3 < kNumUnary; ++u3)
        for (int u4 = 0; u4 < kNumUnary; ++u4) {
          const auto& base =
              uuu[(static_cast<std::size_t>(u2) * kNumUnary + u3) * kNumUnary + u4];
          for (std::size_t i = 0; i < n; ++i)
            out[i] = apply(static_cast<UnaryOp>(u1), base[i]);
          sink(index++,
               ActivationGraph::four_node_chain(
                   static_cast<UnaryOp>(u1), static_cast<UnaryOp>(u2),
                   static_cast<UnaryOp>(u3), static_cast<UnaryOp>(u4)),
               out);
        }
}

}  // namespace

UniqueTable dedup_space(SpaceId id, std::vector<double> probes,
                        const std::function<void(std::uint64_t)>& progress) {
  UniqueTable table(std::move(probes));
  SpaceSweeper sweeper(table.probes());
  std::uint64_t seen = 0;
  Sink sink = [&](std::uint64_t index, const ActivationGraph& graph,
                  std::span<const double> values) {
    assert(index == seen);
    table.insert(graph, values, core::digest_doubles(values), index);
    ++seen;
    if (progress && (seen & 0xffff) == 0) progress(seen);
  };
  if (id == SpaceId::kThreeNode) {
    sweep_three_node(sweeper, sink);
  } else {
    sweep_four_node(sweeper, sink);
  }
  assert(seen == space_size(id));
  return table;
}

UniqueTable dedup_graphs(const std::vector<ActivationGraph>& graphs,
                         std::vector<double> probes) {
  UniqueTable table(std::move(probes));
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    OutputFingerprint fp = fingerprint(graphs[i], table.probes());
    table.insert(graphs[i], fp.values, fp.digest, i);
  }
  return table;
}

}  // namespace aqs::afdsl
