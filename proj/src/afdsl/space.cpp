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

#include "afdsl/space.hpp"

#include <stdexcept>

namespace aqs::afdsl {

namespace {

constexpr std::uint64_t kU = kNumUnary;
constexpr std::uint64_t kB = kNumBinary;
constexpr std::uint64_t kN = kNumNary;

constexpr std::uint64_t kThreeNodeSize = kB * kU * kU;                  // 5103
constexpr std::uint64_t kFormBinSize = kB * kU * kU * kU;               // 137781
constexpr std::uint64_t kFormNarySize = kN * kU * kU * kU;              // 78732
constexpr std::uint64_t kFormChainSize = kU * kU * kU * kU;             // 531441
constexpr std::uint64_t kFourNodeSize =
    3 * kFormBinSize + kFormNarySize + kFormChainSize;                  // 1023516

ActivationGraph three_node_at(std::uint64_t i) {
  const auto u2 = static_cast<UnaryOp>(i % kU);
  const auto u1 = static_cast<UnaryOp>((i / kU) % kU);
  const auto b = static_cast<BinaryOp>(i / (kU * kU));
  return ActivationGraph::three_node(b, u1, u2);
}

ActivationGraph four_node_at(std::uint64_t i) {
  if (i < kFormBinSize) {
    const auto right = static_cast<UnaryOp>(i % kU);
    const auto inner = static_cast<UnaryOp>((i / kU) % kU);
    const auto outer = static_cast<UnaryOp>((i / (kU * kU)) % kU);
    const auto b = static_cast<BinaryOp>(i / (kU * kU * kU));
    return ActivationGraph::four_node_left(b, inner, outer, right);
  }
  i -= kFormBinSize;
  if (i < kFormBinSize) {
    const auto outer = static_cast<UnaryOp>(i % kU);
    const auto inner = static_cast<UnaryOp>((i / kU) % kU);
    const auto left = static_cast<UnaryOp>((i / (kU * kU)) % kU);
    const auto b = static_cast<BinaryOp>(i / (kU * kU * kU));
    return ActivationGraph::four_node_right(b, left, inner, outer);
  }
  i -= kFormBinSize;
  if (i < kFormNarySize) {
    const auto u3 = static_cast<UnaryOp>(i % kU);
    const auto u2 = static_cast<UnaryOp>((i / kU) % kU);
    const auto u1 = static_cast<UnaryOp>((i / (kU * kU)) % kU);
    const auto n = static_cast<NaryOp>(i / (kU * kU * kU));
    return ActivationGraph::four_node_nary(n, u1, u2, u3);
  }
  i -= kFormNarySize;
  if (i < kFormBinSize) {
    const auto u2 = static_cast<UnaryOp>(i % kU);
    const auto u1 = static_cast<UnaryOp>((i / kU) % kU);
    const auto b = static_cast<BinaryOp>((i / (kU * kU)) % kB);
    const auto outer = static_cast<UnaryOp>(i / (kU * kU * kB));
    return ActivationGraph::four_node_wrap(outer, b, u1, u2);
  }
  i -= kFormBinSize;
  const auto u4 = static_cast<UnaryOp>(i % kU);
  const auto u3 = static_cast<UnaryOp>((i / kU) % kU);
  const auto u2 = static_cast<UnaryOp>((i / (kU * kU)) % kU);
  const auto u1 = static_cast<UnaryOp>(i / (kU * kU * kU));
  return ActivationGraph::four_node_chain(u1, u2, u3, u4);
}

}  // namespace

std::optional<SpaceId> space_from_name(std::string_view name) {
  if (name == "three-node") return SpaceId::kThreeNode;
  if (name == "four-node") return SpaceId::kFourNode;
  return std::nullopt;
}

std::string_view space_name(SpaceId id) {
  return id == SpaceId::kThreeNode ? "three-node" : "four-node";
}

std::uint64_t space_size(SpaceId id) {
  return id == SpaceId::kThreeNode ? kThreeNodeSize : kFourNodeSize;
}

ActivationGraph graph_at(SpaceId id, std::uint64_t index) {
  if (index >= space_size(id)) throw std::out_of_range("space index out of range");
  return id == SpaceId::kThreeNode ? three_node_at(index) : four_node_at(index);
}

void enumerate_space(SpaceId id, const GraphVisitor& visit) {
  const std::uint64_t n = space_size(id);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!visit(i, graph_at(id, i))) return;
  }
}

}  // namespace aqs::afdsl
