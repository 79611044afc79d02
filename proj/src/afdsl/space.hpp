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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "afdsl/graph.hpp"

namespace aqs::afdsl {

// The enumerable search spaces.
//   three-node: binary(unary(x), unary(x))                      7*27^2 graphs
//   four-node:  binary(unary(unary(x)), unary(x)),
//               binary(unary(x), unary(unary(x))),
//               nary(unary(x), unary(x), unary(x)),
//               unary(binary(unary(x), unary(x))),
//               unary(unary(unary(unary(x))))     3*7*27^3 + 4*27^3 + 27^4
enum class SpaceId { kThreeNode, kFourNode };

std::optional<SpaceId> space_from_name(std::string_view name);
std::string_view space_name(SpaceId id);

std::uint64_t space_size(SpaceId id);

// Visits every graph in the space exactly once, in a fixed deterministic
// order (forms in the order above, operators in table order). The visitor
// may return false to stop early.
using GraphVisitor = std::function<bool(std::uint64_t index, const ActivationGraph&)>;
void enumerate_space(SpaceId id, const GraphVisitor& visit);

// Builds the graph at a given enumeration index without walking the space.
ActivationGraph graph_at(SpaceId id, std::uint64_t index);

}  // namespace aqs::afdsl
