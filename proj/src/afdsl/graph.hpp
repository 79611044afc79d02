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

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "afdsl/ops.hpp"

namespace aqs::afdsl {

// Raised on malformed canonical strings: unknown operator, arity mismatch,
// or bad syntax.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scalar activation function as a small computation graph over the
// operator table, with leaves reading the input x. Stored in evaluation
// (post) order; the root is the last node.
class ActivationGraph {
 public:
  enum class NodeKind : std::uint8_t { kLeaf, kUnary, kBinary, kNary };

  struct Node {
    NodeKind kind = NodeKind::kLeaf;
    std::uint8_t op = 0;
    int child[3] = {-1, -1, -1};
  };

  ActivationGraph() = default;
  explicit ActivationGraph(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  // Grammar (bit-exact): `x` | `unary_<name>(E)` | `binary_<name>(E,E)` |
  // `nary_<name>(E,E,E)`. Throws ParseError.
  static ActivationGraph parse(std::string_view canonical);

  // Deterministic rendering; parse(render(g)) reproduces g.
  std::string render() const;

  double evaluate(double x) const;
  Dual evaluate_dual(double x) const;

  // Element-wise over a batch of inputs.
  std::vector<double> evaluate(std::span<const double> xs) const;
  void evaluate(std::span<const double> xs, std::span<double> out) const;
  void evaluate_dual(std::span<const double> xs, std::span<double> values,
                     std::span<double> derivs) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Builders used by the space enumerators.
  static ActivationGraph three_node(BinaryOp b, UnaryOp u1, UnaryOp u2);
  // binary(unary(unary(x)), unary(x))
  static ActivationGraph four_node_left(BinaryOp b, UnaryOp inner,
                                        UnaryOp outer, UnaryOp right);
  // binary(unary(x), unary(unary(x)))
  static ActivationGraph four_node_right(BinaryOp b, UnaryOp left,
                                         UnaryOp inner, UnaryOp outer);
  // nary(unary(x), unary(x), unary(x))
  static ActivationGraph four_node_nary(NaryOp n, UnaryOp u1, UnaryOp u2,
                                        UnaryOp u3);
  // unary(binary(unary(x), unary(x)))
  static ActivationGraph four_node_wrap(UnaryOp outer, BinaryOp b, UnaryOp u1,
                                        UnaryOp u2);
  // unary(unary(unary(unary(x))))
  static ActivationGraph four_node_chain(UnaryOp u1, UnaryOp u2, UnaryOp u3,
                                         UnaryOp u4);

  // The graph computing -f(x), used by the negation-equivalence checks.
  ActivationGraph negated() const;

 private:
  std::vector<Node> nodes_;
};

}  // namespace aqs::afdsl
