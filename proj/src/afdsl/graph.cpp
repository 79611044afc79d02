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

#include "afdsl/graph.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace aqs::afdsl {

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  std::vector<ActivationGraph::Node> nodes;

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(what + " at offset " + std::to_string(pos) + " in '" +
                     std::string(text) + "'");
  }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  // An expression is a leaf `x` or `prefix_name(children)`.
  int parse_expr() {
    if (peek() == 'x' &&
        (pos + 1 == text.size() || text[pos + 1] == ',' || text[pos + 1] == ')')) {
      ++pos;
      nodes.push_back({ActivationGraph::NodeKind::kLeaf, 0, {-1, -1, -1}});
      return static_cast<int>(nodes.size()) - 1;
    }
    std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                 text[pos] == '_')) {
      ++pos;
    }
    if (pos == start) fail("malformed expression");
    std::string_view token = text.substr(start, pos - start);

    ActivationGraph::NodeKind kind;
    std::uint8_t op = 0;
    int arity = 0;
    if (token.starts_with("unary_")) {
      UnaryOp u;
      if (!unary_from_name(token.substr(6), &u)) fail("unknown operator '" + std::string(token) + "'");
      kind = ActivationGraph::NodeKind::kUnary;
      op = static_cast<std::uint8_t>(u);
      arity = 1;
    } else if (token.starts_with("binary_")) {
      BinaryOp b;
      if (!binary_from_name(token.substr(7), &b)) fail("unknown operator '" + std::string(token) + "'");
      kind = ActivationGraph::NodeKind::kBinary;
      op = static_cast<std::uint8_t>(b);
      arity = 2;
    } else if (token.starts_with("nary_")) {
      NaryOp n;
      if (!nary_from_name(token.substr(5), &n)) fail("unknown operator '" + std::string(token) + "'");
      kind = ActivationGraph::NodeKind::kNary;
      op = static_cast<std::uint8_t>(n);
      arity = 3;
    } else {
      fail("unknown operator '" + std::string(token) + "'");
    }

    expect('(');
    int children[3] = {-1, -1, -1};
    for (int i = 0; i < arity; ++i) {
      children[i] = parse_expr();
      if (i + 1 < arity) {
        if (peek() != ',') fail("arity mismatch: too few arguments");
        ++pos;
      }
    }
    if (peek() == ',') fail("arity mismatch: too many arguments");
    expect(')');

    nodes.push_back({kind, op, {children[0], children[1], children[2]}});
    return static_cast<int>(nodes.size()) - 1;
  }
};

void render_node(const std::vector<ActivationGraph::Node>& nodes, int idx,
                 std::string& out) {
  const auto& n = nodes[idx];
  switch (n.kind) {
    case ActivationGraph::NodeKind::kLeaf:
      out += 'x';
      return;
    case ActivationGraph::NodeKind::kUnary:
      out += "unary_";
      out += name(static_cast<UnaryOp>(n.op));
      out += '(';
      render_node(nodes, n.child[0], out);
      out += ')';
      return;
    case ActivationGraph::NodeKind::kBinary:
      out += "binary_";
      out += name(static_cast<BinaryOp>(n.op));
      out += '(';
      render_node(nodes, n.child[0], out);
      out += ',';
      render_node(nodes, n.child[1], out);
      out += ')';
      return;
    case ActivationGraph::NodeKind::kNary:
      out += "nary_";
      out += name(static_cast<NaryOp>(n.op));
      out += '(';
      render_node(nodes, n.child[0], out);
      out += ',';
      render_node(nodes, n.child[1], out);
      out += ',';
      render_node(nodes, n.child[2], out);
      out += ')';
      return;
  }
}

}  // namespace

ActivationGraph ActivationGraph::parse(std::string_view canonical) {
  Parser p{canonical, 0, {}};
  p.parse_expr();
  if (p.pos != canonical.size()) p.fail("trailing characters");
  return ActivationGraph(std::move(p.nodes));
}

std::string ActivationGraph::render() const {
  std::string out;
  out.reserve(nodes_.size() * 16);
  render_node(nodes_, static_cast<int>(nodes_.size()) - 1, out);
  return out;
}

double ActivationGraph::evaluate(double x) const {
  double scratch[16];
  std::vector<double> heap;
  double* vals = scratch;
  if (nodes_.size() > 16) {
    heap.resize(nodes_.size());
    vals = heap.data();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::kLeaf:
        vals[i] = x;
        break;
      case NodeKind::kUnary:
        vals[i] = apply(static_cast<UnaryOp>(n.op), vals[n.child[0]]);
        break;
      case NodeKind::kBinary:
        vals[i] = apply(static_cast<BinaryOp>(n.op), vals[n.child[0]],
                        vals[n.child[1]]);
        break;
      case NodeKind::kNary:
        vals[i] = apply(static_cast<NaryOp>(n.op), vals[n.child[0]],
                        vals[n.child[1]], vals[n.child[2]]);
        break;
    }
  }
  return vals[nodes_.size() - 1];
}

Dual ActivationGraph::evaluate_dual(double x) const {
  Dual scratch[16];
  std::vector<Dual> heap;
  Dual* vals = scratch;
  if (nodes_.size() > 16) {
    heap.resize(nodes_.size());
    vals = heap.data();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::kLeaf:
        vals[i] = {x, 1.0};
        break;
      case NodeKind::kUnary:
        vals[i] = apply(static_cast<UnaryOp>(n.op), vals[n.child[0]]);
        break;
      case NodeKind::kBinary:
        vals[i] = apply(static_cast<BinaryOp>(n.op), vals[n.child[0]],
                        vals[n.child[1]]);
        break;
      case NodeKind::kNary:
        vals[i] = apply(static_cast<NaryOp>(n.op), vals[n.child[0]],
                        vals[n.child[1]], vals[n.child[2]]);
        break;
    }
  }
  return vals[nodes_.size() - 1];
}

std::vector<double> ActivationGraph::evaluate(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  evaluate(xs, out);
  return out;
}

void ActivationGraph::evaluate(std::span<const double> xs,
                               std::span<double> out) const {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate(xs[i]);
}

void ActivationGraph::evaluate_dual(std::span<const double> xs,
                                    std::span<double> values,
                                    std::span<double> derivs) const {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Dual d = evaluate_dual(xs[i]);
    values[i] = d.v;
    derivs[i] = d.d;
  }
}

namespace {
using NK = ActivationGraph::NodeKind;
using Node = ActivationGraph::Node;

Node leaf() { return {NK::kLeaf, 0, {-1, -1, -1}}; }
Node un(UnaryOp u, int c) {
  return {NK::kUnary, static_cast<std::uint8_t>(u), {c, -1, -1}};
}
Node bin(BinaryOp b, int l, int r) {
  return {NK::kBinary, static_cast<std::uint8_t>(b), {l, r, -1}};
}
Node nar(NaryOp n, int a, int b, int c) {
  return {NK::kNary, static_cast<std::uint8_t>(n), {a, b, c}};
}
}  // namespace

ActivationGraph ActivationGraph::three_node(BinaryOp b, UnaryOp u1, UnaryOp u2) {
  return ActivationGraph({leaf(), un(u1, 0), leaf(), un(u2, 2), bin(b, 1, 3)});
}

ActivationGraph ActivationGraph::four_node_left(BinaryOp b, UnaryOp inner,
                                                UnaryOp outer, UnaryOp right) {
  return ActivationGraph(
      {leaf(), un(inner, 0), un(outer, 1), leaf(), un(right, 3), bin(b, 2, 4)});
}

ActivationGraph ActivationGraph::four_node_right(BinaryOp b, UnaryOp left,
                                                 UnaryOp inner, UnaryOp outer) {
  return ActivationGraph(
      {leaf(), un(left, 0), leaf(), un(inner, 2), un(outer, 3), bin(b, 1, 4)});
}

ActivationGraph ActivationGraph::four_node_nary(NaryOp n, UnaryOp u1,
                                                UnaryOp u2, UnaryOp u3) {
  return ActivationGraph({leaf(), un(u1, 0), leaf(), un(u2, 2), leaf(),
                          un(u3, 4), nar(n, 1, 3, 5)});
}

ActivationGraph ActivationGraph::four_node_wrap(UnaryOp outer, BinaryOp b,
                                                UnaryOp u1, UnaryOp u2) {
  return ActivationGraph(
      {leaf(), un(u1, 0), leaf(), un(u2, 2), bin(b, 1, 3), un(outer, 4)});
}

ActivationGraph ActivationGraph::four_node_chain(UnaryOp u1, UnaryOp u2,
                                                 UnaryOp u3, UnaryOp u4) {
  // u1 is the outermost operator: u1(u2(u3(u4(x)))).
  return ActivationGraph({leaf(), un(u4, 0), un(u3, 1), un(u2, 2), un(u1, 3)});
}

ActivationGraph ActivationGraph::negated() const {
  std::vector<Node> nodes = nodes_;
  nodes.push_back(un(UnaryOp::kNeg, static_cast<int>(nodes.size()) - 1));
  return ActivationGraph(std::move(nodes));
}

}  // namespace aqs::afdsl
