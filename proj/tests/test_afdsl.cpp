#include <cmath>
#include <set>
#include <vector>

#include "afdsl/fingerprint.hpp"
#include "afdsl/graph.hpp"
#include "afdsl/ops.hpp"
#include "afdsl/space.hpp"
#include "core/hash.hpp"
#include "core/rng.hpp"
#include "doctest.h"

using namespace aqs;
using namespace aqs::afdsl;

namespace {

ActivationGraph random_graph(core::Rng& rng) {
  const bool three = rng.below(2) == 0;
  const SpaceId id = three ? SpaceId::kThreeNode : SpaceId::kFourNode;
  return graph_at(id, rng.below(space_size(id)));
}

}  // namespace

TEST_CASE("operator table has the right cardinalities") {
  CHECK(kNumUnary == 27);
  CHECK(kNumBinary == 7);
  CHECK(kNumNary == 4);
}

TEST_CASE("operators are total over the extended reals") {
  const double specials[] = {0.0, -0.0, 1.0, -1.0, 5.0, -5.0, 1e300, -1e300,
                             std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::denorm_min()};
  for (int u = 0; u < kNumUnary; ++u)
    for (double x : specials) {
      volatile double v = apply(static_cast<UnaryOp>(u), x);
      (void)v;  // must not trap; non-finite results are legal
    }
  for (int b = 0; b < kNumBinary; ++b)
    for (double x : specials)
      for (double y : specials) {
        volatile double v = apply(static_cast<BinaryOp>(b), x, y);
        (void)v;
      }
  for (int n = 0; n < kNumNary; ++n)
    for (double x : specials)
      for (double y : specials) {
        volatile double v = apply(static_cast<NaryOp>(n), x, y, 1.0);
        (void)v;
      }
}

TEST_CASE("bessel i0e/i1e match reference values") {
  // Reference values from a high-precision independent implementation.
  struct Ref { double x, i0e, i1e; };
  const Ref refs[] = {
      {0.0, 1.0, 0.0},
      {0.5, 0.64503527044914999, 0.15642080318487173},
      {1.0, 0.46575960759364043, 0.2079104153497085},
      {2.0, 0.308508322553671, 0.21526928924893771},
      {3.75, 0.21445705123004871, 0.18296842093089091},
      {5.0, 0.18354081260932834, 0.16397226694454234},
      {10.0, 0.1278333371634286, 0.12126268138445551},
      {30.0, 0.073145946482237295, 0.071916330598647549},
      {100.0, 0.03994437929909668, 0.039744153025130249},
      {-2.0, 0.308508322553671, -0.21526928924893771},
      {-30.0, 0.073145946482237295, -0.071916330598647549},
  };
  for (const auto& r : refs) {
    CHECK(bessel_i0e(r.x) == doctest::Approx(r.i0e).epsilon(1e-10));
    CHECK(bessel_i1e(r.x) == doctest::Approx(r.i1e).epsilon(1e-10));
  }
}

TEST_CASE("parse accepts the canonical grammar") {
  ActivationGraph relu =
      ActivationGraph::parse("binary_max(unary_identity(x),unary_zero(x))");
  CHECK(relu.evaluate(-1.0) == 0.0);
  CHECK(relu.evaluate(2.0) == 2.0);
  CHECK(relu.render() == "binary_max(unary_identity(x),unary_zero(x))");

  ActivationGraph swish =
      ActivationGraph::parse("binary_mul(unary_sigmoid(x),unary_identity(x))");
  CHECK(swish.evaluate(0.0) == 0.0);
  CHECK(swish.evaluate(1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("parse rejects malformed strings") {
  CHECK_THROWS_AS(ActivationGraph::parse("binary_max(x)"), ParseError);
  CHECK_THROWS_AS(ActivationGraph::parse("binary_max(x,x,x)"), ParseError);
  CHECK_THROWS_AS(ActivationGraph::parse("unary_bogus(x)"), ParseError);
  CHECK_THROWS_AS(ActivationGraph::parse("unary_relu(x"), ParseError);
  CHECK_THROWS_AS(ActivationGraph::parse("unary_relu(x))"), ParseError);
  CHECK_THROWS_AS(ActivationGraph::parse(""), ParseError);
  CHECK_THROWS_AS(ActivationGraph::parse("y"), ParseError);
}

TEST_CASE("parse round-trips rendered graphs") {
  core::Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    ActivationGraph g = random_graph(rng);
    const std::string canonical = g.render();
    ActivationGraph back = ActivationGraph::parse(canonical);
    CHECK(back.render() == canonical);
    CHECK(back.node_count() == g.node_count());
  }
}

TEST_CASE("evaluate handles singularities by propagating non-finite values") {
  ActivationGraph inv = ActivationGraph::parse("unary_inv(x)");
  CHECK(!std::isfinite(inv.evaluate(0.0)));
}

TEST_CASE("evaluate_dual matches hand derivatives") {
  ActivationGraph relu = ActivationGraph::parse("unary_relu(x)");
  Dual d = relu.evaluate_dual(2.0);
  CHECK(d.v == 2.0);
  CHECK(d.d == 1.0);

  ActivationGraph tanh_g = ActivationGraph::parse("unary_tanh(x)");
  d = tanh_g.evaluate_dual(0.0);
  CHECK(d.v == 0.0);
  CHECK(d.d == 1.0);

  // subgradient conventions at kinks: right-hand branch wins
  ActivationGraph abs_g = ActivationGraph::parse("unary_abs(x)");
  CHECK(abs_g.evaluate_dual(0.0).d == 1.0);
  CHECK(relu.evaluate_dual(0.0).d == 1.0);
  ActivationGraph max_g = ActivationGraph::parse(
      "binary_max(unary_identity(x),unary_neg(x))");
  CHECK(max_g.evaluate_dual(0.0).d == 1.0);  // first argument achieving max
}

TEST_CASE("evaluate_dual matches central finite differences") {
  ActivationGraph swish = ActivationGraph::parse("unary_swish(x)");
  const double h = 1e-5;
  const double fd = (swish.evaluate(1.0 + h) - swish.evaluate(1.0 - h)) / (2 * h);
  CHECK(swish.evaluate_dual(1.0).d == doctest::Approx(fd).epsilon(1e-6));

  core::Rng rng(11);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    ActivationGraph g = random_graph(rng);
    for (int k = 0; k < 6; ++k) {
      const double x = rng.uniform(-4.0, 4.0);
      const double h1 = 1e-4, h2 = 1e-5;
      const double f1 = g.evaluate(x + h1), f2 = g.evaluate(x - h1);
      const double f3 = g.evaluate(x + h2), f4 = g.evaluate(x - h2);
      if (!std::isfinite(f1) || !std::isfinite(f2) || !std::isfinite(f3) ||
          !std::isfinite(f4))
        continue;
      const double fd1 = (f1 - f2) / (2 * h1);
      const double fd2 = (f3 - f4) / (2 * h2);
      // Two step sizes disagreeing flags a kink or singularity nearby.
      if (std::fabs(fd1 - fd2) > 1e-6 * std::fmax(1.0, std::fabs(fd2))) continue;
      const Dual d = g.evaluate_dual(x);
      if (!std::isfinite(d.d)) continue;
      CHECK(std::fabs(d.d - fd2) <= 1e-5 * std::fmax(1.0, std::fabs(fd2)));
      ++checked;
    }
  }
  CHECK(checked > 300);  // the screen must not reject nearly everything
}

TEST_CASE("space sizes are exact closed-form products") {
  CHECK(space_size(SpaceId::kThreeNode) == 5103);
  CHECK(space_size(SpaceId::kFourNode) == 1023516);
  CHECK(space_from_name("three-node") == SpaceId::kThreeNode);
  CHECK(space_from_name("four-node") == SpaceId::kFourNode);
  CHECK(!space_from_name("five-node").has_value());
}

TEST_CASE("three-node enumeration is exhaustive and duplicate-free by structure") {
  std::set<std::string> seen;
  std::uint64_t count = 0;
  enumerate_space(SpaceId::kThreeNode, [&](std::uint64_t idx, const ActivationGraph& g) {
    CHECK(idx == count);
    seen.insert(g.render());
    ++count;
    return true;
  });
  CHECK(count == 5103);
  CHECK(seen.size() == 5103);
}

TEST_CASE("four-node enumeration covers every form with the right counts") {
  std::uint64_t count = 0;
  std::uint64_t nary_count = 0;
  std::uint64_t chain_count = 0;
  enumerate_space(SpaceId::kFourNode, [&](std::uint64_t idx, const ActivationGraph& g) {
    CHECK(idx == count);
    const auto& root = g.nodes().back();
    if (root.kind == ActivationGraph::NodeKind::kNary) ++nary_count;
    if (g.nodes().size() == 5 && root.kind == ActivationGraph::NodeKind::kUnary &&
        g.nodes()[1].kind == ActivationGraph::NodeKind::kUnary)
      ++chain_count;
    ++count;
    return true;
  });
  CHECK(count == 1023516);
  CHECK(nary_count == 78732);    // 4 * 27^3
  CHECK(chain_count == 531441);  // 27^4
}

TEST_CASE("probes are deterministic and in range") {
  auto a = make_probes(kDefaultProbeSeed);
  auto b = make_probes(kDefaultProbeSeed);
  REQUIRE(a.size() == kNumProbes);
  CHECK(a == b);
  for (double p : a) {
    CHECK(p >= -5.0);
    CHECK(p <= 5.0);
  }
  auto c = make_probes(43);
  CHECK(a != c);
}

TEST_CASE("fingerprint collapses equivalent graphs and separates negations") {
  auto probes = make_probes(kDefaultProbeSeed);
  auto relu1 = ActivationGraph::parse("binary_max(unary_identity(x),unary_zero(x))");
  auto relu2 = ActivationGraph::parse("binary_max(unary_zero(x),unary_identity(x))");
  auto fp1 = fingerprint(relu1, probes);
  auto fp2 = fingerprint(relu2, probes);
  CHECK(fp1.digest == fp2.digest);
  CHECK(core::doubles_equal(fp1.values, fp2.values));

  auto elu = ActivationGraph::parse("unary_elu(x)");
  auto fp3 = fingerprint(elu, probes);
  auto fp4 = fingerprint(elu.negated(), probes);
  CHECK(fp3.digest != fp4.digest);

  auto zero = ActivationGraph::parse("unary_zero(x)");
  auto fp5 = fingerprint(zero, probes);
  for (double v : fp5.values) CHECK(v == 0.0);
}

TEST_CASE("dedup keeps the first representative and is idempotent") {
  auto probes = make_probes(kDefaultProbeSeed);
  std::vector<ActivationGraph> graphs = {
      ActivationGraph::parse("binary_max(unary_identity(x),unary_zero(x))"),
      ActivationGraph::parse("binary_max(unary_zero(x),unary_identity(x))"),
      ActivationGraph::parse("unary_relu(x)"),
  };
  UniqueTable t = dedup_graphs(graphs, probes);
  REQUIRE(t.size() == 1);
  CHECK(t.entries()[0].canonical == "binary_max(unary_identity(x),unary_zero(x))");
  CHECK(t.entries()[0].first_index == 0);

  // dedup of the representatives changes nothing
  std::vector<ActivationGraph> reps;
  for (const auto& e : t.entries()) reps.push_back(ActivationGraph::parse(e.canonical));
  UniqueTable t2 = dedup_graphs(reps, probes);
  CHECK(t2.size() == t.size());
}

TEST_CASE("three-node space dedups to the expected unique count") {
  auto table = dedup_space(SpaceId::kThreeNode, make_probes(kDefaultProbeSeed));
  // 2,913 unique functions, with a small tolerance for numeric environments.
  CHECK(table.size() >= 2855);
  CHECK(table.size() <= 2971);
  MESSAGE("three-node unique count: ", table.size());

  // named baselines all resolve to representatives in the space
  for (const char* fn :
       {"unary_elu(x)", "unary_relu(x)", "unary_selu(x)", "unary_sigmoid(x)",
        "unary_softplus(x)", "unary_softsign(x)", "unary_swish(x)", "unary_tanh(x)"}) {
    CHECK(table.find_graph(ActivationGraph::parse(fn)).has_value());
  }
}

TEST_CASE("fingerprint digests follow the documented byte layout") {
  // digest = FNV-1a over little-endian doubles, NaNs canonicalized
  std::vector<double> v = {1.0, -0.0};
  std::vector<double> w = {1.0, 0.0};
  CHECK(core::digest_doubles(v) == core::digest_doubles(w));
  std::vector<double> n1 = {std::nan("1")}, n2 = {std::nan("2")};
  CHECK(core::digest_doubles(n1) == core::digest_doubles(n2));
  CHECK(core::doubles_equal(n1, n2));
}
