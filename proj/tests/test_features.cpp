#include <cmath>

#include "afdsl/fingerprint.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "features/features.hpp"

using namespace aqs;
using namespace aqs::features;

namespace {

// Builds a one-layer spectrum feature directly from histogram counts.
kfac::SpectrumFeature hist_feature(const std::vector<std::vector<std::int64_t>>& counts,
                                   const std::vector<std::int64_t>& w) {
  kfac::SpectrumFeature sf;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    kfac::LayerSpectrum layer;
    layer.w = w[l];
    layer.bins = static_cast<int>(counts[l].size());
    layer.counts = counts[l];
    sf.layers.push_back(layer);
  }
  return sf;
}

// Independent 1-D optimal transport between histograms on the same grid:
// two-pointer mass matching over bin-center atoms.
double transport_oracle(const std::vector<std::int64_t>& a,
                        const std::vector<std::int64_t>& b, double lo, double hi) {
  const int bins = static_cast<int>(a.size());
  const double width = (hi - lo) / bins;
  std::int64_t ta = 0, tb = 0;
  for (auto v : a) ta += v;
  for (auto v : b) tb += v;
  std::vector<std::pair<double, double>> supply, demand;  // (position, mass)
  for (int i = 0; i < bins; ++i) {
    const double center = lo + (i + 0.5) * width;
    if (a[i] > 0) supply.push_back({center, static_cast<double>(a[i]) / ta});
    if (b[i] > 0) demand.push_back({center, static_cast<double>(b[i]) / tb});
  }
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  while (i < supply.size() && j < demand.size()) {
    const double m = std::min(supply[i].second, demand[j].second);
    cost += m * std::fabs(supply[i].first - demand[j].first);
    supply[i].second -= m;
    demand[j].second -= m;
    if (supply[i].second <= 1e-15) ++i;
    if (j < demand.size() && demand[j].second <= 1e-15) ++j;
  }
  return cost;
}

std::vector<std::int64_t> random_hist(core::Rng& rng, int bins) {
  std::vector<std::int64_t> h(bins);
  for (auto& v : h) v = static_cast<std::int64_t>(rng.below(50));
  // at least one unit of mass
  h[rng.below(bins)] += 1;
  return h;
}

}  // namespace

TEST_CASE("dist_outputs is the root mean square difference") {
  std::vector<double> zero(100, 0.0), one(100, 1.0);
  CHECK(dist_outputs(zero, zero) == 0.0);
  CHECK(dist_outputs(zero, one) == doctest::Approx(1.0).epsilon(1e-15));

  auto probes = afdsl::make_probes(afdsl::kDefaultProbeSeed);
  auto relu = afdsl::ActivationGraph::parse("unary_relu(x)");
  auto ident = afdsl::ActivationGraph::parse("unary_identity(x)");
  OutputFeature fr = output_feature(relu, probes);
  OutputFeature fi = output_feature(ident, probes);
  // direct-summation oracle: relu(x) - x = min(x, 0)
  double acc = 0.0;
  for (double p : probes) {
    const double d = std::fmin(p, 0.0);
    acc += d * d;
  }
  const double oracle = std::sqrt(acc / probes.size());
  CHECK(dist_outputs(fr.values, fi.values) == doctest::Approx(oracle).epsilon(1e-12));

  std::vector<double> shorter(50, 0.0);
  CHECK_THROWS_AS(dist_outputs(zero, shorter), std::invalid_argument);
}

TEST_CASE("negating a function doubles its RMS distance exactly") {
  auto probes = afdsl::make_probes(afdsl::kDefaultProbeSeed);
  auto elu = afdsl::ActivationGraph::parse("unary_elu(x)");
  OutputFeature f = output_feature(elu, probes);
  OutputFeature fneg = output_feature(elu.negated(), probes);
  double rms = 0.0;
  for (double v : f.values) rms += v * v;
  rms = std::sqrt(rms / f.values.size());
  CHECK(dist_outputs(f.values, fneg.values) >= 2.0 * rms - 1e-12);
}

TEST_CASE("spectral cdf of a delta distribution") {
  auto sf = hist_feature({{100, 0, 0, 0}}, {100});
  SpectralCdfFeature cdf = spectral_cdf(sf);
  REQUIRE(cdf.values.size() == 4);
  const double scale = 50.0 / 100.0;  // width / w
  for (double v : cdf.values) CHECK(v == doctest::Approx(scale).epsilon(1e-15));
}

TEST_CASE("spectral cdf of a uniform distribution") {
  auto sf = hist_feature({{25, 25, 25, 25}}, {400});
  SpectralCdfFeature cdf = spectral_cdf(sf);
  const double scale = 50.0 / 400.0;
  for (int k = 0; k < 4; ++k)
    CHECK(cdf.values[k] == doctest::Approx(0.25 * (k + 1) * scale).epsilon(1e-12));
}

TEST_CASE("delta histograms in bins i and j are |i-j| * width / w apart") {
  auto a = hist_feature({{0, 100, 0, 0}}, {100});
  auto b = hist_feature({{0, 0, 0, 100}}, {100});
  // |1-3| * 50 / 100 = 1.0
  CHECK(dist_spectra(spectral_cdf(a), spectral_cdf(b)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  auto c = hist_feature({{100, 0, 0, 0}}, {100});
  auto d = hist_feature({{0, 100, 0, 0}}, {100});
  CHECK(dist_spectra(spectral_cdf(c), spectral_cdf(d)) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dist_spectra equals the transport oracle on random histogram pairs") {
  core::Rng rng(71);
  for (int trial = 0; trial < 300; ++trial) {
    const int bins1 = 1 + static_cast<int>(rng.below(8));
    const int bins2 = 1 + static_cast<int>(rng.below(8));
    const std::int64_t w1 = 100 * bins1, w2 = 100 * bins2;
    auto ha1 = random_hist(rng, bins1), hb1 = random_hist(rng, bins1);
    auto ha2 = random_hist(rng, bins2), hb2 = random_hist(rng, bins2);
    auto a = hist_feature({ha1, ha2}, {w1, w2});
    auto b = hist_feature({hb1, hb2}, {w1, w2});
    const double got = dist_spectra(spectral_cdf(a), spectral_cdf(b));
    const double want =
        transport_oracle(ha1, hb1, kfac::kHistLo, kfac::kHistHi) / w1 +
        transport_oracle(ha2, hb2, kfac::kHistLo, kfac::kHistHi) / w2;
    CHECK(std::fabs(got - want) <= 1e-10);
  }
}

TEST_CASE("grid mismatches are rejected") {
  auto a = hist_feature({{1, 2, 3, 4}}, {400});
  auto b = hist_feature({{1, 2, 3}}, {300});
  CHECK_THROWS_AS(dist_spectra(spectral_cdf(a), spectral_cdf(b)),
                  std::invalid_argument);
  kfac::SpectrumFeature invalid = hist_feature({{1}}, {50});
  invalid.valid = false;
  CHECK_THROWS_AS(spectral_cdf(invalid), std::invalid_argument);
}

TEST_CASE("both distances satisfy the metric axioms on random triples") {
  core::Rng rng(77);
  // output features
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::vector<double>> f(3, std::vector<double>(16));
    for (auto& v : f)
      for (auto& x : v) x = rng.normal();
    const double ab = dist_outputs(f[0], f[1]);
    const double ba = dist_outputs(f[1], f[0]);
    const double ac = dist_outputs(f[0], f[2]);
    const double bc = dist_outputs(f[1], f[2]);
    CHECK(ab >= 0.0);
    CHECK(ab == ba);
    CHECK(dist_outputs(f[0], f[0]) == 0.0);
    CHECK(ac <= ab + bc + 1e-12);
  }
  // spectral features
  for (int trial = 0; trial < 2000; ++trial) {
    const int bins = 1 + static_cast<int>(rng.below(6));
    const std::int64_t w = 100 * bins;
    auto a = spectral_cdf(hist_feature({random_hist(rng, bins)}, {w}));
    auto b = spectral_cdf(hist_feature({random_hist(rng, bins)}, {w}));
    auto c = spectral_cdf(hist_feature({random_hist(rng, bins)}, {w}));
    const double ab = dist_spectra(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == dist_spectra(b, a));
    CHECK(dist_spectra(a, a) == 0.0);
    CHECK(dist_spectra(a, c) <= ab + dist_spectra(b, c) + 1e-12);
  }
}
