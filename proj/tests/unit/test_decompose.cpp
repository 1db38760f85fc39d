#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "warpimm/errors.hpp"
#include "warpimm/families.hpp"
#include "warpimm/immersions.hpp"

using namespace warpimm;

namespace {

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> range(int from, int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = from + i;
  return v;
}

}  // namespace

TEST_SUITE("decompose") {
  TEST_CASE("seeded warped compositions round trip") {
    for (int idx : {0, 1, 2, 3}) {
      const auto sw = families::seededWarpedComposition(idx, 21);
      const auto& comp = sw.comp;
      const auto res = immersions::decompose(comp.immersion, sw.samples);
      REQUIRE(static_cast<int>(res.factors.size()) == comp.rep.k() + 1);
      for (int j = 0; j <= comp.rep.k(); ++j)
        CHECK(sorted(res.factors[static_cast<std::size_t>(j)]) == range(comp.offset(j), comp.dims()[static_cast<std::size_t>(j)]));
      CHECK(res.factorCodimensions == sw.factorCodimensions);
      for (const auto& c : res.claims) CHECK(c.holds);
    }
  }

  TEST_CASE("rotation hypersurface recovers its warping") {
    const auto comp = families::revolutionSurface(0.3, -0.2, 3);
    const auto samples = families::sampleBox(4, 8, 0.2, 22);
    const auto res = immersions::decompose(comp.immersion, samples);
    REQUIRE(res.factors.size() == 2);
    CHECK(sorted(res.factors[0]) == range(0, 1));
    CHECK(sorted(res.factors[1]) == range(1, 3));
    const auto rho = comp.rho(1);
    const double ref = rho(VectorXd(res.basePoint.head(1)));
    for (std::size_t s = 0; s < samples.size(); ++s)
      CHECK(std::abs(res.warpingSamples(0, static_cast<Eigen::Index>(s)) - rho(VectorXd(samples[s].head(1))) / ref) <=
            1e-6);
  }

  TEST_CASE("surface of revolution with the gate skipped") {
    const auto comp = families::revolutionSurface(0.3, -0.2);
    immersions::DecomposeConfig cfg;
    cfg.skipGate = true;
    const auto res = immersions::decompose(comp.immersion, families::sampleBox(2, 6, 0.2, 23), cfg);
    REQUIRE(res.factors.size() == 2);
    CHECK(sorted(res.factors[0]) == std::vector<int>{0});
    CHECK(sorted(res.factors[1]) == std::vector<int>{1});
  }

  TEST_CASE("riemannian product of graphs") {
    const auto f = families::graphProduct({3, 3}, 24);
    immersions::DecomposeConfig cfg;
    cfg.warped = false;
    const auto res = immersions::decompose(f, families::sampleBox(6, 6, 0.2, 24), cfg);
    REQUIRE(res.factors.size() == 2);
    CHECK(sorted(res.factors[0]) == range(0, 3));
    CHECK(sorted(res.factors[1]) == range(3, 3));
    CHECK(res.factorCodimensions == std::vector<int>{1, 1});
    CHECK(res.baseCoords.empty());
  }

  TEST_CASE("counterexample is rejected at s = 1") {
    const auto f = families::compositionCounterexample(25);
    try {
      immersions::decompose(f, families::sampleBox(f.n(), 4, 0.15, 25));
      FAIL("counterexample accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::HypothesisViolated);
      CHECK(e.details().value("s", 0) == 1);
    }
  }

  TEST_CASE("skipping the gate exposes the mixed form") {
    const auto f = families::compositionCounterexample(26);
    immersions::DecomposeConfig cfg;
    cfg.skipGate = true;
    try {
      immersions::decompose(f, families::sampleBox(f.n(), 4, 0.15, 26), cfg);
      FAIL("mixed composition decomposed");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotAdapted);
    }
  }
}
