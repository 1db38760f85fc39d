#include <cmath>

#include "doctest.h"
#include "warpimm/errors.hpp"
#include "warpimm/families.hpp"
#include "warpimm/immersions.hpp"

using namespace warpimm;
using immersions::NumericalImmersion;
using spaceforms::SpaceForm;

namespace {

ErrorKind kindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

NumericalImmersion flat(const SmoothMap& f, const std::string& family = "custom") {
  return NumericalImmersion(f, SpaceForm{0.0, f.outDim()}, {}, family);
}

double maxAbs(const std::vector<MatrixXd>& ops) {
  double m = 0.0;
  for (const auto& a : ops) m = std::max(m, a.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_SUITE("immersions") {
  TEST_CASE("affine plane is totally geodesic") {
    Rng rng(2);
    const MatrixXd a = randomOrthonormalFrame(4, 2, rng);
    const auto f = flat(families::affineMap(a, VectorXd::Zero(4)));
    const auto ff = immersions::fundamentalForms(f, VectorXd::Constant(2, 0.1));
    CHECK(ff.codimension == 2);
    CHECK(maxAbs(ff.chartOps) <= 1e-12);
    CHECK((ff.gram - MatrixXd::Identity(2, 2)).norm() <= 1e-12);
    const auto prof = immersions::pointwiseNullities(f, VectorXd::Zero(2), {});
    CHECK(prof.values == std::vector<int>{2, 2});
  }

  TEST_CASE("sphere chart is umbilic") {
    const auto f = flat(families::sphereChartMap(2, 1.0));
    const auto ff = immersions::fundamentalForms(f, VectorXd::Zero(2));
    REQUIRE(ff.codimension == 1);
    CHECK((ff.chartOps[0].cwiseAbs() - ff.gram).norm() <= 1e-8);
    CHECK(immersions::pointwiseNullities(f, VectorXd::Zero(2), {}).values == std::vector<int>{0});
  }

  TEST_CASE("graph of xy at the origin") {
    MatrixXd h(2, 2);
    h << 0, 1, 1, 0;
    const auto f = flat(families::graphMap(2, {families::GraphTerm{h, VectorXd::Zero(2)}}));
    const auto ff = immersions::fundamentalForms(f, VectorXd::Zero(2));
    CHECK((ff.chartOps[0].cwiseAbs() - h).norm() <= 1e-12);
    const VectorXd e0 = VectorXd::Unit(2, 0), e1 = VectorXd::Unit(2, 1);
    CHECK(ff.chartAlpha(e0, e1).norm() == doctest::Approx(1.0));
    CHECK(ff.chartAlpha(e0, e0).norm() <= 1e-12);
  }

  TEST_CASE("frames are orthogonal") {
    const auto f = families::graphProduct({2, 3}, 4);
    const auto ff = immersions::fundamentalForms(f, VectorXd::Constant(5, 0.1));
    CHECK((ff.normalFrame.transpose() * ff.tangentFrame).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((ff.tangentChart.transpose() * ff.gram * ff.tangentChart - MatrixXd::Identity(5, 5)).norm() <= 1e-10);
    for (const auto& op : ff.chartOps) CHECK((op - op.transpose()).norm() <= 1e-12);

    const auto sw = families::seededWarpedComposition(1, 3);
    const auto& g = sw.comp.immersion;
    const auto fs = immersions::fundamentalForms(g, sw.samples[0]);
    const InnerSpace amb = g.ambientSpace();
    for (int r = 0; r < fs.normalFrame.cols(); ++r)
      CHECK(std::abs(amb.dot(fs.normalFrame.col(r), fs.point)) <= 1e-10);
  }

  TEST_CASE("oracle jets agree with finite differences") {
    const auto sw = families::seededWarpedComposition(0, 4);
    const auto& f = sw.comp.immersion;
    REQUIRE(f.hasOracle());
    const auto a = immersions::fundamentalForms(f, sw.samples[1]);
    const auto b = immersions::fundamentalForms(f.withoutOracle(), sw.samples[1]);
    for (int i = 0; i < f.n(); ++i)
      for (int j = 0; j < f.n(); ++j) {
        const VectorXd ei = VectorXd::Unit(f.n(), i), ej = VectorXd::Unit(f.n(), j);
        CHECK((a.chartAlpha(ei, ej) - b.chartAlpha(ei, ej)).norm() <= 1e-5);
      }
  }

  TEST_CASE("cylinder has one flat direction") {
    const auto f = flat(families::cylinderMap(2, 0, 1.5));
    CHECK(immersions::pointwiseNullities(f, VectorXd::Constant(2, 0.2), {}).values == std::vector<int>{1});
  }

  TEST_CASE("composition with a cylinder adds a rank-one normal") {
    const auto plane = flat(families::affineMap(MatrixXd::Identity(3, 2), VectorXd::Zero(3)));
    const double radius = 2.0;
    const auto g = immersions::makeComposition(plane, families::cylinderMap(3, 0, radius));
    const auto ff = immersions::fundamentalForms(g, VectorXd::Zero(2));
    const VectorXd e0 = VectorXd::Unit(2, 0), e1 = VectorXd::Unit(2, 1);
    CHECK(ff.chartAlpha(e0, e0).norm() == doctest::Approx(1.0 / radius).epsilon(1e-8));
    CHECK(ff.chartAlpha(e0, e1).norm() <= 1e-10);
    CHECK(ff.chartAlpha(e1, e1).norm() <= 1e-10);
  }

  TEST_CASE("isometric inclusion preserves the second fundamental form") {
    const auto f = flat(families::sphereChartMap(2, 2.0));
    const auto g = immersions::makeComposition(f, families::inclusionMap(3, 2));
    const VectorXd x = VectorXd::Constant(2, 0.3);
    const auto a = immersions::fundamentalForms(f, x);
    const auto b = immersions::fundamentalForms(g, x);
    CHECK(b.codimension == 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const VectorXd ei = VectorXd::Unit(2, i), ej = VectorXd::Unit(2, j);
        CHECK(a.chartAlpha(ei, ej).norm() == doctest::Approx(b.chartAlpha(ei, ej).norm()).epsilon(1e-9));
      }
    // The two flat normals raise ν₁ and ν₂; the full normal space sees α unchanged.
    CHECK(immersions::pointwiseNullities(g, x, {}).values == std::vector<int>{2, 2, 0});
    CHECK(immersions::pointwiseNullities(f, x, {}).values.back() == 0);
  }

  TEST_CASE("composition domain checks") {
    const auto f = flat(families::sphereChartMap(2, 1.0));
    CHECK(kindOf([&] { immersions::makeComposition(f, families::inclusionMap(4, 1)); }) == ErrorKind::DomainMismatch);
    const auto curved = families::seededWarpedComposition(1, 1).comp.immersion;
    CHECK(kindOf([&] {
            immersions::makeComposition(curved, families::inclusionMap(curved.ambient().ambientDim(), 1));
          }) == ErrorKind::DomainMismatch);
  }

  TEST_CASE("rank-deficient jacobian") {
    const SmoothMap bad = SmoothMap::fromTemplate(2, 3, [](const auto& u) {
      using T = typename std::decay_t<decltype(u)>::value_type;
      return std::vector<T>{u[0], u[0], T(0.0)};
    });
    CHECK(kindOf([&] { immersions::fundamentalForms(flat(bad), VectorXd::Zero(2)); }) ==
          ErrorKind::RankDeficientJacobian);
  }

  TEST_CASE("codazzi residual") {
    Rng rng(6);
    const auto plane = flat(families::affineMap(randomOrthonormalFrame(4, 2, rng), VectorXd::Zero(4)));
    CHECK(immersions::codazziResidual(plane, VectorXd::Zero(2)) <= 1e-8);
    CHECK(immersions::codazziResidual(flat(families::sphereChartMap(2, 1.0)), VectorXd::Constant(2, 0.2)) <= 1e-3);
    CHECK(immersions::codazziResidual(families::revolutionSurface(0.3, -0.2).immersion, VectorXd::Constant(2, 0.1)) <=
          1e-3);
  }

  TEST_CASE("surface of revolution metric") {
    const auto comp = families::revolutionSurface(0.3, -0.2);
    for (const auto& x : families::sampleBox(2, 10, 0.3, 7)) {
      const auto ff = immersions::fundamentalForms(comp.immersion, x);
      const double r = 1.0 + 0.3 * x(0) - 0.2 * x(0) * x(0);
      CHECK(comp.rho(1)(VectorXd(x.head(1))) == doctest::Approx(r).epsilon(1e-12));
      CHECK(ff.gram(1, 1) == doctest::Approx(r * r).epsilon(1e-8));
      CHECK(std::abs(ff.gram(0, 1)) <= 1e-8);
    }
  }

  TEST_CASE("rotation hypersurface") {
    const auto comp = families::revolutionSurface(0.2, 0.1, 3);
    CHECK(comp.immersion.n() == 4);
    CHECK(comp.immersion.ambient().ambientDim() == 5);
    const auto prof = immersions::pointwiseNullities(comp.immersion, VectorXd::Constant(4, 0.1), {});
    CHECK(prof.hypothesisOk);
  }

  TEST_CASE("identity charts give the representation") {
    const auto rep = families::seededWarpedComposition(4, 1).comp.rep;
    std::vector<SmoothMap> charts;
    for (int d : rep.dims()) charts.push_back(SmoothMap::identity(d));
    const auto comp = immersions::composeWarpedCharts(rep, charts);
    const SmoothMap psi = rep.psiMap();
    for (const auto& x : families::sampleBox(rep.m(), 10, 0.3, 9))
      CHECK((comp.immersion(x) - psi(x)).norm() <= 1e-12);
  }

  TEST_CASE("factor target mismatch") {
    const auto rep = families::seededWarpedComposition(0, 1).comp.rep;
    const int amb = rep.space().ambientDim();
    Rng rng(8);
    std::vector<NumericalImmersion> factors;
    for (int d : rep.dims())
      factors.push_back(NumericalImmersion(families::affineMap(randomGaussian(amb * d, rng).reshaped(amb, d), rep.q()),
                                           rep.space()));
    CHECK(kindOf([&] { immersions::composeWarped(rep, factors); }) == ErrorKind::FactorTargetMismatch);

    std::vector<NumericalImmersion> onFactors;
    for (int j = 0; j <= rep.k(); ++j) {
      const SmoothMap chart = SmoothMap::identity(rep.dims()[static_cast<std::size_t>(j)]);
      onFactors.push_back(NumericalImmersion(SmoothMap::compose(rep.factorChart(j), chart), rep.space()));
    }
    CHECK_NOTHROW(immersions::composeWarped(rep, onFactors));
  }

  TEST_CASE("gauss equation matches the intrinsic curvature") {
    for (int idx : {0, 1, 2, 5}) {
      const auto sw = families::seededWarpedComposition(idx, 11);
      const auto& comp = sw.comp;
      const auto spec = comp.intrinsicMetric();
      const int n = comp.immersion.n();
      Rng rng(static_cast<std::uint64_t>(idx) + 30);
      const VectorXd& x = sw.samples[0];
      const auto ff = immersions::fundamentalForms(comp.immersion, x);
      for (int t = 0; t < 5; ++t) {
        const VectorXd a = randomGaussian(n, rng), b = randomGaussian(n, rng), c = randomGaussian(n, rng),
                       d = randomGaussian(n, rng);
        const double extrinsic = immersions::gaussCurvature4(ff, comp.rep.c(), a, b, c, d);
        const double intrinsic = warped::curvature4(spec, a, b, c, d, x);
        CHECK(std::abs(extrinsic - intrinsic) <= 1e-4 * std::max(1.0, std::abs(intrinsic)));
      }
    }
  }

  TEST_CASE("warped compositions are adapted") {
    for (int idx = 0; idx < families::seededWarpedCount(); ++idx) {
      const auto sw = families::seededWarpedComposition(idx, 12, 4);
      for (const auto& x : sw.samples) {
        const auto r = immersions::adaptedness(sw.comp.immersion.withoutOracle(), x, sw.comp.dims());
        CHECK(r.mixed <= 1e-5);
      }
      CHECK(immersions::nolkerAlphaCheck(sw.comp, sw.samples) <= 1e-5);
    }
  }

  TEST_CASE("composition counterexample mixes factors") {
    const auto f = families::compositionCounterexample(5);
    const auto r = immersions::adaptedness(f, VectorXd::Zero(f.n()), {3, 4});
    CHECK(r.mixed > 1e-3);
    CHECK_FALSE(immersions::pointwiseNullities(f, VectorXd::Zero(f.n()), {}).hypothesisOk);
  }
}
