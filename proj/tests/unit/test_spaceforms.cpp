#include <cmath>

#include "doctest.h"
#include "warpimm/errors.hpp"
#include "warpimm/families.hpp"
#include "warpimm/spaceforms.hpp"

using namespace warpimm;
using spaceforms::FactorSpec;
using spaceforms::WarpedRepresentation;

namespace {

MatrixXd cols(int n, std::initializer_list<int> idx) {
  MatrixXd m = MatrixXd::Zero(n, static_cast<Eigen::Index>(idx.size()));
  int j = 0;
  for (int i : idx) m(i, j++) = 1.0;
  return m;
}

VectorXd e(int n, int i) { return VectorXd::Unit(n, i); }

// Flat plane through the origin: base line along e₀, warped line along e₁
// with mean curvature −e₀ (so a₁ = e₀).
WarpedRepresentation polarPlane() {
  return WarpedRepresentation::make(0.0, VectorXd::Zero(2),
                                    {FactorSpec{1, std::nullopt, cols(2, {0})}, FactorSpec{1, -e(2, 0), cols(2, {1})}});
}

// S³ ⊂ R⁴ through q = e₃ with two circle factors: ⟨z₁, z₂⟩ = −1.
WarpedRepresentation sphereRep() {
  VectorXd z1 = VectorXd::Zero(4), z2 = VectorXd::Zero(4);
  z1(0) = 1.0;
  z2(0) = -1.0;
  return WarpedRepresentation::make(1.0, e(4, 3),
                                    {FactorSpec{1, std::nullopt, cols(4, {0})}, FactorSpec{1, z1, cols(4, {1})},
                                     FactorSpec{1, z2, cols(4, {2})}});
}

}  // namespace

TEST_SUITE("spaceforms") {
  TEST_CASE("space form quadric") {
    const spaceforms::SpaceForm flat{0.0, 3};
    CHECK(flat.ambientDim() == 3);
    CHECK(flat.quadricResidual(VectorXd::Ones(3)) == 0.0);
    const spaceforms::SpaceForm hyp{-1.0, 2};
    CHECK(hyp.ambient().signature == Signature::Lorentzian);
    CHECK(hyp.quadricResidual(e(3, 0)) < 1e-15);
  }

  TEST_CASE("product representation") {
    const auto rep = WarpedRepresentation::make(
        0.0, VectorXd::Zero(3), {FactorSpec{1, std::nullopt, cols(3, {0})}, FactorSpec{2, VectorXd::Zero(3), cols(3, {1, 2})}});
    CHECK(rep.a(1).norm() == 0.0);
    Rng rng(1);
    const VectorXd p0 = randomGaussian(3, rng), p1 = randomGaussian(3, rng);
    CHECK(rep.sigma(1, p0) == 1.0);
    CHECK((rep.psi(p0, {p1}) - (p0 + p1)).norm() < 1e-14);
    const auto chk = spaceforms::pullbackMetric(rep, VectorXd::Constant(3, 0.1));
    CHECK((chk.gram - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("sigma values") {
    const auto rep = polarPlane();
    CHECK(rep.a(1).isApprox(e(2, 0)));
    CHECK(rep.sigma(1, 2.0 * e(2, 0)) == doctest::Approx(3.0));
    CHECK(rep.sigma(1, VectorXd::Zero(2)) == 1.0);
    try {
      rep.sigma(1, -1.5 * e(2, 0));
      FAIL("negative warping accepted");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::NonpositiveWarping);
    }
  }

  TEST_CASE("curved representation at q") {
    VectorXd z = VectorXd::Zero(4);
    z(0) = 0.5;
    const auto rep = WarpedRepresentation::make(1.0, e(4, 3),
                                                {FactorSpec{2, std::nullopt, cols(4, {0, 1})}, FactorSpec{1, z, cols(4, {2})}});
    CHECK(rep.sigma(1, e(4, 3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.factorCurvature(1) == doctest::Approx(1.25));
  }

  TEST_CASE("umbilical constraint") {
    VectorXd z1 = VectorXd::Zero(4), z2 = VectorXd::Zero(4);
    z1(0) = 1.0;
    z2(1) = 1.0;
    try {
      WarpedRepresentation::make(1.0, e(4, 3),
                                 {FactorSpec{1, std::nullopt, cols(4, {0})}, FactorSpec{1, z1, cols(4, {1})},
                                  FactorSpec{1, z2, cols(4, {2})}});
      FAIL("orthogonal mean curvatures accepted for c = 1");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::UmbilicalConstraintViolated);
      CHECK(err.details().value("i", 0) == 1);
      CHECK(err.details().value("j", 0) == 2);
    }
  }

  TEST_CASE("psi identities") {
    const auto rep = sphereRep();
    const VectorXd q = rep.q();
    const VectorXd p0 = rep.factorPoint(0, VectorXd::Constant(1, 0.3));
    CHECK((rep.psi(p0, {q, q}) - p0).norm() < 1e-14);

    const auto flat = polarPlane();
    const VectorXd b = flat.factorPoint(0, VectorXd::Constant(1, 0.4));
    CHECK((flat.psi(b, {VectorXd::Zero(2)}) - b).norm() < 1e-14);

    const auto k0 = WarpedRepresentation::make(1.0, e(3, 2), {FactorSpec{2, std::nullopt, std::nullopt}});
    const VectorXd p = k0.factorPoint(0, VectorXd::Constant(2, 0.2));
    CHECK((k0.psi(p, {}) - p).norm() < 1e-14);
  }

  TEST_CASE("psi stays on the quadric") {
    const auto rep = sphereRep();
    const SmoothMap psi = rep.psiMap();
    for (const auto& x : families::sampleBox(rep.m(), 100, 0.5, 3))
      CHECK(rep.space().quadricResidual(psi(x)) <= 1e-10);
  }

  TEST_CASE("fixed-base embedding") {
    const auto rep = sphereRep();
    const VectorXd q = rep.q();
    const VectorXd p1 = rep.factorPoint(1, VectorXd::Constant(1, 0.2));
    const VectorXd p2 = rep.factorPoint(2, VectorXd::Constant(1, -0.3));
    CHECK((rep.fixedBaseEmbedding(q, {p1, p2}) - rep.psi(q, {p1, p2})).norm() < 1e-12);
    const VectorXd pbar = rep.factorPoint(0, VectorXd::Constant(1, 0.25));
    CHECK((rep.fixedBaseEmbedding(pbar, {q, q}) - pbar).norm() < 1e-12);
  }

  TEST_CASE("factor charts land on their factors") {
    for (int idx = 0; idx < families::seededWarpedCount(); ++idx) {
      const auto rep = families::seededWarpedComposition(idx, 1).comp.rep;
      for (int i = 1; i <= rep.k(); ++i) CHECK(std::abs(rep.sigma(i, rep.q()) - 1.0) <= 1e-12);
      Rng rng(static_cast<std::uint64_t>(idx));
      for (int j = 0; j <= rep.k(); ++j) {
        const VectorXd v = 0.2 * randomGaussian(rep.dims()[static_cast<std::size_t>(j)], rng);
        const VectorXd p = rep.factorPoint(j, v);
        CHECK(rep.factorResidual(j, p) <= 1e-12);
        const MatrixXd t = rep.factorTangentBasis(j, p);
        CHECK((rep.ambient().gram(t) - MatrixXd::Identity(t.cols(), t.cols())).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }

  TEST_CASE("pullback metric matches the warped blocks") {
    for (int idx = 0; idx < families::seededWarpedCount(); ++idx) {
      const auto rep = families::seededWarpedComposition(idx, 2).comp.rep;
      for (const auto& x : families::sampleBox(rep.m(), 100, 0.3, 5 + static_cast<std::uint64_t>(idx))) {
        const auto chk = spaceforms::pullbackMetric(rep, x);
        CHECK(chk.offBlockMax <= 1e-6);
        CHECK(chk.inBlockRelErr <= 1e-6);
        if (rep.c() < 0.0) CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(chk.gram).eigenvalues().minCoeff() > 0.0);
      }
    }
  }

  TEST_CASE("rotation surface representation is isometric") {
    const auto rep = families::revolutionSurface(0.2, 0.1).rep;
    for (const auto& x : families::sampleBox(rep.m(), 20, 0.3, 8))
      CHECK(spaceforms::pullbackMetric(rep, x).offBlockMax <= 1e-6);
  }

  TEST_CASE("json round trip") {
    const auto rep = sphereRep();
    const auto back = WarpedRepresentation::fromJson(rep.toJson());
    CHECK(back.c() == rep.c());
    CHECK(back.dims() == rep.dims());
    CHECK((back.psiMap()(VectorXd::Constant(3, 0.1)) - rep.psiMap()(VectorXd::Constant(3, 0.1))).norm() < 1e-14);
  }
}
