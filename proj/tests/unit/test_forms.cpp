#include <cmath>

#include "doctest.h"
#include "warpimm/errors.hpp"
#include "warpimm/forms.hpp"
#include "warpimm/harness/generators.hpp"
#include "warpimm/harness/oracles.hpp"

using namespace warpimm;
using forms::SymmetricBilinearForm;

namespace {

MatrixXd diag(std::initializer_list<double> d) {
  VectorXd v(static_cast<Eigen::Index>(d.size()));
  int i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

ErrorKind kindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("forms") {
  TEST_CASE("construction validates symmetry and shapes") {
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(4, 4), MatrixXd::Zero(4, 4)});
    CHECK(zero.n() == 4);
    CHECK(zero.p() == 2);
    CHECK(zero.scale() == 0.0);

    MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    CHECK(SymmetricBilinearForm::make({swap}).n() == 2);

    MatrixXd upper(2, 2);
    upper << 0, 1, 0, 0;
    CHECK(kindOf([&] { SymmetricBilinearForm::make({upper}); }) == ErrorKind::AsymmetryExceedsTol);
    CHECK(kindOf([&] { SymmetricBilinearForm::make({MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)}); }) ==
          ErrorKind::DimensionMismatch);
  }

  TEST_CASE("evaluate") {
    const VectorXd e1 = VectorXd::Unit(2, 0), e2 = VectorXd::Unit(2, 1);
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(2, 2)});
    CHECK(zero.evaluate(e1, e2).norm() == 0.0);
    const auto umbilic = SymmetricBilinearForm::make({MatrixXd::Identity(2, 2)});
    CHECK(umbilic.evaluate(e1, e1)(0) == doctest::Approx(1.0));
    const auto d = SymmetricBilinearForm::make({diag({1, -1})});
    CHECK(d.evaluate(e1, e2)(0) == 0.0);

    Rng rng(3);
    const auto beta = harness::randomForm(5, 3, 11);
    const VectorXd x = randomGaussian(5, rng), y = randomGaussian(5, rng);
    CHECK((beta.evaluate(x, y) - beta.evaluate(y, x)).norm() < 1e-12);
    for (int a = 0; a < 3; ++a) CHECK(beta.evaluate(x, y)(a) == doctest::Approx(x.dot(beta.op(a) * y)));
  }

  TEST_CASE("gauss tensor against direct evaluation") {
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(3, 3)});
    Rng rng(5);
    const VectorXd v = randomGaussian(3, rng);
    CHECK(forms::gaussTensor(zero, v, v, v, v) == 0.0);
    for (int t = 0; t < 20; ++t) {
      const auto beta = harness::randomForm(4, 2, 100 + static_cast<std::uint64_t>(t));
      const VectorXd x = randomGaussian(4, rng), y = randomGaussian(4, rng), z = randomGaussian(4, rng),
                     w = randomGaussian(4, rng);
      VectorXd bxw(2), byz(2), bxz(2), byw(2);
      for (int a = 0; a < 2; ++a) {
        bxw(a) = x.dot(beta.op(a) * w);
        byz(a) = y.dot(beta.op(a) * z);
        bxz(a) = x.dot(beta.op(a) * z);
        byw(a) = y.dot(beta.op(a) * w);
      }
      CHECK(forms::gaussTensor(beta, x, y, z, w) == doctest::Approx(bxw.dot(byz) - bxz.dot(byw)).epsilon(1e-12));
    }
  }

  TEST_CASE("gauss tensor symmetries") {
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
      const int n = 2 + t % 7, p = 1 + t % 3;
      const auto beta = harness::randomForm(n, p, 200 + static_cast<std::uint64_t>(t));
      const VectorXd x = randomGaussian(n, rng), y = randomGaussian(n, rng), z = randomGaussian(n, rng),
                     w = randomGaussian(n, rng);
      auto r = [&](const VectorXd& a, const VectorXd& b, const VectorXd& c, const VectorXd& d) {
        return forms::gaussTensor(beta, a, b, c, d);
      };
      const double v = r(x, y, z, w);
      CHECK(std::abs(v + r(y, x, z, w)) <= 1e-10);
      CHECK(std::abs(v + r(x, y, w, z)) <= 1e-10);
      CHECK(std::abs(v - r(z, w, x, y)) <= 1e-10);
      CHECK(std::abs(v + r(y, z, x, w) + r(z, x, y, w)) <= 1e-10);
    }
  }

  TEST_CASE("nullity at a subspace") {
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(4, 4), MatrixXd::Zero(4, 4)});
    CHECK(forms::nullityAtSubspace(zero, MatrixXd::Identity(2, 1)) == 4);
    const auto beta = SymmetricBilinearForm::make({diag({1, 1, 0, 0}), diag({0, 0, 1, 1})});
    CHECK(forms::nullityAtSubspace(beta, MatrixXd::Identity(2, 2)) == 0);
    CHECK(forms::nullityAtSubspace(beta, MatrixXd::Identity(2, 1)) == 2);
    CHECK(kindOf([&] { forms::nullityAtSubspace(beta, 2.0 * MatrixXd::Identity(2, 1)); }) ==
          ErrorKind::FrameNotOrthonormal);
  }

  TEST_CASE("s-nullity examples") {
    forms::NullityOptions opts;
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(4, 4), MatrixXd::Zero(4, 4)});
    for (int s = 1; s <= 2; ++s) CHECK(forms::sNullity(zero, s, opts).value == 4);

    const auto beta = SymmetricBilinearForm::make({diag({1, 0, 0, 0}), diag({0, 1, 0, 0})});
    const auto r = forms::sNullity(beta, 1, opts);
    CHECK(r.value == 3);
    const VectorXd u = r.witness.col(0);
    CHECK(std::min(std::abs(u(0)), std::abs(u(1))) < 1e-8);

    const auto single = SymmetricBilinearForm::make({diag({2, 0, -1})});
    CHECK(forms::sNullity(single, 1, opts).value == 1);
    CHECK(kindOf([&] { forms::sNullity(single, 2, opts); }) == ErrorKind::SOutOfRange);
    auto none = opts;
    none.starts = 0;
    CHECK(kindOf([&] { forms::sNullity(beta, 1, none); }) == ErrorKind::BudgetZero);
  }

  TEST_CASE("nullity profile examples") {
    forms::NullityOptions opts;
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(4, 4)});
    const auto z = forms::nullityProfile(zero, opts);
    CHECK(z.values == std::vector<int>{4});
    CHECK_FALSE(z.hypothesisOk);
    CHECK(z.firstViolatingS == 1);

    const auto umbilic = forms::nullityProfile(SymmetricBilinearForm::make({MatrixXd::Identity(5, 5)}), opts);
    CHECK(umbilic.values == std::vector<int>{0});
    CHECK(umbilic.hypothesisOk);

    // A pencil of two 7×7 symmetric matrices always has a singular member, so
    // generic forms at n = 7, p = 2 have ν₁ = 1 (value frozen from the grid).
    const auto generic = harness::randomForm(7, 2, 7);
    const auto g = forms::nullityProfile(generic, opts);
    CHECK(g.values == std::vector<int>{1, 0});
    CHECK(harness::oracleGrassmannGrid(generic, 1, 720).value == 1);
    CHECK(g.hypothesisOk);
  }

  TEST_CASE("witnesses achieve their values and s = p is the common kernel") {
    forms::NullityOptions opts;
    for (const auto& item : harness::nullityCorpus(24, 41)) {
      const auto rep = forms::nullityProfile(item.beta, opts);
      for (int s = 1; s <= item.beta.p(); ++s) {
        const auto& w = rep.witnesses[static_cast<std::size_t>(s - 1)];
        CHECK(forms::nullityAtSubspace(item.beta, w) == rep.values[static_cast<std::size_t>(s - 1)]);
      }
      CHECK(rep.values.back() == forms::commonKernelDim(item.beta));
    }
  }

  TEST_CASE("monotone under subspace inclusion") {
    Rng rng(9);
    for (const auto& item : harness::nullityCorpus(18, 43)) {
      const int p = item.beta.p();
      const MatrixXd big = randomOrthonormalFrame(p, p, rng);
      for (int s = 1; s < p; ++s)
        CHECK(forms::nullityAtSubspace(item.beta, big.leftCols(s)) >=
              forms::nullityAtSubspace(item.beta, big.leftCols(s + 1)));
    }
  }

  TEST_CASE("orthogonal invariance") {
    forms::NullityOptions opts;
    Rng rng(13);
    for (const auto& item : harness::nullityCorpus(12, 47)) {
      const auto& beta = item.beta;
      const auto base = forms::nullityProfile(beta, opts).values;
      const auto conj = beta.conjugated(randomOrthogonal(beta.n(), rng));
      CHECK(forms::nullityProfile(conj, opts).values == base);
      const auto mixed = beta.mixed(randomOrthogonal(beta.p(), rng));
      CHECK(forms::nullityProfile(mixed, opts).values == base);
    }
  }

  TEST_CASE("grid sweep") {
    const auto zero = SymmetricBilinearForm::make({MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 3)});
    CHECK(forms::grassmannGridSweep(zero, 1, 2).value == 3);

    const auto beta = SymmetricBilinearForm::make({diag({1, 0, 0, 0}), diag({0, 1, 0, 0})});
    CHECK(harness::oracleGrassmannGrid(beta, 1, 720).value == 3);
    CHECK(harness::oracleGrassmannGrid(beta, 2, 720).value == forms::commonKernelDim(beta));

    const auto four = harness::randomForm(4, 4, 3);
    CHECK(kindOf([&] { harness::oracleGrassmannGrid(four, 1, 10); }) == ErrorKind::PTooLarge);
  }
}
