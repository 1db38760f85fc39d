#include <cmath>

#include "doctest.h"
#include "warpimm/errors.hpp"
#include "warpimm/harness/generators.hpp"
#include "warpimm/harness/oracles.hpp"
#include "warpimm/splitting.hpp"

using namespace warpimm;
using forms::SymmetricBilinearForm;
using splitting::OrthogonalSplitting;

namespace {

MatrixXd diag(std::initializer_list<double> d) {
  VectorXd v(static_cast<Eigen::Index>(d.size()));
  int i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

MatrixXd swap12(int n) {
  MatrixXd a = MatrixXd::Zero(n, n);
  a(0, 1) = a(1, 0) = 1.0;
  return a;
}

MatrixXd cols(int n, std::initializer_list<int> idx) {
  MatrixXd m = MatrixXd::Zero(n, static_cast<Eigen::Index>(idx.size()));
  int j = 0;
  for (int i : idx) m(i, j++) = 1.0;
  return m;
}

// Block-diagonal generic operators for the coordinate split dims.
SymmetricBilinearForm adaptedForm(const std::vector<int>& dims, int p, std::uint64_t seed) {
  Rng rng(seed);
  int n = 0;
  for (int d : dims) n += d;
  std::vector<MatrixXd> ops;
  for (int a = 0; a < p; ++a) {
    MatrixXd m = MatrixXd::Zero(n, n);
    int off = 0;
    for (int d : dims) {
      m.block(off, off, d, d) = randomSymmetric(d, rng);
      off += d;
    }
    ops.push_back(m);
  }
  return SymmetricBilinearForm::make(ops);
}

// max |R| over the three mixed basis patterns, straight from the operator entries.
double curvatureByHand(const SymmetricBilinearForm& beta, const std::vector<int>& v1, const std::vector<int>& v2) {
  auto r = [&](int x, int y, int z, int w) {
    double s = 0.0;
    for (int a = 0; a < beta.p(); ++a) s += beta.op(a)(x, w) * beta.op(a)(y, z) - beta.op(a)(x, z) * beta.op(a)(y, w);
    return s;
  };
  double worst = 0.0;
  for (int x : v1)
    for (int y : v1) {
      for (int z : v1)
        for (int u : v2) worst = std::max(worst, std::abs(r(x, y, z, u)));
      for (int u : v2)
        for (int v : v2) worst = std::max(worst, std::abs(r(x, y, u, v)));
    }
  for (int x : v1)
    for (int u : v2)
      for (int v : v2)
        for (int w : v2) worst = std::max(worst, std::abs(r(x, u, v, w)));
  return worst;
}

}  // namespace

TEST_SUITE("splitting") {
  TEST_CASE("orthogonal splitting construction") {
    const auto s = OrthogonalSplitting::coordinate({2, 3});
    CHECK(s.n() == 5);
    CHECK(s.dims() == std::vector<int>{2, 3});
    CHECK((s.projector(0) + s.projector(1) - MatrixXd::Identity(5, 5)).norm() < 1e-14);
    CHECK_THROWS_AS(OrthogonalSplitting::make({}), Error);
    try {
      OrthogonalSplitting::make({cols(3, {0}), cols(3, {0, 2})});
      FAIL("overlapping blocks accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::FrameNotOrthonormal);
    }
  }

  TEST_CASE("mixed span") {
    const auto adapted = adaptedForm({2, 3}, 2, 1);
    CHECK(splitting::mixedSpan(adapted, OrthogonalSplitting::coordinate({2, 3})).dim == 0);

    const auto one = SymmetricBilinearForm::make({swap12(3)});
    const auto ms = splitting::mixedSpan(one, OrthogonalSplitting::coordinate({1, 2}));
    CHECK(ms.dim == 1);
    CHECK(ms.sNorm == doctest::Approx(1.0));

    for (int t = 0; t < 10; ++t) {
      const auto beta = harness::randomForm(5, 1 + t % 3, 60 + static_cast<std::uint64_t>(t));
      const auto m = splitting::mixedSpan(beta, OrthogonalSplitting::coordinate({2, 3}));
      CHECK(m.dim == harness::gramDeterminantRank(m.values));
    }
  }

  TEST_CASE("curvature conditions") {
    const auto adapted = adaptedForm({3, 2}, 2, 2);
    CHECK(splitting::curvatureConditions(adapted, OrthogonalSplitting::coordinate({3, 2})) <= 1e-12);

    // All-ones operator: every basis-tuple term is 1·1 − 1·1.
    const auto ones = SymmetricBilinearForm::make({MatrixXd::Ones(4, 4)});
    const auto split = OrthogonalSplitting::coordinate({2, 2});
    CHECK(splitting::curvatureConditions(ones, split) == doctest::Approx(curvatureByHand(ones, {0, 1}, {2, 3})));
    CHECK(splitting::curvatureConditions(ones, split) <= 1e-14);

    MatrixXd bumped = MatrixXd::Ones(4, 4);
    bumped(0, 0) = 2.0;
    const auto b = SymmetricBilinearForm::make({bumped});
    CHECK(splitting::curvatureConditions(b, split) > 0.5);
    CHECK(splitting::curvatureConditions(b, split) == doctest::Approx(curvatureByHand(b, {0, 1}, {2, 3})));

    for (int t = 0; t < 5; ++t) {
      const auto r = harness::randomForm(5, 2, 80 + static_cast<std::uint64_t>(t));
      CHECK(splitting::curvatureConditions(r, OrthogonalSplitting::coordinate({2, 3})) ==
            doctest::Approx(curvatureByHand(r, {0, 1}, {2, 3, 4})).epsilon(1e-10));
    }
  }

  TEST_CASE("max-rank direction") {
    const auto adapted = adaptedForm({2, 2}, 2, 3);
    CHECK(splitting::maxRankDirection(adapted, OrthogonalSplitting::coordinate({2, 2}), 8, 1).rank == 0);

    const auto one = SymmetricBilinearForm::make({swap12(4)});
    const auto split = OrthogonalSplitting::make({cols(4, {0, 2}), cols(4, {1, 3})});
    const auto r = splitting::maxRankDirection(one, split, 8, 1);
    CHECK(r.rank == 1);
    CHECK(std::abs(r.x(0)) > 1e-6);

    // Exhaustive sweep over the unit circle of V₁ as the oracle.
    for (int t = 0; t < 6; ++t) {
      const auto beta = harness::randomForm(5, 1 + t % 3, 90 + static_cast<std::uint64_t>(t));
      const auto s = OrthogonalSplitting::coordinate({2, 3});
      int best = 0;
      for (int i = 0; i < 360; ++i) {
        const double th = i * M_PI / 360.0;
        VectorXd x = VectorXd::Zero(5);
        x(0) = std::cos(th);
        x(1) = std::sin(th);
        best = std::max(best, numericalRank(beta.partialMap(x, s.block(1)), 1e-9));
      }
      CHECK(splitting::maxRankDirection(beta, s, 16, 5).rank == best);
    }
    CHECK_THROWS_AS(splitting::maxRankDirection(one, split, 0, 1), Error);
  }

  TEST_CASE("proof steps on adapted forms") {
    const auto beta = adaptedForm({3, 4}, 2, 4);
    const auto split = OrthogonalSplitting::coordinate({3, 4});
    const auto steps = splitting::proofSteps(beta, split, split.block(0).col(0), 1e-9);
    CHECK(steps.kernelD.cols() == 4);
    CHECK(steps.stepOneResidual <= 1e-12);
    CHECK(steps.stepTwoResidual <= 1e-12);
    CHECK(steps.zeroResidual <= 1e-12);
  }

  TEST_CASE("verified proof steps reject failing hypotheses") {
    // A rank-one third operator coupling both blocks: ν₁ ≥ n − 1.
    auto beta = adaptedForm({3, 4}, 2, 5);
    std::vector<MatrixXd> ops = beta.ops();
    const VectorXd v = VectorXd::Ones(7).normalized();
    ops.push_back(v * v.transpose());
    const auto comp = SymmetricBilinearForm::make(ops);
    const auto split = OrthogonalSplitting::coordinate({3, 4});
    try {
      splitting::verifyProofSteps(comp, split, split.block(0).col(0), 1e-6);
      FAIL("hypothesis failure not reported");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::HypothesisFailed);
    }
  }

  TEST_CASE("lemma verdicts") {
    const auto beta = adaptedForm({3, 4}, 2, 6);
    const auto split = OrthogonalSplitting::coordinate({3, 4});
    const auto rep = splitting::lemmaVerify(beta, split);
    CHECK(rep.verdict == splitting::Verdict::Holds);
    CHECK(rep.sNorm == 0.0);
    CHECK(rep.sDim == 0);

    std::vector<MatrixXd> ops{MatrixXd::Zero(7, 7), MatrixXd::Zero(7, 7)};
    ops[0](0, 0) = 1.0;
    ops[1](1, 1) = 1.0;
    const auto flat = splitting::lemmaVerify(SymmetricBilinearForm::make(ops), split);
    CHECK(flat.verdict == splitting::Verdict::HypothesisFails);
    CHECK_FALSE(flat.hypothesisOk);

    const auto blocks = splitting::lemmaVerifyBlocks(adaptedForm({2, 3, 3}, 2, 7),
                                                     OrthogonalSplitting::coordinate({2, 3, 3}));
    CHECK(blocks.size() == 3);
    for (const auto& b : blocks) CHECK(b.verdict == splitting::Verdict::Holds);
  }

  TEST_CASE("adapted splitting detection") {
    const auto three = splitting::detectAdaptedSplitting(SymmetricBilinearForm::make({diag({1, 2, 3})}));
    CHECK(three.blockCount() == 3);

    const auto pair = SymmetricBilinearForm::make({diag({1, 1, 0, 0}), diag({0, 0, 1, 1})});
    const auto four = splitting::detectAdaptedSplitting(pair);
    CHECK(four.blockCount() == 4);
    CHECK(splitting::offBlockResidual(pair, four) <= 1e-8);

    // Generic 3 + 2 blocks hidden by a rotation; projectors follow the rotation.
    Rng rng(21);
    const auto hidden = adaptedForm({3, 2}, 2, 8);
    const MatrixXd q = randomOrthogonal(5, rng);
    const auto found = splitting::detectAdaptedSplitting(hidden);
    const auto rotated = splitting::detectAdaptedSplitting(hidden.conjugated(q));
    REQUIRE(found.blockCount() == 2);
    REQUIRE(rotated.blockCount() == 2);
    CHECK(splitting::offBlockResidual(hidden.conjugated(q), rotated) <= 1e-8);
    for (int i = 0; i < 2; ++i) {
      const MatrixXd mapped = q.transpose() * found.projector(i) * q;
      double best = 1e9;
      for (int j = 0; j < 2; ++j) best = std::min(best, (mapped - rotated.projector(j)).norm());
      CHECK(best <= 1e-8);
    }
  }

  TEST_CASE("falsification harness") {
    splitting::FalsifyConfig fc;
    fc.trials = 1000;
    const auto r = splitting::falsify(6, 1, fc);
    CHECK(r.violations == 0);
    CHECK(r.tested > 0);
    CHECK(r.maxSNorm <= 1e-6);
    CHECK(r.compositions > 0);
    CHECK(r.compositionsFlagged > 0);

    fc.trials = 100;
    const auto gated = splitting::falsify(4, 2, fc);
    CHECK(gated.tested == 0);
    CHECK(gated.violations == 0);
    CHECK(gated.gateRejected == gated.trials);

    fc.trials = 0;
    CHECK_THROWS_AS(splitting::falsify(6, 1, fc), Error);
  }

  TEST_CASE("falsification is schedule independent") {
    splitting::FalsifyConfig fc;
    fc.trials = 60;
    const auto serial = splitting::falsify(7, 2, fc);
    fc.jobs = 3;
    const auto parallel = splitting::falsify(7, 2, fc);
    CHECK(serial.tested == parallel.tested);
    CHECK(serial.maxSNorm == parallel.maxSNorm);
    CHECK(serial.maxStepOne == parallel.maxStepOne);
  }
}
