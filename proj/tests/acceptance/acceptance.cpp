// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "warpimm/errors.hpp"
#include "warpimm/families.hpp"
#include "warpimm/forms.hpp"
#include "warpimm/harness/generators.hpp"
#include "warpimm/harness/oracles.hpp"
#include "warpimm/immersions.hpp"
#include "warpimm/spaceforms.hpp"
#include "warpimm/splitting.hpp"
#include "warpimm/warped.hpp"

using namespace warpimm;

namespace {

constexpr std::uint64_t kSeed = 0x5eed;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Gauss tensor symmetries on seeded random forms.
Outcome gaussSymmetries() {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(deriveSeed(kSeed, static_cast<std::uint64_t>(t)));
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const int p = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto beta = harness::randomForm(n, p, deriveSeed(kSeed, 500 + static_cast<std::uint64_t>(t)));
    for (int k = 0; k < 20; ++k) {
      const VectorXd x = randomGaussian(n, rng), y = randomGaussian(n, rng), z = randomGaussian(n, rng),
                     w = randomGaussian(n, rng);
      auto r = [&](const VectorXd& a, const VectorXd& b, const VectorXd& c, const VectorXd& d) {
        return forms::gaussTensor(beta, a, b, c, d);
      };
      const double v = r(x, y, z, w);
      worst = std::max({worst, std::abs(v + r(y, x, z, w)), std::abs(v + r(x, y, w, z)), std::abs(v - r(z, w, x, y)),
                        std::abs(v + r(y, z, x, w) + r(z, x, y, w))});
    }
  }
  return {worst <= 1e-10, "max residual " + fmt("%.2e", worst) + " (tol 1e-10)"};
}

// 2. Continuous search against the exhaustive grid on the nullity corpus.
Outcome nullityCertification() {
  const auto corpus = harness::nullityCorpus(50, kSeed);
  int mismatches = 0, comparisons = 0, nontrivial = 0;
  forms::NullityOptions opts;
  opts.seed = kSeed;
  for (const auto& item : corpus) {
    const auto& beta = item.beta;
    const auto prof = forms::nullityProfile(beta, opts);
    const int res = beta.p() == 2 ? 720 : 90;
    for (int s = 1; s <= beta.p(); ++s) {
      const auto grid = harness::oracleGrassmannGrid(beta, s, res);
      ++comparisons;
      if (grid.value > 0) ++nontrivial;
      if (grid.value != prof.values[static_cast<std::size_t>(s - 1)]) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(comparisons) + " values, " + std::to_string(nontrivial) +
                               " nonzero, mismatches " + std::to_string(mismatches)};
}

// 3. Randomised falsification of the splitting lemma.
Outcome falsification() {
  bool ok = true;
  std::string detail;
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (const auto& [n, p] : std::vector<std::pair<int, int>>{{6, 1}, {7, 2}, {9, 3}}) {
    splitting::FalsifyConfig fc;
    fc.trials = 10000;
    fc.seed = kSeed;
    fc.jobs = jobs;
    const auto r = splitting::falsify(n, p, fc);
    const bool here = r.violations == 0 && r.maxSNorm <= 1e-6 && r.maxStepOne <= 1e-6 && r.maxStepTwo <= 1e-6;
    ok = ok && here && r.tested > 0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "(%d,%d) tested %d violations %d sNorm %.1e steps %.1e/%.1e; ", n, p, r.tested,
                  r.violations, r.maxSNorm, r.maxStepOne, r.maxStepTwo);
    detail += buf;
  }
  return {ok, detail};
}

// 4. Pullback of the ambient pairing under the built-in representations.
Outcome representationIsometry() {
  bool ok = true;
  std::string detail;
  for (double c : {0.0, 1.0, -1.0}) {
    double off = 0.0, in = 0.0, quad = 0.0;
    int points = 0;
    for (int idx = 0; idx < families::seededWarpedCount(); ++idx) {
      const auto sw = families::seededWarpedComposition(idx, kSeed);
      const auto& rep = sw.comp.rep;
      if (rep.c() != c) continue;
      const SmoothMap psi = rep.psiMap();
      for (const auto& x : families::sampleBox(rep.m(), 100, 0.3, deriveSeed(kSeed, 40 + idx))) {
        const auto chk = spaceforms::pullbackMetric(rep, x);
        off = std::max(off, chk.offBlockMax);
        in = std::max(in, chk.inBlockRelErr);
        quad = std::max(quad, rep.space().quadricResidual(psi(x)));
        ++points;
      }
    }
    ok = ok && off <= 1e-6 && in <= 1e-6 && quad <= 1e-9 && points >= 100;
    char buf[160];
    std::snprintf(buf, sizeof buf, "c=%+g: %d pts off %.1e in %.1e quad %.1e; ", c, points, off, in, quad);
    detail += buf;
  }
  return {ok, detail};
}

double fdGap(const warped::WarpedMetricSpec& spec, const VectorXd& x) {
  const int n = spec.n();
  const auto fd = harness::fdRiemannOperators([&spec](const VectorXd& y) { return spec.metric(y); }, x);
  double gap = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      gap = std::max(gap, (warped::curvatureOperator(spec, VectorXd::Unit(n, a), VectorXd::Unit(n, b), x) -
                           fd[static_cast<std::size_t>(a * n + b)])
                              .cwiseAbs()
                              .maxCoeff());
  return gap;
}

warped::WarpedMetricSpec randomSpec(int t) {
  Rng rng(deriveSeed(kSeed, 900 + static_cast<std::uint64_t>(t)));
  std::uniform_int_distribution<int> dim(1, 2), kind(0, 2), count(1, 2);
  const int n0 = dim(rng);
  std::vector<warped::FactorMetric> fs;
  if (t % 2 == 0) {
    fs.push_back(warped::FactorMetric::euclidean(n0));
  } else {
    std::vector<MatrixXd> slopes;
    for (int i = 0; i < n0; ++i) slopes.push_back(0.2 * randomSymmetric(n0, rng));
    fs.push_back(warped::FactorMetric::sampled(MatrixXd::Identity(n0, n0), slopes));
  }
  std::vector<warped::WarpingFunction> ws;
  for (int i = 0, k = count(rng); i < k; ++i) {
    const int d = dim(rng);
    switch (kind(rng)) {
      case 0: fs.push_back(warped::FactorMetric::euclidean(d)); break;
      case 1: fs.push_back(warped::FactorMetric::sphere(d, 1.5)); break;
      default: fs.push_back(warped::FactorMetric::hyperbolic(d, 0.8)); break;
    }
    const VectorXd b = 0.5 * randomGaussian(n0, rng);
    if (i % 2 == 0)
      ws.push_back(warped::WarpingFunction::polynomial(1.3, b, 0.3 * randomSymmetric(n0, rng)));
    else
      ws.push_back(warped::WarpingFunction::exponential(0.9, b));
  }
  return warped::WarpedMetricSpec::make(fs, ws);
}

// 5. Curvature formula calibration.
Outcome curvatureCalibration() {
  using warped::FactorMetric;
  using warped::WarpingFunction;
  const auto polar = warped::WarpedMetricSpec::make({FactorMetric::euclidean(1), FactorMetric::euclidean(1)},
                                                    {WarpingFunction::affine(0.0, VectorXd::Ones(1))});
  const auto horo = warped::WarpedMetricSpec::make({FactorMetric::euclidean(1), FactorMetric::euclidean(1)},
                                                   {WarpingFunction::exponential(1.0, -VectorXd::Ones(1))});
  double polarR = 0.0, horoK = 0.0, gap = 0.0;
  const VectorXd e0 = VectorXd::Unit(2, 0), e1 = VectorXd::Unit(2, 1);
  for (const auto& x : families::sampleBox(2, 20, 0.5, kSeed)) {
    VectorXd pr = x;
    pr(0) += 1.5;
    polarR = std::max(polarR, warped::curvatureOperator(polar, e0, e1, pr).cwiseAbs().maxCoeff());
    const double k = warped::curvature4(horo, e0, e1, e1, e0, x) /
                     (warped::warpedInner(horo, e0, e0, x) * warped::warpedInner(horo, e1, e1, x));
    horoK = std::max(horoK, std::abs(k + 1.0));
  }
  for (int t = 0; t < 10; ++t) {
    const auto spec = randomSpec(t);
    for (const auto& x : families::sampleBox(spec.n(), 3, 0.2, deriveSeed(kSeed, 950 + static_cast<std::uint64_t>(t))))
      gap = std::max(gap, fdGap(spec, x));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "polar |R| %.1e (1e-8), horospherical |K+1| %.1e (1e-5), fd gap %.1e (1e-4)", polarR,
                horoK, gap);
  return {polarR <= 1e-8 && horoK <= 1e-5 && gap <= 1e-4, buf};
}

// 6. Adapted second fundamental form of warped compositions.
Outcome compositionAdaptedness() {
  double mixed = 0.0, nolker = 0.0;
  auto visit = [&](const immersions::WarpedComposition& comp, const std::vector<VectorXd>& samples) {
    const auto f = comp.immersion.withoutOracle();
    for (const auto& x : samples) mixed = std::max(mixed, immersions::adaptedness(f, x, comp.dims()).mixed);
    nolker = std::max(nolker, immersions::nolkerAlphaCheck(comp, samples));
  };
  for (int idx = 0; idx < families::seededWarpedCount(); ++idx) {
    const auto sw = families::seededWarpedComposition(idx, kSeed);
    visit(sw.comp, sw.samples);
  }
  const auto rev = families::revolutionSurface(0.3, -0.2);
  visit(rev, families::sampleBox(2, 10, 0.3, kSeed));
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d compositions, mixed %.1e, nolker %.1e (tol 1e-5)",
                families::seededWarpedCount() + 1, mixed, nolker);
  return {mixed <= 1e-5 && nolker <= 1e-5, buf};
}

// 7. Decomposition round trip and rejection of the composition counterexample.
Outcome decomposition() {
  int matched = 0;
  double warpErr = 0.0;
  bool claims = true;
  for (int idx = 0; idx < families::seededWarpedCount(); ++idx) {
    const auto sw = families::seededWarpedComposition(idx, kSeed);
    const auto& comp = sw.comp;
    const auto res = immersions::decompose(comp.immersion, sw.samples);
    bool ok = static_cast<int>(res.factors.size()) == comp.rep.k() + 1;
    for (std::size_t j = 0; ok && j < res.factors.size(); ++j) {
      std::vector<int> want(static_cast<std::size_t>(comp.dims()[j]));
      for (int a = 0; a < comp.dims()[j]; ++a) want[static_cast<std::size_t>(a)] = comp.offset(static_cast<int>(j)) + a;
      auto got = res.factors[j];
      std::sort(got.begin(), got.end());
      ok = got == want;
      if (ok && j > 0) {
        const auto rho = comp.rho(static_cast<int>(j));
        const int n0 = comp.dims()[0];
        const double ref = rho(VectorXd(res.basePoint.head(n0)));
        for (std::size_t s = 0; s < sw.samples.size(); ++s)
          warpErr = std::max(warpErr, std::abs(res.warpingSamples(static_cast<Eigen::Index>(j - 1),
                                                                  static_cast<Eigen::Index>(s)) -
                                               rho(VectorXd(sw.samples[s].head(n0))) / ref));
      }
    }
    ok = ok && res.factorCodimensions == sw.factorCodimensions;
    for (const auto& c : res.claims) claims = claims && c.holds;
    if (ok) ++matched;
  }
  int rejectedS = 0;
  try {
    const auto f = families::compositionCounterexample(kSeed);
    immersions::decompose(f, families::sampleBox(f.n(), 6, 0.15, kSeed));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::HypothesisViolated) rejectedS = e.details().value("s", 0);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d/%d round trips, warping error %.1e (1e-6), claims %s, counterexample s=%d",
                matched, families::seededWarpedCount(), warpErr, claims ? "hold" : "fail", rejectedS);
  return {matched == families::seededWarpedCount() && warpErr <= 1e-6 && claims && rejectedS == 1, buf};
}

// 8. Regrouping of proportional warping functions.
Outcome regrouping() {
  using warped::FactorMetric;
  using warped::WarpingFunction;
  VectorXd b1(2), b3(2);
  b1 << 0.4, -0.3;
  b3 << -0.2, 0.7;
  const auto spec = warped::WarpedMetricSpec::make(
      {FactorMetric::euclidean(2), FactorMetric::sphere(2), FactorMetric::euclidean(1), FactorMetric::hyperbolic(2)},
      {WarpingFunction::affine(1.0, b1), WarpingFunction::affine(2.0, 2.0 * b1), WarpingFunction::exponential(1.0, b3)});
  const auto g = warped::groupWarpings(spec, families::sampleBox(2, 12, 0.5, kSeed), 1e-9);
  const bool groups = g.groups == std::vector<std::vector<int>>{{1, 2}, {3}};
  const double err = std::abs(g.lambda[2] - 2.0);
  return {groups && err <= 1e-9, std::string("groups ") + (groups ? "{1,2},{3}" : "unexpected") +
                                     ", |λ₂ − 2| " + fmt("%.1e", err) + " (1e-9)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"gauss-tensor symmetries", 5, gaussSymmetries},
      {"s-nullity search vs grid", 60, nullityCertification},
      {"splitting lemma falsification", 300, falsification},
      {"representation isometry", 30, representationIsometry},
      {"curvature calibration", 60, curvatureCalibration},
      {"composition adaptedness", 60, compositionAdaptedness},
      {"decomposition round trip", 120, decomposition},
      {"warping regrouping", 1, regrouping},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const Error& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = out.pass && secs < c.budget;
    if (!pass) ++failures;
    std::printf("%s  %zu %-30s %7.2fs (<%gs)  %s\n", pass ? "PASS" : "FAIL", i + 1, c.name, secs, c.budget,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
