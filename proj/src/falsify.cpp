#include <algorithm>
#include <cmath>
#include <thread>

#include "warpimm/errors.hpp"
#include "warpimm/splitting.hpp"

namespace warpimm::splitting {

namespace {

enum class Family { AdaptedPerturbed, RandomProjected, Boundary, Composition };

const char* familyName(Family f) {
  switch (f) {
    case Family::AdaptedPerturbed: return "adapted-perturbed";
    case Family::RandomProjected: return "random-projected";
    case Family::Boundary: return "boundary";
    case Family::Composition: return "composition";
  }
  return "unknown";
}

struct TrialOutcome {
  Family family = Family::AdaptedPerturbed;
  bool projected = false;
  bool gateOk = false;
  bool tested = false;
  bool violation = false;
  bool corrected = false;
  bool flagged = false;
  bool nearBoundary = false;
  bool nontrivialStart = false;
  double sNorm = 0.0;
  double curvature = 0.0;
  double stepOne = 0.0;
  double stepTwo = 0.0;
  double zero = 0.0;
  std::uint64_t seed = 0;
};

MatrixXd randomLowRankSymmetric(int d, int rank, Rng& rng) {
  MatrixXd m = MatrixXd::Zero(d, d);
  for (int r = 0; r < rank; ++r) {
    const VectorXd v = randomGaussian(d, rng);
    m += (r % 2 ? -1.0 : 1.0) * v * v.transpose();
  }
  return m;
}

// Block-diagonal shape operators in split coordinates, optionally degenerate.
std::vector<MatrixXd> adaptedOps(int n, int p, int d1, bool degenerate, Rng& rng) {
  std::vector<MatrixXd> ops;
  std::uniform_int_distribution<int> r1(0, d1), r2(0, n - d1);
  for (int a = 0; a < p; ++a) {
    MatrixXd m = MatrixXd::Zero(n, n);
    if (degenerate) {
      m.topLeftCorner(d1, d1) = randomLowRankSymmetric(d1, r1(rng), rng);
      m.bottomRightCorner(n - d1, n - d1) = randomLowRankSymmetric(n - d1, r2(rng), rng);
    } else {
      m.topLeftCorner(d1, d1) = randomSymmetric(d1, rng);
      m.bottomRightCorner(n - d1, n - d1) = randomSymmetric(n - d1, rng);
    }
    ops.push_back(m);
  }
  return ops;
}

double mixedNorm(const std::vector<MatrixXd>& ops, int d1) {
  double worst = 0.0;
  for (const auto& m : ops) {
    const Eigen::Index d2 = m.rows() - d1;
    if (d2 > 0) worst = std::max(worst, m.topRightCorner(d1, d2).cwiseAbs().maxCoeff());
  }
  return worst;
}

TrialOutcome runTrial(int n, int p, int trial, const FalsifyConfig& cfg) {
  TrialOutcome out;
  out.seed = deriveSeed(cfg.seed, static_cast<std::uint64_t>(trial));
  Rng rng(out.seed);
  const int families = cfg.includeCompositions ? 4 : 3;
  out.family = static_cast<Family>(trial % families);

  std::uniform_int_distribution<int> dd(1, std::max(1, n - 1));
  const int d1 = n > 1 ? dd(rng) : 1;
  std::vector<MatrixXd> local;
  switch (out.family) {
    case Family::AdaptedPerturbed:
    case Family::Boundary: {
      local = adaptedOps(n, p, d1, out.family == Family::Boundary, rng);
      std::uniform_real_distribution<double> expo(-4.0, -1.0);
      const double eps = std::pow(10.0, expo(rng));
      for (auto& m : local) {
        MatrixXd g = eps * MatrixXd::NullaryExpr(d1, n - d1, [&]() { return std::normal_distribution<double>(0, 1)(rng); });
        m.topRightCorner(d1, n - d1) += g;
        m.bottomLeftCorner(n - d1, d1) += g.transpose();
      }
      break;
    }
    case Family::RandomProjected:
      for (int a = 0; a < p; ++a) local.push_back(randomSymmetric(n, rng));
      break;
    case Family::Composition: {
      local = adaptedOps(n, std::max(0, p - 1), d1, false, rng);
      const VectorXd ell = randomGaussian(n, rng);
      local.push_back(ell * ell.transpose());
      break;
    }
  }
  out.nontrivialStart = mixedNorm(local, d1) > 1e-3;

  // random orthogonal frame for V and orthogonal mix of W
  const MatrixXd q = randomOrthogonal(n, rng);
  const MatrixXd mix = randomOrthogonal(p, rng);
  std::vector<MatrixXd> ops;
  for (int a = 0; a < p; ++a) {
    MatrixXd m = MatrixXd::Zero(n, n);
    for (int b = 0; b < p; ++b) m += mix(a, b) * local[static_cast<std::size_t>(b)];
    ops.push_back(q * m * q.transpose());
  }
  SymmetricBilinearForm beta = SymmetricBilinearForm::make(ops, 1e-9);
  if (beta.scale() > 0.0) {
    for (auto& m : ops) m /= beta.scale();
    beta = SymmetricBilinearForm::make(ops, 1e-9);
  }
  const OrthogonalSplitting split = OrthogonalSplitting::make({q.leftCols(d1), q.rightCols(n - d1)}, 1e-9);

  if (2 * p >= n) return out;  // codimension gate fails before any work

  if (out.family != Family::Composition) projectOntoCurvatureConditions(beta, split);
  out.curvature = curvatureConditions(beta, split);
  out.projected = out.curvature <= cfg.lemma.curvatureTol;
  if (!out.projected) return out;

  NullityOptions gateOpts = cfg.lemma.nullity;
  gateOpts.mode = forms::NullityMode::Search;
  gateOpts.starts = cfg.gateStarts;
  gateOpts.maxIters = cfg.gateIters;
  gateOpts.seed = deriveSeed(out.seed, 17);
  Gate gate = hypothesisGate(beta, gateOpts);
  const MixedSpan span = mixedSpan(beta, split, cfg.lemma.nullity.rankTol);
  out.sNorm = span.sNorm;
  if (out.family == Family::Composition) out.flagged = !gate.ok && span.sNorm > cfg.lemma.sTol;
  if (!gate.ok) return out;

  if (span.sNorm > cfg.lemma.sTol) {
    // confirm with the full pipeline, which re-examines the gate
    LemmaConfig lc = cfg.lemma;
    lc.nullity = gateOpts;
    lc.seed = deriveSeed(out.seed, 29);
    const LemmaReport rep = lemmaVerify(beta, split, lc);
    if (rep.verdict != Verdict::Violated) {
      out.corrected = true;
      if (out.family == Family::Composition) out.flagged = true;
      return out;
    }
    out.violation = true;
  }
  out.gateOk = true;
  out.tested = true;
  for (int s = 1; s <= p; ++s)
    if (gate.nullity.values[static_cast<std::size_t>(s - 1)] == n - 2 * s - 1) out.nearBoundary = true;
  const MaxRankResult mr = maxRankDirection(beta, split, 8, deriveSeed(out.seed, 31), cfg.lemma.nullity.rankTol);
  const ProofSteps st = proofSteps(beta, split, mr.x, cfg.lemma.nullity.rankTol);
  out.stepOne = st.stepOneResidual;
  out.stepTwo = st.stepTwoResidual;
  out.zero = st.zeroResidual;
  return out;
}

}  // namespace

FalsifyReport falsify(int n, int p, const FalsifyConfig& config) {
  if (n < 1 || p < 1) fail(ErrorKind::DimensionMismatch, "falsify needs n >= 1 and p >= 1");
  if (config.trials <= 0) fail(ErrorKind::TrialsZero, "falsify needs at least one trial");
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
  const int jobs = std::max(1, std::min(config.jobs, config.trials));
  auto worker = [&](int offset) {
    for (int t = offset; t < config.trials; t += jobs) outcomes[static_cast<std::size_t>(t)] = runTrial(n, p, t, config);
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
    for (auto& th : pool) th.join();
  }

  FalsifyReport rep;
  rep.n = n;
  rep.p = p;
  rep.trials = config.trials;
  const int families = config.includeCompositions ? 4 : 3;
  std::vector<std::pair<int, int>> tally(static_cast<std::size_t>(families), {0, 0});
  for (const auto& o : outcomes) {
    auto& t = tally[static_cast<std::size_t>(o.family)];
    ++t.first;
    if (o.family == Family::Composition) {
      ++rep.compositions;
      if (o.flagged) ++rep.compositionsFlagged;
    }
    if (2 * p < n && !o.projected && o.family != Family::Composition) ++rep.projectionFailed;
    if (o.corrected) ++rep.gateCorrected;
    if (!o.tested) {
      if (o.projected || 2 * p >= n) ++rep.gateRejected;
      continue;
    }
    ++t.second;
    ++rep.tested;
    if (o.violation) {
      ++rep.violations;
      rep.violationSeeds.push_back(o.seed);
    }
    if (o.nearBoundary) ++rep.nearBoundary;
    if (o.nontrivialStart) ++rep.nontrivialMixedStart;
    rep.maxSNorm = std::max(rep.maxSNorm, o.sNorm);
    rep.maxCurvatureResidual = std::max(rep.maxCurvatureResidual, o.curvature);
    rep.maxStepOne = std::max(rep.maxStepOne, o.stepOne);
    rep.maxStepTwo = std::max(rep.maxStepTwo, o.stepTwo);
    rep.maxZero = std::max(rep.maxZero, o.zero);
  }
  for (int f = 0; f < families; ++f)
    rep.families.emplace_back(familyName(static_cast<Family>(f)), tally[static_cast<std::size_t>(f)]);
  return rep;
}

}  // namespace warpimm::splitting
