#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "warpimm/errors.hpp"
#include "warpimm/immersions.hpp"
#include "warpimm/splitting.hpp"

namespace warpimm::immersions {

namespace {

constexpr double kTouched = 1e-3;
constexpr double kCoupled = 1e-6;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    return true;
  }
  std::vector<std::vector<int>> groups() {
    std::map<int, std::vector<int>> m;
    for (int a = 0; a < static_cast<int>(parent.size()); ++a) m[find(a)].push_back(a);
    std::vector<std::vector<int>> out;
    for (auto& [root, g] : m) out.push_back(g);
    return out;
  }
};

double opsScale(const std::vector<MatrixXd>& ops) {
  double s = 0.0;
  for (const auto& a : ops) s = std::max(s, a.cwiseAbs().maxCoeff());
  return s;
}

double mixedEntry(const std::vector<MatrixXd>& ops, int a, int b) {
  double v = 0.0;
  for (const auto& op : ops) v = std::max(v, std::abs(op(a, b)));
  return v;
}

MatrixXd gramAt(const NumericalImmersion& f, const VectorXd& x) {
  const MatrixXd j = f.jet(x).jacobian;
  return sym(j.transpose() * f.ambientSpace().metric() * j);
}

MatrixXd restrict(const MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
  return out;
}

// u ↦ f(x*) with the coordinates in `coords` replaced by u.
NumericalImmersion sliceAt(const NumericalImmersion& f, const VectorXd& base, const std::vector<int>& coords) {
  const int n = static_cast<int>(base.size());
  const int d = static_cast<int>(coords.size());
  const SmoothMap embed = SmoothMap::fromTemplate(d, n, [base, coords, n](const auto& u) {
    using T = typename std::decay_t<decltype(u)>::value_type;
    std::vector<T> x;
    for (int a = 0; a < n; ++a) x.push_back(T(base(a)));
    for (std::size_t i = 0; i < coords.size(); ++i) x[static_cast<std::size_t>(coords[i])] = u[i];
    return x;
  });
  return NumericalImmersion(SmoothMap::compose(f.map(), embed), f.ambient(), f.steps(), "slice");
}

FactorClaim claimFor(const FundamentalForms& ff, const std::vector<int>& coords, const forms::NullityOptions& opts) {
  FactorClaim claim;
  claim.coords = coords;
  const int n = static_cast<int>(ff.gram.rows());
  const int p = ff.codimension;
  std::vector<bool> inside(static_cast<std::size_t>(n), false);
  for (int a : coords) inside[static_cast<std::size_t>(a)] = true;
  const double scale = std::max(opsScale(ff.chartOps), 1e-300);

  std::vector<VectorXd> rows;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      if (inside[static_cast<std::size_t>(a)] && inside[static_cast<std::size_t>(b)]) continue;
      VectorXd row(p);
      for (int r = 0; r < p; ++r) row(r) = ff.chartOps[static_cast<std::size_t>(r)](a, b) / scale;
      rows.push_back(row);
    }
  MatrixXd w = MatrixXd::Identity(p, p);
  if (!rows.empty()) {
    MatrixXd m(rows.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    w = kernelBasis(m, 1e-6);
  }
  claim.codimension = static_cast<int>(w.cols());
  if (claim.codimension == 0) return claim;

  const MatrixXd g = restrict(ff.gram, coords, coords);
  const Eigen::LLT<MatrixXd> llt(g);
  const MatrixXd linv = llt.matrixL().solve(MatrixXd::Identity(g.rows(), g.cols()));
  std::vector<MatrixXd> ops;
  for (int s = 0; s < claim.codimension; ++s) {
    MatrixXd a = MatrixXd::Zero(g.rows(), g.cols());
    for (int r = 0; r < p; ++r) a += w(r, s) * restrict(ff.chartOps[static_cast<std::size_t>(r)], coords, coords);
    ops.push_back(sym(linv * a * linv.transpose()));
  }
  const auto beta = forms::SymmetricBilinearForm::make(ops, 1e-8);
  const forms::NullityReport rep = forms::nullityProfile(beta, opts);
  claim.nullities = rep.values;
  const int l = static_cast<int>(coords.size());
  for (int s = 1; s <= claim.codimension; ++s)
    if (rep.values[static_cast<std::size_t>(s - 1)] >= l - 2 * s) claim.holds = false;
  return claim;
}

}  // namespace

DecompositionResult decompose(const NumericalImmersion& f, const std::vector<VectorXd>& samples,
                              const DecomposeConfig& config) {
  if (samples.empty()) fail(ErrorKind::InvalidArgument, "decompose needs at least one sample");
  const int n = f.n();
  DecompositionResult out;
  out.basePoint = config.basePoint.value_or(VectorXd::Zero(n));
  if (out.basePoint.size() != n) fail(ErrorKind::DimensionMismatch, "base point has the wrong dimension");

  std::vector<FundamentalForms> ffs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ffs.push_back(fundamentalForms(f, samples[i]));
    const FundamentalForms& ff = ffs.back();
    if (!ff.alpha) fail(ErrorKind::DegenerateForm, "codimension 0: there is nothing to decompose");
    if (config.skipGate) continue;
    forms::NullityOptions opts = config.nullity;
    opts.seed = deriveSeed(config.nullity.seed, i);
    const forms::NullityReport rep = forms::nullityProfile(*ff.alpha, opts);
    if (!rep.hypothesisOk)
      fail(ErrorKind::HypothesisViolated, "the nullity hypothesis fails at a sample",
           {{"s", rep.firstViolatingS},
            {"sample", i},
            {"point", std::vector<double>(samples[i].data(), samples[i].data() + n)},
            {"nullities", rep.values},
            {"codimensionOk", rep.codimensionOk},
            {"n", rep.n},
            {"p", rep.p}});
  }
  out.codimension = ffs.front().codimension;

  // Reference splitting from the metric: coordinates coupled by the Gram
  // matrix at some sample belong to the same factor.
  UnionFind metric(n);
  for (const auto& ff : ffs)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (std::abs(ff.gram(a, b)) > kCoupled * std::sqrt(ff.gram(a, a) * ff.gram(b, b))) metric.unite(a, b);
  for (std::size_t i = 0; i < ffs.size(); ++i) {
    const auto& ops = ffs[i].chartOps;
    const double scale = std::max(opsScale(ops), 1e-300);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (metric.find(a) != metric.find(b)) {
          const double v = mixedEntry(ops, a, b) / scale;
          if (v > config.mixedTol)
            fail(ErrorKind::NotAdapted, "α mixes factors of the metric", {{"sample", i}, {"a", a}, {"b", b}, {"residual", v}});
        }
  }

  // Refine by the pointwise adapted splittings of α.
  UnionFind uf(n);
  for (std::size_t i = 0; i < ffs.size(); ++i) {
    const FundamentalForms& ff = ffs[i];
    const auto split = splitting::detectAdaptedSplitting(*ff.alpha, config.adaptTol, 3,
                                                         deriveSeed(config.nullity.seed, 7000 + i));
    for (const auto& block : split.blocks()) {
      const MatrixXd chart = ff.tangentChart * block;
      const Eigen::HouseholderQR<MatrixXd> qr(chart);
      const MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, chart.cols());
      std::vector<int> touched;
      for (int a = 0; a < n; ++a)
        if (q.row(a).norm() > kTouched) touched.push_back(a);
      for (int a : touched)
        for (int b : touched)
          if (metric.find(a) == metric.find(b)) uf.unite(a, b);
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& ff : ffs) {
      const double scale = std::max(opsScale(ff.chartOps), 1e-300);
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          if (uf.find(a) != uf.find(b) && metric.find(a) == metric.find(b) &&
              mixedEntry(ff.chartOps, a, b) > config.mixedTol * scale)
            changed = uf.unite(a, b) || changed;
    }
  }
  out.blocks = uf.groups();
  for (const auto& ff : ffs) {
    const double scale = std::max(opsScale(ff.chartOps), 1e-300);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (uf.find(a) != uf.find(b))
          out.adaptednessResidual = std::max(out.adaptednessResidual, mixedEntry(ff.chartOps, a, b) / scale);
  }

  const FundamentalForms centre = fundamentalForms(f, out.basePoint);
  if (!config.warped) {
    out.factors = out.blocks;
    for (const auto& g : out.factors) {
      out.slices.push_back(sliceAt(f, out.basePoint, g));
      out.claims.push_back(claimFor(centre, g, config.nullity));
      out.factorCodimensions.push_back(out.claims.back().codimension);
    }
    return out;
  }

  // A block is warped when its metric block, moved along the other
  // coordinates, scales by a non-constant factor μ = ρ².
  const MatrixXd g0 = centre.gram;
  std::vector<VectorXd> rhoRows;
  for (std::size_t b = 0; b < out.blocks.size(); ++b) {
    const auto& block = out.blocks[b];
    const MatrixXd ref = restrict(g0, block, block);
    VectorXd rho(static_cast<Eigen::Index>(samples.size()));
    double dev = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      VectorXd y = samples[i];
      for (int a : block) y(a) = out.basePoint(a);
      const MatrixXd gb = restrict(gramAt(f, y), block, block);
      const double mu = gb.trace() / ref.trace();
      if ((gb - mu * ref).norm() > 1e-6 * gb.norm())
        fail(ErrorKind::InconsistentWarpedStructure, "metric block is not a multiple of its value at the base point",
             {{"block", b}, {"sample", i}});
      rho(static_cast<Eigen::Index>(i)) = std::sqrt(mu);
      dev = std::max(dev, std::abs(mu - 1.0));
    }
    if (dev > config.warpTol) {
      out.warpedBlocks.push_back(block);
      rhoRows.push_back(rho);
    } else {
      out.baseCoords.insert(out.baseCoords.end(), block.begin(), block.end());
    }
  }
  std::sort(out.baseCoords.begin(), out.baseCoords.end());
  if (out.baseCoords.empty() && !out.warpedBlocks.empty())
    fail(ErrorKind::InconsistentWarpedStructure, "every block is warped: no base factor");

  out.factors.push_back(out.baseCoords);
  if (!rhoRows.empty()) {
    MatrixXd rows(static_cast<Eigen::Index>(rhoRows.size()), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t r = 0; r < rhoRows.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = rhoRows[r].transpose();
    out.grouping = warped::groupWarpingSamples(rows, config.groupTol);
    out.warpingSamples.resize(static_cast<Eigen::Index>(out.grouping.groups.size()), rows.cols());
    for (std::size_t gi = 0; gi < out.grouping.groups.size(); ++gi) {
      std::vector<int> coords;
      for (int member : out.grouping.groups[gi]) {
        const auto& blk = out.warpedBlocks[static_cast<std::size_t>(member - 1)];
        coords.insert(coords.end(), blk.begin(), blk.end());
      }
      std::sort(coords.begin(), coords.end());
      out.factors.push_back(coords);
      out.warpingSamples.row(static_cast<Eigen::Index>(gi)) =
          rows.row(out.grouping.groups[gi].front() - 1);
    }
  }

  int warpedCodim = 0;
  out.factorCodimensions.push_back(0);
  for (std::size_t j = 0; j < out.factors.size(); ++j) {
    out.slices.push_back(sliceAt(f, out.basePoint, out.factors[j]));
    if (j == 0) continue;
    out.claims.push_back(claimFor(centre, out.factors[j], config.nullity));
    out.factorCodimensions.push_back(out.claims.back().codimension);
    warpedCodim += out.claims.back().codimension;
  }
  out.factorCodimensions[0] = out.codimension - warpedCodim;
  return out;
}

}  // namespace warpimm::immersions
