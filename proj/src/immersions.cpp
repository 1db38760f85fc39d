#include "warpimm/immersions.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "warpimm/errors.hpp"

namespace warpimm::immersions {

NumericalImmersion::NumericalImmersion(SmoothMap f, SpaceForm ambient, FdSteps steps, std::string family)
    : map_(std::move(f)), ambient_(ambient), steps_(steps), family_(std::move(family)) {
  if (map_.outDim() != ambient_.ambientDim())
    fail(ErrorKind::DimensionMismatch, "immersion does not land in the ambient space",
         {{"out", map_.outDim()}, {"ambient", ambient_.ambientDim()}});
}

NumericalImmersion NumericalImmersion::withoutOracle() const {
  const SmoothMap m = map_;
  SmoothMap plain(m.inDim(), m.outDim(), [m](const VectorXd& x) { return m(x); });
  return NumericalImmersion(plain, ambient_, steps_, family_);
}

namespace {

// Pairing-orthogonal projector onto the column span of b.
MatrixXd spanProjector(const MatrixXd& eta, const MatrixXd& b) {
  const MatrixXd g = b.transpose() * eta * b;
  return b * g.ldlt().solve(b.transpose() * eta);
}

double pairingNorm(const InnerSpace& amb, const VectorXd& v) { return std::sqrt(std::max(0.0, amb.norm2(v))); }

}  // namespace

MatrixXd normalProjector(const SpaceForm& ambient, const Jet& jet) {
  const InnerSpace amb = ambient.ambient();
  const MatrixXd eta = amb.metric();
  MatrixXd b = jet.jacobian;
  if (ambient.c != 0.0) {
    b.conservativeResize(Eigen::NoChange, b.cols() + 1);
    b.col(b.cols() - 1) = jet.value;
  }
  return MatrixXd::Identity(amb.dim, amb.dim) - spanProjector(eta, b);
}

VectorXd FundamentalForms::chartAlpha(const VectorXd& x, const VectorXd& y) const {
  VectorXd out = VectorXd::Zero(point.size());
  for (int r = 0; r < codimension; ++r)
    out += x.dot(chartOps[static_cast<std::size_t>(r)] * y) * normalFrame.col(r);
  return out;
}

FundamentalForms fundamentalForms(const NumericalImmersion& f, const VectorXd& x, double rankTol) {
  if (x.size() != f.n()) fail(ErrorKind::DimensionMismatch, "chart point has the wrong dimension");
  const Jet j = f.jet(x);
  const InnerSpace amb = f.ambientSpace();
  const MatrixXd eta = amb.metric();
  const int n = f.n();

  FundamentalForms out;
  out.point = j.value;
  out.jacobian = j.jacobian;
  out.gram = sym(j.jacobian.transpose() * eta * j.jacobian);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.gram);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo <= rankTol * hi)
    fail(ErrorKind::RankDeficientJacobian, "the Jacobian is not of full rank here", {{"minEig", lo}, {"maxEig", hi}});
  const Eigen::LLT<MatrixXd> llt(out.gram);
  out.tangentChart = llt.matrixU().solve(MatrixXd::Identity(n, n));
  out.tangentFrame = j.jacobian * out.tangentChart;

  MatrixXd fixed = out.tangentFrame;
  if (f.ambient().c != 0.0) {
    fixed.conservativeResize(Eigen::NoChange, n + 1);
    fixed.col(n) = j.value / std::sqrt(std::abs(amb.norm2(j.value)));
  }
  const int p = amb.dim - static_cast<int>(fixed.cols());
  out.codimension = p;
  out.normalFrame = pairingOrthonormalise(amb, fixed, MatrixXd::Identity(amb.dim, amb.dim), p, 1e-8);
  if (out.normalFrame.cols() != p) fail(ErrorKind::RankDeficientJacobian, "could not complete a normal frame");

  std::vector<MatrixXd> ops;
  for (int r = 0; r < p; ++r) {
    const VectorXd w = eta * out.normalFrame.col(r);
    MatrixXd a = MatrixXd::Zero(n, n);
    for (int c = 0; c < amb.dim; ++c)
      if (w(c) != 0.0) a += w(c) * j.hessians[static_cast<std::size_t>(c)];
    out.chartOps.push_back(sym(a));
    ops.push_back(out.tangentChart.transpose() * out.chartOps.back() * out.tangentChart);
  }
  if (p > 0) out.alpha = forms::SymmetricBilinearForm::make(ops, 1e-8);
  return out;
}

forms::NullityReport pointwiseNullities(const NumericalImmersion& f, const VectorXd& x,
                                        const forms::NullityOptions& opts) {
  const FundamentalForms ff = fundamentalForms(f, x);
  if (!ff.alpha) fail(ErrorKind::DegenerateForm, "codimension 0: there is no second fundamental form");
  return forms::nullityProfile(*ff.alpha, opts);
}

double gaussCurvature4(const FundamentalForms& ff, double c, const VectorXd& x, const VectorXd& y,
                       const VectorXd& z, const VectorXd& w) {
  const MatrixXd& g = ff.gram;
  double r = c * (y.dot(g * z) * x.dot(g * w) - x.dot(g * z) * y.dot(g * w));
  for (const auto& a : ff.chartOps)
    r += x.dot(a * w) * y.dot(a * z) - x.dot(a * z) * y.dot(a * w);
  return r;
}

AdaptednessReport adaptedness(const NumericalImmersion& f, const VectorXd& x, const std::vector<int>& dims) {
  int total = 0;
  std::vector<int> owner;
  for (std::size_t b = 0; b < dims.size(); ++b) {
    total += dims[b];
    owner.insert(owner.end(), static_cast<std::size_t>(dims[b]), static_cast<int>(b));
  }
  if (total != f.n()) fail(ErrorKind::DimensionMismatch, "block sizes do not add up to the dimension");
  const FundamentalForms ff = fundamentalForms(f, x);
  AdaptednessReport rep;
  for (int a = 0; a < total; ++a)
    for (int b = a + 1; b < total; ++b) {
      const int ba = owner[static_cast<std::size_t>(a)], bb = owner[static_cast<std::size_t>(b)];
      if (ba == bb) continue;
      double v2 = 0.0;
      for (const auto& op : ff.chartOps) v2 += op(a, b) * op(a, b);
      const double v = std::sqrt(v2);
      rep.mixed = std::max(rep.mixed, v);
      if (ba == 0 || bb == 0)
        rep.first = std::max(rep.first, v);
      else
        rep.uv = std::max(rep.uv, v);
    }
  return rep;
}

std::vector<int> WarpedComposition::dims() const {
  std::vector<int> d;
  for (const auto& f : factors) d.push_back(f.n());
  return d;
}

int WarpedComposition::offset(int j) const {
  int off = 0;
  for (int i = 0; i < j; ++i) off += factors[static_cast<std::size_t>(i)].n();
  return off;
}

warped::WarpingFunction WarpedComposition::rho(int i) const {
  if (i < 1 || i > rep.k()) fail(ErrorKind::InvalidArgument, "warping index out of range", {{"i", i}});
  const auto r = std::make_shared<const spaceforms::WarpedRepresentation>(rep);
  const NumericalImmersion f0 = factors.front();
  auto value = [r, f0, i](const VectorXd& x0) { return r->sigma(i, f0(x0)); };
  auto jet = [r, f0, i](const VectorXd& x0) {
    const Jet j = f0.jet(x0);
    const VectorXd w = r->ambient().metric() * r->a(i);
    warped::ScalarJet s;
    s.value = r->sigma(i, j.value);
    s.grad = j.jacobian.transpose() * w;
    s.hess = MatrixXd::Zero(j.inDim(), j.inDim());
    for (int c = 0; c < j.outDim(); ++c) s.hess += w(c) * j.hessians[static_cast<std::size_t>(c)];
    return s;
  };
  return warped::WarpingFunction::custom(f0.n(), value, jet);
}

warped::WarpedMetricSpec WarpedComposition::intrinsicMetric() const {
  std::vector<warped::FactorMetric> fs;
  std::vector<warped::WarpingFunction> ws;
  for (const auto& f : factors) fs.push_back(warped::FactorMetric::pullback(f.map(), rep.ambient()));
  for (int i = 1; i <= rep.k(); ++i) ws.push_back(rho(i));
  return warped::WarpedMetricSpec::make(std::move(fs), std::move(ws));
}

WarpedComposition composeWarped(const spaceforms::WarpedRepresentation& rep,
                                const std::vector<NumericalImmersion>& factors, double tol) {
  if (static_cast<int>(factors.size()) != rep.k() + 1)
    fail(ErrorKind::FactorTargetMismatch, "one immersion per factor of the representation",
         {{"factors", factors.size()}, {"expected", rep.k() + 1}});
  const int amb = rep.ambient().dim;
  std::vector<SmoothMap> maps;
  for (int j = 0; j <= rep.k(); ++j) {
    const NumericalImmersion& f = factors[static_cast<std::size_t>(j)];
    if (f.map().outDim() != amb)
      fail(ErrorKind::FactorTargetMismatch, "factor immersion has the wrong ambient dimension", {{"j", j}});
    std::vector<VectorXd> probes{VectorXd::Zero(f.n())};
    for (int a = 0; a < f.n(); ++a)
      for (double s : {-0.05, 0.05}) probes.push_back(s * VectorXd::Unit(f.n(), a));
    for (const auto& y : probes) {
      const VectorXd p = f(y);
      const double res = rep.factorResidual(j, p);
      if (res > tol * std::max(1.0, p.cwiseAbs().maxCoeff()))
        fail(ErrorKind::FactorTargetMismatch, "factor immersion leaves its factor of the representation",
             {{"j", j}, {"residual", res}});
    }
    maps.push_back(f.map());
  }
  WarpedComposition out;
  out.rep = rep;
  out.factors = factors;
  const SmoothMap f = SmoothMap::compose(rep.psiAmbientMap(), SmoothMap::product(maps));
  out.immersion = NumericalImmersion(f, rep.space(), factors.front().steps(), "warped-composition");
  return out;
}

WarpedComposition composeWarpedCharts(const spaceforms::WarpedRepresentation& rep,
                                      const std::vector<SmoothMap>& chartMaps) {
  if (static_cast<int>(chartMaps.size()) != rep.k() + 1)
    fail(ErrorKind::FactorTargetMismatch, "one chart map per factor of the representation");
  std::vector<NumericalImmersion> fs;
  for (int j = 0; j <= rep.k(); ++j) {
    const SmoothMap& g = chartMaps[static_cast<std::size_t>(j)];
    if (g.outDim() != rep.dims()[static_cast<std::size_t>(j)])
      fail(ErrorKind::FactorTargetMismatch, "chart map does not match the factor dimension", {{"j", j}});
    fs.emplace_back(SmoothMap::compose(rep.factorChart(j), g), rep.space(), FdSteps{}, "factor");
  }
  return composeWarped(rep, fs);
}

double nolkerAlphaCheck(const WarpedComposition& comp, const std::vector<VectorXd>& samples) {
  const auto& rep = comp.rep;
  const int k = rep.k();
  const InnerSpace amb = rep.ambient();
  const MatrixXd eta = amb.metric();
  const NumericalImmersion direct = comp.immersion.withoutOracle();
  const std::vector<int> dims = comp.dims();
  std::vector<int> owner;
  for (int j = 0; j <= k; ++j) owner.insert(owner.end(), static_cast<std::size_t>(dims[static_cast<std::size_t>(j)]), j);
  const int n = static_cast<int>(owner.size());

  double worst = 0.0;
  for (const auto& x : samples) {
    if (x.size() != n) fail(ErrorKind::DimensionMismatch, "sample has the wrong dimension");
    const Jet whole = direct.jet(x);
    const MatrixXd pn = normalProjector(rep.space(), whole);

    std::vector<Jet> jets;
    std::vector<MatrixXd> pt, pdf;
    for (int j = 0; j <= k; ++j) {
      jets.push_back(comp.factors[static_cast<std::size_t>(j)].jet(x.segment(comp.offset(j), dims[static_cast<std::size_t>(j)])));
      const MatrixXd t = rep.factorTangentBasis(j, jets.back().value);
      pt.push_back(t * t.transpose() * eta);
      pdf.push_back(spanProjector(eta, jets.back().jacobian));
    }
    const VectorXd& p0 = jets[0].value;
    auto pushBase = [&](const VectorXd& v) {
      VectorXd out = v;
      for (int i = 1; i <= k; ++i) out += amb.dot(v, rep.a(i)) * (jets[static_cast<std::size_t>(i)].value - rep.q());
      return out;
    };

    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const VectorXd lhs = pn * whole.second(VectorXd::Unit(n, a), VectorXd::Unit(n, b));
        VectorXd rhs = VectorXd::Zero(amb.dim);
        const int ja = owner[static_cast<std::size_t>(a)], jb = owner[static_cast<std::size_t>(b)];
        if (ja == jb) {
          const int j = ja;
          const auto uj = static_cast<std::size_t>(j);
          const int d = dims[uj];
          const VectorXd ea = VectorXd::Unit(d, a - comp.offset(j)), eb = VectorXd::Unit(d, b - comp.offset(j));
          const VectorXd h = jets[uj].second(ea, eb);
          const VectorXd alphaJ = pt[uj] * h - pdf[uj] * h;
          if (j == 0) {
            rhs = pushBase(alphaJ);
          } else {
            const double sigma = rep.sigma(j, p0);
            const double g = amb.dot(jets[uj].jacobian * ea, jets[uj].jacobian * eb);
            const VectorXd normalGrad = pt[0] * rep.a(j) - pdf[0] * rep.a(j);
            const VectorXd gamma = -sigma * g * normalGrad;
            rhs = pushBase(gamma) + sigma * alphaJ;
          }
        }
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
      }
  }
  return worst;
}

NumericalImmersion makeComposition(const NumericalImmersion& f, const SmoothMap& g, const std::string& family) {
  if (f.ambient().c != 0.0)
    fail(ErrorKind::DomainMismatch, "compositions are built on a flat ambient", {{"c", f.ambient().c}});
  if (g.inDim() != f.ambient().ambientDim())
    fail(ErrorKind::DomainMismatch, "outer map is not defined on the ambient of the inner immersion",
         {{"outerIn", g.inDim()}, {"ambient", f.ambient().ambientDim()}});
  return NumericalImmersion(SmoothMap::compose(g, f.map()), SpaceForm{0.0, g.outDim()}, f.steps(), family);
}

double codazziResidual(const NumericalImmersion& f, const VectorXd& x, double h) {
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const int n = f.n();
  const InnerSpace amb = f.ambientSpace();
  const MatrixXd eta = amb.metric();
  auto alphaAt = [&](const VectorXd& y, Jet* keep) {
    const Jet j = f.jet(y);
    const MatrixXd pn = normalProjector(f.ambient(), j);
    std::vector<VectorXd> al;
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) al.push_back(pn * j.second(VectorXd::Unit(n, b), VectorXd::Unit(n, c)));
    if (keep) *keep = j;
    return al;
  };
  Jet centre;
  const std::vector<VectorXd> al = alphaAt(x, &centre);
  const MatrixXd pn = normalProjector(f.ambient(), centre);
  const MatrixXd gram = centre.jacobian.transpose() * eta * centre.jacobian;
  // gamma[a·n + b] = Christoffel vector Γ^·_{ab}
  std::vector<VectorXd> gamma;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      gamma.push_back(gram.ldlt().solve(centre.jacobian.transpose() * eta *
                                        centre.second(VectorXd::Unit(n, a), VectorXd::Unit(n, b))));
  auto idx = [n](int a, int b) { return static_cast<std::size_t>(a * n + b); };

  std::vector<std::vector<VectorXd>> dal;
  for (int a = 0; a < n; ++a) {
    VectorXd xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    const auto ap = alphaAt(xp, nullptr), am = alphaAt(xm, nullptr);
    std::vector<VectorXd> d;
    for (std::size_t t = 0; t < ap.size(); ++t) d.push_back(pn * (ap[t] - am[t]) / (2.0 * h));
    dal.push_back(d);
  }
  auto cov = [&](int a, int b, int c) {
    VectorXd v = dal[static_cast<std::size_t>(a)][idx(b, c)];
    for (int e = 0; e < n; ++e) v -= gamma[idx(a, b)](e) * al[idx(e, c)] + gamma[idx(a, c)](e) * al[idx(b, e)];
    return v;
  };
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = 0; c < n; ++c) worst = std::max(worst, pairingNorm(amb, cov(a, b, c) - cov(b, a, c)));
  return worst;
}

}  // namespace warpimm::immersions
