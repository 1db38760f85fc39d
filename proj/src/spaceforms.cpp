#include "warpimm/spaceforms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "warpimm/errors.hpp"
#include "warpimm/json_io.hpp"

namespace warpimm::spaceforms {

double SpaceForm::quadricResidual(const VectorXd& p) const {
  if (c == 0.0) return 0.0;
  return std::abs(ambient().norm2(p) - 1.0 / c);
}

namespace {

double quadricTol(double c, double tol) { return tol * std::max(1.0, c == 0.0 ? 1.0 : std::abs(1.0 / c)); }

}  // namespace

WarpedRepresentation WarpedRepresentation::make(double c, const VectorXd& q, const std::vector<FactorSpec>& factors,
                                                double tol) {
  if (factors.empty()) fail(ErrorKind::InvalidArgument, "a representation needs at least the base factor");
  WarpedRepresentation rep;
  rep.c_ = c;
  int m = 0;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].dim < 1) fail(ErrorKind::DimensionMismatch, "factor dimensions must be positive", {{"factor", j}});
    rep.dims_.push_back(factors[j].dim);
    m += factors[j].dim;
  }
  const SpaceForm sf{c, m};
  const InnerSpace amb = sf.ambient();
  if (q.size() != amb.dim)
    fail(ErrorKind::DimensionMismatch, "base point has the wrong ambient dimension",
         {{"expected", amb.dim}, {"got", q.size()}});
  if (c != 0.0) {
    const double res = sf.quadricResidual(q);
    if (res > quadricTol(c, tol) || (c < 0.0 && q(0) <= 0.0))
      fail(ErrorKind::BasePointOffQuadric, "base point is not on the space form quadric",
           {{"residual", res}, {"c", c}});
  }
  rep.q_ = q;

  const int k = static_cast<int>(factors.size()) - 1;
  if (factors[0].z && factors[0].z->norm() > 0.0)
    fail(ErrorKind::InvalidArgument, "the base factor is totally geodesic and takes no mean curvature vector");
  rep.z_.assign(static_cast<std::size_t>(k + 1), VectorXd::Zero(amb.dim));
  for (int i = 1; i <= k; ++i) {
    const auto& zi = factors[static_cast<std::size_t>(i)].z;
    if (zi) {
      if (zi->size() != amb.dim)
        fail(ErrorKind::DimensionMismatch, "mean curvature vector has the wrong ambient dimension", {{"factor", i}});
      rep.z_[static_cast<std::size_t>(i)] = *zi;
    }
    if (c != 0.0) {
      const double d = amb.dot(q, rep.z_[static_cast<std::size_t>(i)]);
      if (std::abs(d) > tol)
        fail(ErrorKind::UmbilicalConstraintViolated, "mean curvature vector must be tangent to the quadric at q",
             {{"i", i}, {"qDotZ", d}});
    }
  }
  for (int i = 1; i <= k; ++i)
    for (int j = i + 1; j <= k; ++j) {
      const double d = amb.dot(rep.z_[static_cast<std::size_t>(i)], rep.z_[static_cast<std::size_t>(j)]);
      if (std::abs(d + c) > tol)
        fail(ErrorKind::UmbilicalConstraintViolated, "mean curvature vectors must satisfy <z_i, z_j> = -c",
             {{"i", i}, {"j", j}, {"value", d}, {"expected", -c}});
    }

  // frames: given ones are validated, missing ones completed deterministically
  rep.frames_.assign(static_cast<std::size_t>(k + 1), MatrixXd());
  MatrixXd fixed(amb.dim, 0);
  auto append = [&](const MatrixXd& cols) {
    MatrixXd f(amb.dim, fixed.cols() + cols.cols());
    f << fixed, cols;
    fixed = f;
  };
  if (c != 0.0) append(q / std::sqrt(std::abs(amb.norm2(q))));
  for (int j = 0; j <= k; ++j) {
    const auto& fr = factors[static_cast<std::size_t>(j)].frame;
    if (!fr) continue;
    if (fr->rows() != amb.dim || fr->cols() != rep.dims_[static_cast<std::size_t>(j)])
      fail(ErrorKind::DimensionMismatch, "factor frame has the wrong shape", {{"factor", j}});
    rep.frames_[static_cast<std::size_t>(j)] = *fr;
    append(*fr);
  }
  const MatrixXd gram = amb.gram(fixed);
  MatrixXd target = MatrixXd::Identity(fixed.cols(), fixed.cols());
  if (c < 0.0) target(0, 0) = -1.0;
  const double defect = fixed.cols() ? (gram - target).cwiseAbs().maxCoeff() : 0.0;
  if (defect > tol)
    fail(ErrorKind::FrameNotOrthonormal, "factor frames must be orthonormal, mutually orthogonal and tangent at q",
         {{"defect", defect}});
  for (int j = 0; j <= k; ++j) {
    if (rep.frames_[static_cast<std::size_t>(j)].size() != 0) continue;
    MatrixXd cand(amb.dim, 0);
    if (j == 0) {
      cand.resize(amb.dim, k + amb.dim);
      for (int i = 1; i <= k; ++i) cand.col(i - 1) = rep.z_[static_cast<std::size_t>(i)];
      cand.rightCols(amb.dim) = MatrixXd::Identity(amb.dim, amb.dim);
    } else {
      cand = MatrixXd::Identity(amb.dim, amb.dim);
    }
    const int want = rep.dims_[static_cast<std::size_t>(j)];
    MatrixXd f = pairingOrthonormalise(amb, fixed, cand, want, 1e-6);
    if (f.cols() != want) fail(ErrorKind::DimensionMismatch, "could not complete factor frame", {{"factor", j}});
    rep.frames_[static_cast<std::size_t>(j)] = f;
    append(f);
  }

  // z_i must lie in the base factor's tangent space
  const MatrixXd& e0 = rep.frames_[0];
  for (int i = 1; i <= k; ++i) {
    const VectorXd& zi = rep.z_[static_cast<std::size_t>(i)];
    VectorXd proj = VectorXd::Zero(amb.dim);
    for (Eigen::Index col = 0; col < e0.cols(); ++col) proj += amb.dot(zi, e0.col(col)) * e0.col(col);
    const double off = (zi - proj).cwiseAbs().maxCoeff();
    if (off > tol * std::max(1.0, zi.norm()))
      fail(ErrorKind::UmbilicalConstraintViolated, "mean curvature vector must lie in the base factor's tangent space",
           {{"i", i}, {"offBase", off}});
  }

  rep.a_.assign(static_cast<std::size_t>(k + 1), VectorXd());
  rep.kappa_.assign(static_cast<std::size_t>(k + 1), 0.0);
  rep.a_[0] = c * q;
  rep.kappa_[0] = c;
  for (int i = 1; i <= k; ++i) {
    rep.a_[static_cast<std::size_t>(i)] = c * q - rep.z_[static_cast<std::size_t>(i)];
    rep.kappa_[static_cast<std::size_t>(i)] = c + amb.norm2(rep.z_[static_cast<std::size_t>(i)]);
  }
  return rep;
}

int WarpedRepresentation::m() const {
  int m = 0;
  for (int d : dims_) m += d;
  return m;
}

int WarpedRepresentation::offset(int j) const {
  int off = 0;
  for (int i = 0; i < j; ++i) off += dims_[static_cast<std::size_t>(i)];
  return off;
}

double WarpedRepresentation::sigma(int i, const VectorXd& p0) const {
  if (i < 0 || i > k()) fail(ErrorKind::InvalidArgument, "factor index out of range", {{"i", i}});
  if (p0.size() != q_.size()) fail(ErrorKind::DimensionMismatch, "sigma: point has the wrong ambient dimension");
  if (i == 0) return 1.0;
  std::vector<double> pv(p0.data(), p0.data() + p0.size());
  const double s = sigmaRaw(i, pv);
  if (!(s > 0.0))
    fail(ErrorKind::NonpositiveWarping, "warping function is not positive at this point", {{"i", i}, {"sigma", s}});
  return s;
}

VectorXd WarpedRepresentation::psi(const VectorXd& p0, const std::vector<VectorXd>& ps) const {
  if (static_cast<int>(ps.size()) != k())
    fail(ErrorKind::DimensionMismatch, "psi needs one point per warped factor", {{"k", k()}, {"got", ps.size()}});
  VectorXd out = p0;
  for (int i = 1; i <= k(); ++i) {
    const VectorXd& pi = ps[static_cast<std::size_t>(i - 1)];
    if (pi.size() != q_.size()) fail(ErrorKind::DimensionMismatch, "psi: factor point has the wrong dimension");
    out += sigma(i, p0) * (pi - q_);
  }
  if (c_ != 0.0) {
    const double res = space().quadricResidual(out);
    if (res > quadricTol(c_, 1e-9))
      fail(ErrorKind::ResultOffQuadric, "psi left the quadric; factor data is inconsistent", {{"residual", res}});
  }
  return out;
}

VectorXd WarpedRepresentation::fixedBaseEmbedding(const VectorXd& pbar, const std::vector<VectorXd>& ps) const {
  if (c_ == 0.0) fail(ErrorKind::RequiresCurvedAmbient, "the fixed-base embedding needs c != 0");
  if (pbar.size() != q_.size()) fail(ErrorKind::DimensionMismatch, "base point has the wrong ambient dimension");
  const double res = space().quadricResidual(pbar);
  if (res > quadricTol(c_, 1e-9))
    fail(ErrorKind::BasePointOffQuadric, "fixed base point is not on the quadric", {{"residual", res}});
  return psi(pbar, ps);
}

VectorXd WarpedRepresentation::factorPoint(int j, const VectorXd& v) const {
  if (j < 0 || j > k()) fail(ErrorKind::InvalidArgument, "factor index out of range", {{"j", j}});
  if (v.size() != dims_[static_cast<std::size_t>(j)])
    fail(ErrorKind::DimensionMismatch, "chart point has the wrong factor dimension");
  std::vector<double> p = factorPoint<double>(j, v.data());
  return Eigen::Map<VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

namespace {

struct FactorChartFn {
  std::shared_ptr<const WarpedRepresentation> rep;
  int j;
  template <class T>
  std::vector<T> operator()(const std::vector<T>& v) const {
    return rep->factorPoint<T>(j, v.data());
  }
};

struct PsiFn {
  std::shared_ptr<const WarpedRepresentation> rep;
  template <class T>
  std::vector<T> operator()(const std::vector<T>& x) const {
    const int k = rep->k();
    std::vector<T> p0 = rep->factorPoint<T>(0, x.data());
    std::vector<T> out = p0;
    const VectorXd& q = rep->q();
    for (int i = 1; i <= k; ++i) {
      const T s = rep->sigmaRaw<T>(i, p0);
      if (!(valueOf(s) > 0.0))
        fail(ErrorKind::NonpositiveWarping, "warping function is not positive at this point",
             {{"i", i}, {"sigma", valueOf(s)}});
      std::vector<T> pi = rep->factorPoint<T>(i, x.data() + rep->offset(i));
      for (std::size_t r = 0; r < out.size(); ++r) out[r] = out[r] + s * (pi[r] - T(q(static_cast<Eigen::Index>(r))));
    }
    return out;
  }
};

struct PsiAmbientFn {
  std::shared_ptr<const WarpedRepresentation> rep;
  template <class T>
  std::vector<T> operator()(const std::vector<T>& x) const {
    const std::size_t amb = static_cast<std::size_t>(rep->q().size());
    std::vector<T> p0(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(amb));
    std::vector<T> out = p0;
    const VectorXd& q = rep->q();
    for (int i = 1; i <= rep->k(); ++i) {
      const T s = rep->sigmaRaw<T>(i, p0);
      if (!(valueOf(s) > 0.0))
        fail(ErrorKind::NonpositiveWarping, "warping function is not positive at this point",
             {{"i", i}, {"sigma", valueOf(s)}});
      const std::size_t off = amb * static_cast<std::size_t>(i);
      for (std::size_t r = 0; r < amb; ++r)
        out[r] = out[r] + s * (x[off + r] - T(q(static_cast<Eigen::Index>(r))));
    }
    return out;
  }
};

}  // namespace

SmoothMap WarpedRepresentation::psiAmbientMap() const {
  auto self = std::make_shared<const WarpedRepresentation>(*this);
  const int amb = static_cast<int>(q_.size());
  return SmoothMap::fromTemplate(amb * (k() + 1), amb, PsiAmbientFn{self});
}

namespace {

// Columns spanning span(Eⱼ, aⱼ) (aⱼ dropped when it vanishes).
MatrixXd factorSpan(const MatrixXd& e, const VectorXd& a) {
  if (a.norm() <= 1e-14) return e;
  MatrixXd b(e.rows(), e.cols() + 1);
  b << e, a;
  return b;
}

}  // namespace

double WarpedRepresentation::factorResidual(int j, const VectorXd& p) const {
  if (j < 0 || j > k()) fail(ErrorKind::InvalidArgument, "factor index out of range", {{"j", j}});
  if (p.size() != q_.size()) fail(ErrorKind::DimensionMismatch, "point has the wrong ambient dimension");
  const InnerSpace amb = ambient();
  const VectorXd w = p - q_;
  const MatrixXd span = factorSpan(frame(j), a(j));
  const VectorXd coef = span.colPivHouseholderQr().solve(w);
  double res = (span * coef - w).norm();
  res = std::max(res, std::abs(factorCurvature(j) * amb.norm2(w) + 2.0 * amb.dot(w, a(j))));
  if (c_ != 0.0) res = std::max(res, space().quadricResidual(p));
  return res;
}

MatrixXd WarpedRepresentation::factorTangentBasis(int j, const VectorXd& p) const {
  if (j < 0 || j > k()) fail(ErrorKind::InvalidArgument, "factor index out of range", {{"j", j}});
  const InnerSpace amb = ambient();
  const MatrixXd span = factorSpan(frame(j), a(j));
  MatrixXd t = span;
  if (span.cols() > dims_[static_cast<std::size_t>(j)]) {
    // tangent vectors of the sphere are the pairing-orthogonal ones to ν
    const VectorXd nu = c_ != 0.0 ? VectorXd(p) : VectorXd(factorCurvature(j) * (p - q_) + a(j));
    const MatrixXd row = (amb.metric() * nu).transpose() * span;
    const MatrixXd ker = kernelBasis(row, 1e-12 * std::max(1.0, row.norm()));
    t = span * ker.leftCols(dims_[static_cast<std::size_t>(j)]);
  }
  const MatrixXd g = amb.gram(t);
  const Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) fail(ErrorKind::OutOfDomain, "factor tangent space is not spacelike here", {{"j", j}});
  return t * llt.matrixU().solve(MatrixXd::Identity(t.cols(), t.cols()));
}

SmoothMap WarpedRepresentation::factorChart(int j) const {
  if (j < 0 || j > k()) fail(ErrorKind::InvalidArgument, "factor index out of range", {{"j", j}});
  auto self = std::make_shared<const WarpedRepresentation>(*this);
  return SmoothMap::fromTemplate(dims_[static_cast<std::size_t>(j)], static_cast<int>(q_.size()), FactorChartFn{self, j});
}

SmoothMap WarpedRepresentation::psiMap() const {
  auto self = std::make_shared<const WarpedRepresentation>(*this);
  return SmoothMap::fromTemplate(m(), static_cast<int>(q_.size()), PsiFn{self});
}

MatrixXd WarpedRepresentation::chartMetric(int j, const VectorXd& v) const {
  const int d = dims_[static_cast<std::size_t>(j)];
  if (v.size() != d) fail(ErrorKind::DimensionMismatch, "chart point has the wrong factor dimension");
  const double r2 = v.squaredNorm();
  if (r2 == 0.0) return MatrixXd::Identity(d, d);
  const VectorXd vh = v / std::sqrt(r2);
  const MatrixXd radial = vh * vh.transpose();
  const double s = sincSqrt(kappa_[static_cast<std::size_t>(j)] * r2);
  return radial + s * s * (MatrixXd::Identity(d, d) - radial);
}

Json WarpedRepresentation::toJson() const {
  Json doc;
  doc["c"] = c_;
  doc["q"] = vectorToJson(q_);
  Json fs = Json::array();
  for (int j = 0; j <= k(); ++j) {
    Json f;
    f["dim"] = dims_[static_cast<std::size_t>(j)];
    if (j > 0) f["z"] = vectorToJson(z_[static_cast<std::size_t>(j)]);
    f["frame"] = matrixToJson(frames_[static_cast<std::size_t>(j)]);
    f["a"] = vectorToJson(a_[static_cast<std::size_t>(j)]);
    f["curvature"] = kappa_[static_cast<std::size_t>(j)];
    fs.push_back(f);
  }
  doc["factors"] = fs;
  return doc;
}

WarpedRepresentation WarpedRepresentation::fromJson(const Json& doc, double tol) {
  const double c = requireField(doc, "c", "representation").get<double>();
  const VectorXd q = vectorFromJson(requireField(doc, "q", "representation"), "representation.q");
  const Json& fs = requireField(doc, "factors", "representation");
  if (!fs.is_array() || fs.empty()) fail(ErrorKind::ParseError, "representation.factors must be a nonempty array");
  std::vector<FactorSpec> specs;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    FactorSpec s;
    const Json& dim = requireField(fs[j], "dim", "representation.factors[" + std::to_string(j) + "]");
    if (!dim.is_number_integer()) fail(ErrorKind::ParseError, "factor dim must be an integer");
    s.dim = dim.get<int>();
    if (fs[j].contains("z")) s.z = vectorFromJson(fs[j]["z"], "factor z");
    if (fs[j].contains("frame")) s.frame = matrixFromJson(fs[j]["frame"], "factor frame");
    specs.push_back(s);
  }
  return make(c, q, specs, tol);
}

PullbackCheck pullbackMetric(const WarpedRepresentation& rep, const VectorXd& x, double h) {
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const int m = rep.m();
  if (x.size() != m) fail(ErrorKind::DimensionMismatch, "chart point has the wrong dimension");
  const SmoothMap psi = rep.psiMap();
  const InnerSpace amb = rep.ambient();

  auto gramAt = [&](double step) {
    MatrixXd jac(amb.dim, m);
    for (int a = 0; a < m; ++a) {
      VectorXd xp = x, xm = x;
      xp(a) += step;
      xm(a) -= step;
      try {
        jac.col(a) = (psi(xp) - psi(xm)) / (2.0 * step);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NonpositiveWarping)
          fail(ErrorKind::StepTooLargeForDomain, "finite-difference stencil leaves the representation's domain",
               {{"h", step}, {"coordinate", a}});
        throw;
      }
    }
    return MatrixXd(amb.gram(jac));
  };

  PullbackCheck out;
  out.gram = gramAt(h);
  const MatrixXd half = gramAt(0.5 * h);
  out.richardsonGap = (out.gram - half).cwiseAbs().maxCoeff();

  out.expected = MatrixXd::Zero(m, m);
  const VectorXd p0 = rep.factorPoint(0, VectorXd(x.head(rep.dims()[0])));
  for (int j = 0; j <= rep.k(); ++j) {
    const int off = rep.offset(j), d = rep.dims()[static_cast<std::size_t>(j)];
    const double s = rep.sigma(j, p0);
    out.expected.block(off, off, d, d) = s * s * rep.chartMetric(j, x.segment(off, d));
  }
  for (int i = 0; i <= rep.k(); ++i)
    for (int j = 0; j <= rep.k(); ++j) {
      const int oi = rep.offset(i), di = rep.dims()[static_cast<std::size_t>(i)];
      const int oj = rep.offset(j), dj = rep.dims()[static_cast<std::size_t>(j)];
      const MatrixXd g = out.gram.block(oi, oj, di, dj);
      if (i != j) {
        out.offBlockMax = std::max(out.offBlockMax, g.cwiseAbs().maxCoeff());
      } else {
        const MatrixXd e = out.expected.block(oi, oj, di, dj);
        out.inBlockRelErr = std::max(out.inBlockRelErr, (g - e).cwiseAbs().maxCoeff() / e.cwiseAbs().maxCoeff());
      }
    }
  return out;
}

}  // namespace warpimm::spaceforms
