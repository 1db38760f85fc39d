#include "warpimm/warped.hpp"

#include <algorithm>
#include <cmath>

#include "warpimm/errors.hpp"
#include "warpimm/json_io.hpp"

namespace warpimm::warped {

namespace {

constexpr double kMetricStep = 1e-5;
constexpr double kSecondStep = 1e-4;

std::vector<std::vector<MatrixXd>> zeroSecond(int d) {
  return std::vector<std::vector<MatrixXd>>(static_cast<std::size_t>(d),
                                            std::vector<MatrixXd>(static_cast<std::size_t>(d), MatrixXd::Zero(d, d)));
}

std::vector<MatrixXd> differenceMetric(const FactorMetric::MetricFn& g, const VectorXd& x, double h) {
  std::vector<MatrixXd> out;
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    VectorXd xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    out.push_back((g(xp) - g(xm)) / (2.0 * h));
  }
  return out;
}

}  // namespace

FactorMetric FactorMetric::euclidean(int dim) {
  if (dim < 1) fail(ErrorKind::DimensionMismatch, "factor dimension must be positive");
  FactorMetric f;
  f.dim_ = dim;
  f.kind_ = Kind::Euclidean;
  return f;
}

FactorMetric FactorMetric::sphere(int dim, double radius) {
  FactorMetric f = euclidean(dim);
  if (!(radius > 0.0)) fail(ErrorKind::InvalidArgument, "sphere radius must be positive");
  f.kind_ = Kind::Sphere;
  f.radius_ = radius;
  return f;
}

FactorMetric FactorMetric::hyperbolic(int dim, double radius) {
  FactorMetric f = sphere(dim, radius);
  f.kind_ = Kind::Hyperbolic;
  return f;
}

FactorMetric FactorMetric::sampled(const MatrixXd& g0, const std::vector<MatrixXd>& slopes) {
  const Eigen::Index d = g0.rows();
  if (d < 1 || g0.cols() != d || static_cast<Eigen::Index>(slopes.size()) != d)
    fail(ErrorKind::DimensionMismatch, "sampled metric needs a square G0 and one slope per coordinate");
  for (const auto& s : slopes)
    if (s.rows() != d || s.cols() != d) fail(ErrorKind::DimensionMismatch, "metric slope has the wrong size");
  FactorMetric f = euclidean(static_cast<int>(d));
  f.kind_ = Kind::Sampled;
  f.g0_ = sym(g0);
  for (const auto& s : slopes) f.slopes_.push_back(sym(s));
  return f;
}

FactorMetric FactorMetric::custom(int dim, MetricFn g, DerivFn deriv) {
  FactorMetric f = euclidean(dim);
  f.kind_ = Kind::Custom;
  f.custom_ = std::move(g);
  f.deriv_ = std::move(deriv);
  return f;
}

FactorMetric FactorMetric::pullback(const SmoothMap& f, const InnerSpace& ambient) {
  if (f.outDim() != ambient.dim) fail(ErrorKind::DimensionMismatch, "map does not land in the ambient space");
  const MatrixXd eta = ambient.metric();
  auto value = [f, eta](const VectorXd& x) {
    const MatrixXd j = f.jet(x).jacobian;
    return MatrixXd(j.transpose() * eta * j);
  };
  auto deriv = [f, eta](const VectorXd& x) {
    const Jet jt = f.jet(x);
    const int n = jt.inDim();
    std::vector<MatrixXd> out;
    for (int a = 0; a < n; ++a) {
      MatrixXd ha(jt.outDim(), n);
      for (int r = 0; r < jt.outDim(); ++r) ha.row(r) = jt.hessians[static_cast<std::size_t>(r)].row(a);
      const MatrixXd t = ha.transpose() * eta * jt.jacobian;
      out.push_back(t + t.transpose());
    }
    return out;
  };
  return custom(f.inDim(), value, deriv);
}

std::string FactorMetric::kindName() const {
  switch (kind_) {
    case Kind::Euclidean: return "euclidean";
    case Kind::Sphere: return "sphere";
    case Kind::Hyperbolic: return "hyperbolic";
    case Kind::Sampled: return "sampled";
    case Kind::Custom: return "custom";
  }
  return "custom";
}

MetricJet FactorMetric::jet(const VectorXd& x) const {
  if (x.size() != dim_) fail(ErrorKind::DimensionMismatch, "factor chart point has the wrong dimension");
  const int d = dim_;
  const MatrixXd id = MatrixXd::Identity(d, d);
  MetricJet out;
  switch (kind_) {
    case Kind::Euclidean:
      out.g = id;
      out.dg.assign(static_cast<std::size_t>(d), MatrixXd::Zero(d, d));
      out.ddg = zeroSecond(d);
      break;
    case Kind::Sphere:
    case Kind::Hyperbolic: {
      const double s = kind_ == Kind::Sphere ? 1.0 : -1.0;
      const double u = x.squaredNorm();
      const double base = 1.0 + s * u;
      if (!(base > 0.0)) fail(ErrorKind::OutOfDomain, "point outside the Poincaré ball", {{"norm2", u}});
      const double r2 = radius_ * radius_;
      const double phi = 4.0 * r2 / (base * base);
      const double dphi = -8.0 * r2 * s / (base * base * base);
      const double ddphi = 24.0 * r2 / (base * base * base * base);
      out.g = phi * id;
      out.ddg = zeroSecond(d);
      for (int a = 0; a < d; ++a) {
        out.dg.push_back(2.0 * dphi * x(a) * id);
        for (int b = 0; b < d; ++b)
          out.ddg[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
              (4.0 * ddphi * x(a) * x(b) + (a == b ? 2.0 * dphi : 0.0)) * id;
      }
      break;
    }
    case Kind::Sampled:
      out.g = g0_;
      for (int a = 0; a < d; ++a) out.g += x(a) * slopes_[static_cast<std::size_t>(a)];
      out.dg = slopes_;
      out.ddg = zeroSecond(d);
      break;
    case Kind::Custom: {
      out.g = custom_(x);
      const MetricFn g = custom_;
      const DerivFn deriv = deriv_ ? deriv_ : DerivFn([g](const VectorXd& y) {
        return differenceMetric(g, y, kMetricStep);
      });
      out.dg = deriv(x);
      out.ddg = zeroSecond(d);
      for (int a = 0; a < d; ++a) {
        VectorXd xp = x, xm = x;
        xp(a) += kSecondStep;
        xm(a) -= kSecondStep;
        const auto dp = deriv(xp), dm = deriv(xm);
        for (int b = 0; b < d; ++b)
          out.ddg[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
              (dp[static_cast<std::size_t>(b)] - dm[static_cast<std::size_t>(b)]) / (2.0 * kSecondStep);
      }
      // symmetrise the mixed second derivatives
      for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
          auto& ab = out.ddg[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
          auto& ba = out.ddg[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
          const MatrixXd avg = 0.5 * (ab + ba);
          ab = avg;
          ba = avg;
        }
      break;
    }
  }
  if (Eigen::LLT<MatrixXd>(out.g).info() != Eigen::Success || out.g.minCoeff() != out.g.minCoeff())
    fail(ErrorKind::OutOfDomain, "factor metric is not positive definite here", {{"kind", kindName()}});
  return out;
}

MatrixXd FactorMetric::operator()(const VectorXd& x) const {
  if (kind_ == Kind::Custom) {
    if (x.size() != dim_) fail(ErrorKind::DimensionMismatch, "factor chart point has the wrong dimension");
    MatrixXd g = custom_(x);
    if (Eigen::LLT<MatrixXd>(g).info() != Eigen::Success)
      fail(ErrorKind::OutOfDomain, "factor metric is not positive definite here", {{"kind", kindName()}});
    return g;
  }
  return jet(x).g;
}

nlohmann::json FactorMetric::toJson() const {
  Json doc;
  doc["kind"] = kindName();
  doc["dim"] = dim_;
  if (kind_ == Kind::Sphere || kind_ == Kind::Hyperbolic) doc["radius"] = radius_;
  if (kind_ == Kind::Sampled) {
    doc["g0"] = matrixToJson(g0_);
    Json s = Json::array();
    for (const auto& m : slopes_) s.push_back(matrixToJson(m));
    doc["slopes"] = s;
  }
  return doc;
}

FactorMetric FactorMetric::fromJson(const nlohmann::json& doc) {
  const std::string kind = requireField(doc, "kind", "factor metric").get<std::string>();
  if (kind == "sampled") {
    const MatrixXd g0 = matrixFromJson(requireField(doc, "g0", "sampled metric"), "g0");
    std::vector<MatrixXd> slopes;
    for (const auto& s : requireField(doc, "slopes", "sampled metric")) slopes.push_back(matrixFromJson(s, "slope"));
    return sampled(g0, slopes);
  }
  const Json& dj = requireField(doc, "dim", "factor metric");
  if (!dj.is_number_integer()) fail(ErrorKind::ParseError, "factor metric dim must be an integer");
  const int dim = dj.get<int>();
  const double radius = doc.value("radius", 1.0);
  if (kind == "euclidean") return euclidean(dim);
  if (kind == "sphere") return sphere(dim, radius);
  if (kind == "hyperbolic") return hyperbolic(dim, radius);
  fail(ErrorKind::ParseError, "unknown factor metric kind", {{"kind", kind}});
}

WarpingFunction WarpingFunction::affine(double a, const VectorXd& b) {
  if (b.size() < 1) fail(ErrorKind::DimensionMismatch, "warping function needs a base dimension");
  WarpingFunction w;
  w.dim_ = static_cast<int>(b.size());
  w.kind_ = Kind::Affine;
  w.a_ = a;
  w.b_ = b;
  return w;
}

WarpingFunction WarpingFunction::exponential(double a, const VectorXd& b) {
  WarpingFunction w = affine(a, b);
  w.kind_ = Kind::Exponential;
  return w;
}

WarpingFunction WarpingFunction::polynomial(double a, const VectorXd& b, const MatrixXd& c) {
  WarpingFunction w = affine(a, b);
  if (c.rows() != b.size() || c.cols() != b.size())
    fail(ErrorKind::DimensionMismatch, "quadratic coefficient has the wrong size");
  w.kind_ = Kind::Polynomial;
  w.c_ = sym(c);
  return w;
}

WarpingFunction WarpingFunction::custom(int dim, ValueFn value, JetFn jet) {
  if (dim < 1) fail(ErrorKind::DimensionMismatch, "warping function needs a base dimension");
  WarpingFunction w;
  w.dim_ = dim;
  w.kind_ = Kind::Custom;
  w.value_ = std::move(value);
  w.jet_ = std::move(jet);
  return w;
}

double WarpingFunction::operator()(const VectorXd& x) const {
  if (x.size() != dim_) fail(ErrorKind::DimensionMismatch, "base point has the wrong dimension");
  switch (kind_) {
    case Kind::Affine: return scale_ * (a_ + b_.dot(x));
    case Kind::Exponential: return scale_ * a_ * std::exp(b_.dot(x));
    case Kind::Polynomial: return scale_ * (a_ + b_.dot(x) + x.dot(c_ * x));
    case Kind::Custom: return scale_ * value_(x);
  }
  return 0.0;
}

ScalarJet WarpingFunction::jet(const VectorXd& x) const {
  if (x.size() != dim_) fail(ErrorKind::DimensionMismatch, "base point has the wrong dimension");
  const int d = dim_;
  ScalarJet j;
  switch (kind_) {
    case Kind::Affine:
      j.value = a_ + b_.dot(x);
      j.grad = b_;
      j.hess = MatrixXd::Zero(d, d);
      break;
    case Kind::Exponential:
      j.value = a_ * std::exp(b_.dot(x));
      j.grad = j.value * b_;
      j.hess = j.value * b_ * b_.transpose();
      break;
    case Kind::Polynomial:
      j.value = a_ + b_.dot(x) + x.dot(c_ * x);
      j.grad = b_ + 2.0 * c_ * x;
      j.hess = 2.0 * c_;
      break;
    case Kind::Custom:
      if (jet_) {
        j = jet_(x);
        break;
      }
      j.value = value_(x);
      j.grad.resize(d);
      j.hess.resize(d, d);
      for (int a = 0; a < d; ++a) {
        VectorXd xp = x, xm = x;
        xp(a) += kMetricStep;
        xm(a) -= kMetricStep;
        j.grad(a) = (value_(xp) - value_(xm)) / (2.0 * kMetricStep);
      }
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          const double h = kSecondStep;
          auto at = [&](double sa, double sb) {
            VectorXd y = x;
            y(a) += sa * h;
            y(b) += sb * h;
            return value_(y);
          };
          const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
          j.hess(a, b) = j.hess(b, a) = v;
        }
      break;
  }
  j.value *= scale_;
  j.grad *= scale_;
  j.hess *= scale_;
  return j;
}

WarpingFunction WarpingFunction::scaled(double lambda) const {
  WarpingFunction w = *this;
  w.scale_ *= lambda;
  return w;
}

nlohmann::json WarpingFunction::toJson() const {
  Json doc;
  switch (kind_) {
    case Kind::Affine: doc["family"] = "affine"; break;
    case Kind::Exponential: doc["family"] = "exponential"; break;
    case Kind::Polynomial: doc["family"] = "polynomial"; break;
    case Kind::Custom: doc["family"] = "custom"; doc["dim"] = dim_; return doc;
  }
  doc["a"] = a_ * scale_;
  doc["b"] = vectorToJson(kind_ == Kind::Exponential ? b_ : VectorXd(scale_ * b_));
  if (kind_ == Kind::Polynomial) doc["C"] = matrixToJson(scale_ * c_);
  return doc;
}

WarpingFunction WarpingFunction::fromJson(const nlohmann::json& doc) {
  const std::string fam = requireField(doc, "family", "warping").get<std::string>();
  const double a = requireField(doc, "a", "warping").get<double>();
  const VectorXd b = vectorFromJson(requireField(doc, "b", "warping"), "warping.b");
  if (fam == "affine") return affine(a, b);
  if (fam == "exponential") return exponential(a, b);
  if (fam == "polynomial") return polynomial(a, b, matrixFromJson(requireField(doc, "C", "warping"), "warping.C"));
  fail(ErrorKind::ParseError, "unknown warping family", {{"family", fam}});
}

WarpedMetricSpec WarpedMetricSpec::make(std::vector<FactorMetric> factors, std::vector<WarpingFunction> warpings) {
  if (factors.empty()) fail(ErrorKind::DimensionMismatch, "a warped product needs a base factor");
  if (warpings.size() + 1 != factors.size())
    fail(ErrorKind::DimensionMismatch, "one warping function per warped factor",
         {{"factors", factors.size()}, {"warpings", warpings.size()}});
  for (const auto& w : warpings)
    if (w.dim() != factors.front().dim())
      fail(ErrorKind::DimensionMismatch, "warping functions live on the base chart");
  WarpedMetricSpec s;
  s.factors_ = std::move(factors);
  s.warpings_ = std::move(warpings);
  for (const auto& f : s.factors_) {
    s.offsets_.push_back(s.n_);
    s.n_ += f.dim();
  }
  return s;
}

std::vector<int> WarpedMetricSpec::dims() const {
  std::vector<int> d;
  for (const auto& f : factors_) d.push_back(f.dim());
  return d;
}

VectorXd WarpedMetricSpec::project(int j, const VectorXd& v) const {
  VectorXd out = VectorXd::Zero(n_);
  out.segment(offset(j), dim(j)) = v.segment(offset(j), dim(j));
  return out;
}

double WarpedMetricSpec::rho(int i, const VectorXd& x) const {
  if (x.size() != n_) fail(ErrorKind::DimensionMismatch, "chart point has the wrong dimension");
  const double r = warping(i)(block(0, x));
  if (!(r > 0.0)) fail(ErrorKind::OutOfDomain, "warping function is not positive here", {{"i", i}, {"rho", r}});
  return r;
}

MatrixXd WarpedMetricSpec::metric(const VectorXd& x) const {
  if (x.size() != n_) fail(ErrorKind::DimensionMismatch, "chart point has the wrong dimension");
  MatrixXd g = MatrixXd::Zero(n_, n_);
  for (int j = 0; j <= k(); ++j) {
    const double r = j == 0 ? 1.0 : rho(j, x);
    g.block(offset(j), offset(j), dim(j), dim(j)) = r * r * factor(j)(block(j, x));
  }
  return g;
}

nlohmann::json WarpedMetricSpec::toJson() const {
  Json doc;
  Json fs = Json::array(), ws = Json::array();
  for (const auto& f : factors_) fs.push_back(f.toJson());
  for (const auto& w : warpings_) ws.push_back(w.toJson());
  doc["factors"] = fs;
  doc["warpings"] = ws;
  return doc;
}

WarpedMetricSpec WarpedMetricSpec::fromJson(const nlohmann::json& doc) {
  std::vector<FactorMetric> fs;
  std::vector<WarpingFunction> ws;
  for (const auto& f : requireField(doc, "factors", "warped spec")) fs.push_back(FactorMetric::fromJson(f));
  if (doc.contains("warpings"))
    for (const auto& w : doc["warpings"]) ws.push_back(WarpingFunction::fromJson(w));
  return make(std::move(fs), std::move(ws));
}

double warpedInner(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& point) {
  if (x.size() != spec.n() || y.size() != spec.n())
    fail(ErrorKind::DimensionMismatch, "tangent vectors have the wrong dimension");
  return x.dot(spec.metric(point) * y);
}

VectorXd eta(const WarpedMetricSpec& spec, int j, const VectorXd& point) {
  if (j < 1 || j > spec.k()) fail(ErrorKind::InvalidArgument, "eta is defined for warped factors", {{"j", j}});
  const VectorXd x0 = spec.block(0, point);
  const ScalarJet r = spec.warping(j).jet(x0);
  if (!(r.value > 0.0)) fail(ErrorKind::OutOfDomain, "warping function is not positive here", {{"i", j}});
  const MatrixXd g0 = spec.factor(0)(x0);
  VectorXd out = VectorXd::Zero(spec.n());
  out.head(spec.dim(0)) = -g0.ldlt().solve(r.grad) / r.value;
  return out;
}

std::vector<MatrixXd> christoffel(const MetricJet& jet) {
  const Eigen::Index d = jet.g.rows();
  const MatrixXd ginv = jet.g.inverse();
  std::vector<MatrixXd> gamma(static_cast<std::size_t>(d), MatrixXd::Zero(d, d));
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index e = 0; e < d; ++e) {
        const double s = jet.dg[static_cast<std::size_t>(a)](e, b) + jet.dg[static_cast<std::size_t>(b)](e, a) -
                         jet.dg[static_cast<std::size_t>(e)](a, b);
        for (Eigen::Index c = 0; c < d; ++c) gamma[static_cast<std::size_t>(c)](a, b) += 0.5 * ginv(c, e) * s;
      }
  return gamma;
}

std::vector<MatrixXd> riemannOperators(const MetricJet& jet) {
  const Eigen::Index d = jet.g.rows();
  const auto ud = static_cast<std::size_t>(d);
  const MatrixXd ginv = jet.g.inverse();
  const std::vector<MatrixXd> gamma = christoffel(jet);
  // dgamma[a][c](b, e) = ∂ₐ Γᶜ_{be}
  std::vector<std::vector<MatrixXd>> dgamma(ud, std::vector<MatrixXd>(ud, MatrixXd::Zero(d, d)));
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const MatrixXd dginv = -ginv * jet.dg[ua] * ginv;
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index e = 0; e < d; ++e)
        for (Eigen::Index f = 0; f < d; ++f) {
          const auto ub = static_cast<std::size_t>(b), ue = static_cast<std::size_t>(e), uf = static_cast<std::size_t>(f);
          const double s = jet.dg[ub](f, e) + jet.dg[ue](f, b) - jet.dg[uf](b, e);
          const double ds = jet.ddg[ua][ub](f, e) + jet.ddg[ua][ue](f, b) - jet.ddg[ua][uf](b, e);
          for (Eigen::Index c = 0; c < d; ++c)
            dgamma[ua][static_cast<std::size_t>(c)](b, e) += 0.5 * (dginv(c, f) * s + ginv(c, f) * ds);
        }
  }
  std::vector<MatrixXd> ops(ud * ud, MatrixXd::Zero(d, d));
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      MatrixXd& m = ops[static_cast<std::size_t>(a * d + b)];
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d; ++r) {
          double v = dgamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)](b, c) -
                     dgamma[static_cast<std::size_t>(b)][static_cast<std::size_t>(r)](a, c);
          for (Eigen::Index e = 0; e < d; ++e)
            v += gamma[static_cast<std::size_t>(e)](b, c) * gamma[static_cast<std::size_t>(r)](a, e) -
                 gamma[static_cast<std::size_t>(e)](a, c) * gamma[static_cast<std::size_t>(r)](b, e);
          m(r, c) = v;
        }
    }
  return ops;
}

VectorXd productConnection(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y,
                           const VectorXd& point) {
  if (x.size() != spec.n() || y.size() != spec.n() || point.size() != spec.n())
    fail(ErrorKind::DimensionMismatch, "connection inputs have the wrong dimension");
  VectorXd out = VectorXd::Zero(spec.n());
  for (int j = 0; j <= spec.k(); ++j) {
    const int off = spec.offset(j), d = spec.dim(j);
    const std::vector<MatrixXd> gamma = christoffel(spec.factor(j).jet(spec.block(j, point)));
    const VectorXd xj = x.segment(off, d), yj = y.segment(off, d);
    for (int c = 0; c < d; ++c) out(off + c) = xj.dot(gamma[static_cast<std::size_t>(c)] * yj);
  }
  return out;
}

VectorXd connection(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& point) {
  VectorXd out = productConnection(spec, x, y, point);
  const MatrixXd g = spec.metric(point);
  for (int j = 1; j <= spec.k(); ++j) {
    const VectorXd e = eta(spec, j, point);
    const VectorXd xj = spec.project(j, x), yj = spec.project(j, y);
    out += xj.dot(g * yj) * e - x.dot(g * e) * yj - y.dot(g * e) * xj;
  }
  return out;
}

MatrixXd wedge(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& point) {
  const MatrixXd g = spec.metric(point);
  return x * (g * y).transpose() - y * (g * x).transpose();
}

namespace {

// ∇_{X⁰}ηⱼ on the base, embedded.
VectorXd baseDerivativeOfEta(const WarpedMetricSpec& spec, int j, const VectorXd& x, const VectorXd& point) {
  const int d = spec.dim(0);
  const VectorXd x0 = spec.block(0, point);
  const VectorXd v = x.head(d);
  const MetricJet mj = spec.factor(0).jet(x0);
  const ScalarJet r = spec.warping(j).jet(x0);
  const MatrixXd ginv = mj.g.inverse();
  const VectorXd e = -ginv * r.grad / r.value;
  VectorXd de = VectorXd::Zero(d);
  for (int b = 0; b < d; ++b) {
    const VectorXd term = -ginv * mj.dg[static_cast<std::size_t>(b)] * ginv * r.grad / r.value +
                          ginv * (r.hess.col(b) / r.value - r.grad * r.grad(b) / (r.value * r.value));
    de -= v(b) * term;
  }
  const std::vector<MatrixXd> gamma = christoffel(mj);
  for (int c = 0; c < d; ++c) de(c) += v.dot(gamma[static_cast<std::size_t>(c)] * e);
  VectorXd out = VectorXd::Zero(spec.n());
  out.head(d) = de;
  return out;
}

}  // namespace

MatrixXd curvatureOperator(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y,
                           const VectorXd& point) {
  if (x.size() != spec.n() || y.size() != spec.n() || point.size() != spec.n())
    fail(ErrorKind::DimensionMismatch, "curvature inputs have the wrong dimension");
  const int n = spec.n(), k = spec.k();
  MatrixXd r = MatrixXd::Zero(n, n);
  for (int j = 0; j <= k; ++j) {
    const int off = spec.offset(j), d = spec.dim(j);
    const std::vector<MatrixXd> ops = riemannOperators(spec.factor(j).jet(spec.block(j, point)));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        r.block(off, off, d, d) += x(off + a) * y(off + b) * ops[static_cast<std::size_t>(a * d + b)];
  }
  const MatrixXd g = spec.metric(point);
  std::vector<VectorXd> etas(static_cast<std::size_t>(k + 1));
  for (int j = 1; j <= k; ++j) etas[static_cast<std::size_t>(j)] = eta(spec, j, point);
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j) {
      const double c = etas[static_cast<std::size_t>(i)].dot(g * etas[static_cast<std::size_t>(j)]);
      if (c != 0.0) r -= c * wedge(spec, spec.project(i, x), spec.project(j, y), point);
    }
  for (int j = 1; j <= k; ++j) {
    const VectorXd& e = etas[static_cast<std::size_t>(j)];
    const VectorXd dx = baseDerivativeOfEta(spec, j, x, point) - e.dot(g * x) * e;
    const VectorXd dy = baseDerivativeOfEta(spec, j, y, point) - e.dot(g * y) * e;
    r += wedge(spec, dx, spec.project(j, y), point) + wedge(spec, spec.project(j, x), dy, point);
  }
  return r;
}

double curvature4(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& z,
                  const VectorXd& w, const VectorXd& point) {
  return (curvatureOperator(spec, x, y, point) * z).dot(spec.metric(point) * w);
}

double sectionalCurvature(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y,
                          const VectorXd& point) {
  const MatrixXd g = spec.metric(point);
  const double area = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
  if (!(area > 0.0)) fail(ErrorKind::InvalidArgument, "sectional curvature needs independent vectors");
  return curvature4(spec, x, y, y, x, point) / area;
}

WarpingGroups groupWarpingSamples(const MatrixXd& samples, double tol) {
  if (samples.cols() < 2) fail(ErrorKind::DegenerateGrid, "grouping needs at least two sample points");
  const int k = static_cast<int>(samples.rows());
  WarpingGroups out;
  out.lambda.assign(static_cast<std::size_t>(k + 1), 1.0);
  out.constant.assign(static_cast<std::size_t>(k + 1), false);
  for (int i = 1; i <= k; ++i) {
    const VectorXd v = samples.row(i - 1).transpose();
    const double mag = v.cwiseAbs().maxCoeff();
    out.constant[static_cast<std::size_t>(i)] = mag > 0.0 && (v.maxCoeff() - v.minCoeff()) / mag < 1e-8;
    bool placed = false;
    for (auto& grp : out.groups) {
      const VectorXd u = samples.row(grp.front() - 1).transpose();
      const double uu = u.squaredNorm();
      if (uu == 0.0) continue;
      const double lambda = v.dot(u) / uu;
      if ((v - lambda * u).norm() <= tol * std::sqrt(uu)) {
        grp.push_back(i);
        out.lambda[static_cast<std::size_t>(i)] = lambda;
        placed = true;
        break;
      }
    }
    if (!placed) out.groups.push_back({i});
  }
  return out;
}

WarpingGroups groupWarpings(const WarpedMetricSpec& spec, const std::vector<VectorXd>& grid, double tol) {
  if (grid.size() < 2) fail(ErrorKind::DegenerateGrid, "grouping needs at least two sample points");
  const int d0 = spec.dim(0);
  MatrixXd samples(spec.k(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const VectorXd& g = grid[t];
    if (g.size() != d0 && g.size() != spec.n())
      fail(ErrorKind::DimensionMismatch, "grid point has neither base nor total dimension");
    const VectorXd x0 = g.head(d0);
    for (int i = 1; i <= spec.k(); ++i) samples(i - 1, static_cast<Eigen::Index>(t)) = spec.warping(i)(x0);
  }
  return groupWarpingSamples(samples, tol);
}

}  // namespace warpimm::warped
