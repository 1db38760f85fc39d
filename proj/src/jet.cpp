#include "warpimm/jet.hpp"

#include "warpimm/errors.hpp"

namespace warpimm {

Dual2 Dual2::variable(double value, int index, int dim) {
  VectorXd g = VectorXd::Zero(dim);
  g(index) = 1.0;
  return Dual2(value, std::move(g), MatrixXd::Zero(dim, dim));
}

VectorXd Dual2::gradient(int dim) const {
  return g_.size() == 0 ? VectorXd::Zero(dim) : g_;
}

MatrixXd Dual2::hessian(int dim) const {
  return h_.size() == 0 ? MatrixXd::Zero(dim, dim) : h_;
}

Dual2 Dual2::apply(double f, double df, double d2f) const {
  if (g_.size() == 0) return Dual2(f);
  return Dual2(f, df * g_, df * h_ + d2f * g_ * g_.transpose());
}

Dual2& Dual2::operator+=(const Dual2& o) {
  v_ += o.v_;
  if (o.g_.size() != 0) {
    if (g_.size() == 0) {
      g_ = o.g_;
      h_ = o.h_;
    } else {
      g_ += o.g_;
      h_ += o.h_;
    }
  }
  return *this;
}

Dual2& Dual2::operator-=(const Dual2& o) {
  v_ -= o.v_;
  if (o.g_.size() != 0) {
    if (g_.size() == 0) {
      g_ = -o.g_;
      h_ = -o.h_;
    } else {
      g_ -= o.g_;
      h_ -= o.h_;
    }
  }
  return *this;
}

Dual2& Dual2::operator*=(const Dual2& o) {
  if (g_.size() == 0 && o.g_.size() == 0) {
    v_ *= o.v_;
    return *this;
  }
  if (o.g_.size() == 0) {
    v_ *= o.v_;
    g_ *= o.v_;
    h_ *= o.v_;
    return *this;
  }
  if (g_.size() == 0) {
    const double a = v_;
    v_ = a * o.v_;
    g_ = a * o.g_;
    h_ = a * o.h_;
    return *this;
  }
  MatrixXd cross = g_ * o.g_.transpose();
  h_ = v_ * o.h_ + o.v_ * h_ + cross + cross.transpose();
  g_ = v_ * o.g_ + o.v_ * g_;
  v_ *= o.v_;
  return *this;
}

Dual2& Dual2::operator/=(const Dual2& o) {
  const double b = o.v_;
  Dual2 inv = o.apply(1.0 / b, -1.0 / (b * b), 2.0 / (b * b * b));
  return *this *= inv;
}

Dual2 Dual2::operator-() const {
  Dual2 r = *this;
  r.v_ = -r.v_;
  if (r.g_.size() != 0) {
    r.g_ = -r.g_;
    r.h_ = -r.h_;
  }
  return r;
}

Dual2 sin(const Dual2& x) {
  const double v = x.value();
  return x.apply(std::sin(v), std::cos(v), -std::sin(v));
}
Dual2 cos(const Dual2& x) {
  const double v = x.value();
  return x.apply(std::cos(v), -std::sin(v), -std::cos(v));
}
Dual2 exp(const Dual2& x) {
  const double e = std::exp(x.value());
  return x.apply(e, e, e);
}
Dual2 log(const Dual2& x) {
  const double v = x.value();
  return x.apply(std::log(v), 1.0 / v, -1.0 / (v * v));
}
Dual2 sqrt(const Dual2& x) {
  const double r = std::sqrt(x.value());
  return x.apply(r, 0.5 / r, -0.25 / (r * r * r));
}

namespace {

// Σ_k (−u)^k / (2k + offset)! and its first two u-derivatives.
double alternatingSeries(double u, int offset, int derivative) {
  double sum = 0.0;
  double fact = 1.0;  // (2k + offset)!
  for (int i = 2; i <= offset; ++i) fact *= i;
  for (int k = 0; k < 120; ++k) {
    if (k > 0) fact *= static_cast<double>((2 * k + offset - 1) * (2 * k + offset));
    double coeff = ((k % 2) ? -1.0 : 1.0) / fact;
    double term = 0.0;
    if (derivative == 0) {
      term = coeff * std::pow(u, k);
    } else if (derivative == 1) {
      if (k >= 1) term = coeff * k * std::pow(u, k - 1);
    } else {
      if (k >= 2) term = coeff * k * (k - 1) * std::pow(u, k - 2);
    }
    sum += term;
    if (k > 4 && std::abs(term) <= 1e-18 * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

}  // namespace

double sincSqrt(double u, int derivative) {
  if (u <= 4.0) return alternatingSeries(u, 1, derivative);
  const double w = std::sqrt(u);
  const double s = std::sin(w), c = std::cos(w);
  switch (derivative) {
    case 0: return s / w;
    case 1: return (w * c - s) / (2.0 * w * w * w);
    default: return (3.0 * s - 3.0 * w * c - w * w * s) / (4.0 * std::pow(w, 5));
  }
}

double versSqrt(double u, int derivative) {
  if (u <= 4.0) return alternatingSeries(u, 2, derivative);
  const double w = std::sqrt(u);
  const double s = std::sin(w), c = std::cos(w);
  switch (derivative) {
    case 0: return (1.0 - c) / u;
    case 1: return (w * s - 2.0 + 2.0 * c) / (2.0 * std::pow(w, 4));
    default: return (w * w * c - 5.0 * w * s + 8.0 - 8.0 * c) / (4.0 * std::pow(w, 6));
  }
}

VectorXd Jet::second(const VectorXd& u, const VectorXd& w) const {
  VectorXd r(outDim());
  for (int i = 0; i < outDim(); ++i) r(i) = u.dot(hessians[static_cast<std::size_t>(i)] * w);
  return r;
}

Jet composeJets(const Jet& outer, const Jet& inner) {
  if (outer.inDim() != inner.outDim())
    fail(ErrorKind::DimensionMismatch, "composeJets: inner output does not match outer input");
  Jet r;
  r.value = outer.value;
  r.jacobian = outer.jacobian * inner.jacobian;
  const int n = inner.inDim();
  r.hessians.assign(static_cast<std::size_t>(outer.outDim()), MatrixXd::Zero(n, n));
  for (int c = 0; c < outer.outDim(); ++c) {
    MatrixXd& h = r.hessians[static_cast<std::size_t>(c)];
    h = inner.jacobian.transpose() * outer.hessians[static_cast<std::size_t>(c)] * inner.jacobian;
    for (int d = 0; d < inner.outDim(); ++d) {
      const double w = outer.jacobian(c, d);
      if (w != 0.0) h += w * inner.hessians[static_cast<std::size_t>(d)];
    }
  }
  return r;
}

SmoothMap::SmoothMap(int inDim, int outDim, ValueFn value, JetFn jet)
    : in_(inDim), out_(outDim), value_(std::move(value)), jet_(std::move(jet)) {}

VectorXd SmoothMap::operator()(const VectorXd& x) const {
  if (x.size() != in_)
    fail(ErrorKind::DimensionMismatch, "SmoothMap: input has wrong dimension",
         {{"expected", in_}, {"got", x.size()}});
  return value_(x);
}

Jet SmoothMap::jet(const VectorXd& x, const FdSteps& steps) const {
  if (x.size() != in_)
    fail(ErrorKind::DimensionMismatch, "SmoothMap: input has wrong dimension",
         {{"expected", in_}, {"got", x.size()}});
  if (jet_) return jet_(x);
  return fdJet(x, steps);
}

Jet SmoothMap::fdJet(const VectorXd& x, const FdSteps& steps) const {
  Jet j;
  j.value = value_(x);
  const int n = in_;
  const int m = static_cast<int>(j.value.size());
  j.jacobian.resize(m, n);
  const double h1 = steps.first;
  for (int a = 0; a < n; ++a) {
    VectorXd xp = x, xm = x;
    xp(a) += h1;
    xm(a) -= h1;
    j.jacobian.col(a) = (value_(xp) - value_(xm)) / (2.0 * h1);
  }
  const double h = steps.second;
  std::vector<VectorXd> second(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    VectorXd xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    second[static_cast<std::size_t>(a * n + a)] = (value_(xp) - 2.0 * j.value + value_(xm)) / (h * h);
    for (int b = a + 1; b < n; ++b) {
      VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(a) += h; pp(b) += h;
      pm(a) += h; pm(b) -= h;
      mp(a) -= h; mp(b) += h;
      mm(a) -= h; mm(b) -= h;
      VectorXd d = (value_(pp) - value_(pm) - value_(mp) + value_(mm)) / (4.0 * h * h);
      second[static_cast<std::size_t>(a * n + b)] = d;
      second[static_cast<std::size_t>(b * n + a)] = d;
    }
  }
  j.hessians.assign(static_cast<std::size_t>(m), MatrixXd(n, n));
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        j.hessians[static_cast<std::size_t>(c)](a, b) = second[static_cast<std::size_t>(a * n + b)](c);
  return j;
}

SmoothMap SmoothMap::compose(const SmoothMap& outer, const SmoothMap& inner) {
  if (outer.inDim() != inner.outDim())
    fail(ErrorKind::DimensionMismatch, "SmoothMap::compose: dimensions do not chain",
         {{"outerIn", outer.inDim()}, {"innerOut", inner.outDim()}});
  ValueFn value = [outer, inner](const VectorXd& x) { return outer(inner(x)); };
  JetFn jet;
  if (outer.hasJetOracle() && inner.hasJetOracle()) {
    jet = [outer, inner](const VectorXd& x) {
      Jet ji = inner.jet(x);
      return composeJets(outer.jet(ji.value), ji);
    };
  }
  return SmoothMap(inner.inDim(), outer.outDim(), value, jet);
}

SmoothMap SmoothMap::product(const std::vector<SmoothMap>& maps) {
  int in = 0, out = 0;
  bool allJets = true;
  for (const auto& m : maps) {
    in += m.inDim();
    out += m.outDim();
    allJets = allJets && m.hasJetOracle();
  }
  ValueFn value = [maps, out](const VectorXd& x) {
    VectorXd y(out);
    int io = 0, oo = 0;
    for (const auto& m : maps) {
      y.segment(oo, m.outDim()) = m(x.segment(io, m.inDim()));
      io += m.inDim();
      oo += m.outDim();
    }
    return y;
  };
  JetFn jet;
  if (allJets) {
    jet = [maps, in, out](const VectorXd& x) {
      Jet j;
      j.value.resize(out);
      j.jacobian = MatrixXd::Zero(out, in);
      j.hessians.assign(static_cast<std::size_t>(out), MatrixXd::Zero(in, in));
      int io = 0, oo = 0;
      for (const auto& m : maps) {
        Jet part = m.jet(x.segment(io, m.inDim()));
        j.value.segment(oo, m.outDim()) = part.value;
        j.jacobian.block(oo, io, m.outDim(), m.inDim()) = part.jacobian;
        for (int c = 0; c < m.outDim(); ++c)
          j.hessians[static_cast<std::size_t>(oo + c)].block(io, io, m.inDim(), m.inDim()) =
              part.hessians[static_cast<std::size_t>(c)];
        io += m.inDim();
        oo += m.outDim();
      }
      return j;
    };
  }
  return SmoothMap(in, out, value, jet);
}

SmoothMap SmoothMap::identity(int dim) {
  return SmoothMap(
      dim, dim, [](const VectorXd& x) { return x; },
      [dim](const VectorXd& x) {
        Jet j;
        j.value = x;
        j.jacobian = MatrixXd::Identity(dim, dim);
        j.hessians.assign(static_cast<std::size_t>(dim), MatrixXd::Zero(dim, dim));
        return j;
      });
}

}  // namespace warpimm
