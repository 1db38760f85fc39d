#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "warpimm/linalg.hpp"

namespace warpimm {

// Second-order forward-mode scalar: value, gradient and Hessian with respect
// to a fixed set of seed variables. A default-constructed (dimension 0) Dual2
// behaves as a constant in mixed arithmetic.
class Dual2 {
 public:
  Dual2() = default;
  Dual2(double value) : v_(value) {}  // NOLINT(google-explicit-constructor)
  Dual2(double value, VectorXd grad, MatrixXd hess)
      : v_(value), g_(std::move(grad)), h_(std::move(hess)) {}

  static Dual2 variable(double value, int index, int dim);

  double value() const { return v_; }
  int dim() const { return static_cast<int>(g_.size()); }
  VectorXd gradient(int dim) const;
  MatrixXd hessian(int dim) const;

  /// Chain rule for a scalar function with known f, f', f'' at value().
  Dual2 apply(double f, double df, double d2f) const;

  Dual2& operator+=(const Dual2& o);
  Dual2& operator-=(const Dual2& o);
  Dual2& operator*=(const Dual2& o);
  Dual2& operator/=(const Dual2& o);
  Dual2 operator-() const;

  friend Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
  friend Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
  friend Dual2 operator*(Dual2 a, const Dual2& b) { return a *= b; }
  friend Dual2 operator/(Dual2 a, const Dual2& b) { return a /= b; }
  friend bool operator<(const Dual2& a, const Dual2& b) { return a.v_ < b.v_; }
  friend bool operator>(const Dual2& a, const Dual2& b) { return a.v_ > b.v_; }

 private:
  double v_ = 0.0;
  VectorXd g_;
  MatrixXd h_;
};

Dual2 sin(const Dual2& x);
Dual2 cos(const Dual2& x);
Dual2 exp(const Dual2& x);
Dual2 log(const Dual2& x);
Dual2 sqrt(const Dual2& x);

inline double valueOf(double x) { return x; }
inline double valueOf(const Dual2& x) { return x.value(); }

/// s(u) = sin(√u)/√u, analytically continued (sinh for u < 0); entire in u.
double sincSqrt(double u, int derivative = 0);
/// c(u) = (1 − cos√u)/u, analytically continued; entire in u.
double versSqrt(double u, int derivative = 0);

inline Dual2 sincSqrt(const Dual2& u) {
  const double x = u.value();
  return u.apply(sincSqrt(x, 0), sincSqrt(x, 1), sincSqrt(x, 2));
}
inline Dual2 versSqrt(const Dual2& u) {
  const double x = u.value();
  return u.apply(versSqrt(x, 0), versSqrt(x, 1), versSqrt(x, 2));
}

/// Value, Jacobian and per-component Hessians of a vector map at a point.
struct Jet {
  VectorXd value;
  MatrixXd jacobian;               // out × in
  std::vector<MatrixXd> hessians;  // out entries, each in × in

  int inDim() const { return static_cast<int>(jacobian.cols()); }
  int outDim() const { return static_cast<int>(value.size()); }
  /// Second derivative along (u, w) as an out-vector.
  VectorXd second(const VectorXd& u, const VectorXd& w) const;
};

/// Chain rule: jet of outer∘inner given the outer jet at inner.value.
Jet composeJets(const Jet& outer, const Jet& inner);

struct FdSteps {
  double first = 1e-4;
  double second = 1e-3;
};

// A smooth map R^in → R^out with an optional exact jet oracle. Without an
// oracle, jets come from central differences.
class SmoothMap {
 public:
  using ValueFn = std::function<VectorXd(const VectorXd&)>;
  using JetFn = std::function<Jet(const VectorXd&)>;

  SmoothMap() = default;
  SmoothMap(int inDim, int outDim, ValueFn value, JetFn jet = {});

  int inDim() const { return in_; }
  int outDim() const { return out_; }
  bool hasJetOracle() const { return static_cast<bool>(jet_); }

  VectorXd operator()(const VectorXd& x) const;
  Jet jet(const VectorXd& x, const FdSteps& steps = {}) const;
  /// Central-difference jet, ignoring any oracle.
  Jet fdJet(const VectorXd& x, const FdSteps& steps = {}) const;

  /// outer ∘ inner; the jet oracle composes jets when both sides have one.
  static SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner);
  /// (x₀,…,x_k) ↦ (m₀(x₀),…,m_k(x_k)).
  static SmoothMap product(const std::vector<SmoothMap>& maps);
  static SmoothMap identity(int dim);

  /// Build from a functor with a templated call operator
  /// `std::vector<T> operator()(const std::vector<T>&) const`.
  template <class F>
  static SmoothMap fromTemplate(int inDim, int outDim, F f);

 private:
  int in_ = 0;
  int out_ = 0;
  ValueFn value_;
  JetFn jet_;
};

template <class F>
SmoothMap SmoothMap::fromTemplate(int inDim, int outDim, F f) {
  auto value = [f, inDim, outDim](const VectorXd& x) {
    std::vector<double> in(x.data(), x.data() + inDim);
    std::vector<double> out = f(in);
    VectorXd v(outDim);
    for (int i = 0; i < outDim; ++i) v(i) = out[static_cast<std::size_t>(i)];
    return v;
  };
  auto jet = [f, inDim, outDim](const VectorXd& x) {
    std::vector<Dual2> in;
    in.reserve(static_cast<std::size_t>(inDim));
    for (int i = 0; i < inDim; ++i) in.push_back(Dual2::variable(x(i), i, inDim));
    std::vector<Dual2> out = f(in);
    Jet j;
    j.value.resize(outDim);
    j.jacobian.resize(outDim, inDim);
    j.hessians.resize(static_cast<std::size_t>(outDim));
    for (int r = 0; r < outDim; ++r) {
      const Dual2& o = out[static_cast<std::size_t>(r)];
      j.value(r) = o.value();
      j.jacobian.row(r) = o.gradient(inDim).transpose();
      j.hessians[static_cast<std::size_t>(r)] = o.hessian(inDim);
    }
    return j;
  };
  return SmoothMap(inDim, outDim, value, jet);
}

}  // namespace warpimm
