#include "warpimm/families.hpp"

#include <cmath>
#include <type_traits>

#include "warpimm/errors.hpp"

namespace warpimm::families {

namespace {

template <class V>
using Scalar = typename std::decay_t<V>::value_type;

GraphTerm randomGraphTerm(int dim, Rng& rng) {
  std::uniform_real_distribution<double> mag(0.6, 1.4);
  std::bernoulli_distribution sign(0.5);
  const MatrixXd q = randomOrthogonal(dim, rng);
  VectorXd d(dim);
  for (int i = 0; i < dim; ++i) d(i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return {q * d.asDiagonal() * q.transpose(), 0.3 * randomGaussian(dim, rng)};
}

SmoothMap randomGraph(int dim, int codim, Rng& rng, bool rotate) {
  std::vector<GraphTerm> terms;
  for (int r = 0; r < codim; ++r) terms.push_back(randomGraphTerm(dim, rng));
  return graphMap(dim, terms, rotate ? randomOrthogonal(dim + codim, rng) : MatrixXd());
}

}  // namespace

SmoothMap graphMap(int dim, const std::vector<GraphTerm>& terms, const MatrixXd& rotation) {
  const int out = dim + static_cast<int>(terms.size());
  for (const auto& t : terms)
    if (t.hessian.rows() != dim || t.hessian.cols() != dim || t.cubic.size() != dim)
      fail(ErrorKind::DimensionMismatch, "graph term does not match the dimension", {{"dim", dim}});
  if (rotation.size() != 0 && (rotation.rows() != out || rotation.cols() != out))
    fail(ErrorKind::DimensionMismatch, "rotation must be square of the output dimension", {{"out", out}});
  const MatrixXd rot = rotation.size() == 0 ? MatrixXd::Identity(out, out) : rotation;
  return SmoothMap::fromTemplate(dim, out, [dim, out, terms, rot](const auto& u) {
    using T = Scalar<decltype(u)>;
    std::vector<T> raw(u.begin(), u.end());
    for (const auto& t : terms) {
      T h = T(0.0);
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) h = h + T(0.5 * t.hessian(a, b)) * u[a] * u[b];
        h = h + T(t.cubic(a) / 6.0) * u[a] * u[a] * u[a];
      }
      raw.push_back(h);
    }
    std::vector<T> y(static_cast<std::size_t>(out), T(0.0));
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < out; ++c)
        if (rot(r, c) != 0.0) y[r] = y[r] + T(rot(r, c)) * raw[c];
    return y;
  });
}

SmoothMap sphereChartMap(int dim, double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::InvalidArgument, "sphere radius must be positive");
  return SmoothMap::fromTemplate(dim, dim + 1, [dim, radius](const auto& u) {
    using T = Scalar<decltype(u)>;
    using std::sqrt;
    T r2 = T(0.0);
    for (int a = 0; a < dim; ++a) r2 = r2 + u[a] * u[a];
    if (!(valueOf(r2) < radius * radius)) fail(ErrorKind::OutOfDomain, "point outside the sphere chart");
    std::vector<T> y(u.begin(), u.end());
    y.push_back(sqrt(T(radius * radius) - r2) - T(radius));
    return y;
  });
}

SmoothMap affineMap(const MatrixXd& a, const VectorXd& b) {
  if (a.rows() != b.size()) fail(ErrorKind::DimensionMismatch, "affine map: A and b disagree");
  const int in = static_cast<int>(a.cols()), out = static_cast<int>(a.rows());
  return SmoothMap::fromTemplate(in, out, [a, b, in, out](const auto& u) {
    using T = Scalar<decltype(u)>;
    std::vector<T> y;
    for (int r = 0; r < out; ++r) {
      T s = T(b(r));
      for (int c = 0; c < in; ++c)
        if (a(r, c) != 0.0) s = s + T(a(r, c)) * u[c];
      y.push_back(s);
    }
    return y;
  });
}

SmoothMap cylinderMap(int dim, int axis, double radius) {
  if (axis < 0 || axis >= dim) fail(ErrorKind::InvalidArgument, "cylinder axis out of range", {{"axis", axis}});
  if (!(radius > 0.0)) fail(ErrorKind::InvalidArgument, "cylinder radius must be positive");
  return SmoothMap::fromTemplate(dim, dim + 1, [axis, radius](const auto& u) {
    using T = Scalar<decltype(u)>;
    using std::cos;
    using std::sin;
    std::vector<T> y(u.begin(), u.end());
    const T t = u[axis] / T(radius);
    y[axis] = T(radius) * sin(t);
    y.push_back(T(radius) * (T(1.0) - cos(t)));
    return y;
  });
}

SmoothMap inclusionMap(int dim, int extra) {
  MatrixXd a = MatrixXd::Zero(dim + extra, dim);
  a.topRows(dim).setIdentity();
  return affineMap(a, VectorXd::Zero(dim + extra));
}

NumericalImmersion productImmersion(const std::vector<SmoothMap>& maps) {
  if (maps.empty()) fail(ErrorKind::InvalidArgument, "product of no maps");
  const SmoothMap f = SmoothMap::product(maps);
  return NumericalImmersion(f, spaceforms::SpaceForm{0.0, f.outDim()}, FdSteps{}, "product");
}

WarpedComposition revolutionSurface(double a1, double a2, int sphereDim) {
  if (sphereDim < 1) fail(ErrorKind::InvalidArgument, "sphere dimension must be positive");
  const int m = sphereDim + 2;
  const VectorXd q = VectorXd::Unit(m, 0);
  spaceforms::FactorSpec base{2, std::nullopt, MatrixXd::Identity(m, 2)};
  MatrixXd frame = MatrixXd::Zero(m, sphereDim);
  frame.bottomRows(sphereDim).setIdentity();
  spaceforms::FactorSpec sphere{sphereDim, VectorXd(-VectorXd::Unit(m, 0)), frame};
  const auto rep = spaceforms::WarpedRepresentation::make(0.0, q, {base, sphere});
  const SmoothMap profile = SmoothMap::fromTemplate(1, 2, [a1, a2](const auto& s) {
    using T = Scalar<decltype(s)>;
    return std::vector<T>{T(a1) * s[0] + T(a2) * s[0] * s[0], s[0]};
  });
  return immersions::composeWarpedCharts(rep, {profile, SmoothMap::identity(sphereDim)});
}

namespace {

struct FactorConfig {
  int dim;
  bool hypersurface;
};

struct WarpedConfig {
  double c;
  int baseDim;
  std::vector<FactorConfig> factors;
};

const std::vector<WarpedConfig>& warpedTable() {
  static const std::vector<WarpedConfig> table{
      {0.0, 2, {{3, true}}},
      {1.0, 2, {{3, true}}},
      {-1.0, 2, {{3, true}}},
      {0.0, 1, {{3, true}, {3, true}}},
      {1.0, 1, {{3, true}, {3, true}}},
      {-1.0, 1, {{3, true}, {3, true}}},
      {0.0, 2, {{2, false}, {2, false}, {2, false}}},
      {1.0, 2, {{2, false}, {2, false}, {1, false}}},
      {-1.0, 2, {{2, false}, {2, false}, {2, false}}},
      {0.0, 2, {{3, true}, {2, false}}},
  };
  return table;
}

// Mean curvature vectors in the span of u, v, w satisfying ⟨zᵢ, zⱼ⟩ = −c.
std::vector<VectorXd> meanCurvatures(double c, int k, const VectorXd& u, const VectorXd& v, const VectorXd& w,
                                     Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VectorXd> z;
  if (c == 0.0) {
    const VectorXd dirs[3] = {u, v, w};
    for (int i = 0; i < k; ++i) z.push_back((unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng)) * dirs[i]);
  } else if (c > 0.0) {
    if (k == 1) {
      z.push_back((0.4 + 0.6 * unit(rng)) * u);
    } else if (k == 2) {
      const double t = 0.6 + 0.4 * unit(rng);
      z.push_back(t * u);
      z.push_back(-u / t);
    } else {
      const double phi = 2.0 * M_PI * unit(rng);
      for (int i = 0; i < 3; ++i) {
        const double th = phi + 2.0 * M_PI * i / 3.0;
        z.push_back(std::sqrt(2.0) * (std::cos(th) * u + std::sin(th) * v));
      }
    }
  } else {
    if (k == 1) {
      z.push_back((0.4 + 0.8 * unit(rng)) * u);
    } else if (k == 2) {
      const double s = 0.7 + 0.6 * unit(rng);
      z.push_back(s * u);
      z.push_back(u / s + (0.3 + 0.5 * unit(rng)) * v);
    } else {
      z.push_back(u);
      z.push_back(u + (0.3 + 0.5 * unit(rng)) * v);
      z.push_back(u + (0.3 + 0.5 * unit(rng)) * w);
    }
  }
  return z;
}

}  // namespace

int seededWarpedCount() { return static_cast<int>(warpedTable().size()); }

SeededWarped seededWarpedComposition(int index, std::uint64_t seed, int sampleCount) {
  if (index < 0 || index >= seededWarpedCount())
    fail(ErrorKind::InvalidArgument, "no such seeded configuration", {{"index", index}});
  const WarpedConfig& cfg = warpedTable()[static_cast<std::size_t>(index)];
  Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(index)));
  const int k = static_cast<int>(cfg.factors.size());

  std::vector<int> chartDims{cfg.baseDim + 1};
  for (const auto& f : cfg.factors) chartDims.push_back(f.dim + (f.hypersurface ? 1 : 0));
  int m = 0;
  for (int d : chartDims) m += d;
  const int amb = cfg.c == 0.0 ? m : m + 1;
  VectorXd q = VectorXd::Zero(amb);
  if (cfg.c > 0.0) q(amb - 1) = 1.0;
  if (cfg.c < 0.0) q(0) = 1.0;
  const int first = cfg.c < 0.0 ? 1 : 0;
  const VectorXd u = VectorXd::Unit(amb, first), v = VectorXd::Unit(amb, first + 1),
                 w = VectorXd::Unit(amb, first + std::min(2, chartDims[0] - 1));
  const std::vector<VectorXd> z = meanCurvatures(cfg.c, k, u, v, w, rng);

  std::vector<spaceforms::FactorSpec> specs{{chartDims[0], std::nullopt, std::nullopt}};
  for (int i = 1; i <= k; ++i)
    specs.push_back({chartDims[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(i - 1)], std::nullopt});
  const auto rep = spaceforms::WarpedRepresentation::make(cfg.c, q, specs);

  SeededWarped out;
  std::vector<SmoothMap> charts{randomGraph(cfg.baseDim, 1, rng, true)};
  out.factorCodimensions.push_back(1);
  for (const auto& f : cfg.factors) {
    charts.push_back(f.hypersurface ? randomGraph(f.dim, 1, rng, true) : SmoothMap::identity(f.dim));
    out.factorCodimensions.push_back(f.hypersurface ? 1 : 0);
  }
  out.comp = immersions::composeWarpedCharts(rep, charts);
  out.samples = sampleBox(out.comp.immersion.n(), sampleCount, 0.15, deriveSeed(seed, 1000 + index));
  return out;
}

NumericalImmersion graphProduct(const std::vector<int>& dims, std::uint64_t seed) {
  Rng rng(deriveSeed(seed, 77));
  std::vector<SmoothMap> maps;
  for (int d : dims) maps.push_back(randomGraph(d, 1, rng, false));
  return productImmersion(maps);
}

NumericalImmersion compositionCounterexample(std::uint64_t seed) {
  const NumericalImmersion prod = graphProduct({3, 4}, seed);
  const int dim = prod.ambient().ambientDim();
  // Axis (e₀ + e₄)/√2 couples the two factors.
  MatrixXd rot = MatrixXd::Identity(dim, dim);
  const double s = std::sqrt(0.5);
  rot(0, 0) = s;
  rot(0, 4) = s;
  rot(4, 0) = -s;
  rot(4, 4) = s;
  const SmoothMap g = SmoothMap::compose(cylinderMap(dim, 0, 1.5), affineMap(rot, VectorXd::Zero(dim)));
  return immersions::makeComposition(prod, g);
}

std::vector<VectorXd> sampleBox(int dim, int count, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> d(-radius, radius);
  std::vector<VectorXd> out;
  for (int i = 0; i < count; ++i) {
    VectorXd x(dim);
    for (int a = 0; a < dim; ++a) x(a) = d(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace warpimm::families
