#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "warpimm/jet.hpp"
#include "warpimm/linalg.hpp"

namespace warpimm::warped {

/// Metric value with first and second coordinate derivatives:
/// dg[a] = ∂ₐg, ddg[a][b] = ∂ₐ∂_b g.
struct MetricJet {
  MatrixXd g;
  std::vector<MatrixXd> dg;
  std::vector<std::vector<MatrixXd>> ddg;
};

/// Riemannian metric of one factor in a chart.
class FactorMetric {
 public:
  enum class Kind { Euclidean, Sphere, Hyperbolic, Sampled, Custom };
  using MetricFn = std::function<MatrixXd(const VectorXd&)>;
  using DerivFn = std::function<std::vector<MatrixXd>(const VectorXd&)>;

  static FactorMetric euclidean(int dim);
  /// Round sphere of the given radius in stereographic coordinates.
  static FactorMetric sphere(int dim, double radius = 1.0);
  /// Hyperbolic space of the given radius in the Poincaré ball, |x| < 1.
  static FactorMetric hyperbolic(int dim, double radius = 1.0);
  /// g(x) = G₀ + Σ xᵢ Gᵢ from a coefficient table.
  static FactorMetric sampled(const MatrixXd& g0, const std::vector<MatrixXd>& slopes);
  /// Arbitrary metric; `deriv` (optional) returns ∂ₐg, otherwise central
  /// differences are used. Second derivatives are differenced from the first.
  static FactorMetric custom(int dim, MetricFn g, DerivFn deriv = {});
  /// Pullback of the ambient pairing under a map with a jet oracle.
  static FactorMetric pullback(const SmoothMap& f, const InnerSpace& ambient);

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  std::string kindName() const;

  /// Throws OutOfDomain outside the chart or where g is not positive definite.
  MatrixXd operator()(const VectorXd& x) const;
  MetricJet jet(const VectorXd& x) const;

  nlohmann::json toJson() const;
  static FactorMetric fromJson(const nlohmann::json& doc);

 private:
  int dim_ = 0;
  Kind kind_ = Kind::Euclidean;
  double radius_ = 1.0;
  MatrixXd g0_;
  std::vector<MatrixXd> slopes_;
  MetricFn custom_;
  DerivFn deriv_;
};

struct ScalarJet {
  double value = 0.0;
  VectorXd grad;
  MatrixXd hess;
};

/// Positive warping function on the base chart.
class WarpingFunction {
 public:
  enum class Kind { Affine, Exponential, Polynomial, Custom };
  using ValueFn = std::function<double(const VectorXd&)>;
  using JetFn = std::function<ScalarJet(const VectorXd&)>;

  /// a + ⟨b, x⟩.
  static WarpingFunction affine(double a, const VectorXd& b);
  /// a·exp(⟨b, x⟩).
  static WarpingFunction exponential(double a, const VectorXd& b);
  /// a + ⟨b, x⟩ + xᵀCx.
  static WarpingFunction polynomial(double a, const VectorXd& b, const MatrixXd& c);
  /// Without a jet oracle the gradient comes from central differences at
  /// h = 1e−5 and the Hessian at h = 1e−4.
  static WarpingFunction custom(int dim, ValueFn value, JetFn jet = {});

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  double operator()(const VectorXd& x) const;
  ScalarJet jet(const VectorXd& x) const;
  /// The same function scaled by λ.
  WarpingFunction scaled(double lambda) const;

  nlohmann::json toJson() const;
  static WarpingFunction fromJson(const nlohmann::json& doc);

 private:
  int dim_ = 0;
  Kind kind_ = Kind::Affine;
  double a_ = 1.0;
  VectorXd b_;
  MatrixXd c_;
  double scale_ = 1.0;
  ValueFn value_;
  JetFn jet_;
};

/// M₀ ×_{ρ₁} M₁ × … ×_{ρ_k} M_k in a product chart x = (x₀, x₁, …, x_k).
/// Tangent vectors are coordinate component vectors of length n = Σ nⱼ.
class WarpedMetricSpec {
 public:
  static WarpedMetricSpec make(std::vector<FactorMetric> factors, std::vector<WarpingFunction> warpings);

  int k() const { return static_cast<int>(factors_.size()) - 1; }
  int n() const { return n_; }
  std::vector<int> dims() const;
  int dim(int j) const { return factors_[static_cast<std::size_t>(j)].dim(); }
  int offset(int j) const { return offsets_[static_cast<std::size_t>(j)]; }
  const FactorMetric& factor(int j) const { return factors_[static_cast<std::size_t>(j)]; }
  /// ρᵢ for i = 1…k.
  const WarpingFunction& warping(int i) const { return warpings_[static_cast<std::size_t>(i - 1)]; }

  VectorXd block(int j, const VectorXd& x) const { return x.segment(offset(j), dim(j)); }
  /// Xʲ = (πⱼ)_*X embedded as an n-vector.
  VectorXd project(int j, const VectorXd& v) const;
  /// ρᵢ(x₀); throws OutOfDomain when not positive.
  double rho(int i, const VectorXd& x) const;
  /// Assembled block metric blockdiag(g₀, ρ₁²g₁, …, ρ_k²g_k).
  MatrixXd metric(const VectorXd& x) const;

  nlohmann::json toJson() const;
  static WarpedMetricSpec fromJson(const nlohmann::json& doc);

 private:
  std::vector<FactorMetric> factors_;
  std::vector<WarpingFunction> warpings_;
  std::vector<int> offsets_;
  int n_ = 0;
};

double warpedInner(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& point);

/// ηⱼ = −grad log ρⱼ, a vector tangent to M₀.
VectorXd eta(const WarpedMetricSpec& spec, int j, const VectorXd& point);

/// ∇̃_X Y of the unwarped product metric for constant-coefficient fields.
VectorXd productConnection(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y,
                           const VectorXd& point);

/// ∇_X Y = ∇̃_X Y + Σⱼ (⟨Xʲ,Yʲ⟩ηⱼ − ⟨X,ηⱼ⟩Yʲ − ⟨Y,ηⱼ⟩Xʲ) for
/// constant-coefficient fields.
VectorXd connection(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& point);

/// (X ∧ Y)Z = ⟨Y,Z⟩X − ⟨X,Z⟩Y in the warped metric, as an n × n matrix.
MatrixXd wedge(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& point);

/// R(X,Y) = R̃(X,Y) − Σᵢⱼ⟨ηᵢ,ηⱼ⟩Xⁱ∧Yʲ
///        + Σⱼ[(∇_{X⁰}ηⱼ − ⟨ηⱼ,X⟩ηⱼ)∧Yʲ + Xʲ∧(∇_{Y⁰}ηⱼ − ⟨ηⱼ,Y⟩ηⱼ)].
/// Convention: R(X,Y) = [∇_X,∇_Y] − ∇_{[X,Y]}, so the sectional curvature
/// of an orthonormal pair is ⟨R(X,Y)Y, X⟩ (round sphere: +1).
MatrixXd curvatureOperator(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y,
                           const VectorXd& point);

/// ⟨R(X,Y)Z, W⟩.
double curvature4(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y, const VectorXd& z,
                  const VectorXd& w, const VectorXd& point);

double sectionalCurvature(const WarpedMetricSpec& spec, const VectorXd& x, const VectorXd& y,
                          const VectorXd& point);

/// Christoffel symbols Γ[d](a,b) of a single chart metric.
std::vector<MatrixXd> christoffel(const MetricJet& jet);
/// Riemann operators of a single chart metric: entry (a·dim + b) is the
/// matrix of R(∂ₐ, ∂_b).
std::vector<MatrixXd> riemannOperators(const MetricJet& jet);

struct WarpingGroups {
  /// Groups of factor indices (1-based), in order of first member.
  std::vector<std::vector<int>> groups;
  /// λ per factor (index 0 unused, 1.0): ρᵢ ≈ λᵢ ρ_{first member of its group}.
  std::vector<double> lambda;
  /// Relative variation over the grid below 1e−8.
  std::vector<bool> constant;
};

/// Partition of warping samples (row i − 1 holds ρᵢ over the grid) by
/// pairwise proportionality: ‖ρᵢ − λρⱼ‖ ≤ tol·‖ρⱼ‖ with least-squares λ.
WarpingGroups groupWarpingSamples(const MatrixXd& samples, double tol);

/// Samples every ρᵢ on the base chart points of `grid` and groups them.
/// Throws DegenerateGrid for fewer than two points.
WarpingGroups groupWarpings(const WarpedMetricSpec& spec, const std::vector<VectorXd>& grid, double tol);

}  // namespace warpimm::warped
