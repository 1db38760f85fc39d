#pragma once

#include <optional>
#include <vector>

#include "json.hpp"
#include "warpimm/jet.hpp"
#include "warpimm/linalg.hpp"

namespace warpimm::spaceforms {

/// Q_c^m: R^m for c = 0, the quadric ⟨p,p⟩ = 1/c in R^{m+1} otherwise
/// (Lorentzian, upper sheet p₀ > 0, when c < 0).
struct SpaceForm {
  double c = 0.0;
  int m = 1;

  int ambientDim() const { return c == 0.0 ? m : m + 1; }
  InnerSpace ambient() const {
    return {ambientDim(), c < 0.0 ? Signature::Lorentzian : Signature::Euclidean};
  }
  /// |⟨p,p⟩ − 1/c| (0 for c = 0).
  double quadricResidual(const VectorXd& p) const;
};

struct FactorSpec {
  int dim = 1;
  /// Mean curvature vector at q (warped factors only).
  std::optional<VectorXd> z;
  /// Ambient frame of the factor's tangent space at q; derived when absent.
  std::optional<MatrixXd> frame;
};

/// Warped product representation Ψ of Q_c through q: factor 0 is totally
/// geodesic, factor i ≥ 1 is the umbilical sphere through q with tangent
/// space Eᵢ and mean curvature vector zᵢ.
class WarpedRepresentation {
 public:
  static WarpedRepresentation make(double c, const VectorXd& q, const std::vector<FactorSpec>& factors,
                                   double tol = 1e-9);

  double c() const { return c_; }
  const VectorXd& q() const { return q_; }
  int k() const { return static_cast<int>(dims_.size()) - 1; }
  int m() const;
  const std::vector<int>& dims() const { return dims_; }
  /// Offset of factor j in product chart coordinates.
  int offset(int j) const;
  SpaceForm space() const { return {c_, m()}; }
  InnerSpace ambient() const { return space().ambient(); }
  const MatrixXd& frame(int j) const { return frames_[static_cast<std::size_t>(j)]; }
  /// zᵢ for i ≥ 1 (zero vector for i = 0).
  const VectorXd& z(int i) const { return z_[static_cast<std::size_t>(i)]; }
  /// aᵢ = c·q − zᵢ for i ≥ 1; a₀ = c·q.
  const VectorXd& a(int i) const { return a_[static_cast<std::size_t>(i)]; }
  /// Curvature of factor j: κⱼ = ⟨aⱼ, aⱼ⟩ (κ₀ = c).
  double factorCurvature(int j) const { return kappa_[static_cast<std::size_t>(j)]; }

  /// σᵢ(p₀); throws NonpositiveWarping when ≤ 0.
  double sigma(int i, const VectorXd& p0) const;
  /// σᵢ without the domain check.
  template <class T>
  T sigmaRaw(int i, const std::vector<T>& p0) const;

  /// Ψ(p₀, p₁, …, p_k) on ambient points; checks the quadric for c ≠ 0.
  VectorXd psi(const VectorXd& p0, const std::vector<VectorXd>& ps) const;
  /// Ψ with the first slot frozen (c ≠ 0 only).
  VectorXd fixedBaseEmbedding(const VectorXd& pbar, const std::vector<VectorXd>& ps) const;

  /// Exponential chart of factor j: v ↦ point of the factor through q.
  template <class T>
  std::vector<T> factorPoint(int j, const T* v) const;
  VectorXd factorPoint(int j, const VectorXd& v) const;
  SmoothMap factorChart(int j) const;
  /// Metric of factor j in its exponential chart.
  MatrixXd chartMetric(int j, const VectorXd& v) const;
  /// Ψ ∘ (chart₀ × … × chart_k) on product chart coordinates.
  SmoothMap psiMap() const;
  /// Ψ on stacked ambient points (p₀, p₁, …, p_k).
  SmoothMap psiAmbientMap() const;

  /// Residual of p lying on factor j through q: the component of p − q outside
  /// span(Eⱼ, aⱼ), the sphere equation κ|p−q|² + 2⟨p−q, aⱼ⟩ and, for c ≠ 0,
  /// the quadric.
  double factorResidual(int j, const VectorXd& p) const;
  /// Ambient basis (pairing-orthonormal) of the tangent space of factor j at p.
  MatrixXd factorTangentBasis(int j, const VectorXd& p) const;

  nlohmann::json toJson() const;
  static WarpedRepresentation fromJson(const nlohmann::json& doc, double tol = 1e-9);

 private:
  double c_ = 0.0;
  VectorXd q_;
  std::vector<int> dims_;
  std::vector<MatrixXd> frames_;
  std::vector<VectorXd> z_;
  std::vector<VectorXd> a_;
  std::vector<double> kappa_;
};

struct PullbackCheck {
  MatrixXd gram;
  MatrixXd expected;
  double offBlockMax = 0.0;
  double inBlockRelErr = 0.0;
  /// max |G(h) − G(h/2)|, a Richardson-style consistency gauge.
  double richardsonGap = 0.0;
};

/// Central-difference pullback of the ambient pairing under Ψ∘charts at
/// product chart coordinates x, compared with blockdiag(g₀, σᵢ²gᵢ).
PullbackCheck pullbackMetric(const WarpedRepresentation& rep, const VectorXd& x, double h = 1e-4);

// ---- template definitions ----

template <class T>
T WarpedRepresentation::sigmaRaw(int i, const std::vector<T>& p0) const {
  const InnerSpace amb = ambient();
  const VectorXd& ai = a(i);
  T s = T(c_ == 0.0 ? 1.0 : 0.0);
  for (int r = 0; r < amb.dim; ++r) {
    double w = ai(r);
    if (amb.signature == Signature::Lorentzian && r == 0) w = -w;
    if (w == 0.0) continue;
    if (c_ == 0.0)
      s = s + (p0[static_cast<std::size_t>(r)] - T(q_(r))) * T(w);
    else
      s = s + p0[static_cast<std::size_t>(r)] * T(w);
  }
  return s;
}

template <class T>
std::vector<T> WarpedRepresentation::factorPoint(int j, const T* v) const {
  const int d = dims_[static_cast<std::size_t>(j)];
  const int amb = static_cast<int>(q_.size());
  const MatrixXd& e = frames_[static_cast<std::size_t>(j)];
  const double kappa = kappa_[static_cast<std::size_t>(j)];
  const VectorXd& aj = a_[static_cast<std::size_t>(j)];
  T r2 = T(0.0);
  for (int i = 0; i < d; ++i) r2 = r2 + v[i] * v[i];
  const T u = r2 * T(kappa);
  const T s = sincSqrt(u);
  const T cc = versSqrt(u) * r2;
  std::vector<T> out(static_cast<std::size_t>(amb));
  for (int r = 0; r < amb; ++r) {
    T lin = T(0.0);
    for (int i = 0; i < d; ++i)
      if (e(r, i) != 0.0) lin = lin + v[i] * T(e(r, i));
    out[static_cast<std::size_t>(r)] = T(q_(r)) + s * lin - cc * T(aj(r));
  }
  return out;
}

}  // namespace warpimm::spaceforms
