#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warpimm/forms.hpp"
#include "warpimm/jet.hpp"
#include "warpimm/spaceforms.hpp"
#include "warpimm/warped.hpp"

namespace warpimm::immersions {

using spaceforms::SpaceForm;

/// f : (chart ⊂ Rⁿ) → Q_c given by its ambient evaluator.
class NumericalImmersion {
 public:
  NumericalImmersion() = default;
  NumericalImmersion(SmoothMap f, SpaceForm ambient, FdSteps steps = {}, std::string family = "custom");

  int n() const { return map_.inDim(); }
  const SpaceForm& ambient() const { return ambient_; }
  InnerSpace ambientSpace() const { return ambient_.ambient(); }
  const SmoothMap& map() const { return map_; }
  const FdSteps& steps() const { return steps_; }
  const std::string& family() const { return family_; }
  bool hasOracle() const { return map_.hasJetOracle(); }

  VectorXd operator()(const VectorXd& x) const { return map_(x); }
  Jet jet(const VectorXd& x) const { return map_.jet(x, steps_); }
  /// Copy that differentiates by central differences only.
  NumericalImmersion withoutOracle() const;

 private:
  SmoothMap map_;
  SpaceForm ambient_;
  FdSteps steps_;
  std::string family_ = "custom";
};

struct FundamentalForms {
  VectorXd point;
  MatrixXd jacobian;
  MatrixXd gram;
  /// Chart vectors T with Tᵀ·gram·T = I (inverse transpose Cholesky factor).
  MatrixXd tangentChart;
  /// Ambient tangent frame J·T.
  MatrixXd tangentFrame;
  /// Pairing-orthonormal normal frame, orthogonal to the tangent space and,
  /// for c ≠ 0, to the position vector.
  MatrixXd normalFrame;
  int codimension = 0;
  /// Shape operators in chart coordinates: chartOps[r](a,b) = ⟨∂ₐ∂_b f, ν_r⟩.
  std::vector<MatrixXd> chartOps;
  /// α in the orthonormal frames (absent when the codimension is 0).
  std::optional<forms::SymmetricBilinearForm> alpha;

  /// α(X, Y) for chart vectors, as an ambient normal vector.
  VectorXd chartAlpha(const VectorXd& x, const VectorXd& y) const;
};

/// Throws RankDeficientJacobian when the smallest eigenvalue of the Gram
/// matrix is below rankTol times the largest.
FundamentalForms fundamentalForms(const NumericalImmersion& f, const VectorXd& x, double rankTol = 1e-10);

forms::NullityReport pointwiseNullities(const NumericalImmersion& f, const VectorXd& x,
                                        const forms::NullityOptions& opts);

/// Pairing-orthogonal projector onto the normal space of f at a jet.
MatrixXd normalProjector(const SpaceForm& ambient, const Jet& jet);

/// c·⟨(X∧Y)Z, W⟩ + ⟨α(X,W), α(Y,Z)⟩ − ⟨α(X,Z), α(Y,W)⟩ in chart vectors.
double gaussCurvature4(const FundamentalForms& ff, double c, const VectorXd& x, const VectorXd& y,
                       const VectorXd& z, const VectorXd& w);

struct AdaptednessReport {
  /// max |α(∂ₐ, ∂_b)| over coordinates in different blocks.
  double mixed = 0.0;
  /// Pairs (base, warped factor).
  double first = 0.0;
  /// Pairs (warped factor i, warped factor j), i ≠ j.
  double uv = 0.0;
};

/// Mixed second fundamental form residuals for consecutive coordinate blocks
/// of the given sizes (block 0 is the base).
AdaptednessReport adaptedness(const NumericalImmersion& f, const VectorXd& x, const std::vector<int>& dims);

/// f = Ψ ∘ (f₀ × … × f_k).
struct WarpedComposition {
  spaceforms::WarpedRepresentation rep;
  std::vector<NumericalImmersion> factors;
  NumericalImmersion immersion;

  std::vector<int> dims() const;
  int offset(int j) const;
  /// ρᵢ = σᵢ ∘ f₀ on the base chart (jet from f₀'s jet).
  warped::WarpingFunction rho(int i) const;
  /// Warped metric with the pullback factor metrics and ρᵢ.
  warped::WarpedMetricSpec intrinsicMetric() const;
};

/// Each fⱼ maps its chart into the ambient of `rep` and must land on factor j
/// through q; checked at the chart origin and at ±0.05 along each axis.
/// Throws FactorTargetMismatch otherwise.
WarpedComposition composeWarped(const spaceforms::WarpedRepresentation& rep,
                                const std::vector<NumericalImmersion>& factors, double tol = 1e-8);

/// fⱼ = factorChart(j) ∘ gⱼ for maps gⱼ into the chart of factor j.
WarpedComposition composeWarpedCharts(const spaceforms::WarpedRepresentation& rep,
                                      const std::vector<SmoothMap>& chartMaps);

/// max over samples and coordinate pairs of the difference between the fd
/// second fundamental form of the composition and Ψ_*(γ, α^{f₁}, …, α^{f_k})
/// assembled from the factors.
double nolkerAlphaCheck(const WarpedComposition& comp, const std::vector<VectorXd>& samples);

/// g ∘ f for g defined on the flat ambient of f. Throws DomainMismatch when
/// the dimensions disagree or f lies in a curved space form.
NumericalImmersion makeComposition(const NumericalImmersion& f, const SmoothMap& g, const std::string& family = "composition");

/// max |(∇⊥_∂ₐ α)(∂_b,∂_c) − (∇⊥_∂_b α)(∂ₐ,∂_c)| with the derivative of α
/// taken by central differences of step h.
double codazziResidual(const NumericalImmersion& f, const VectorXd& x, double h = 1e-3);

struct DecomposeConfig {
  forms::NullityOptions nullity;
  /// Block-diagonality tolerance on normalised shape operators.
  double adaptTol = 1e-6;
  /// Largest normalised α entry allowed between two coordinate groups.
  double mixedTol = 1e-5;
  /// Proportionality tolerance for warping samples.
  double groupTol = 1e-6;
  /// Relative change of a metric block that counts as warping.
  double warpTol = 1e-8;
  /// Look for a warped structure; false treats the result as a Riemannian product.
  bool warped = true;
  bool skipGate = false;
  /// Slice base point (chart origin by default).
  std::optional<VectorXd> basePoint;
};

struct FactorClaim {
  std::vector<int> coords;
  int codimension = 0;
  std::vector<int> nullities;
  /// ν_s < ℓ − 2s for 1 ≤ s ≤ codimension.
  bool holds = true;
};

struct DecompositionResult {
  /// Finest coordinate groups on which α is adapted at every sample.
  std::vector<std::vector<int>> blocks;
  /// Coordinates of the base factor (empty for a Riemannian product).
  std::vector<int> baseCoords;
  /// Factors after regrouping: for the warped path factor 0 is the base.
  std::vector<std::vector<int>> factors;
  /// Groups of warped blocks with proportional warpings (indices into
  /// warpedBlocks, 1-based) and their homothety factors.
  std::vector<std::vector<int>> warpedBlocks;
  warped::WarpingGroups grouping;
  /// Row j − 1: ρ of warped factor j over the samples, 1 at the base point.
  MatrixXd warpingSamples;
  std::vector<NumericalImmersion> slices;
  std::vector<FactorClaim> claims;
  int codimension = 0;
  /// Codimension of factor 0 is the remainder after the warped factors.
  std::vector<int> factorCodimensions;
  double adaptednessResidual = 0.0;
  VectorXd basePoint;
};

/// Splits an immersion along the adapted structure of its second fundamental
/// form. Throws HypothesisViolated (with the witnessing s and sample) when
/// the nullity gate fails at a sample, and NotAdapted when α mixes
/// coordinate groups that the metric keeps orthogonal.
DecompositionResult decompose(const NumericalImmersion& f, const std::vector<VectorXd>& samples,
                              const DecomposeConfig& config = {});

}  // namespace warpimm::immersions
