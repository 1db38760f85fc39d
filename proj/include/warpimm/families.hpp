#pragma once

#include <cstdint>
#include <vector>

#include "warpimm/immersions.hpp"

namespace warpimm::families {

using immersions::NumericalImmersion;
using immersions::WarpedComposition;

/// Height function h(u) = ½uᵀHu + ⅙Σ tₐuₐ³.
struct GraphTerm {
  MatrixXd hessian;
  VectorXd cubic;
};

/// u ↦ R·(u, h₁(u), …, h_r(u)); R defaults to the identity.
SmoothMap graphMap(int dim, const std::vector<GraphTerm>& terms, const MatrixXd& rotation = {});

/// u ↦ (u, √(R² − |u|²) − R), a chart of the round sphere through the origin.
SmoothMap sphereChartMap(int dim, double radius);

/// u ↦ A·u + b.
SmoothMap affineMap(const MatrixXd& a, const VectorXd& b);

/// Rᴺ → Rᴺ⁺¹ bending the `axis` coordinate around a circle of the given
/// radius: t ↦ R sin(t/R) in place, R(1 − cos(t/R)) appended.
SmoothMap cylinderMap(int dim, int axis, double radius);

/// Rᴺ → Rᴺ⁺ᵉ, u ↦ (u, 0).
SmoothMap inclusionMap(int dim, int extra);

/// Product u = (u₀, …) ↦ (f₀(u₀), …) of Euclidean immersions.
NumericalImmersion productImmersion(const std::vector<SmoothMap>& maps);

/// Product of generic graph hypersurfaces of the given dimensions.
NumericalImmersion graphProduct(const std::vector<int>& dims, std::uint64_t seed);

/// Rotation hypersurface in Rᵈ⁺² with profile radius r(s) = 1 + a₁s + a₂s², as
/// a warped composition over the base curve s ↦ (r(s), s) and the unit
/// d-sphere. d = 1 is a surface of revolution in R³.
WarpedComposition revolutionSurface(double a1, double a2, int sphereDim = 1);

struct SeededWarped {
  WarpedComposition comp;
  /// Chart samples around the origin.
  std::vector<VectorXd> samples;
  /// Codimension of each fⱼ in its factor.
  std::vector<int> factorCodimensions;
};

/// Number of configurations in the seeded table.
int seededWarpedCount();

/// Warped composition number `index` of a fixed table (c ∈ {0, 1, −1},
/// k ≤ 3, n ≤ 9) with random graph factors drawn from `seed`.
SeededWarped seededWarpedComposition(int index, std::uint64_t seed, int sampleCount = 10);

/// Product of two generic graph hypersurfaces of dimension 3 and 4 followed by
/// a cylinder whose curved direction meets both factors: codimension 3 in R¹⁰.
NumericalImmersion compositionCounterexample(std::uint64_t seed);

/// Points uniformly drawn from the cube [−r, r]ⁿ.
std::vector<VectorXd> sampleBox(int dim, int count, double radius, std::uint64_t seed);

}  // namespace warpimm::families
