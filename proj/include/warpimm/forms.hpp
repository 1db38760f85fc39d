#pragma once

#include <cstdint>
#include <vector>

#include "warpimm/linalg.hpp"

namespace warpimm::forms {

/// β: V × V → W stored as p shape operators A¹…Aᵖ (symmetric n×n) in an
/// orthonormal basis of W, so that β(x, y)ₐ = xᵀAᵃy.
class SymmetricBilinearForm {
 public:
  SymmetricBilinearForm() = default;

  /// Validates sizes and symmetry (max |A − Aᵀ| ≤ symTol) and stores the
  /// symmetrised operators. Rejects p = 0.
  static SymmetricBilinearForm make(const std::vector<MatrixXd>& ops, double symTol = 1e-12);

  int n() const { return n_; }
  int p() const { return static_cast<int>(ops_.size()); }
  double symTol() const { return symTol_; }
  const std::vector<MatrixXd>& ops() const { return ops_; }
  const MatrixXd& op(int a) const { return ops_[static_cast<std::size_t>(a)]; }

  VectorXd evaluate(const VectorXd& x, const VectorXd& y) const;
  /// A_u = Σ uₐ Aᵃ.
  MatrixXd shapeOperator(const VectorXd& u) const;
  /// B_x : y ↦ β(x, y) restricted to the columns of `domain`, as a p × dim matrix.
  MatrixXd partialMap(const VectorXd& x, const MatrixXd& domain) const;
  /// Largest spectral norm among the shape operators; 0 for the zero form.
  double scale() const { return scale_; }

  /// Same form after the domain change of basis x ↦ Qx (Aᵃ ↦ QᵀAᵃQ).
  SymmetricBilinearForm conjugated(const MatrixXd& q) const;
  /// Same form with W re-expressed through an orthogonal mix: A'ᵃ = Σ_b O_ab Aᵇ.
  SymmetricBilinearForm mixed(const MatrixXd& o) const;

 private:
  int n_ = 0;
  double symTol_ = 0.0;
  double scale_ = 0.0;
  std::vector<MatrixXd> ops_;
};

/// R(x,y,z,w) = ⟨β(x,w), β(y,z)⟩ − ⟨β(x,z), β(y,w)⟩.
double gaussTensor(const SymmetricBilinearForm& beta, const VectorXd& x, const VectorXd& y,
                   const VectorXd& z, const VectorXd& w);

/// Threshold below which a singular value of a stack of shape operators counts
/// as zero: rankTol × max(σ_max(stack), β.scale()).
double rankThreshold(const SymmetricBilinearForm& beta, double stackMax, double rankTol);

/// dim ∩_j ker A_{u_j} for the orthonormal frame U (p × s).
int nullityAtSubspace(const SymmetricBilinearForm& beta, const MatrixXd& frame,
                      double rankTol = 1e-9);

/// Dimension of the common kernel of all shape operators (ν_p).
int commonKernelDim(const SymmetricBilinearForm& beta, double rankTol = 1e-9);

enum class NullityMode { Search, ExactSmall };

struct NullityOptions {
  NullityMode mode = NullityMode::Search;
  double rankTol = 1e-9;
  /// Multistart count for the continuous search.
  int starts = 16;
  /// Iteration cap per start of the alternating descent.
  int maxIters = 600;
  /// Angular resolution for the grid sweep; 0 picks 720 (p = 2) or 90 (p = 3).
  int gridRes = 0;
  std::uint64_t seed = 0x5eed;
};

struct SNullityResult {
  int value = 0;
  MatrixXd witness;  // p × s orthonormal frame achieving `value`
  bool certified = false;
};

/// ν_s = max over s-planes U ⊂ W of dim ∩_{u∈U} ker A_u.
SNullityResult sNullity(const SymmetricBilinearForm& beta, int s, const NullityOptions& opts);

struct NullityReport {
  int n = 0;
  int p = 0;
  std::vector<int> values;          // ν₁ … ν_p
  std::vector<MatrixXd> witnesses;  // U^s per s
  std::vector<bool> certified;
  bool codimensionOk = false;       // 2p < n
  bool hypothesisOk = false;        // 2p < n and ν_s < n − 2s ∀s
  /// Smallest s with ν_s ≥ n − 2s, or 0.
  int firstViolatingS = 0;
};

NullityReport nullityProfile(const SymmetricBilinearForm& beta, const NullityOptions& opts);

struct GridSweepResult {
  int value = 0;
  MatrixXd witness;
  int evaluations = 0;
};

/// Deterministic sweep of Gr(s, p) for p ≤ 3 on an angular grid, with a
/// pattern search around grid minima of the sums of squared small singular values.
/// Every reported value is achieved by the returned witness.
GridSweepResult grassmannGridSweep(const SymmetricBilinearForm& beta, int s, int resolution,
                                   double rankTol = 1e-9);

}  // namespace warpimm::forms
