#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warpimm/forms.hpp"

namespace warpimm::splitting {

using forms::NullityOptions;
using forms::NullityReport;
using forms::SymmetricBilinearForm;

/// Ordered orthogonal decomposition V = V₀ ⊕ … ⊕ V_k, each block an n × dᵢ
/// orthonormal column frame.
class OrthogonalSplitting {
 public:
  OrthogonalSplitting() = default;
  /// Checks orthonormality within tol, mutual orthogonality and Σdᵢ = n.
  static OrthogonalSplitting make(std::vector<MatrixXd> blocks, double tol = 1e-9);
  /// Coordinate splitting of R^n into consecutive runs of the given sizes.
  static OrthogonalSplitting coordinate(const std::vector<int>& dims);

  int n() const { return n_; }
  int blockCount() const { return static_cast<int>(blocks_.size()); }
  const MatrixXd& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  const std::vector<MatrixXd>& blocks() const { return blocks_; }
  std::vector<int> dims() const;
  /// All block frames side by side (an orthogonal n × n matrix).
  MatrixXd basis() const;
  /// Two-block grouping (Vᵢ, ⊕_{j≠i} Vⱼ).
  OrthogonalSplitting grouped(int i) const;
  /// Orthogonal projector onto block i.
  MatrixXd projector(int i) const;

 private:
  int n_ = 0;
  std::vector<MatrixXd> blocks_;
};

struct MixedSpan {
  int dim = 0;
  MatrixXd basis;  // p × dim, orthonormal
  /// Spectral norm of the matrix of mixed values β(e_a, f_b).
  double sNorm = 0.0;
  /// p × (d₁·d₂) matrix whose columns are the mixed values.
  MatrixXd values;
};

MixedSpan mixedSpan(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split,
                    double rankTol = 1e-9);

/// max |R| over basis tuples of the three patterns R(x,y,z,u), R(x,y,u,v),
/// R(x,u,v,w) with x,y,z ∈ V₁ and u,v,w ∈ V₂.
double curvatureConditions(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split);

struct MaxRankResult {
  VectorXd x;  // ambient n-vector in V₁
  int rank = 0;
  /// Index of the winning trial; basis vectors come first.
  int trial = 0;
};

/// Among the basis vectors of V₁ and `trials` seeded random unit vectors in
/// V₁, the first direction maximising rank B_x : V₂ → W.
MaxRankResult maxRankDirection(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split,
                               int trials, std::uint64_t seed, double rankTol = 1e-9);

struct ProofSteps {
  MatrixXd kernelD;  // n × dim D, ambient frame of D = ker B_x ⊂ V₂
  MatrixXd frameE;   // n × ℓ, complement of D in V₂
  /// max over basis y ∈ V₁ of ‖B_y restricted to D‖.
  double stepOneResidual = 0.0;
  /// max over basis pairs (u,v) of V₂ of the component of
  /// β(u,v) − Σ⟨u,eᵢ⟩⟨v,eⱼ⟩β(eᵢ,eⱼ) along the mixed values.
  double stepTwoResidual = 0.0;
  /// max |⟨B_x eⱼ, B_y v⟩| over v ∈ D, y ∈ V₁.
  double zeroResidual = 0.0;
};

struct LemmaConfig {
  NullityOptions nullity;
  double curvatureTol = 1e-8;
  double sTol = 1e-6;
  int trials = 32;
  std::uint64_t seed = 0x5eed;
  /// Re-run the nullity gate exactly (p ≤ 3) when an apparent violation shows up.
  bool recertify = true;
};

/// Hypothesis gate result: 2p < n and every ν_s < n − 2s.
struct Gate {
  NullityReport nullity;
  bool ok = false;
};

Gate hypothesisGate(const SymmetricBilinearForm& beta, const NullityOptions& opts);

/// Steps of the constructive argument for the chosen max-rank x. Throws
/// HypothesisFailed unless the nullity gate and curvature conditions hold.
ProofSteps verifyProofSteps(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split,
                            const VectorXd& x, double tol, const LemmaConfig& config = {});

/// Steps without re-checking the hypotheses.
ProofSteps proofSteps(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split,
                      const VectorXd& x, double rankTol);

enum class Verdict { Holds, HypothesisFails, Violated };
std::string verdictName(Verdict v);

struct LemmaReport {
  NullityReport nullity;
  bool hypothesisOk = false;
  double curvatureResidual = 0.0;
  int sDim = 0;
  double sNorm = 0.0;
  VectorXd maxRankDirection;
  int maxRank = 0;
  bool stepsComputed = false;
  ProofSteps steps;
  Verdict verdict = Verdict::HypothesisFails;
  /// Set when an apparent violation was traced to a missed nullity witness
  /// (the mixed span itself, or the exact grid).
  bool gateCorrected = false;
};

LemmaReport lemmaVerify(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split,
                        const LemmaConfig& config = {});

/// k-block splits: one report per grouping (Vᵢ, rest).
std::vector<LemmaReport> lemmaVerifyBlocks(const SymmetricBilinearForm& beta,
                                           const OrthogonalSplitting& split, const LemmaConfig& config = {});

/// max |off-block entry| of the normalised shape operators in the split basis.
double offBlockResidual(const SymmetricBilinearForm& beta, const OrthogonalSplitting& split);

/// Finest orthogonal splitting in which every normalised shape operator is
/// block diagonal within tol.
OrthogonalSplitting detectAdaptedSplitting(const SymmetricBilinearForm& beta, double tol = 1e-8,
                                           int draws = 3, std::uint64_t seed = 0x5eed);

struct FalsifyConfig {
  int trials = 1000;
  std::uint64_t seed = 0x5eed;
  int jobs = 1;
  LemmaConfig lemma;
  /// Multistart budget of the cheap gate used on every trial.
  int gateStarts = 6;
  int gateIters = 200;
  /// Add composition-type forms (rank-one mixed normal) to the stream.
  bool includeCompositions = true;
};

struct FalsifyReport {
  int n = 0;
  int p = 0;
  int trials = 0;
  int projectionFailed = 0;   // curvature conditions not reached
  int gateRejected = 0;       // hypothesis fails
  int tested = 0;             // gate and curvature conditions pass
  int violations = 0;
  int gateCorrected = 0;
  int compositions = 0;
  int compositionsFlagged = 0;
  int nearBoundary = 0;       // some ν_s = n − 2s − 1 among tested
  int nontrivialMixedStart = 0;
  double maxSNorm = 0.0;
  double maxCurvatureResidual = 0.0;
  double maxStepOne = 0.0;
  double maxStepTwo = 0.0;
  double maxZero = 0.0;
  std::vector<std::uint64_t> violationSeeds;
  /// Per-family tallies: family name → {trials, tested}.
  std::vector<std::pair<std::string, std::pair<int, int>>> families;
};

FalsifyReport falsify(int n, int p, const FalsifyConfig& config);

/// Project a form onto the curvature-condition set by Levenberg–Marquardt on
/// the mixed entries (those coupling V₁ and V₂, in the split basis). Returns
/// the final residual.
double projectOntoCurvatureConditions(SymmetricBilinearForm& beta, const OrthogonalSplitting& split,
                                      int maxIters = 40, double target = 1e-13);

}  // namespace warpimm::splitting
