#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace warpimm {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class Signature { Euclidean, Lorentzian };

/// Flat real inner-product space. Lorentzian carries a single minus sign on
/// coordinate 0.
struct InnerSpace {
  int dim = 1;
  Signature signature = Signature::Euclidean;

  double dot(const VectorXd& a, const VectorXd& b) const;
  double norm2(const VectorXd& a) const { return dot(a, a); }
  /// Diagonal matrix of the pairing.
  MatrixXd metric() const;
  /// Gram matrix of the columns of `cols` under the pairing.
  MatrixXd gram(const MatrixXd& cols) const;
  /// Raise an index: the vector v with dot(v, w) = covector(w).
  VectorXd raise(const VectorXd& covector) const;
};

/// Number of singular values strictly above `threshold`.
int numericalRank(const MatrixXd& m, double threshold);

/// Orthonormal basis (columns) of the kernel of `m`: right singular vectors
/// whose singular value is at most `threshold`.
MatrixXd kernelBasis(const MatrixXd& m, double threshold);

/// Orthonormal basis of the column space, singular values above `threshold`.
MatrixXd columnSpaceBasis(const MatrixXd& m, double threshold);

/// max |FᵀF − I|.
double orthonormalityDefect(const MatrixXd& frame);

/// Orthonormal columns spanning the Euclidean orthogonal complement of the
/// column span of an orthonormal `frame`.
MatrixXd orthogonalComplement(const MatrixXd& frame);

/// Gram–Schmidt against `space`'s pairing. Columns of `candidates` are
/// processed in order; each is orthogonalised against `fixed` (which must be
/// pairing-orthonormal up to sign) and the accepted ones, and kept when the
/// remaining norm exceeds `tol`. Stops after `wanted` vectors.
MatrixXd pairingOrthonormalise(const InnerSpace& space, const MatrixXd& fixed,
                               const MatrixXd& candidates, int wanted, double tol);

MatrixXd randomOrthonormalFrame(int rows, int cols, Rng& rng);
MatrixXd randomOrthogonal(int n, Rng& rng);
MatrixXd randomSymmetric(int n, Rng& rng);
VectorXd randomUnitVector(int n, Rng& rng);
VectorXd randomGaussian(int n, Rng& rng);

/// Independent stream seed for item `stream` under master `seed`.
std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream);

/// Symmetric part.
inline MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace warpimm
