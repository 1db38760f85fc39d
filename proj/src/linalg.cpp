#include "warpimm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace warpimm {

double InnerSpace::dot(const VectorXd& a, const VectorXd& b) const {
  double s = a.dot(b);
  if (signature == Signature::Lorentzian) s -= 2.0 * a(0) * b(0);
  return s;
}

MatrixXd InnerSpace::metric() const {
  MatrixXd g = MatrixXd::Identity(dim, dim);
  if (signature == Signature::Lorentzian) g(0, 0) = -1.0;
  return g;
}

MatrixXd InnerSpace::gram(const MatrixXd& cols) const {
  MatrixXd scaled = cols;
  if (signature == Signature::Lorentzian) scaled.row(0) *= -1.0;
  return cols.transpose() * scaled;
}

VectorXd InnerSpace::raise(const VectorXd& covector) const {
  VectorXd v = covector;
  if (signature == Signature::Lorentzian) v(0) = -v(0);
  return v;
}

int numericalRank(const MatrixXd& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++r;
  return r;
}

MatrixXd kernelBasis(const MatrixXd& m, double threshold) {
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

MatrixXd columnSpaceBasis(const MatrixXd& m, double threshold) {
  if (m.cols() == 0) return MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++rank;
  return svd.matrixU().leftCols(rank);
}

double orthonormalityDefect(const MatrixXd& frame) {
  if (frame.cols() == 0) return 0.0;
  MatrixXd d = frame.transpose() * frame - MatrixXd::Identity(frame.cols(), frame.cols());
  return d.cwiseAbs().maxCoeff();
}

MatrixXd orthogonalComplement(const MatrixXd& frame) {
  const Eigen::Index n = frame.rows();
  if (frame.cols() == 0) return MatrixXd::Identity(n, n);
  MatrixXd proj = MatrixXd::Identity(n, n) - frame * frame.transpose();
  return columnSpaceBasis(proj, 0.5);
}

MatrixXd pairingOrthonormalise(const InnerSpace& space, const MatrixXd& fixed,
                               const MatrixXd& candidates, int wanted, double tol) {
  std::vector<VectorXd> basis;
  std::vector<double> signs;
  for (Eigen::Index j = 0; j < fixed.cols(); ++j) {
    basis.push_back(fixed.col(j));
    signs.push_back(space.norm2(fixed.col(j)) < 0 ? -1.0 : 1.0);
  }
  MatrixXd out(candidates.rows(), 0);
  for (Eigen::Index j = 0; j < candidates.cols() && out.cols() < wanted; ++j) {
    VectorXd v = candidates.col(j);
    // two passes for stability
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t b = 0; b < basis.size(); ++b)
        v -= signs[b] * space.dot(v, basis[b]) * basis[b];
    const double nn = space.norm2(v);
    if (std::abs(nn) <= tol * tol) continue;
    v /= std::sqrt(std::abs(nn));
    basis.push_back(v);
    signs.push_back(nn < 0 ? -1.0 : 1.0);
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = v;
  }
  return out;
}

VectorXd randomGaussian(int n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

VectorXd randomUnitVector(int n, Rng& rng) {
  VectorXd v = randomGaussian(n, rng);
  while (v.norm() < 1e-12) v = randomGaussian(n, rng);
  return v.normalized();
}

MatrixXd randomOrthonormalFrame(int rows, int cols, Rng& rng) {
  MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j) g.col(j) = randomGaussian(rows, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(rows, cols);
  // fix the sign ambiguity so the frame is a deterministic function of g
  MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

MatrixXd randomOrthogonal(int n, Rng& rng) { return randomOrthonormalFrame(n, n, rng); }

MatrixXd randomSymmetric(int n, Rng& rng) {
  MatrixXd g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = randomGaussian(n, rng);
  return sym(g);
}

std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over a mixed key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace warpimm
