#include "warpimm/harness/oracles.hpp"

#include "warpimm/errors.hpp"

namespace warpimm::harness {

forms::GridSweepResult oracleGrassmannGrid(const forms::SymmetricBilinearForm& beta, int s, int resolution,
                                           double rankTol) {
  if (beta.p() > 3) fail(ErrorKind::PTooLarge, "the grid oracle handles p <= 3", {{"p", beta.p()}});
  if (s < 1 || s > beta.p()) fail(ErrorKind::SOutOfRange, "s must lie in 1..p", {{"s", s}, {"p", beta.p()}});
  if (s == beta.p()) {
    forms::GridSweepResult r;
    r.witness = MatrixXd::Identity(beta.p(), beta.p());
    r.value = forms::commonKernelDim(beta, rankTol);
    r.evaluations = 1;
    return r;
  }
  return forms::grassmannGridSweep(beta, s, resolution, rankTol);
}

std::vector<MatrixXd> fdChristoffel(const MetricField& g, const VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  std::vector<MatrixXd> dg;
  for (Eigen::Index a = 0; a < n; ++a) {
    VectorXd xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    dg.push_back((g(xp) - g(xm)) / (2.0 * h));
  }
  const MatrixXd ginv = g(x).inverse();
  std::vector<MatrixXd> gamma(static_cast<std::size_t>(n), MatrixXd::Zero(n, n));
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        double v = 0.0;
        for (Eigen::Index e = 0; e < n; ++e)
          v += ginv(c, e) * (dg[static_cast<std::size_t>(a)](e, b) + dg[static_cast<std::size_t>(b)](e, a) -
                             dg[static_cast<std::size_t>(e)](a, b));
        gamma[static_cast<std::size_t>(c)](a, b) = 0.5 * v;
      }
  return gamma;
}

std::vector<MatrixXd> fdRiemannOperators(const MetricField& g, const VectorXd& x, double h, double h2) {
  const Eigen::Index n = x.size();
  const auto un = static_cast<std::size_t>(n);
  const std::vector<MatrixXd> gamma = fdChristoffel(g, x, h);
  std::vector<std::vector<MatrixXd>> dgamma;  // [a][c](b,e)
  for (Eigen::Index a = 0; a < n; ++a) {
    VectorXd xp = x, xm = x;
    xp(a) += h2;
    xm(a) -= h2;
    const auto gp = fdChristoffel(g, xp, h), gm = fdChristoffel(g, xm, h);
    std::vector<MatrixXd> d;
    for (std::size_t c = 0; c < un; ++c) d.push_back((gp[c] - gm[c]) / (2.0 * h2));
    dgamma.push_back(d);
  }
  std::vector<MatrixXd> ops(un * un, MatrixXd::Zero(n, n));
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
          double v = dgamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)](b, c) -
                     dgamma[static_cast<std::size_t>(b)][static_cast<std::size_t>(r)](a, c);
          for (Eigen::Index e = 0; e < n; ++e)
            v += gamma[static_cast<std::size_t>(e)](b, c) * gamma[static_cast<std::size_t>(r)](a, e) -
                 gamma[static_cast<std::size_t>(e)](a, c) * gamma[static_cast<std::size_t>(r)](b, e);
          ops[static_cast<std::size_t>(a * n + b)](r, c) = v;
        }
  return ops;
}

int gramDeterminantRank(const MatrixXd& cols, double tol) {
  std::vector<Eigen::Index> kept;
  double det = 1.0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double n2 = cols.col(j).squaredNorm();
    if (n2 == 0.0) continue;
    MatrixXd sel(cols.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
    for (std::size_t i = 0; i < kept.size(); ++i) sel.col(static_cast<Eigen::Index>(i)) = cols.col(kept[i]);
    sel.col(sel.cols() - 1) = cols.col(j);
    const double d = (sel.transpose() * sel).determinant();
    if (d > tol * det * n2) {
      kept.push_back(j);
      det = d;
    }
  }
  return static_cast<int>(kept.size());
}

}  // namespace warpimm::harness
