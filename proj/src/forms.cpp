#include "warpimm/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpimm/errors.hpp"

namespace warpimm::forms {

SymmetricBilinearForm SymmetricBilinearForm::make(const std::vector<MatrixXd>& ops, double symTol) {
  if (ops.empty()) fail(ErrorKind::DegenerateForm, "a form needs at least one shape operator (p >= 1)");
  if (!(symTol >= 0.0)) fail(ErrorKind::InvalidArgument, "symTol must be nonnegative");
  const Eigen::Index n = ops.front().rows();
  if (n < 1) fail(ErrorKind::DimensionMismatch, "shape operators must be at least 1x1");
  SymmetricBilinearForm f;
  f.n_ = static_cast<int>(n);
  f.symTol_ = symTol;
  for (std::size_t a = 0; a < ops.size(); ++a) {
    const MatrixXd& m = ops[a];
    if (m.rows() != n || m.cols() != n)
      fail(ErrorKind::DimensionMismatch, "shape operators must all be square of the same size",
           {{"index", a}, {"rows", m.rows()}, {"cols", m.cols()}, {"n", n}});
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > symTol)
      fail(ErrorKind::AsymmetryExceedsTol, "shape operator is not symmetric within symTol",
           {{"index", a}, {"asymmetry", asym}, {"symTol", symTol}});
    f.ops_.push_back(sym(m));
  }
  for (const auto& m : f.ops_) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    f.scale_ = std::max(f.scale_, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return f;
}

VectorXd SymmetricBilinearForm::evaluate(const VectorXd& x, const VectorXd& y) const {
  if (x.size() != n_ || y.size() != n_)
    fail(ErrorKind::DimensionMismatch, "evaluate: vectors must have length n",
         {{"n", n_}, {"x", x.size()}, {"y", y.size()}});
  VectorXd r(p());
  for (int a = 0; a < p(); ++a) r(a) = x.dot(op(a) * y);
  return r;
}

MatrixXd SymmetricBilinearForm::shapeOperator(const VectorXd& u) const {
  if (u.size() != p()) fail(ErrorKind::DimensionMismatch, "shapeOperator: normal vector must have length p");
  MatrixXd a = MatrixXd::Zero(n_, n_);
  for (int i = 0; i < p(); ++i)
    if (u(i) != 0.0) a += u(i) * op(i);
  return a;
}

MatrixXd SymmetricBilinearForm::partialMap(const VectorXd& x, const MatrixXd& domain) const {
  if (x.size() != n_ || domain.rows() != n_)
    fail(ErrorKind::DimensionMismatch, "partialMap: vector or domain frame has wrong length");
  MatrixXd b(p(), domain.cols());
  for (int a = 0; a < p(); ++a) b.row(a) = (op(a) * x).transpose() * domain;
  return b;
}

SymmetricBilinearForm SymmetricBilinearForm::conjugated(const MatrixXd& q) const {
  std::vector<MatrixXd> out;
  for (const auto& m : ops_) out.push_back(q.transpose() * m * q);
  return make(out, std::max(symTol_, 1e-12));
}

SymmetricBilinearForm SymmetricBilinearForm::mixed(const MatrixXd& o) const {
  std::vector<MatrixXd> out;
  for (int a = 0; a < p(); ++a) {
    MatrixXd m = MatrixXd::Zero(n_, n_);
    for (int b = 0; b < p(); ++b) m += o(a, b) * op(b);
    out.push_back(m);
  }
  return make(out, std::max(symTol_, 1e-12));
}

double gaussTensor(const SymmetricBilinearForm& beta, const VectorXd& x, const VectorXd& y,
                   const VectorXd& z, const VectorXd& w) {
  if (z.size() != beta.n() || w.size() != beta.n())
    fail(ErrorKind::DimensionMismatch, "gaussTensor: vectors must have length n");
  return beta.evaluate(x, w).dot(beta.evaluate(y, z)) - beta.evaluate(x, z).dot(beta.evaluate(y, w));
}

double rankThreshold(const SymmetricBilinearForm& beta, double stackMax, double rankTol) {
  return rankTol * std::max(stackMax, beta.scale());
}

namespace {

MatrixXd stackOperators(const SymmetricBilinearForm& beta, const MatrixXd& frame) {
  const int n = beta.n();
  MatrixXd stack(n * frame.cols(), n);
  for (Eigen::Index j = 0; j < frame.cols(); ++j)
    stack.block(j * n, 0, n, n) = beta.shapeOperator(frame.col(j));
  return stack;
}

int nullityOfStack(const SymmetricBilinearForm& beta, const MatrixXd& stack, double rankTol) {
  if (beta.scale() == 0.0) return beta.n();
  Eigen::JacobiSVD<MatrixXd> svd(stack);
  const auto& sv = svd.singularValues();
  const double thr = rankThreshold(beta, sv.size() ? sv(0) : 0.0, rankTol);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++rank;
  return beta.n() - rank;
}

}  // namespace

int nullityAtSubspace(const SymmetricBilinearForm& beta, const MatrixXd& frame, double rankTol) {
  if (frame.rows() != beta.p())
    fail(ErrorKind::DimensionMismatch, "nullityAtSubspace: frame must have p rows",
         {{"p", beta.p()}, {"rows", frame.rows()}});
  if (frame.cols() < 1 || frame.cols() > beta.p())
    fail(ErrorKind::SOutOfRange, "nullityAtSubspace: frame must have 1..p columns");
  const double defect = orthonormalityDefect(frame);
  if (defect > std::max(rankTol, 1e-10))
    fail(ErrorKind::FrameNotOrthonormal, "frame is not orthonormal within rankTol",
         {{"defect", defect}});
  return nullityOfStack(beta, stackOperators(beta, frame), rankTol);
}

int commonKernelDim(const SymmetricBilinearForm& beta, double rankTol) {
  return nullityAtSubspace(beta, MatrixXd::Identity(beta.p(), beta.p()), rankTol);
}

namespace {

// Smallest-k eigenpairs of a symmetric matrix (ascending).
void smallestEigen(const MatrixXd& m, int k, MatrixXd& vecs, double& sum) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  vecs = es.eigenvectors().leftCols(k);
  sum = std::max(0.0, es.eigenvalues().head(k).sum());
}

struct DescentOutcome {
  MatrixXd frame;
  MatrixXd kernel;
  double objective = std::numeric_limits<double>::infinity();
};

MatrixXd thinQ(const MatrixXd& m) {
  Eigen::HouseholderQR<MatrixXd> qr(m);
  return qr.householderQ() * MatrixXd::Identity(m.rows(), m.cols());
}

// Block-coordinate descent on Φ(U, X) = Σ_j ‖A_{u_j} X‖²_F over orthonormal
// U (p × s) and X (n × k). Each half-step is an exact minimisation, so Φ is
// nonincreasing; Φ = 0 exactly when the s-plane U has nullity ≥ k.
DescentOutcome alternatingDescent(const SymmetricBilinearForm& beta, int s, int k, Rng& rng,
                                  int maxIters, double target) {
  const int n = beta.n();
  const int p = beta.p();
  MatrixXd u = randomOrthonormalFrame(p, s, rng);
  MatrixXd x;
  double obj = std::numeric_limits<double>::infinity();
  double checkpoint = obj;
  std::vector<MatrixXd> ax(static_cast<std::size_t>(p));
  for (int it = 0; it < maxIters; ++it) {
    MatrixXd h = MatrixXd::Zero(n, n);
    for (int j = 0; j < s; ++j) {
      MatrixXd a = beta.shapeOperator(u.col(j));
      h.noalias() += a * a;
    }
    double objX = 0.0;
    smallestEigen(h, k, x, objX);

    for (int a = 0; a < p; ++a) ax[static_cast<std::size_t>(a)] = beta.op(a) * x;
    MatrixXd g(p, p);
    for (int a = 0; a < p; ++a)
      for (int b = a; b < p; ++b) {
        const double v = (ax[static_cast<std::size_t>(a)].array() * ax[static_cast<std::size_t>(b)].array()).sum();
        g(a, b) = v;
        g(b, a) = v;
      }
    smallestEigen(g, s, u, obj);
    if (obj <= target) break;
    if (it % 25 == 24) {
      // stagnation: less than 1% progress over the last window
      if (obj > 0.99 * checkpoint) break;
      checkpoint = obj;
    }
  }
  return {u, x, obj};
}

VectorXd residualOf(const SymmetricBilinearForm& beta, const MatrixXd& u, const MatrixXd& x) {
  const int n = beta.n();
  const Eigen::Index s = u.cols(), k = x.cols();
  VectorXd r(n * s * k);
  for (Eigen::Index j = 0; j < s; ++j) {
    MatrixXd a = beta.shapeOperator(u.col(j)) * x;
    for (Eigen::Index i = 0; i < k; ++i) r.segment((j * k + i) * n, n) = a.col(i);
  }
  return r;
}

// Gauss–Newton on the bilinear system A_{u_j} x_i = 0 with U and X moved
// along their orthogonal complements. Converges quadratically onto the
// solution manifold from the basin the descent delivers.
void gaussNewtonPolish(const SymmetricBilinearForm& beta, DescentOutcome& d, int iters) {
  const int n = beta.n();
  MatrixXd u = d.frame, x = d.kernel;
  const Eigen::Index s = u.cols(), k = x.cols();
  if (k >= n) return;
  VectorXd r = residualOf(beta, u, x);
  double rn = r.squaredNorm();
  for (int it = 0; it < iters && rn > 0.0; ++it) {
    MatrixXd uPerp = orthogonalComplement(u);
    MatrixXd xPerp = orthogonalComplement(x);
    const Eigen::Index nu = uPerp.cols() * s, nx = xPerp.cols() * k;
    MatrixXd jac = MatrixXd::Zero(r.size(), nu + nx);
    Eigen::Index col = 0;
    for (Eigen::Index c = 0; c < s; ++c)
      for (Eigen::Index rr = 0; rr < uPerp.cols(); ++rr, ++col) {
        MatrixXd a = beta.shapeOperator(uPerp.col(rr)) * x;
        for (Eigen::Index i = 0; i < k; ++i) jac.block((c * k + i) * n, col, n, 1) = a.col(i);
      }
    for (Eigen::Index c = 0; c < k; ++c)
      for (Eigen::Index rr = 0; rr < xPerp.cols(); ++rr, ++col)
        for (Eigen::Index j = 0; j < s; ++j)
          jac.block((j * k + c) * n, col, n, 1) = beta.shapeOperator(u.col(j)) * xPerp.col(rr);
    Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    VectorXd step = -svd.solve(r);
    bool improved = false;
    for (double t = 1.0; t > 1e-3; t *= 0.5) {
      MatrixXd a = Eigen::Map<const MatrixXd>(step.data(), uPerp.cols(), s);
      MatrixXd b = Eigen::Map<const MatrixXd>(step.data() + nu, xPerp.cols(), k);
      MatrixXd u2 = thinQ(u + t * uPerp * a);
      MatrixXd x2 = thinQ(x + t * xPerp * b);
      VectorXd r2 = residualOf(beta, u2, x2);
      const double rn2 = r2.squaredNorm();
      if (rn2 < rn) {
        u = u2;
        x = x2;
        r = r2;
        improved = true;
        rn = rn2;
        break;
      }
    }
    if (!improved) break;
  }
  d.frame = u;
  d.kernel = x;
  d.objective = rn;
}

}  // namespace

SNullityResult sNullity(const SymmetricBilinearForm& beta, int s, const NullityOptions& opts) {
  const int n = beta.n();
  const int p = beta.p();
  if (s < 1 || s > p) fail(ErrorKind::SOutOfRange, "s must satisfy 1 <= s <= p", {{"s", s}, {"p", p}});
  SNullityResult res;
  if (s == p) {
    res.witness = MatrixXd::Identity(p, p);
    res.value = commonKernelDim(beta, opts.rankTol);
    res.certified = true;
    return res;
  }
  if (beta.scale() == 0.0) {
    res.witness = MatrixXd::Identity(p, s);
    res.value = n;
    res.certified = true;
    return res;
  }
  if (opts.mode == NullityMode::ExactSmall && p > 3)
    fail(ErrorKind::PTooLarge, "exact s-nullity is only available for p <= 3", {{"p", p}});
  if (opts.starts <= 0 || opts.maxIters <= 0)
    fail(ErrorKind::BudgetZero, "search budget must be positive",
         {{"starts", opts.starts}, {"maxIters", opts.maxIters}});
  if (opts.gridRes < 0) fail(ErrorKind::BudgetZero, "grid resolution must be positive");

  Rng rng0(deriveSeed(opts.seed, 0));
  res.witness = randomOrthonormalFrame(p, s, rng0);
  res.value = nullityAtSubspace(beta, res.witness, opts.rankTol);

  const double target = std::pow(0.01 * opts.rankTol * beta.scale(), 2);
  for (int k = res.value + 1; k <= n; k = res.value + 1) {
    bool found = false;
    for (int start = 0; start < opts.starts && !found; ++start) {
      Rng rng(deriveSeed(opts.seed, static_cast<std::uint64_t>(k) * 100003ULL + static_cast<std::uint64_t>(start) + 1));
      DescentOutcome d = alternatingDescent(beta, s, k, rng, opts.maxIters, target * k);
      if (d.objective <= 1e-3 * k * beta.scale() * beta.scale()) gaussNewtonPolish(beta, d, 12);
      const int nu = nullityAtSubspace(beta, d.frame, opts.rankTol);
      if (nu > res.value) {
        res.value = nu;
        res.witness = d.frame;
        found = true;
      }
    }
    if (!found) break;
  }
  res.certified = (res.value == n);

  if (opts.mode == NullityMode::ExactSmall) {
    const int resolution = opts.gridRes > 0 ? opts.gridRes : (p == 2 ? 720 : 90);
    GridSweepResult g = grassmannGridSweep(beta, s, resolution, opts.rankTol);
    if (g.value > res.value) {
      res.value = g.value;
      res.witness = g.witness;
    }
    res.certified = true;
  }
  return res;
}

NullityReport nullityProfile(const SymmetricBilinearForm& beta, const NullityOptions& opts) {
  NullityReport r;
  r.n = beta.n();
  r.p = beta.p();
  r.codimensionOk = 2 * r.p < r.n;
  bool all = true;
  for (int s = 1; s <= r.p; ++s) {
    NullityOptions o = opts;
    o.seed = deriveSeed(opts.seed, static_cast<std::uint64_t>(1000 + s));
    SNullityResult sr = sNullity(beta, s, o);
    r.values.push_back(sr.value);
    r.witnesses.push_back(sr.witness);
    r.certified.push_back(sr.certified);
    if (sr.value >= r.n - 2 * s) {
      all = false;
      if (r.firstViolatingS == 0) r.firstViolatingS = s;
    }
  }
  r.hypothesisOk = r.codimensionOk && all;
  return r;
}

}  // namespace warpimm::forms
