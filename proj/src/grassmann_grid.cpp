#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "warpimm/errors.hpp"
#include "warpimm/forms.hpp"

namespace warpimm::forms {

namespace {

constexpr double kPi = std::numbers::pi;

// Point of Gr(s, p), p ≤ 3, from one or two angles.
MatrixXd frameAt(int p, int s, double theta, double phi) {
  if (p == 2) {
    MatrixXd u(2, 1);
    u << std::cos(theta), std::sin(theta);
    return u;
  }
  VectorXd l(3);
  l << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  if (s == 1) return l;
  // ℓ^⊥ through the spherical coordinate tangent vectors
  MatrixXd u(3, 2);
  u.col(0) << std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta);
  u.col(1) << -std::sin(phi), std::cos(phi), 0.0;
  return u;
}

// Ascending singular values of the stacked operators of `frame`.
VectorXd stackSingularValues(const SymmetricBilinearForm& beta, const MatrixXd& frame) {
  const int n = beta.n();
  if (frame.cols() == 1) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(beta.shapeOperator(frame.col(0)), Eigen::EigenvaluesOnly);
    VectorXd sv = es.eigenvalues().cwiseAbs();
    std::sort(sv.data(), sv.data() + sv.size());
    return sv;
  }
  MatrixXd stack(n * frame.cols(), n);
  for (Eigen::Index j = 0; j < frame.cols(); ++j) stack.block(j * n, 0, n, n) = beta.shapeOperator(frame.col(j));
  Eigen::JacobiSVD<MatrixXd> svd(stack);
  VectorXd sv = svd.singularValues();
  std::reverse(sv.data(), sv.data() + sv.size());
  return sv;
}

// Pattern search on a sub-grid centred at the current best point: move when
// a sample improves, halve the box when the centre wins. Tolerates the kinks
// where eigenvalues cross.
void zoomMin(const std::function<double(double, double)>& f, bool twoD, double t0, double p0, double wt, double wp,
             int& evaluations, double& tBest, double& pBest) {
  const int m = twoD ? 3 : 8;
  tBest = t0;
  pBest = p0;
  double best = f(tBest, pBest);
  for (int halvings = 0, moves = 0; halvings < 40 && moves < 400;) {
    double bt = tBest, bp = pBest;
    const double centre = best;
    for (int i = -m; i <= m; ++i)
      for (int j = twoD ? -m : 0; j <= (twoD ? m : 0); ++j) {
        if (i == 0 && j == 0) continue;
        const double t = tBest + wt * i / m, ph = pBest + wp * j / m;
        const double v = f(t, ph);
        ++evaluations;
        if (v < best) {
          best = v;
          bt = t;
          bp = ph;
        }
      }
    if (best < centre) {
      tBest = bt;
      pBest = bp;
      ++moves;
    } else {
      wt *= 0.5;
      wp *= 0.5;
      ++halvings;
    }
  }
}

}  // namespace

GridSweepResult grassmannGridSweep(const SymmetricBilinearForm& beta, int s, int resolution, double rankTol) {
  const int n = beta.n();
  const int p = beta.p();
  if (p > 3) fail(ErrorKind::PTooLarge, "grid sweep is only available for p <= 3", {{"p", p}});
  if (s < 1 || s > p) fail(ErrorKind::SOutOfRange, "s must satisfy 1 <= s <= p", {{"s", s}, {"p", p}});
  if (resolution < 1) fail(ErrorKind::BudgetZero, "grid resolution must be positive");

  GridSweepResult res;
  if (s == p || beta.scale() == 0.0) {
    res.witness = MatrixXd::Identity(p, s);
    res.value = nullityAtSubspace(beta, res.witness, rankTol);
    res.evaluations = 1;
    return res;
  }

  // p = 2: θ ∈ [0, π). p = 3: θ ∈ [0, π/2] × φ ∈ [0, 2π) covers the projective plane.
  const bool twoD = (p == 3);
  const int nt = resolution;
  const int np = twoD ? resolution : 1;
  const double dt = twoD ? 0.5 * kPi / std::max(1, nt - 1) : kPi / nt;
  const double dp = 2.0 * kPi / np;
  auto thetaAt = [&](int i) { return i * dt; };
  auto phiAt = [&](int j) { return j * dp; };

  std::vector<VectorXd> grid(static_cast<std::size_t>(nt * np));
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      grid[static_cast<std::size_t>(i * np + j)] = stackSingularValues(beta, frameAt(p, s, thetaAt(i), phiAt(j)));
      ++res.evaluations;
    }

  auto tryFrame = [&](const MatrixXd& frame) {
    const int v = nullityAtSubspace(beta, frame, rankTol);
    if (v > res.value || res.witness.size() == 0) {
      res.value = v;
      res.witness = frame;
    }
    return v;
  };

  // grid points already at the highest numerical nullity
  {
    int bestIdx = 0;
    int bestCount = -1;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      const VectorXd& sv = grid[idx];
      const double thr = rankThreshold(beta, sv(sv.size() - 1), rankTol);
      int cnt = 0;
      while (cnt < sv.size() && sv(cnt) <= thr) ++cnt;
      if (cnt > bestCount) {
        bestCount = cnt;
        bestIdx = static_cast<int>(idx);
      }
    }
    tryFrame(frameAt(p, s, thetaAt(bestIdx / np), phiAt(bestIdx % np)));
  }

  const int maxCandidates = 8;
  // Largest k first: g_k for the top nullity has an isolated zero at its witness,
  // while smaller k have valleys along the lower strata.
  for (int k = n; k > res.value; --k) {
    auto gk = [&](const VectorXd& sv) { return sv.head(k).squaredNorm(); };
    // local minima of g_k over the grid neighbourhoods
    std::vector<std::pair<double, int>> minima;
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < np; ++j) {
        const double v = gk(grid[static_cast<std::size_t>(i * np + j)]);
        bool isMin = true;
        for (int di = -1; di <= 1 && isMin; ++di)
          for (int dj = -1; dj <= 1 && isMin; ++dj) {
            if (di == 0 && dj == 0) continue;
            int ii = i + di, jj = j + dj;
            if (!twoD) {
              if (dj != 0) continue;
              ii = (ii + nt) % nt;
              jj = 0;
            } else {
              if (ii < 0 || ii >= nt) continue;
              jj = (jj + np) % np;
            }
            if (gk(grid[static_cast<std::size_t>(ii * np + jj)]) < v) isMin = false;
          }
        if (isMin) minima.emplace_back(v, i * np + j);
      }
    std::stable_sort(minima.begin(), minima.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (minima.size() > static_cast<std::size_t>(maxCandidates)) minima.resize(static_cast<std::size_t>(maxCandidates));

    bool raised = false;
    for (const auto& [val, idx] : minima) {
      const double t0 = thetaAt(idx / np);
      const double p0 = phiAt(idx % np);
      auto objective = [&](double t, double ph) { return gk(stackSingularValues(beta, frameAt(p, s, t, ph))); };
      double tBest = t0, pBest = p0;
      zoomMin(objective, twoD, t0, p0, 2 * dt, twoD ? 2 * dp : 0.0, res.evaluations, tBest, pBest);
      if (tryFrame(frameAt(p, s, tBest, pBest)) >= k) {
        raised = true;
        break;
      }
    }
    if (raised) break;
  }
  return res;
}

}  // namespace warpimm::forms
