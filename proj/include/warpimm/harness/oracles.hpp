#pragma once

#include <functional>
#include <vector>

#include "warpimm/forms.hpp"

namespace warpimm::harness {

/// Exhaustive angular sweep of Gr(s, p), p ≤ 3; s = p goes through the
/// common kernel. Throws PTooLarge for p > 3.
forms::GridSweepResult oracleGrassmannGrid(const forms::SymmetricBilinearForm& beta, int s, int resolution,
                                           double rankTol = 1e-9);

using MetricField = std::function<MatrixXd(const VectorXd&)>;

/// Γ[c](a,b) from central differences of the metric with step h.
std::vector<MatrixXd> fdChristoffel(const MetricField& g, const VectorXd& x, double h = 1e-4);

/// R(∂ₐ,∂_b) operators (entry a·n + b) from central differences of
/// fdChristoffel with step h2.
std::vector<MatrixXd> fdRiemannOperators(const MetricField& g, const VectorXd& x, double h = 1e-4,
                                         double h2 = 1e-3);

/// Rank of the column set by greedy Gram-determinant growth: a column is
/// kept when det Gram(kept ∪ {col}) > tol · det Gram(kept) · |col|².
int gramDeterminantRank(const MatrixXd& cols, double tol = 1e-12);

}  // namespace warpimm::harness
