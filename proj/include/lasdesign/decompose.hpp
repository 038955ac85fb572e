#ifndef LASDESIGN_DECOMPOSE_HPP
#define LASDESIGN_DECOMPOSE_HPP

#include <vector>

#include "lasdesign/core.hpp"

namespace lasdesign {

/// r vectors f'_1..f'_r with H = sum_j f'_j f'_j^T. Unused slots are zero.
struct RankFactors {
  std::vector<Vector> vectors;

  std::size_t size() const { return vectors.size(); }
  Matrix reconstruct() const;
};

enum class FactorRoute { Eigen, PivotedCholesky };

/// Eigenvalues beyond the r-th may not exceed this fraction of the largest.
inline constexpr double kRankTolerance = 1e-9;
inline constexpr double kCholeskyTolerance = 1e-12;

/// sqrt(lambda_j) u_j for the r largest eigenpairs. Throws std::invalid_argument
/// naming the offending eigenvalue when rank(H) > r.
RankFactors eigen_factors(const Matrix& H, std::size_t r);

/// Greedy diagonal-pivot Cholesky, stopping once the largest remaining
/// diagonal is at most tol times the initial largest diagonal. Throws if more
/// than r pivots are needed.
RankFactors pivoted_cholesky_factors(const Matrix& H, std::size_t r, double tol = kCholeskyTolerance);

RankFactors factorize(const Matrix& H, std::size_t r, FactorRoute route);

/// Factors for every point of `model` at rank bound `r`.
std::vector<RankFactors> factorize_model(const InformationModel& model, std::size_t r, FactorRoute route);

/// |A - B| max-norm, and the infinity norm used for relative tolerances.
double max_abs_difference(const Matrix& A, const Matrix& B);
double inf_norm(const Matrix& A);

}  // namespace lasdesign

#endif  // LASDESIGN_DECOMPOSE_HPP
