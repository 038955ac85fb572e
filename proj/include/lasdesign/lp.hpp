#ifndef LASDESIGN_LP_HPP
#define LASDESIGN_LP_HPP

#include <cstddef>
#include <limits>
#include <vector>

#include "lasdesign/core.hpp"
#include "lasdesign/reduce.hpp"

namespace lasdesign {

struct LpRow {
  SparseTerms terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// Rows over `num_vars` variables with finite bounds lower <= x <= upper.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class LpStatus { Optimal, Infeasible };

/// Entering-variable choice. Bland always takes the lowest eligible index;
/// Dantzig takes the largest reduced cost and falls back to Bland during
/// runs of degenerate pivots.
enum class PricingRule { Bland, Dantzig };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Minimal total artificial value from phase 1; positive iff infeasible.
  double infeasibility = 0.0;
  /// Phase-1 row multipliers when infeasible: y^T (A x) over the box can
  /// never reach y^T b.
  std::vector<double> certificate;
  std::size_t pivots = 0;
};

/// Bounded-variable primal simplex on a dense tableau. Phase 1 runs at
/// construction; maximize() then re-optimizes from the last basis, so a
/// sequence of objectives over the same polytope is cheap.
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LinearProgram& lp, PricingRule rule = PricingRule::Dantzig);

  bool feasible() const { return feasible_; }
  const LpSolution& phase_one() const { return phase_one_; }

  /// Maximizes objective^T x. The objective has num_vars entries.
  /// Throws std::runtime_error on numerical breakdown.
  LpSolution maximize(const std::vector<double>& objective);

  std::size_t total_pivots() const { return total_pivots_; }

 private:
  enum class At : unsigned char { Lower, Upper, Basic };

  void build(const LinearProgram& lp);
  void refactor();
  void compute_reduced_costs();
  // Returns false when the iteration limit is hit.
  bool iterate(std::size_t max_pivots);
  void pivot(std::size_t row, std::size_t col);
  std::vector<double> primal() const;
  double value_of(std::size_t col) const;
  std::vector<double> row_multipliers() const;

  PricingRule rule_;
  std::size_t nrows_ = 0;
  std::size_t nstruct_ = 0;
  std::size_t ncols_ = 0;
  Matrix A_;        // original constraint matrix incl. slack and artificial columns
  Vector b_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T_;  // B^-1 A
  Vector beta_;     // basic values
  std::vector<double> lo_, hi_;
  std::vector<At> state_;
  std::vector<std::size_t> basis_;  // basic column per row
  std::vector<double> cost_;        // current objective over all columns
  Vector d_;                        // reduced costs
  std::vector<bool> artificial_;
  bool feasible_ = false;
  LpSolution phase_one_;
  std::size_t pivots_since_refactor_ = 0;
  std::size_t total_pivots_ = 0;
};

/// One-shot convenience wrapper.
LpSolution solve_lp(const LinearProgram& lp, const std::vector<double>& objective,
                    PricingRule rule = PricingRule::Dantzig);

}  // namespace lasdesign

#endif  // LASDESIGN_LP_HPP
