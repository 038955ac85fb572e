#ifndef LASDESIGN_SOLVER_HPP
#define LASDESIGN_SOLVER_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lasdesign/core.hpp"
#include "lasdesign/lp.hpp"
#include "lasdesign/reduce.hpp"

namespace lasdesign {

/// The auxiliary problem after replica aliasing: variables w_0..w_{n-1}
/// (counts) followed by s_0..s_{n-1} (support indicators).
struct CompiledProblem {
  std::size_t n = 0;
  std::size_t m = 0;
  Count N = 0;
  std::vector<Matrix> H;            // sum_j f'(x_i,j) f'(x_i,j)^T
  std::vector<LpRow> rows;          // linking, LAS and size rows over the 2n variables
  std::vector<NormalizedRow> las;   // LAS rows in primary (a, c, b) form
  std::vector<bool> indicator_used; // s_i has a nonzero coefficient in some LAS row
  std::vector<Count> count_upper;   // implied by the size and linking rows
  std::vector<Count> label_upper;   // from the label bound rows
  std::shared_ptr<const LASProblem> origin;

  std::size_t num_vars() const { return 2 * n; }
};

/// Collapses replicas (x_i, 2..r) onto (x_i, 1) and folds single-variable
/// rows into bounds. Throws std::invalid_argument on unexpected structure.
CompiledProblem presolve(const AuxiliaryProblem& aux);

/// Integer box for a branch-and-bound node.
struct Box {
  std::vector<Count> w_lo, w_hi;
  std::vector<Count> s_lo, s_hi;

  static Box root(const CompiledProblem& p);
  bool empty() const;
  /// Propagates s_i = 0 => w_i = 0, s_i = 1 => w_i >= 1 and the converse.
  void tighten();
  bool contains(const ExactDesign& w) const;
};

struct RelaxationOptions {
  std::size_t iteration_cap = 5000;
  double gap_tolerance = 1e-7;  // relative to 1 + |log det|
  PricingRule pricing = PricingRule::Dantzig;
};

struct RelaxationResult {
  bool feasible = false;
  /// All points of the polytope give singular information; the bound is 0.
  bool singular = false;
  std::vector<double> w;
  std::vector<double> s;
  double log_det = 0.0;  // at (w, s)
  double phi = 0.0;
  double fw_gap = 0.0;
  double bound_log_det = 0.0;  // valid upper bound on max log det
  double bound_phi = 0.0;      // exp(bound_log_det / m), or 0 when singular
  std::size_t iterations = 0;
  std::size_t lp_pivots = 0;
};

/// Maximizes log det M(w) over the polytope of `problem` intersected with
/// `box` by pairwise conditional-gradient steps with an LP oracle.
RelaxationResult solve_relaxation(const CompiledProblem& problem, const Box& box,
                                  const RelaxationOptions& options = {});

/// Largest-remainder apportionment of the relaxed counts to N, then greedy
/// repair moves until the design is feasible within `box`, then greedy
/// improving exchanges. Returns nullopt instead of an infeasible design.
std::optional<ExactDesign> rounding_incumbent(const RelaxationResult& relaxation, const CompiledProblem& problem,
                                              const Box& box, std::size_t pass_budget = 200);

/// Primary feasibility (size, LAS rows with s = sgn(w), box).
bool compiled_feasible(const ExactDesign& w, const CompiledProblem& problem, const Box* box = nullptr);
double compiled_phi(const ExactDesign& w, const CompiledProblem& problem);

// ---------------------------------------------------------------------------

enum class SolveStatus { Optimal, GapLimit, NodeLimit, TimeLimit, Infeasible };
std::string to_string(SolveStatus status);

/// Gap treated as proven optimality.
inline constexpr double kOptimalGap = 1e-6;

struct SolverOptions {
  double relative_gap = kOptimalGap;
  double absolute_gap = 1e-10;  // in Phi units; lets gap-0 runs prune ties
  double integrality_tolerance = 1e-6;
  std::uint64_t node_limit = 0;  // 0 = unlimited
  double time_limit = 0.0;       // seconds; 0 = unlimited
  bool deterministic = true;
  unsigned threads = 1;
  RelaxationOptions relaxation;
  std::size_t rounding_passes = 200;
  bool record_trace = false;
};

struct NodeTrace {
  std::uint64_t id = 0;
  std::uint64_t parent = 0;
  std::size_t depth = 0;
  double bound = 0.0;
  Box box;
};

struct IncumbentEvent {
  std::uint64_t node = 0;
  double phi = 0.0;
};

struct SolverResult {
  SolveStatus status = SolveStatus::Infeasible;
  ExactDesign design;  // primary coordinates
  double phi = 0.0;
  double bound = 0.0;  // global upper bound on Phi
  double gap = 0.0;    // (bound - phi) / phi, or infinity
  double root_bound = 0.0;
  std::uint64_t nodes = 0;
  double seconds = 0.0;
  std::vector<ExactDesign> ties;  // brute force only: every optimal design
  std::vector<IncumbentEvent> incumbents;
  std::vector<NodeTrace> trace;   // processing order when record_trace is set
  bool has_design() const { return status != SolveStatus::Infeasible && design.size() > 0; }
};

/// Best-first branch and bound on the presolved auxiliary problem. The
/// result is mapped back through kappa.
SolverResult branch_and_bound(const AuxiliaryProblem& aux, const SolverOptions& options = {});

struct BruteForceOptions {
  double cap = 1e7;  // maximum number of size-N compositions
  double tie_tolerance = 1e-12;
};

/// Exhaustive enumeration of size-N designs. Throws std::length_error with
/// the size estimate when the space exceeds the cap.
SolverResult brute_force(const LASProblem& problem, const BruteForceOptions& options = {});
/// Same over a (possibly re-read) auxiliary problem, enumerating its feasible set.
SolverResult brute_force(const AuxiliaryProblem& aux, const BruteForceOptions& options = {});

/// Number of compositions of N into n non-negative parts (as a double).
double composition_count(std::size_t n, Count N);

/// Reduction + branch and bound + feasibility certification against the
/// source problem.
SolverResult solve(std::shared_ptr<const LASProblem> problem, const SolverOptions& options = {},
                   FactorRoute route = FactorRoute::Eigen);

}  // namespace lasdesign

#endif  // LASDESIGN_SOLVER_HPP
