#ifndef LASDESIGN_REDUCE_HPP
#define LASDESIGN_REDUCE_HPP

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lasdesign/core.hpp"
#include "lasdesign/decompose.hpp"

namespace lasdesign {

/// Point of the auxiliary space: replica (x_i, j) or label z_i.
struct AuxPoint {
  enum class Kind { Replica, Label };
  Kind kind = Kind::Replica;
  std::size_t point = 0;    // 0-based position of x_i
  std::size_t replica = 0;  // 0-based j; 0 for labels
  std::string name;
};

enum class AuxRowKind { ReplicaEquality, LabelBound, LinkLower, LinkUpper, Las };

std::string to_string(AuxRowKind kind);
AuxRowKind aux_row_kind_from_string(const std::string& s);

using SparseTerms = std::vector<std::pair<std::size_t, double>>;

struct AuxRow {
  AuxRowKind kind = AuxRowKind::Las;
  Sense sense = Sense::LessEqual;
  SparseTerms terms;  // (aux point index, coefficient), ascending index
  double rhs = 0.0;

  friend bool operator==(const AuxRow&, const AuxRow&) = default;
};

/// Univariate-response, purely linearly constrained problem over
/// n' = n r + n auxiliary points.
struct AuxiliaryProblem {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  Count N = 0;
  std::vector<AuxPoint> points;
  std::vector<Vector> regressors;  // one per aux point; zero for labels
  std::vector<AuxRow> rows;        // structural rows then mapped LAS rows
  AuxRow size_row;                 // sum_i w'(x_i,1) = N
  std::shared_ptr<const LASProblem> origin;  // null for problems read from file

  std::size_t aux_size() const { return points.size(); }
  std::size_t replica_index(std::size_t i, std::size_t j) const { return i * r + j; }
  std::size_t label_index(std::size_t i) const { return n * r + i; }

  /// Structural equality; ignores `origin`. Regressors compared exactly.
  bool same_structure(const AuxiliaryProblem& other) const;
};

struct AuxiliaryDesign {
  std::vector<Count> counts;  // over aux points
};

/// Compiles `problem` into the auxiliary problem. Factors come from the
/// model's elementary matrices at rank bound model->rank_bound().
AuxiliaryProblem build_auxiliary(std::shared_ptr<const LASProblem> problem, FactorRoute route = FactorRoute::Eigen);
/// As above with externally supplied factors (one RankFactors per point, all
/// of the same length r).
AuxiliaryProblem build_auxiliary(std::shared_ptr<const LASProblem> problem, const std::vector<RankFactors>& factors);

/// Checks every auxiliary row and the size row. Counts must be non-negative.
bool aux_feasible(const AuxiliaryDesign& w, const AuxiliaryProblem& aux);

/// Primary design w(x_i) = w'(x_i, 1). Throws std::invalid_argument if `w`
/// is infeasible for `aux`.
ExactDesign kappa(const AuxiliaryDesign& w, const AuxiliaryProblem& aux);

/// Replicas take w(x_i), labels take sgn(w(x_i)). Throws
/// std::invalid_argument if `w` is infeasible for the source problem.
AuxiliaryDesign lift(const ExactDesign& w, const AuxiliaryProblem& aux);

/// Phi_D of sum over aux points of count * f' f'^T.
double aux_objective(const AuxiliaryDesign& w, const AuxiliaryProblem& aux);
Matrix aux_information(const AuxiliaryDesign& w, const AuxiliaryProblem& aux);

/// Visits every feasible auxiliary design. The replica-1 counts range over
/// compositions of N, every other variable over its full implied domain
/// ([0, N] for replicas, {0, 1} for labels). Throws std::length_error if
/// the candidate count exceeds `cap`.
void for_each_aux_feasible(const AuxiliaryProblem& aux, const std::function<void(const AuxiliaryDesign&)>& visit,
                           double cap = 1e8);

// ---------------------------------------------------------------------------
// Portable text format (see docs/formats.md).

void write_auxiliary(std::ostream& os, const AuxiliaryProblem& aux);
void write_auxiliary(const std::string& path, const AuxiliaryProblem& aux);
/// Throws std::runtime_error with a line number on malformed input.
AuxiliaryProblem read_auxiliary(std::istream& is);
AuxiliaryProblem read_auxiliary_file(const std::string& path);

}  // namespace lasdesign

#endif  // LASDESIGN_REDUCE_HPP
