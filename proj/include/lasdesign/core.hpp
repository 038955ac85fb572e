#ifndef LASDESIGN_CORE_HPP
#define LASDESIGN_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lasdesign {

using Count = std::int64_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A candidate design point. `index` is 1-based and matches the point's
/// position in its DesignSpace.
struct DesignPoint {
  std::size_t index = 0;
  std::string label;
  std::vector<double> coords;

  /// First coordinate; doses are one-dimensional.
  double x() const { return coords.empty() ? 0.0 : coords.front(); }
};

/// Ordered finite set of candidate points x_1..x_n.
class DesignSpace {
 public:
  DesignSpace() = default;
  /// Indices of `points` are reassigned 1..n in the given order. Throws
  /// std::invalid_argument on an empty list or duplicate labels.
  explicit DesignSpace(std::vector<DesignPoint> points);

  /// n equidistant one-dimensional points from `start` to `stop`, labelled by
  /// their coordinate ("0", "1", ... for integer grids).
  static DesignSpace grid(double start, double stop, std::size_t count);
  static DesignSpace from_coordinates(const std::vector<double>& xs);

  std::size_t size() const { return points_.size(); }
  const DesignPoint& point(std::size_t pos) const { return points_.at(pos); }
  const std::vector<DesignPoint>& points() const { return points_; }
  std::vector<double> first_coordinates() const;
  /// 0-based position of the point carrying `label`, or npos.
  std::size_t find_label(const std::string& label) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<DesignPoint> points_;
};

/// Integer replication counts w(x_i), one per design point.
struct ExactDesign {
  std::vector<Count> counts;

  ExactDesign() = default;
  explicit ExactDesign(std::vector<Count> c);
  static ExactDesign zeros(std::size_t n) { return ExactDesign(std::vector<Count>(n, 0)); }

  std::size_t size() const { return counts.size(); }
  Count total() const;
  bool supported(std::size_t pos) const { return counts[pos] > 0; }
  std::size_t support_size() const;
  /// 0-based positions with a positive count, ascending.
  std::vector<std::size_t> support() const;

  friend bool operator==(const ExactDesign&, const ExactDesign&) = default;
};

enum class Sense { LessEqual, Equal };

/// sum_i a_i w_i + sum_i c_i s_i  (<= or =)  b
struct LinearSparsityConstraint {
  std::vector<double> a;
  std::vector<double> c;
  double b = 0.0;
  Sense sense = Sense::LessEqual;
  std::string name;

  /// Left-hand side at `design`, using s_i = [w_i > 0].
  double evaluate(const ExactDesign& design) const;
  /// Throws std::invalid_argument when coefficients are non-finite, both
  /// vectors are zero, or the lengths differ from n.
  void validate(std::size_t n) const;
};

/// A row of the normalized (<= only) constraint system. `source` is the index
/// of the user-level constraint it came from.
struct NormalizedRow {
  std::vector<double> a;
  std::vector<double> c;
  double b = 0.0;
  std::size_t source = 0;
};

/// Splits equalities into two <= rows; size equality is not part of this list.
std::vector<NormalizedRow> normalize(const std::vector<LinearSparsityConstraint>& constraints);

/// Source of the elementary information matrices H(x_i) for one design space.
class InformationModel {
 public:
  virtual ~InformationModel() = default;
  /// Parameter dimension m.
  virtual std::size_t dimension() const = 0;
  virtual std::size_t point_count() const = 0;
  /// Upper bound r on rank(H(x_i)).
  virtual std::size_t rank_bound() const = 0;
  virtual Matrix elementary(std::size_t pos) const = 0;
  virtual std::string tag() const = 0;
};

enum class Criterion { D };

struct LASProblem {
  DesignSpace space;
  std::shared_ptr<const InformationModel> model;
  std::vector<LinearSparsityConstraint> constraints;
  Count N = 0;
  Criterion criterion = Criterion::D;
  std::string name;

  std::size_t n() const { return space.size(); }
  std::size_t m() const { return model ? model->dimension() : 0; }
  /// Checks every constraint length, the model's point count and N >= 0.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Criterion evaluation

/// Sum_i counts[i] * H(x_i). Throws std::invalid_argument on length mismatch.
Matrix information_matrix(const LASProblem& problem, const ExactDesign& design);
Matrix information_matrix(const std::vector<Matrix>& elementary, const std::vector<double>& weights);

/// Throws std::invalid_argument unless M is square, symmetric to
/// 1e-12 * max(1, |M|_inf) and has no eigenvalue below -1e-9 * |M|.
void require_symmetric_psd(const Matrix& M);

/// (det M)^(1/m); exactly 0 for singular M.
double criterion_d(const Matrix& M);

/// log det M, or -infinity for singular M. Same clamping rule as criterion_d.
double log_det(const Matrix& M);

/// Phi_D(M(w1)) / Phi_D(M(w2)). Throws std::domain_error if M(w2) is singular.
double d_efficiency(const ExactDesign& w1, const ExactDesign& w2, const LASProblem& problem);

// ---------------------------------------------------------------------------
// Feasibility

inline constexpr double kFeasibilityTolerance = 1e-9;

struct RowViolation {
  std::size_t constraint = 0;  // index into LASProblem::constraints
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs; negative when violated (equalities: -|lhs - rhs|)
};

struct FeasibilityReport {
  bool feasible = true;
  Count size_violation = 0;  // total - N
  bool negative_counts = false;
  bool length_mismatch = false;
  std::vector<RowViolation> violations;  // ascending constraint index
};

FeasibilityReport check_feasible(const ExactDesign& design, const LASProblem& problem);
inline bool is_feasible(const ExactDesign& design, const LASProblem& problem) {
  return check_feasible(design, problem).feasible;
}

// ---------------------------------------------------------------------------
// Constraint builders. All return rows already in <= form.

namespace constraints {

/// General linear row on counts only.
LinearSparsityConstraint linear(std::vector<double> a, double b, Sense sense = Sense::LessEqual,
                                std::string name = "linear");
/// General LAS row.
LinearSparsityConstraint las(std::vector<double> a, std::vector<double> c, double b,
                             Sense sense = Sense::LessEqual, std::string name = "las");
/// Resource limit: a >= 0, b > 0.
LinearSparsityConstraint exclusion(std::vector<double> a, double b, std::string name = "exclusion");
/// Forced trials: a <= 0, b < 0.
LinearSparsityConstraint inclusion(std::vector<double> a, double b, std::string name = "inclusion");
/// Balance row: needs at least one positive and one negative coefficient.
LinearSparsityConstraint mixed(std::vector<double> a, double b, Sense sense = Sense::LessEqual,
                               std::string name = "mixed");

LinearSparsityConstraint max_support_size(std::size_t n, Count S, Count N);
LinearSparsityConstraint min_support_size(std::size_t n, Count S, Count N);
/// Per-trial costs gamma, per-support-point overhead gamma_prime, budget B.
LinearSparsityConstraint budget(std::vector<double> gamma, std::vector<double> gamma_prime, double B);
/// One row per run of `delta` consecutive points: at most one support point
/// in each. Produces n - delta + 1 rows.
std::vector<LinearSparsityConstraint> separation_windows(std::size_t n, std::size_t delta);
/// w_i = 0 or L_i <= w_i <= U_i. Rows -w_i + L_i s_i <= 0 for every i, then
/// w_i - U_i s_i <= 0 for every i.
std::vector<LinearSparsityConstraint> support_replication_bounds(const std::vector<Count>& L,
                                                                 const std::vector<Count>& U, Count N);

}  // namespace constraints

}  // namespace lasdesign

#endif  // LASDESIGN_CORE_HPP
