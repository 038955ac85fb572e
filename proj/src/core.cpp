#include "lasdesign/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace lasdesign {

namespace {

std::string format_coordinate(double v) {
  std::ostringstream os;
  if (v == std::round(v) && std::abs(v) < 1e15) {
    os << static_cast<long long>(std::llround(v));
  } else {
    os.precision(12);
    os << v;
  }
  return os.str();
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Relative clamping threshold for eigenvalues treated as zero.
constexpr double kSingularRelTol = 1e-12;
constexpr double kDetFloor = 1e-300;

}  // namespace

// ---------------------------------------------------------------------------

DesignSpace::DesignSpace(std::vector<DesignPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("design space must contain at least one point");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    points_[i].index = i + 1;
    if (points_[i].label.empty()) points_[i].label = std::to_string(i + 1);
    if (!seen.insert(points_[i].label).second)
      throw std::invalid_argument("duplicate design point label '" + points_[i].label + "'");
    for (double c : points_[i].coords)
      if (!std::isfinite(c))
        throw std::invalid_argument("non-finite coordinate at point " + points_[i].label);
  }
}

DesignSpace DesignSpace::grid(double start, double stop, std::size_t count) {
  if (count == 0) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> xs(count);
  for (std::size_t i = 0; i < count; ++i)
    xs[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  return from_coordinates(xs);
}

DesignSpace DesignSpace::from_coordinates(const std::vector<double>& xs) {
  std::vector<DesignPoint> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back(DesignPoint{0, format_coordinate(x), {x}});
  return DesignSpace(std::move(pts));
}

std::vector<double> DesignSpace::first_coordinates() const {
  std::vector<double> xs;
  xs.reserve(points_.size());
  for (const auto& p : points_) xs.push_back(p.x());
  return xs;
}

std::size_t DesignSpace::find_label(const std::string& label) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].label == label) return i;
  return npos;
}

// ---------------------------------------------------------------------------

ExactDesign::ExactDesign(std::vector<Count> c) : counts(std::move(c)) {
  for (Count v : counts)
    if (v < 0) throw std::invalid_argument("design counts must be non-negative");
}

Count ExactDesign::total() const { return std::accumulate(counts.begin(), counts.end(), Count{0}); }

std::size_t ExactDesign::support_size() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](Count v) { return v > 0; }));
}

std::vector<std::size_t> ExactDesign::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) s.push_back(i);
  return s;
}

// ---------------------------------------------------------------------------

double LinearSparsityConstraint::evaluate(const ExactDesign& design) const {
  double lhs = 0.0;
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design.counts[i] == 0) continue;
    lhs += a[i] * static_cast<double>(design.counts[i]) + c[i];
  }
  return lhs;
}

void LinearSparsityConstraint::validate(std::size_t n) const {
  if (a.size() != n || c.size() != n) {
    std::ostringstream os;
    os << "constraint '" << name << "' has coefficient lengths (" << a.size() << ", " << c.size()
       << "), expected " << n;
    throw std::invalid_argument(os.str());
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(c.begin(), c.end(), finite) || !std::isfinite(b))
    throw std::invalid_argument("constraint '" + name + "' has non-finite coefficients");
  if (all_zero(a) && all_zero(c))
    throw std::invalid_argument("constraint '" + name + "' has all-zero coefficients");
}

std::vector<NormalizedRow> normalize(const std::vector<LinearSparsityConstraint>& constraints) {
  std::vector<NormalizedRow> rows;
  rows.reserve(constraints.size());
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& con = constraints[k];
    rows.push_back(NormalizedRow{con.a, con.c, con.b, k});
    if (con.sense == Sense::Equal) {
      NormalizedRow neg{con.a, con.c, -con.b, k};
      for (auto& v : neg.a) v = -v;
      for (auto& v : neg.c) v = -v;
      rows.push_back(std::move(neg));
    }
  }
  return rows;
}

void LASProblem::validate() const {
  if (!model) throw std::invalid_argument("problem has no information model");
  if (model->point_count() != space.size()) {
    std::ostringstream os;
    os << "model provides " << model->point_count() << " matrices for " << space.size() << " design points";
    throw std::invalid_argument(os.str());
  }
  if (N < 0) throw std::invalid_argument("design size N must be non-negative");
  for (const auto& con : constraints) con.validate(space.size());
}

// ---------------------------------------------------------------------------

Matrix information_matrix(const LASProblem& problem, const ExactDesign& design) {
  if (!problem.model) throw std::invalid_argument("problem has no information model");
  if (design.size() != problem.n()) {
    std::ostringstream os;
    os << "design has " << design.size() << " counts but the design space has " << problem.n() << " points";
    throw std::invalid_argument(os.str());
  }
  const auto m = static_cast<Eigen::Index>(problem.m());
  Matrix M = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < design.size(); ++i)
    if (design.counts[i] != 0) M += static_cast<double>(design.counts[i]) * problem.model->elementary(i);
  return M;
}

Matrix information_matrix(const std::vector<Matrix>& elementary, const std::vector<double>& weights) {
  if (elementary.size() != weights.size()) throw std::invalid_argument("weights and matrices differ in length");
  if (elementary.empty()) return Matrix();
  Matrix M = Matrix::Zero(elementary.front().rows(), elementary.front().cols());
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] != 0.0) M += weights[i] * elementary[i];
  return M;
}

void require_symmetric_psd(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("information matrix must be square");
  if (M.size() == 0) return;
  const double scale = std::max(1.0, M.cwiseAbs().rowwise().sum().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("information matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  if (ev.minCoeff() < -1e-9 * norm) {
    std::ostringstream os;
    os << "information matrix is indefinite (smallest eigenvalue " << ev.minCoeff() << ")";
    throw std::invalid_argument(os.str());
  }
}

double log_det(const Matrix& M) {
  require_symmetric_psd(M);
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double norm = std::abs(ev.maxCoeff());
  if (norm == 0.0) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] <= kSingularRelTol * norm) return -std::numeric_limits<double>::infinity();
    acc += std::log(ev[k]);
  }
  if (acc <= std::log(kDetFloor)) return -std::numeric_limits<double>::infinity();
  return acc;
}

double criterion_d(const Matrix& M) {
  const double ld = log_det(M);
  if (!std::isfinite(ld)) return 0.0;
  return std::exp(ld / static_cast<double>(M.rows()));
}

double d_efficiency(const ExactDesign& w1, const ExactDesign& w2, const LASProblem& problem) {
  const double ref = criterion_d(information_matrix(problem, w2));
  if (ref == 0.0) throw std::domain_error("efficiency undefined: reference design has a singular information matrix");
  return criterion_d(information_matrix(problem, w1)) / ref;
}

// ---------------------------------------------------------------------------

FeasibilityReport check_feasible(const ExactDesign& design, const LASProblem& problem) {
  FeasibilityReport report;
  if (design.size() != problem.n()) {
    report.feasible = false;
    report.length_mismatch = true;
    return report;
  }
  for (Count v : design.counts)
    if (v < 0) report.negative_counts = true;
  report.size_violation = design.total() - problem.N;
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const auto& con = problem.constraints[k];
    const double lhs = con.evaluate(design);
    double slack = con.b - lhs;
    bool ok = slack >= -kFeasibilityTolerance;
    if (con.sense == Sense::Equal) {
      slack = -std::abs(slack);
      ok = slack >= -kFeasibilityTolerance;
    }
    if (!ok) report.violations.push_back(RowViolation{k, con.name, lhs, con.b, slack});
  }
  report.feasible = !report.negative_counts && report.size_violation == 0 && report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------

namespace constraints {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

LinearSparsityConstraint linear(std::vector<double> a, double b, Sense sense, std::string name) {
  std::vector<double> c(a.size(), 0.0);
  return las(std::move(a), std::move(c), b, sense, std::move(name));
}

LinearSparsityConstraint las(std::vector<double> a, std::vector<double> c, double b, Sense sense, std::string name) {
  LinearSparsityConstraint con{std::move(a), std::move(c), b, sense, std::move(name)};
  con.validate(con.a.size());
  return con;
}

LinearSparsityConstraint exclusion(std::vector<double> a, double b, std::string name) {
  require(std::all_of(a.begin(), a.end(), [](double v) { return v >= 0.0; }),
          "exclusion constraint needs non-negative coefficients");
  require(b > 0.0, "exclusion constraint needs a positive right-hand side");
  return linear(std::move(a), b, Sense::LessEqual, std::move(name));
}

LinearSparsityConstraint inclusion(std::vector<double> a, double b, std::string name) {
  require(std::all_of(a.begin(), a.end(), [](double v) { return v <= 0.0; }),
          "inclusion constraint needs non-positive coefficients");
  require(b < 0.0, "inclusion constraint needs a negative right-hand side");
  return linear(std::move(a), b, Sense::LessEqual, std::move(name));
}

LinearSparsityConstraint mixed(std::vector<double> a, double b, Sense sense, std::string name) {
  require(std::any_of(a.begin(), a.end(), [](double v) { return v > 0.0; }) &&
              std::any_of(a.begin(), a.end(), [](double v) { return v < 0.0; }),
          "mixed constraint needs both positive and negative coefficients");
  return linear(std::move(a), b, sense, std::move(name));
}

LinearSparsityConstraint max_support_size(std::size_t n, Count S, Count N) {
  require(S >= 1 && S <= N, "support size bound S must lie in 1..N");
  return las(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), static_cast<double>(S), Sense::LessEqual,
             "max_support_size");
}

LinearSparsityConstraint min_support_size(std::size_t n, Count S, Count N) {
  require(S >= 1 && S <= N, "support size bound S must lie in 1..N");
  require(static_cast<std::size_t>(S) <= n, "support size bound S exceeds the number of design points");
  return las(std::vector<double>(n, 0.0), std::vector<double>(n, -1.0), -static_cast<double>(S), Sense::LessEqual,
             "min_support_size");
}

LinearSparsityConstraint budget(std::vector<double> gamma, std::vector<double> gamma_prime, double B) {
  require(gamma.size() == gamma_prime.size(), "budget cost vectors differ in length");
  require(B > 0.0, "budget must be positive");
  return las(std::move(gamma), std::move(gamma_prime), B, Sense::LessEqual, "budget");
}

std::vector<LinearSparsityConstraint> separation_windows(std::size_t n, std::size_t delta) {
  require(delta >= 2 && delta <= n, "separation window length must lie in 2..n");
  std::vector<LinearSparsityConstraint> rows;
  rows.reserve(n - delta + 1);
  for (std::size_t start = 0; start + delta <= n; ++start) {
    std::vector<double> c(n, 0.0);
    std::fill(c.begin() + static_cast<std::ptrdiff_t>(start), c.begin() + static_cast<std::ptrdiff_t>(start + delta),
              1.0);
    rows.push_back(las(std::vector<double>(n, 0.0), std::move(c), 1.0, Sense::LessEqual,
                       "separation[" + std::to_string(start + 1) + "]"));
  }
  return rows;
}

std::vector<LinearSparsityConstraint> support_replication_bounds(const std::vector<Count>& L,
                                                                 const std::vector<Count>& U, Count N) {
  require(L.size() == U.size(), "replication bound vectors differ in length");
  const std::size_t n = L.size();
  for (std::size_t i = 0; i < n; ++i) {
    require(L[i] >= 0, "replication lower bound must be non-negative");
    require(L[i] <= U[i], "replication lower bound exceeds upper bound at point " + std::to_string(i + 1));
    require(U[i] <= N, "replication upper bound exceeds N at point " + std::to_string(i + 1));
  }
  std::vector<LinearSparsityConstraint> rows;
  rows.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(n, 0.0), c(n, 0.0);
    a[i] = -1.0;
    c[i] = static_cast<double>(L[i]);
    // L_i = 0 leaves -w_i <= 0, which is implied; keep it so the row count is 2n.
    LinearSparsityConstraint con{std::move(a), std::move(c), 0.0, Sense::LessEqual,
                                 "replication_min[" + std::to_string(i + 1) + "]"};
    rows.push_back(std::move(con));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(n, 0.0), c(n, 0.0);
    a[i] = 1.0;
    c[i] = -static_cast<double>(U[i]);
    rows.push_back(LinearSparsityConstraint{std::move(a), std::move(c), 0.0, Sense::LessEqual,
                                            "replication_max[" + std::to_string(i + 1) + "]"});
  }
  return rows;
}

}  // namespace constraints

}  // namespace lasdesign
