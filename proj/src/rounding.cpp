#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lasdesign/solver.hpp"

namespace lasdesign {

namespace {

// Dense copy of the rows (size row excluded) for fast incremental updates.
struct DenseRows {
  std::size_t n = 0;
  std::vector<std::vector<double>> a, c;
  std::vector<double> b;
  std::vector<bool> equality;

  explicit DenseRows(const CompiledProblem& p) : n(p.n) {
    const std::size_t k = p.rows.empty() ? 0 : p.rows.size() - 1;
    for (std::size_t r = 0; r < k; ++r) {
      const auto& row = p.rows[r];
      std::vector<double> ar(n, 0.0), cr(n, 0.0);
      for (const auto& [j, v] : row.terms) (j < n ? ar[j] : cr[j - n]) += v;
      a.push_back(std::move(ar));
      c.push_back(std::move(cr));
      b.push_back(row.rhs);
      equality.push_back(row.sense == Sense::Equal);
    }
  }

  std::size_t size() const { return b.size(); }

  std::vector<double> lhs(const std::vector<Count>& w) const {
    std::vector<double> out(size(), 0.0);
    for (std::size_t r = 0; r < size(); ++r)
      for (std::size_t i = 0; i < n; ++i)
        out[r] += a[r][i] * static_cast<double>(w[i]) + (w[i] > 0 ? c[r][i] : 0.0);
    return out;
  }

  double row_violation(std::size_t r, double value) const {
    const double scale = kFeasibilityTolerance;
    const double d = equality[r] ? std::abs(value - b[r]) : value - b[r];
    return d > scale ? d : 0.0;
  }

  double violation(const std::vector<double>& lhs) const {
    double v = 0.0;
    for (std::size_t r = 0; r < size(); ++r) v += row_violation(r, lhs[r]);
    return v;
  }

  // Violation after moving q units from i to j.
  double moved_violation(const std::vector<double>& lhs, const std::vector<Count>& w, std::size_t i, std::size_t j,
                         Count q) const {
    const bool i_clears = w[i] == q;
    const bool j_opens = w[j] == 0;
    double v = 0.0;
    const double dq = static_cast<double>(q);
    for (std::size_t r = 0; r < size(); ++r) {
      double value = lhs[r] + dq * (a[r][j] - a[r][i]);
      if (i_clears) value -= c[r][i];
      if (j_opens) value += c[r][j];
      v += row_violation(r, value);
    }
    return v;
  }
};

Matrix design_matrix(const CompiledProblem& p, const std::vector<Count>& w) {
  const auto m = static_cast<Eigen::Index>(p.m);
  Matrix M = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < p.n; ++i)
    if (w[i] != 0) M.noalias() += static_cast<double>(w[i]) * p.H[i];
  return M;
}

// Cholesky-based log det; -inf when not numerically positive definite.
double fast_log_det(const Matrix& M) {
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Vector d = llt.matrixLLT().diagonal();
  if (d.minCoeff() <= 1e-6 * std::sqrt(std::max(M.diagonal().maxCoeff(), 0.0)))
    return log_det(M);
  return 2.0 * d.array().log().sum();
}

bool better(double a, double b) {
  if (std::isinf(b) && b < 0.0) return !(std::isinf(a) && a < 0.0);
  return a > b + 1e-12 * std::max(1.0, std::abs(b));
}

struct Move {
  std::size_t from = 0, to = 0;
  Count amount = 0;
};

// Candidate transfers inside the box: single units and whole-point merges.
template <typename Visit>
void for_each_move(const std::vector<Count>& w, const Box& box, Visit&& visit) {
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] <= box.w_lo[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || w[j] >= box.w_hi[j]) continue;
      visit(Move{i, j, 1});
      const Count all = w[i];
      if (all > 1 && box.w_lo[i] == 0 && w[j] + all <= box.w_hi[j]) visit(Move{i, j, all});
    }
  }
}

}  // namespace

bool compiled_feasible(const ExactDesign& w, const CompiledProblem& problem, const Box* box) {
  if (w.size() != problem.n) return false;
  Count total = 0;
  for (std::size_t i = 0; i < problem.n; ++i) {
    if (w.counts[i] < 0 || w.counts[i] > problem.count_upper[i]) return false;
    if (w.counts[i] > 0 && problem.label_upper[i] < 1) return false;
    total += w.counts[i];
  }
  if (total != problem.N) return false;
  if (box && !box->contains(w)) return false;
  for (const auto& row : problem.rows) {
    double lhs = 0.0;
    for (const auto& [j, v] : row.terms)
      lhs += v * (j < problem.n ? static_cast<double>(w.counts[j]) : (w.counts[j - problem.n] > 0 ? 1.0 : 0.0));
    const double tol = kFeasibilityTolerance;
    if (row.sense == Sense::Equal ? std::abs(lhs - row.rhs) > tol : lhs - row.rhs > tol) return false;
  }
  return true;
}

double compiled_phi(const ExactDesign& w, const CompiledProblem& problem) {
  const auto m = static_cast<Eigen::Index>(problem.m);
  Matrix M = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < problem.n; ++i)
    if (w.counts[i] != 0) M.noalias() += static_cast<double>(w.counts[i]) * problem.H[i];
  return criterion_d(M);
}

std::optional<ExactDesign> rounding_incumbent(const RelaxationResult& relaxation, const CompiledProblem& problem,
                                              const Box& box, std::size_t pass_budget) {
  const std::size_t n = problem.n;
  if (!relaxation.feasible || relaxation.w.size() != n || box.empty()) return std::nullopt;

  std::vector<Count> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::clamp<Count>(static_cast<Count>(std::floor(relaxation.w[i] + 1e-9)), box.w_lo[i], box.w_hi[i]);
  Count rem = problem.N - std::accumulate(w.begin(), w.end(), Count{0});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto frac = [&](std::size_t i) { return relaxation.w[i] - std::floor(relaxation.w[i] + 1e-9); };
  if (rem > 0) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return frac(x) > frac(y); });
    while (rem > 0) {
      bool placed = false;
      for (std::size_t i : order) {
        if (rem == 0) break;
        if (w[i] < box.w_hi[i]) {
          ++w[i];
          --rem;
          placed = true;
        }
      }
      if (!placed) return std::nullopt;
    }
  } else if (rem < 0) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return frac(x) < frac(y); });
    while (rem < 0) {
      bool removed = false;
      for (std::size_t i : order) {
        if (rem == 0) break;
        if (w[i] > box.w_lo[i]) {
          --w[i];
          ++rem;
          removed = true;
        }
      }
      if (!removed) return std::nullopt;
    }
  }

  const DenseRows rows(problem);
  Matrix M = design_matrix(problem, w);
  std::vector<double> lhs = rows.lhs(w);
  double viol = rows.violation(lhs);

  auto apply = [&](const Move& mv) {
    const bool clears = w[mv.from] == mv.amount;
    const bool opens = w[mv.to] == 0;
    const double dq = static_cast<double>(mv.amount);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      lhs[r] += dq * (rows.a[r][mv.to] - rows.a[r][mv.from]);
      if (clears) lhs[r] -= rows.c[r][mv.from];
      if (opens) lhs[r] += rows.c[r][mv.to];
    }
    M += dq * (problem.H[mv.to] - problem.H[mv.from]);
    w[mv.from] -= mv.amount;
    w[mv.to] += mv.amount;
  };

  // Repair: steepest decrease of total violation, ties by log det.
  for (std::size_t pass = 0; viol > 0.0 && pass < pass_budget; ++pass) {
    double best_v = viol;
    double best_ld = -std::numeric_limits<double>::infinity();
    std::optional<Move> best;
    for_each_move(w, box, [&](const Move& mv) {
      const double v = rows.moved_violation(lhs, w, mv.from, mv.to, mv.amount);
      if (v > best_v + 1e-12) return;
      const bool strictly = v < best_v - 1e-12;
      if (!strictly && !best) return;
      const double ld = fast_log_det(M + static_cast<double>(mv.amount) * (problem.H[mv.to] - problem.H[mv.from]));
      if (strictly || better(ld, best_ld)) {
        best_v = std::min(best_v, v);
        best_ld = ld;
        best = mv;
      }
    });
    if (!best || !(best_v < viol - 1e-12)) return std::nullopt;
    apply(*best);
    viol = rows.violation(lhs);
  }
  if (viol > 0.0) return std::nullopt;

  // Improvement: best feasible exchange while it raises log det.
  double current = fast_log_det(M);
  for (std::size_t pass = 0; pass < pass_budget; ++pass) {
    double best_ld = current;
    std::optional<Move> best;
    for_each_move(w, box, [&](const Move& mv) {
      if (rows.moved_violation(lhs, w, mv.from, mv.to, mv.amount) > 0.0) return;
      const double ld = fast_log_det(M + static_cast<double>(mv.amount) * (problem.H[mv.to] - problem.H[mv.from]));
      if (better(ld, best_ld)) {
        best_ld = ld;
        best = mv;
      }
    });
    if (!best) break;
    apply(*best);
    current = best_ld;
  }

  ExactDesign design(w);
  if (!compiled_feasible(design, problem, &box)) return std::nullopt;
  return design;
}

}  // namespace lasdesign
