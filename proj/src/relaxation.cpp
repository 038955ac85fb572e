#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "lasdesign/solver.hpp"

namespace lasdesign {

CompiledProblem presolve(const AuxiliaryProblem& aux) {
  CompiledProblem p;
  p.n = aux.n;
  p.m = aux.m;
  p.N = aux.N;
  p.origin = aux.origin;
  const std::size_t n = aux.n;
  if (aux.aux_size() != n * aux.r + n || aux.regressors.size() != aux.aux_size())
    throw std::invalid_argument("presolve: auxiliary problem has inconsistent sizes");

  const auto m = static_cast<Eigen::Index>(aux.m);
  p.H.assign(n, Matrix::Zero(m, m));
  std::vector<std::size_t> var_of(aux.aux_size());
  for (std::size_t k = 0; k < aux.aux_size(); ++k) {
    const auto& pt = aux.points[k];
    if (pt.point >= n) throw std::invalid_argument("presolve: auxiliary point refers to an unknown design point");
    if (pt.kind == AuxPoint::Kind::Replica) {
      var_of[k] = pt.point;
      p.H[pt.point].noalias() += aux.regressors[k] * aux.regressors[k].transpose();
    } else {
      var_of[k] = n + pt.point;
      if (aux.regressors[k].squaredNorm() != 0.0)
        throw std::invalid_argument("presolve: label regressors must be zero");
    }
  }

  p.count_upper.assign(n, aux.N);
  p.label_upper.assign(n, 1);
  p.indicator_used.assign(n, false);

  auto map_terms = [&](const SparseTerms& terms) {
    std::map<std::size_t, double> merged;
    for (const auto& [k, v] : terms) {
      if (k >= aux.aux_size()) throw std::invalid_argument("presolve: row references an unknown variable");
      merged[var_of[k]] += v;
    }
    SparseTerms out;
    for (const auto& [j, v] : merged)
      if (v != 0.0) out.emplace_back(j, v);
    return out;
  };

  for (const auto& row : aux.rows) {
    if (row.kind == AuxRowKind::ReplicaEquality) {
      // Aliased away: both sides map to the same count variable.
      const auto terms = map_terms(row.terms);
      if (!terms.empty() || row.rhs != 0.0 || row.sense != Sense::Equal)
        throw std::invalid_argument("presolve: replica row is not a replica equality");
      continue;
    }
    SparseTerms terms = map_terms(row.terms);
    if (terms.size() == 1 && row.sense == Sense::LessEqual && terms.front().second > 0.0) {
      const auto [j, coef] = terms.front();
      const auto ub = static_cast<Count>(std::floor(row.rhs / coef + 1e-9));
      if (j < n) p.count_upper[j] = std::min(p.count_upper[j], ub);
      else p.label_upper[j - n] = std::min(p.label_upper[j - n], ub);
      continue;
    }
    if (row.kind == AuxRowKind::Las) {
      NormalizedRow las{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), row.rhs, p.las.size()};
      for (const auto& [j, v] : terms) {
        if (j < n) las.a[j] = v;
        else {
          las.c[j - n] = v;
          p.indicator_used[j - n] = true;
        }
      }
      if (row.sense == Sense::Equal) {
        NormalizedRow neg = las;
        for (auto& v : neg.a) v = -v;
        for (auto& v : neg.c) v = -v;
        neg.b = -neg.b;
        p.las.push_back(std::move(las));
        p.las.push_back(std::move(neg));
      } else {
        p.las.push_back(std::move(las));
      }
    }
    p.rows.push_back(LpRow{std::move(terms), row.sense, row.rhs});
  }
  p.rows.push_back(LpRow{map_terms(aux.size_row.terms), aux.size_row.sense, aux.size_row.rhs});
  // A negative bound is kept so the root box comes out empty.
  for (auto& u : p.label_upper) u = std::min<Count>(u, 1);
  return p;
}

// ---------------------------------------------------------------------------

Box Box::root(const CompiledProblem& p) {
  Box b;
  b.w_lo.assign(p.n, 0);
  b.w_hi = p.count_upper;
  b.s_lo.assign(p.n, 0);
  b.s_hi = p.label_upper;
  b.tighten();
  return b;
}

bool Box::empty() const {
  for (std::size_t i = 0; i < w_lo.size(); ++i)
    if (w_lo[i] > w_hi[i] || s_lo[i] > s_hi[i]) return true;
  return false;
}

void Box::tighten() {
  for (std::size_t i = 0; i < w_lo.size(); ++i) {
    if (s_hi[i] == 0) w_hi[i] = std::min<Count>(w_hi[i], 0);
    if (s_lo[i] >= 1) w_lo[i] = std::max<Count>(w_lo[i], 1);
    if (w_hi[i] <= 0) s_hi[i] = std::min<Count>(s_hi[i], 0);
    if (w_lo[i] >= 1) s_lo[i] = std::max<Count>(s_lo[i], 1);
  }
}

bool Box::contains(const ExactDesign& w) const {
  if (w.size() != w_lo.size()) return false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Count s = w.counts[i] > 0 ? 1 : 0;
    if (w.counts[i] < w_lo[i] || w.counts[i] > w_hi[i] || s < s_lo[i] || s > s_hi[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct ActiveVertex {
  std::vector<double> x;
  double weight = 0.0;
};

struct Evaluation {
  bool ok = false;
  double log_det = 0.0;
  Eigen::LLT<Matrix> llt;
};

Matrix accumulate(const CompiledProblem& p, const std::vector<double>& x) {
  const auto m = static_cast<Eigen::Index>(p.m);
  Matrix M = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < p.n; ++i)
    if (x[i] != 0.0) M.noalias() += x[i] * p.H[i];
  return M;
}

Evaluation evaluate(const Matrix& M) {
  Evaluation e;
  if (M.size() == 0) return e;
  // Same singularity rule as criterion_d: relative eigenvalue floor.
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0) || ev.minCoeff() <= 1e-12 * top) return e;
  e.llt.compute(M);
  if (e.llt.info() != Eigen::Success) return e;
  e.log_det = 2.0 * e.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  e.ok = std::isfinite(e.log_det);
  return e;
}

// Maximizes log det(M + t D) over t in [0, t_max]; M = L L^T positive definite.
double line_search(const Eigen::LLT<Matrix>& llt, const Matrix& D, double t_max) {
  Matrix C = llt.matrixL().solve(D);
  C = llt.matrixL().solve(C.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (C + C.transpose()), Eigen::EigenvaluesOnly);
  const Vector mu = es.eigenvalues();
  auto slope = [&](double t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < mu.size(); ++k) s += mu[k] / (1.0 + t * mu[k]);
    return s;
  };
  if (slope(t_max) >= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  double t = 0.5 * t_max;
  for (int it = 0; it < 100; ++it) {
    const double g = slope(t);
    if (g > 0.0) lo = t;
    else hi = t;
    double curv = 0.0;
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
      const double q = mu[k] / (1.0 + t * mu[k]);
      curv -= q * q;
    }
    double next = curv < 0.0 ? t - g / curv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, t_max)) return next;
    t = next;
    if (hi - lo <= 1e-15 * std::max(1.0, t_max)) break;
  }
  return t;
}

std::size_t find_vertex(const std::vector<ActiveVertex>& active, const std::vector<double>& v) {
  for (std::size_t k = 0; k < active.size(); ++k)
    if (active[k].x == v) return k;
  return active.size();
}

}  // namespace

RelaxationResult solve_relaxation(const CompiledProblem& problem, const Box& box, const RelaxationOptions& options) {
  RelaxationResult res;
  const std::size_t n = problem.n;
  const std::size_t nv = problem.num_vars();
  if (box.empty()) return res;

  LinearProgram lp;
  lp.num_vars = nv;
  lp.rows = problem.rows;
  lp.lower.resize(nv);
  lp.upper.resize(nv);
  for (std::size_t i = 0; i < n; ++i) {
    lp.lower[i] = static_cast<double>(box.w_lo[i]);
    lp.upper[i] = static_cast<double>(box.w_hi[i]);
    lp.lower[n + i] = static_cast<double>(box.s_lo[i]);
    lp.upper[n + i] = static_cast<double>(box.s_hi[i]);
  }
  BoundedSimplex simplex(lp, options.pricing);
  if (!simplex.feasible()) return res;
  res.feasible = true;

  // Start from the average of the vertices maximizing each count. Its support
  // contains every point that any feasible relaxed design can use, so its
  // information matrix has the largest rank attainable on the polytope.
  std::vector<ActiveVertex> active;
  std::vector<double> objective(nv, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (box.w_hi[i] <= 0) continue;
    std::fill(objective.begin(), objective.end(), 0.0);
    objective[i] = 1.0;
    auto sol = simplex.maximize(objective);
    if (find_vertex(active, sol.x) == active.size()) active.push_back(ActiveVertex{std::move(sol.x), 0.0});
  }
  if (active.empty()) active.push_back(ActiveVertex{simplex.phase_one().x, 0.0});
  for (auto& a : active) a.weight = 1.0 / static_cast<double>(active.size());

  std::vector<double> x(nv, 0.0);
  auto rebuild_x = [&] {
    std::fill(x.begin(), x.end(), 0.0);
    for (const auto& a : active)
      for (std::size_t j = 0; j < nv; ++j) x[j] += a.weight * a.x[j];
  };
  rebuild_x();

  auto finish_point = [&] {
    res.w.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    res.s.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
  };

  Matrix M = accumulate(problem, x);
  Evaluation ev = evaluate(M);
  if (!ev.ok) {
    res.singular = true;
    res.log_det = -std::numeric_limits<double>::infinity();
    res.bound_log_det = res.log_det;
    res.bound_phi = 0.0;
    res.phi = 0.0;
    finish_point();
    res.lp_pivots = simplex.total_pivots();
    return res;
  }

  const double mdim = static_cast<double>(problem.m);
  const auto ident = Matrix::Identity(static_cast<Eigen::Index>(problem.m), static_cast<Eigen::Index>(problem.m));
  double best_bound = std::numeric_limits<double>::infinity();
  std::vector<double> grad(nv, 0.0);
  double gap = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < options.iteration_cap; ++it) {
    const Matrix Minv = ev.llt.solve(ident);
    for (std::size_t i = 0; i < n; ++i) grad[i] = Minv.cwiseProduct(problem.H[i]).sum();

    auto fw = simplex.maximize(grad);
    gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) gap += grad[i] * (fw.x[i] - x[i]);
    gap = std::max(gap, 0.0);
    best_bound = std::min(best_bound, ev.log_det + gap);
    if (gap <= options.gap_tolerance * (1.0 + std::abs(ev.log_det))) break;

    std::size_t away = 0;
    double away_score = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < active.size(); ++k) {
      double score = 0.0;
      for (std::size_t i = 0; i < n; ++i) score += grad[i] * active[k].x[i];
      if (score < away_score) {
        away_score = score;
        away = k;
      }
    }
    std::size_t toward = find_vertex(active, fw.x);
    if (toward == away) break;  // no ascent direction left
    const double t_max = active[away].weight;

    Matrix D = Matrix::Zero(M.rows(), M.cols());
    for (std::size_t i = 0; i < n; ++i) {
      const double di = fw.x[i] - active[away].x[i];
      if (di != 0.0) D.noalias() += di * problem.H[i];
    }
    const double t = line_search(ev.llt, D, t_max);
    if (!(t > 0.0)) break;

    if (toward == active.size()) {
      active.push_back(ActiveVertex{fw.x, 0.0});
    }
    for (std::size_t j = 0; j < nv; ++j) x[j] += t * (active[toward].x[j] - active[away].x[j]);
    active[toward].weight += t;
    active[away].weight -= t;
    if (active[away].weight <= 1e-15 || t >= t_max) {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(away));
    }
    if ((it + 1) % 200 == 0) {
      double total = 0.0;
      for (const auto& a : active) total += a.weight;
      for (auto& a : active) a.weight /= total;
      rebuild_x();
    }

    M = accumulate(problem, x);
    Evaluation next = evaluate(M);
    if (!next.ok) break;  // cannot happen along ascent steps; keep the last valid bound
    ev = std::move(next);
  }

  res.iterations = it;
  res.log_det = ev.log_det;
  res.phi = std::exp(ev.log_det / mdim);
  res.fw_gap = gap;
  // best_bound is the smallest f(x_k) + gap_k seen; each is a valid upper bound by concavity.
  res.bound_log_det = std::isfinite(best_bound) ? best_bound : ev.log_det + gap;
  res.bound_phi = std::exp(res.bound_log_det / mdim);
  finish_point();
  res.lp_pivots = simplex.total_pivots();
  return res;
}

}  // namespace lasdesign
