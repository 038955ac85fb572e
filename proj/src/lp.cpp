#include "lasdesign/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lasdesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kOptimalityTol = 1e-9;
constexpr std::size_t kRefactorInterval = 100;
constexpr std::size_t kDegenerateRunBeforeBland = 30;

}  // namespace

BoundedSimplex::BoundedSimplex(const LinearProgram& lp, PricingRule rule) : rule_(rule) { build(lp); }

void BoundedSimplex::build(const LinearProgram& lp) {
  nstruct_ = lp.num_vars;
  nrows_ = lp.rows.size();
  if (lp.lower.size() != nstruct_ || lp.upper.size() != nstruct_)
    throw std::invalid_argument("LP bound vectors differ from the variable count");
  for (std::size_t j = 0; j < nstruct_; ++j) {
    if (!std::isfinite(lp.lower[j]) || !std::isfinite(lp.upper[j]))
      throw std::invalid_argument("LP bounds must be finite");
    if (lp.lower[j] > lp.upper[j]) {
      // Empty box: report infeasible without building a tableau.
      feasible_ = false;
      phase_one_.status = LpStatus::Infeasible;
      phase_one_.infeasibility = lp.lower[j] - lp.upper[j];
      return;
    }
  }

  std::vector<double> resid(nrows_);
  std::size_t nslack = 0, nart = 0;
  for (std::size_t i = 0; i < nrows_; ++i) {
    const auto& row = lp.rows[i];
    double v = row.rhs;
    for (const auto& [j, a] : row.terms) {
      if (j >= nstruct_) throw std::invalid_argument("LP row references an unknown variable");
      if (!std::isfinite(a)) throw std::invalid_argument("LP coefficient is not finite");
      v -= a * lp.lower[j];
    }
    resid[i] = v;
    if (row.sense == Sense::LessEqual) ++nslack;
    if (row.sense == Sense::Equal || v < 0.0) ++nart;
  }
  ncols_ = nstruct_ + nslack + nart;

  A_ = Matrix::Zero(static_cast<Eigen::Index>(nrows_), static_cast<Eigen::Index>(ncols_));
  b_ = Vector::Zero(static_cast<Eigen::Index>(nrows_));
  lo_.assign(ncols_, 0.0);
  hi_.assign(ncols_, kInf);
  state_.assign(ncols_, At::Lower);
  artificial_.assign(ncols_, false);
  basis_.assign(nrows_, 0);
  for (std::size_t j = 0; j < nstruct_; ++j) {
    lo_[j] = lp.lower[j];
    hi_[j] = lp.upper[j];
  }

  std::size_t next_slack = nstruct_, next_art = nstruct_ + nslack;
  for (std::size_t i = 0; i < nrows_; ++i) {
    const auto& row = lp.rows[i];
    const auto ii = static_cast<Eigen::Index>(i);
    for (const auto& [j, a] : row.terms) A_(ii, static_cast<Eigen::Index>(j)) += a;
    b_[ii] = row.rhs;
    std::size_t slack = ncols_;
    if (row.sense == Sense::LessEqual) {
      slack = next_slack++;
      A_(ii, static_cast<Eigen::Index>(slack)) = 1.0;
    }
    if (row.sense == Sense::Equal || resid[i] < 0.0) {
      const std::size_t art = next_art++;
      A_(ii, static_cast<Eigen::Index>(art)) = resid[i] >= 0.0 ? 1.0 : -1.0;
      artificial_[art] = true;
      basis_[i] = art;
    } else {
      basis_[i] = slack;
    }
    state_[basis_[i]] = At::Basic;
  }

  refactor();

  cost_.assign(ncols_, 0.0);
  for (std::size_t j = 0; j < ncols_; ++j)
    if (artificial_[j]) cost_[j] = -1.0;
  if (nart > 0) {
    compute_reduced_costs();
    if (!iterate(50 * (nrows_ + ncols_) + 1000))
      throw std::runtime_error("simplex phase 1 hit its pivot limit");
  }

  double infeas = 0.0;
  for (std::size_t j = 0; j < ncols_; ++j)
    if (artificial_[j]) infeas += value_of(j);
  phase_one_.infeasibility = infeas;
  phase_one_.pivots = total_pivots_;
  const double scale = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0);
  feasible_ = infeas <= 1e-9 * scale;
  if (!feasible_) {
    phase_one_.status = LpStatus::Infeasible;
    phase_one_.certificate = row_multipliers();
    return;
  }
  phase_one_.status = LpStatus::Optimal;
  phase_one_.x = primal();
  for (std::size_t j = 0; j < ncols_; ++j)
    if (artificial_[j]) hi_[j] = 0.0;
}

double BoundedSimplex::value_of(std::size_t col) const {
  if (state_[col] == At::Basic) {
    for (std::size_t i = 0; i < nrows_; ++i)
      if (basis_[i] == col) return beta_[static_cast<Eigen::Index>(i)];
  }
  return state_[col] == At::Upper ? hi_[col] : lo_[col];
}

std::vector<double> BoundedSimplex::primal() const {
  std::vector<double> x(nstruct_);
  for (std::size_t j = 0; j < nstruct_; ++j) x[j] = state_[j] == At::Upper ? hi_[j] : lo_[j];
  for (std::size_t i = 0; i < nrows_; ++i)
    if (basis_[i] < nstruct_) x[basis_[i]] = beta_[static_cast<Eigen::Index>(i)];
  for (std::size_t j = 0; j < nstruct_; ++j) x[j] = std::clamp(x[j], lo_[j], hi_[j]);
  return x;
}

std::vector<double> BoundedSimplex::row_multipliers() const {
  const auto m = static_cast<Eigen::Index>(nrows_);
  Matrix B(m, m);
  Vector cb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    B.col(i) = A_.col(static_cast<Eigen::Index>(basis_[static_cast<std::size_t>(i)]));
    cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
  }
  Vector y = B.transpose().partialPivLu().solve(cb);
  return std::vector<double>(y.data(), y.data() + y.size());
}

void BoundedSimplex::refactor() {
  const auto m = static_cast<Eigen::Index>(nrows_);
  pivots_since_refactor_ = 0;
  if (m == 0) {
    T_.resize(0, static_cast<Eigen::Index>(ncols_));
    beta_.resize(0);
    return;
  }
  Matrix B(m, m);
  for (Eigen::Index i = 0; i < m; ++i) B.col(i) = A_.col(static_cast<Eigen::Index>(basis_[static_cast<std::size_t>(i)]));
  Eigen::PartialPivLU<Matrix> lu(B);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "simplex basis is numerically singular (reciprocal condition estimate " << rcond << ")";
    throw std::runtime_error(os.str());
  }
  T_ = lu.solve(A_);
  Vector rhs = b_;
  for (std::size_t j = 0; j < ncols_; ++j) {
    if (state_[j] == At::Basic) continue;
    const double v = state_[j] == At::Upper ? hi_[j] : lo_[j];
    if (v != 0.0) rhs -= v * A_.col(static_cast<Eigen::Index>(j));
  }
  beta_ = lu.solve(rhs);
  for (std::size_t i = 0; i < nrows_; ++i) {
    const auto c = static_cast<Eigen::Index>(basis_[i]);
    T_.col(c).setZero();
    T_(static_cast<Eigen::Index>(i), c) = 1.0;
  }
}

void BoundedSimplex::compute_reduced_costs() {
  const auto m = static_cast<Eigen::Index>(nrows_);
  Vector cb(m);
  for (Eigen::Index i = 0; i < m; ++i) cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
  d_ = Eigen::Map<const Vector>(cost_.data(), static_cast<Eigen::Index>(ncols_));
  if (m > 0) d_.noalias() -= T_.transpose() * cb;
  for (std::size_t i = 0; i < nrows_; ++i) d_[static_cast<Eigen::Index>(basis_[i])] = 0.0;
}

void BoundedSimplex::pivot(std::size_t row, std::size_t col) {
  const auto r = static_cast<Eigen::Index>(row);
  const auto q = static_cast<Eigen::Index>(col);
  const double p = T_(r, q);
  T_.row(r) /= p;
  Vector colq = T_.col(q);
  colq[r] = 0.0;
  T_.noalias() -= colq * T_.row(r);
  T_.col(q).setZero();
  T_(r, q) = 1.0;
  d_ -= d_[q] * T_.row(r).transpose();
  d_[q] = 0.0;
}

bool BoundedSimplex::iterate(std::size_t max_pivots) {
  std::size_t degenerate_run = 0;
  for (std::size_t iter = 0; iter < max_pivots; ++iter) {
    const bool bland = rule_ == PricingRule::Bland || degenerate_run >= kDegenerateRunBeforeBland;

    std::size_t q = ncols_;
    double best = 0.0;
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (state_[j] == At::Basic || hi_[j] <= lo_[j]) continue;
      const double dj = d_[static_cast<Eigen::Index>(j)];
      const bool eligible = (state_[j] == At::Lower && dj > kOptimalityTol) || (state_[j] == At::Upper && dj < -kOptimalityTol);
      if (!eligible) continue;
      if (bland) {
        q = j;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        q = j;
      }
    }
    if (q == ncols_) return true;

    const double dir = state_[q] == At::Lower ? 1.0 : -1.0;
    const auto qq = static_cast<Eigen::Index>(q);
    double step = hi_[q] - lo_[q];
    std::size_t leave = nrows_;
    bool leave_to_upper = false;
    double leave_alpha = 0.0;
    for (std::size_t i = 0; i < nrows_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double alpha = dir * T_(ii, qq);
      if (std::abs(alpha) <= kPivotTol) continue;
      const std::size_t var = basis_[i];
      double limit;
      bool to_upper;
      if (alpha > 0.0) {
        limit = (beta_[ii] - lo_[var]) / alpha;
        to_upper = false;
      } else {
        if (!std::isfinite(hi_[var])) continue;
        limit = (hi_[var] - beta_[ii]) / (-alpha);
        to_upper = true;
      }
      limit = std::max(limit, 0.0);
      bool take = false;
      if (leave == nrows_) {
        take = limit <= step;
      } else if (limit < step - 1e-12) {
        take = true;
      } else if (limit <= step + 1e-12) {
        take = bland ? var < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
      }
      if (take) {
        step = std::min(limit, step);
        leave = i;
        leave_to_upper = to_upper;
        leave_alpha = alpha;
      }
    }
    if (!std::isfinite(step)) throw std::runtime_error("simplex: LP is unbounded");

    degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
    ++total_pivots_;

    if (leave == nrows_) {
      // Bound flip of the entering variable.
      beta_ -= (dir * step) * T_.col(qq);
      state_[q] = state_[q] == At::Lower ? At::Upper : At::Lower;
      continue;
    }
    const double entering_value = (state_[q] == At::Lower ? lo_[q] : hi_[q]) + dir * step;
    beta_ -= (dir * step) * T_.col(qq);
    const std::size_t out = basis_[leave];
    state_[out] = leave_to_upper ? At::Upper : At::Lower;
    pivot(leave, q);
    beta_[static_cast<Eigen::Index>(leave)] = entering_value;
    basis_[leave] = q;
    state_[q] = At::Basic;

    if (++pivots_since_refactor_ >= kRefactorInterval) {
      refactor();
      compute_reduced_costs();
    }
  }
  return false;
}

LpSolution BoundedSimplex::maximize(const std::vector<double>& objective) {
  if (objective.size() != nstruct_) throw std::invalid_argument("LP objective length differs from the variable count");
  if (!feasible_) return phase_one_;
  const std::size_t before = total_pivots_;
  cost_.assign(ncols_, 0.0);
  std::copy(objective.begin(), objective.end(), cost_.begin());
  compute_reduced_costs();
  if (!iterate(50 * (nrows_ + ncols_) + 1000)) {
    // A stalled Dantzig run: retry once with Bland's rule from a fresh factorization.
    const auto saved = rule_;
    rule_ = PricingRule::Bland;
    refactor();
    compute_reduced_costs();
    const bool ok = iterate(200 * (nrows_ + ncols_) + 1000);
    rule_ = saved;
    if (!ok) throw std::runtime_error("simplex phase 2 hit its pivot limit");
  }
  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.x = primal();
  sol.objective = 0.0;
  for (std::size_t j = 0; j < nstruct_; ++j) sol.objective += objective[j] * sol.x[j];
  sol.pivots = total_pivots_ - before;
  return sol;
}

LpSolution solve_lp(const LinearProgram& lp, const std::vector<double>& objective, PricingRule rule) {
  BoundedSimplex simplex(lp, rule);
  return simplex.maximize(objective);
}

}  // namespace lasdesign
