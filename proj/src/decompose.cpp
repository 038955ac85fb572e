#include "lasdesign/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lasdesign {

namespace {

// First nonzero component made non-negative.
void canonical_sign(Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v[k] != 0.0) {
      if (v[k] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

Matrix RankFactors::reconstruct() const {
  if (vectors.empty()) return Matrix();
  const auto m = vectors.front().size();
  Matrix H = Matrix::Zero(m, m);
  for (const auto& f : vectors) H.noalias() += f * f.transpose();
  return H;
}

double max_abs_difference(const Matrix& A, const Matrix& B) { return (A - B).cwiseAbs().maxCoeff(); }

double inf_norm(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().rowwise().sum().maxCoeff(); }

RankFactors eigen_factors(const Matrix& H, std::size_t r) {
  require_symmetric_psd(H);
  const auto m = H.rows();
  RankFactors out;
  out.vectors.assign(r, Vector::Zero(m));
  if (m == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  // Eigen returns ascending order; walk from the top.
  const auto& ev = es.eigenvalues();
  const double top = std::max(ev[m - 1], 0.0);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto rank_pos = static_cast<std::size_t>(m - 1 - k);
    const double lambda = ev[k];
    if (rank_pos < r) {
      if (lambda > 0.0) {
        Vector f = std::sqrt(lambda) * es.eigenvectors().col(k);
        canonical_sign(f);
        out.vectors[rank_pos] = std::move(f);
      }
    } else if (lambda > kRankTolerance * top) {
      std::ostringstream os;
      os << "matrix rank exceeds bound " << r << ": eigenvalue " << (rank_pos + 1) << " is " << lambda
         << " (largest " << top << ")";
      throw std::invalid_argument(os.str());
    }
  }
  return out;
}

RankFactors pivoted_cholesky_factors(const Matrix& H, std::size_t r, double tol) {
  require_symmetric_psd(H);
  if (!(tol > 0.0)) throw std::invalid_argument("pivoted Cholesky tolerance must be positive");
  const auto m = H.rows();
  RankFactors out;
  out.vectors.assign(r, Vector::Zero(m));
  if (m == 0) return out;

  Matrix R = H;
  const double initial = R.diagonal().maxCoeff();
  if (initial <= 0.0) return out;
  const double stop = tol * initial;

  std::size_t pivots = 0;
  while (true) {
    Eigen::Index p = 0;
    const double d = R.diagonal().maxCoeff(&p);
    if (d <= stop) break;
    if (pivots == r) {
      std::ostringstream os;
      os << "pivoted Cholesky needs more than " << r << " pivots (remaining diagonal " << d << ", initial "
         << initial << ")";
      throw std::invalid_argument(os.str());
    }
    Vector l = R.col(p) / std::sqrt(d);
    R.noalias() -= l * l.transpose();
    // The pivot row/column is eliminated exactly.
    R.row(p).setZero();
    R.col(p).setZero();
    canonical_sign(l);
    out.vectors[pivots++] = std::move(l);
  }
  return out;
}

RankFactors factorize(const Matrix& H, std::size_t r, FactorRoute route) {
  return route == FactorRoute::Eigen ? eigen_factors(H, r) : pivoted_cholesky_factors(H, r);
}

std::vector<RankFactors> factorize_model(const InformationModel& model, std::size_t r, FactorRoute route) {
  std::vector<RankFactors> out;
  out.reserve(model.point_count());
  for (std::size_t i = 0; i < model.point_count(); ++i) {
    try {
      out.push_back(factorize(model.elementary(i), r, route));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("point " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lasdesign
