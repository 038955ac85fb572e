#include "lasdesign/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lasdesign {

CRParameters::CRParameters(double a1, double a2, double b1, double b2) : a1_(a1), a2_(a2), b1_(b1), b2_(b2) {
  if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(b1) || !std::isfinite(b2))
    throw std::invalid_argument("continuation-ratio parameters must be finite");
  if (!(b1 > 0.0) || !(b2 > 0.0)) throw std::invalid_argument("continuation-ratio slopes b1, b2 must be positive");
}

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// With s(t) = logistic(t):  pT = s(eta1), p0 = s(-eta1) s(-eta2),
// pS = s(-eta1) s(eta2). Every exponent is non-positive, so nothing overflows.
CRProbabilities cr_probabilities(double x, const CRParameters& theta) {
  const double eta1 = theta.a1() + theta.b1() * x;
  const double eta2 = theta.a2() + theta.b2() * x;
  const double no_tox = logistic(-eta1);
  return CRProbabilities{no_tox * logistic(-eta2), no_tox * logistic(eta2), logistic(eta1)};
}

// u1 = e^eta2 / ((1+e^eta2)^2 (1+e^eta1)) = s(eta2) s(-eta2) s(-eta1)
// u2 = e^eta1 / (1+e^eta1)^2             = s(eta1) s(-eta1)
CRWeights cr_weights(double x, const CRParameters& theta) {
  const double eta1 = theta.a1() + theta.b1() * x;
  const double eta2 = theta.a2() + theta.b2() * x;
  const double s1p = logistic(eta1), s1m = logistic(-eta1);
  const double s2p = logistic(eta2), s2m = logistic(-eta2);
  return CRWeights{s2p * s2m * s1m, s1p * s1m};
}

Matrix cr_elementary_info(double x, const CRParameters& theta) {
  if (!std::isfinite(x)) throw std::invalid_argument("dose must be finite");
  const auto [u1, u2] = cr_weights(x, theta);
  Matrix H = Matrix::Zero(4, 4);
  H(0, 0) = u1;
  H(0, 1) = H(1, 0) = u1 * x;
  H(1, 1) = u1 * x * x;
  H(2, 2) = u2;
  H(2, 3) = H(3, 2) = u2 * x;
  H(3, 3) = u2 * x * x;
  return H;
}

double cr_failure_prob(double x, const CRParameters& theta) {
  const auto p = cr_probabilities(x, theta);
  return p.p0 + p.pT;
}

CostCoefficients cr_cost_coefficients(const DesignSpace& space, const CRParameters& theta) {
  CostCoefficients cc;
  cc.per_trial.reserve(space.size());
  cc.per_support.reserve(space.size());
  for (const auto& pt : space.points()) {
    const auto p = cr_probabilities(pt.x(), theta);
    cc.per_trial.push_back(kUnderdoseCost * p.p0 + kOverdoseCost * p.pT);
    cc.per_support.push_back(kDoseOverheadPerUnit * pt.x());
  }
  return cc;
}

double cr_expected_failures(const DesignSpace& space, const CRParameters& theta, const ExactDesign& design) {
  if (design.size() != space.size()) throw std::invalid_argument("design length differs from design space");
  double total = 0.0;
  for (std::size_t i = 0; i < design.size(); ++i)
    if (design.counts[i] > 0)
      total += static_cast<double>(design.counts[i]) * cr_failure_prob(space.point(i).x(), theta);
  return total;
}

double cr_total_cost(const DesignSpace& space, const CRParameters& theta, const ExactDesign& design) {
  if (design.size() != space.size()) throw std::invalid_argument("design length differs from design space");
  const auto cc = cr_cost_coefficients(space, theta);
  double total = 0.0;
  for (std::size_t i = 0; i < design.size(); ++i)
    if (design.counts[i] > 0) total += static_cast<double>(design.counts[i]) * cc.per_trial[i] + cc.per_support[i];
  return total;
}

// ---------------------------------------------------------------------------

CRModel::CRModel(const DesignSpace& space, CRParameters theta0) : theta0_(theta0), doses_(space.first_coordinates()) {
  matrices_.reserve(doses_.size());
  for (double x : doses_) matrices_.push_back(cr_elementary_info(x, theta0_));
}

RawMatrixModel::RawMatrixModel(std::vector<Matrix> matrices, std::size_t rank_bound)
    : matrices_(std::move(matrices)), r_(rank_bound) {
  if (matrices_.empty()) throw std::invalid_argument("raw model needs at least one matrix");
  m_ = static_cast<std::size_t>(matrices_.front().rows());
  if (m_ == 0) throw std::invalid_argument("raw model matrices must be non-empty");
  if (r_ == 0) throw std::invalid_argument("rank bound must be positive");
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const Matrix& H = matrices_[i];
    if (static_cast<std::size_t>(H.rows()) != m_ || static_cast<std::size_t>(H.cols()) != m_)
      throw std::invalid_argument("raw model matrix " + std::to_string(i + 1) + " has the wrong shape");
    require_symmetric_psd(H);
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    const double norm = std::abs(ev.maxCoeff());
    std::size_t significant = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      if (ev[k] > 1e-9 * norm) ++significant;
    if (significant > r_) {
      std::ostringstream os;
      os << "raw model matrix " << (i + 1) << " has rank " << significant << " above the bound " << r_;
      throw std::invalid_argument(os.str());
    }
  }
}

PolynomialModel::PolynomialModel(const DesignSpace& space, std::size_t degree) : degree_(degree) {
  for (const auto& pt : space.points()) {
    Vector f(static_cast<Eigen::Index>(degree + 1));
    double p = 1.0;
    for (std::size_t k = 0; k <= degree; ++k) {
      f[static_cast<Eigen::Index>(k)] = p;
      p *= pt.x();
    }
    regressors_.push_back(std::move(f));
  }
}

Matrix PolynomialModel::elementary(std::size_t pos) const {
  const Vector& f = regressors_.at(pos);
  return f * f.transpose();
}

}  // namespace lasdesign
