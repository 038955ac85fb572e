#ifndef LASDESIGN_MODELS_HPP
#define LASDESIGN_MODELS_HPP

#include <vector>

#include "lasdesign/core.hpp"

namespace lasdesign {

/// Continuation-ratio parameters (a1, a2, b1, b2). Slopes must be positive.
class CRParameters {
 public:
  CRParameters(double a1, double a2, double b1, double b2);

  double a1() const { return a1_; }
  double a2() const { return a2_; }
  double b1() const { return b1_; }
  double b2() const { return b2_; }

  /// Nominal value used throughout the dose-finding scenarios.
  static CRParameters nominal() { return CRParameters(-9.5, -9.1, 0.12, 0.33); }

 private:
  double a1_, a2_, b1_, b2_;
};

struct CRProbabilities {
  double p0 = 0.0;  // no reaction
  double pS = 0.0;  // efficacy without toxicity
  double pT = 0.0;  // toxicity
};

/// Logistic function 1/(1+e^-t), evaluated without overflow.
double logistic(double t);

CRProbabilities cr_probabilities(double x, const CRParameters& theta);

/// Weights of f1 f1^T and f2 f2^T in the elementary information matrix.
struct CRWeights {
  double u1 = 0.0;
  double u2 = 0.0;
};
CRWeights cr_weights(double x, const CRParameters& theta);

/// u1 f1 f1^T + u2 f2 f2^T with f1 = (1,x,0,0), f2 = (0,0,1,x).
Matrix cr_elementary_info(double x, const CRParameters& theta);

/// Probability of a failed trial (no reaction or toxicity), p0 + pT.
double cr_failure_prob(double x, const CRParameters& theta);

/// Cost model of the dose-finding example: per-trial misdosing costs and a
/// per-prepared-dose overhead.
struct CostCoefficients {
  std::vector<double> per_trial;     // 5 p0(x) + 20 pT(x)
  std::vector<double> per_support;   // 0.4 x
};

inline constexpr double kUnderdoseCost = 5.0;
inline constexpr double kOverdoseCost = 20.0;
inline constexpr double kDoseOverheadPerUnit = 0.4;

CostCoefficients cr_cost_coefficients(const DesignSpace& space, const CRParameters& theta);

/// Expected number of failed trials of `design`.
double cr_expected_failures(const DesignSpace& space, const CRParameters& theta, const ExactDesign& design);
/// Total cost of `design` under cr_cost_coefficients.
double cr_total_cost(const DesignSpace& space, const CRParameters& theta, const ExactDesign& design);

// ---------------------------------------------------------------------------

/// Continuation-ratio model localized at theta0 on a one-dimensional space.
class CRModel final : public InformationModel {
 public:
  CRModel(const DesignSpace& space, CRParameters theta0);

  std::size_t dimension() const override { return 4; }
  std::size_t point_count() const override { return doses_.size(); }
  std::size_t rank_bound() const override { return 2; }
  Matrix elementary(std::size_t pos) const override { return matrices_.at(pos); }
  std::string tag() const override { return "continuation_ratio"; }

  const CRParameters& theta0() const { return theta0_; }
  const std::vector<double>& doses() const { return doses_; }

 private:
  CRParameters theta0_;
  std::vector<double> doses_;
  std::vector<Matrix> matrices_;
};

/// Explicit matrices, one per design point, with a declared rank bound.
class RawMatrixModel final : public InformationModel {
 public:
  /// Throws std::invalid_argument if a matrix is not symmetric PSD, shapes
  /// differ, or some matrix has more than `rank_bound` eigenvalues above
  /// 1e-9 * |H|.
  RawMatrixModel(std::vector<Matrix> matrices, std::size_t rank_bound);

  std::size_t dimension() const override { return m_; }
  std::size_t point_count() const override { return matrices_.size(); }
  std::size_t rank_bound() const override { return r_; }
  Matrix elementary(std::size_t pos) const override { return matrices_.at(pos); }
  std::string tag() const override { return "raw_matrices"; }

  const std::vector<Matrix>& matrices() const { return matrices_; }

 private:
  std::vector<Matrix> matrices_;
  std::size_t m_ = 0;
  std::size_t r_ = 0;
};

/// Univariate polynomial regression f(x) = (1, x, ..., x^degree); H = f f^T.
class PolynomialModel final : public InformationModel {
 public:
  PolynomialModel(const DesignSpace& space, std::size_t degree);

  std::size_t dimension() const override { return degree_ + 1; }
  std::size_t point_count() const override { return regressors_.size(); }
  std::size_t rank_bound() const override { return 1; }
  Matrix elementary(std::size_t pos) const override;
  std::string tag() const override { return "polynomial"; }

  std::size_t degree() const { return degree_; }
  const Vector& regressor(std::size_t pos) const { return regressors_.at(pos); }

 private:
  std::size_t degree_;
  std::vector<Vector> regressors_;
};

}  // namespace lasdesign

#endif  // LASDESIGN_MODELS_HPP
