#include <doctest.h>

#include <random>

#include "../common/instances.hpp"
#include "lasdesign/decompose.hpp"
#include "lasdesign/models.hpp"

using namespace lasdesign;

namespace {

Matrix sum_design(const std::vector<RankFactors>& factors, const std::vector<Count>& w) {
  const auto m = factors.front().vectors.front().size();
  Matrix M = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < factors.size(); ++i)
    for (const auto& f : factors[i].vectors) M += static_cast<double>(w[i]) * f * f.transpose();
  return M;
}

}  // namespace

TEST_CASE("rank-one input gives plus or minus the generating vector") {
  Vector f(3);
  f << -1.0, 2.0, 0.5;
  const Matrix H = f * f.transpose();
  for (auto route : {FactorRoute::Eigen, FactorRoute::PivotedCholesky}) {
    const auto F = factorize(H, 1, route);
    REQUIRE(F.size() == 1);
    const Vector& g = F.vectors[0];
    CHECK(std::min((g - f).norm(), (g + f).norm()) <= 1e-12);
    // first nonzero entry is made non-negative
    CHECK(g[0] >= 0.0);
  }
}

TEST_CASE("identity splits into orthonormal factors") {
  const auto F = eigen_factors(Matrix::Identity(2, 2), 2);
  REQUIRE(F.size() == 2);
  CHECK(std::abs(F.vectors[0].norm() - 1.0) <= 1e-15);
  CHECK(std::abs(F.vectors[1].norm() - 1.0) <= 1e-15);
  CHECK(std::abs(F.vectors[0].dot(F.vectors[1])) <= 1e-15);
  CHECK(max_abs_difference(F.reconstruct(), Matrix::Identity(2, 2)) <= 1e-15);
}

TEST_CASE("diagonal pivot") {
  Matrix H(2, 2);
  H << 4, 0, 0, 0;
  const auto F = pivoted_cholesky_factors(H, 1);
  REQUIRE(F.size() == 1);
  CHECK(F.vectors[0][0] == doctest::Approx(2.0));
  CHECK(F.vectors[0][1] == 0.0);
}

TEST_CASE("padding with zero vectors") {
  Vector f(2);
  f << 1.0, 1.0;
  for (auto route : {FactorRoute::Eigen, FactorRoute::PivotedCholesky}) {
    const auto F = factorize(f * f.transpose(), 3, route);
    REQUIRE(F.size() == 3);
    CHECK(F.vectors[1].isZero(0.0));
    CHECK(F.vectors[2].isZero(0.0));
    const auto Z = factorize(Matrix::Zero(2, 2), 2, route);
    REQUIRE(Z.size() == 2);
    CHECK(Z.vectors[0].isZero(0.0));
    CHECK(Z.vectors[1].isZero(0.0));
  }
}

TEST_CASE("rank above the bound is rejected") {
  Matrix H = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(eigen_factors(H, 2), std::invalid_argument);
  CHECK_THROWS_AS(pivoted_cholesky_factors(H, 2), std::invalid_argument);
  try {
    eigen_factors(H, 2);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
  }
}

TEST_CASE("random low-rank reconstruction, both routes") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + trial % 8;
    const std::size_t r = 1 + trial % 4;
    const std::size_t rank = std::min(r, m) - (trial % 3 == 0 && std::min(r, m) > 1 ? 1 : 0);
    const Matrix H = testing_support::random_psd(rng, m, rank, 3.0);
    for (auto route : {FactorRoute::Eigen, FactorRoute::PivotedCholesky}) {
      const auto F = factorize(H, r, route);
      CHECK(F.size() == r);
      CHECK(max_abs_difference(F.reconstruct(), H) <= 1e-10 * (1.0 + inf_norm(H)));
    }
  }
}

TEST_CASE("design information does not depend on the route") {
  const auto space = DesignSpace::grid(0, 100, 21);
  CRModel model(space, CRParameters::nominal());
  const auto E = factorize_model(model, 2, FactorRoute::Eigen);
  const auto C = factorize_model(model, 2, FactorRoute::PivotedCholesky);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = testing_support::random_design(rng, space.size(), 30);
    const Matrix ME = sum_design(E, w.counts);
    const Matrix MC = sum_design(C, w.counts);
    LASProblem p;
    p.space = space;
    p.model = std::make_shared<CRModel>(model);
    p.N = 30;
    const Matrix M = information_matrix(p, w);
    CHECK(max_abs_difference(ME, M) <= 1e-10 * (1 + inf_norm(M)));
    CHECK(max_abs_difference(MC, M) <= 1e-10 * (1 + inf_norm(M)));
    CHECK(std::abs(criterion_d(ME) - criterion_d(MC)) <= 1e-10 * std::max(1.0, criterion_d(M)));
  }
}

TEST_CASE("model factorization names the failing point") {
  Matrix a = Matrix::Identity(2, 2);
  RawMatrixModel model({a, a}, 2);
  try {
    factorize_model(model, 1, FactorRoute::Eigen);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("point 1") != std::string::npos);
  }
}
