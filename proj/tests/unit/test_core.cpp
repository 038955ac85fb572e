#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "../common/instances.hpp"
#include "lasdesign/core.hpp"
#include "lasdesign/models.hpp"

using namespace lasdesign;

namespace {

std::shared_ptr<LASProblem> line_problem(std::vector<double> xs, Count N) {
  auto p = std::make_shared<LASProblem>();
  p->space = DesignSpace::from_coordinates(xs);
  p->model = std::make_shared<PolynomialModel>(p->space, 1);
  p->N = N;
  return p;
}

// All compositions of N into n parts.
void compositions(std::size_t n, Count N, const std::function<void(const ExactDesign&)>& visit) {
  ExactDesign w = ExactDesign::zeros(n);
  std::function<void(std::size_t, Count)> rec = [&](std::size_t i, Count left) {
    if (i + 1 == n) {
      w.counts[i] = left;
      visit(w);
      return;
    }
    for (Count v = 0; v <= left; ++v) {
      w.counts[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, N);
}

}  // namespace

TEST_CASE("design space indices and labels") {
  auto s = DesignSpace::grid(0, 100, 101);
  CHECK(s.size() == 101);
  CHECK(s.point(0).index == 1);
  CHECK(s.point(100).index == 101);
  CHECK(s.point(23).label == "23");
  CHECK(s.point(23).x() == doctest::Approx(23.0));
  CHECK(s.find_label("91") == 91);
  CHECK(s.find_label("nope") == DesignSpace::npos);

  CHECK_THROWS_AS(DesignSpace(std::vector<DesignPoint>{}), std::invalid_argument);
  std::vector<DesignPoint> dup = {{0, "a", {1.0}}, {0, "a", {2.0}}};
  CHECK_THROWS_AS(DesignSpace{dup}, std::invalid_argument);
  std::vector<DesignPoint> bad = {{0, "a", {std::nan("")}}};
  CHECK_THROWS_AS(DesignSpace{bad}, std::invalid_argument);
}

TEST_CASE("exact design support and total") {
  ExactDesign w({0, 3, 0, 2});
  CHECK(w.total() == 5);
  CHECK(w.support_size() == 2);
  CHECK(w.support() == std::vector<std::size_t>{1, 3});
  CHECK_FALSE(w.supported(0));
}

TEST_CASE("information matrix") {
  auto p = line_problem({0.0, 1.0}, 2);
  SUBCASE("zero design") {
    const Matrix M = information_matrix(*p, ExactDesign::zeros(2));
    CHECK(M.rows() == 2);
    CHECK(M.isZero(0.0));
  }
  SUBCASE("two rank-one terms summed by hand") {
    const Matrix M = information_matrix(*p, ExactDesign({1, 1}));
    Matrix expected(2, 2);
    expected << 2, 1, 1, 1;
    CHECK((M - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("length mismatch") { CHECK_THROWS_AS(information_matrix(*p, ExactDesign({1, 1, 0})), std::invalid_argument); }
}

TEST_CASE("D criterion values") {
  CHECK(criterion_d(Matrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-15));
  Matrix d(2, 2);
  d << 4, 0, 0, 1;
  CHECK(criterion_d(d) == doctest::Approx(2.0).epsilon(1e-15));
  Vector f(3);
  f << 1, 2, 3;
  CHECK(criterion_d(f * f.transpose()) == 0.0);
  CHECK(std::isinf(log_det(f * f.transpose())));
  CHECK(criterion_d(Matrix::Zero(2, 2)) == 0.0);

  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(criterion_d(asym), std::invalid_argument);
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(criterion_d(indef), std::invalid_argument);
}

TEST_CASE("D criterion homogeneity, monotonicity and concavity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + trial % 5;
    const Matrix M1 = testing_support::random_psd(rng, m, m + 1);
    const Matrix M2 = testing_support::random_psd(rng, m, m);
    const Matrix H = testing_support::random_psd(rng, m, 1);
    const double alpha = 3.0 * u(rng);
    const double t = u(rng);
    const double phi1 = criterion_d(M1);
    CHECK(criterion_d(alpha * M1) == doctest::Approx(alpha * phi1).epsilon(1e-10));
    CHECK(criterion_d(M1 + H) >= phi1 * (1 - 1e-12));
    CHECK(criterion_d(t * M1 + (1 - t) * M2) >= t * phi1 + (1 - t) * criterion_d(M2) - 1e-10);
  }
}

TEST_CASE("D efficiency") {
  auto p = line_problem({-1.0, 0.0, 1.0}, 4);
  const ExactDesign w({2, 0, 2}), v({1, 2, 1});
  CHECK(d_efficiency(w, w, *p) == 1.0);
  // det M(w) = 16, det M(v) = 8
  CHECK(d_efficiency(v, w, *p) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(d_efficiency(w, ExactDesign({0, 4, 0}), *p), std::domain_error);
}

TEST_CASE("check_feasible reports size and row violations") {
  auto p = line_problem({0, 1, 2, 3}, 100);
  p->constraints.push_back(constraints::max_support_size(4, 2, 100));
  p->constraints.push_back(constraints::linear({1, 0, 0, 0}, 10, Sense::LessEqual, "cap"));

  auto r = check_feasible(ExactDesign({9, 90, 0, 0}), *p);
  CHECK_FALSE(r.feasible);
  CHECK(r.size_violation == -1);
  CHECK(r.violations.empty());

  r = check_feasible(ExactDesign({20, 40, 40, 0}), *p);
  CHECK_FALSE(r.feasible);
  REQUIRE(r.violations.size() == 2);
  CHECK(r.violations[0].constraint == 0);
  CHECK(r.violations[0].slack == doctest::Approx(-1.0));
  CHECK(r.violations[1].name == "cap");
  CHECK(r.violations[1].slack == doctest::Approx(-10.0));

  CHECK(is_feasible(ExactDesign({10, 90, 0, 0}), *p));
  CHECK_FALSE(is_feasible(ExactDesign({10, 90, 0}), *p));
}

TEST_CASE("equality rows") {
  auto p = line_problem({0, 1, 2}, 4);
  p->constraints.push_back(constraints::linear({1, -1, 0}, 0, Sense::Equal, "balance"));
  CHECK(is_feasible(ExactDesign({2, 2, 0}), *p));
  CHECK_FALSE(is_feasible(ExactDesign({1, 2, 1}), *p));
  const auto rows = normalize(p->constraints);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].a == std::vector<double>{1, -1, 0});
  CHECK(rows[1].a == std::vector<double>{-1, 1, 0});
  CHECK(rows[1].b == 0.0);
  CHECK(rows[1].source == 0);
}

TEST_CASE("check_feasible agrees with direct row recomputation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = testing_support::random_problem(rng);
    for (int k = 0; k < 10; ++k) {
      const auto w = testing_support::random_design(rng, p->n(), p->N);
      bool ok = true;
      for (const auto& con : p->constraints) {
        double lhs = 0;
        for (std::size_t i = 0; i < p->n(); ++i) lhs += con.a[i] * w.counts[i] + (w.counts[i] > 0 ? con.c[i] : 0.0);
        ok = ok && lhs <= con.b + 1e-9;
      }
      CHECK(is_feasible(w, *p) == ok);
    }
  }
}

TEST_CASE("constraint builder patterns") {
  const auto s = constraints::max_support_size(3, 6, 10);
  CHECK(s.a == std::vector<double>{0, 0, 0});
  CHECK(s.c == std::vector<double>{1, 1, 1});
  CHECK(s.b == 6);

  const auto lo = constraints::min_support_size(3, 2, 10);
  CHECK(lo.c == std::vector<double>{-1, -1, -1});
  CHECK(lo.b == -2);

  CHECK(constraints::separation_windows(101, 10).size() == 92);
  CHECK(constraints::support_replication_bounds(std::vector<Count>(101, 10), std::vector<Count>(101, 25), 100).size() ==
        202);

  const auto b = constraints::budget({1, 2}, {3, 4}, 5);
  CHECK(b.a == std::vector<double>{1, 2});
  CHECK(b.c == std::vector<double>{3, 4});
  CHECK(b.b == 5);

  CHECK_THROWS_AS(constraints::max_support_size(3, 11, 10), std::invalid_argument);
  CHECK_THROWS_AS(constraints::max_support_size(3, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(constraints::separation_windows(5, 1), std::invalid_argument);
  CHECK_THROWS_AS(constraints::separation_windows(5, 6), std::invalid_argument);
  CHECK_THROWS_AS(constraints::support_replication_bounds({5}, {4}, 10), std::invalid_argument);
  CHECK_THROWS_AS(constraints::support_replication_bounds({1}, {11}, 10), std::invalid_argument);
  CHECK_THROWS_AS(constraints::exclusion({-1, 0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(constraints::inclusion({-1, 0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(constraints::mixed({1, 1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(constraints::linear({0, 0}, 1), std::invalid_argument);
}

TEST_CASE("builders accept exactly the designs of their definition") {
  for (std::size_t n = 2; n <= 5; ++n) {
    for (Count N = 1; N <= 5; ++N) {
      std::vector<double> xs(n);
      for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i);
      auto p = line_problem(xs, N);
      for (Count S = 1; S <= std::min<Count>(N, static_cast<Count>(n)); ++S) {
        auto q = std::make_shared<LASProblem>(*p);
        q->constraints = {constraints::max_support_size(n, S, N)};
        auto r = std::make_shared<LASProblem>(*p);
        r->constraints = {constraints::min_support_size(n, S, N)};
        compositions(n, N, [&](const ExactDesign& w) {
          CHECK(is_feasible(w, *q) == (static_cast<Count>(w.support_size()) <= S));
          CHECK(is_feasible(w, *r) == (static_cast<Count>(w.support_size()) >= S));
        });
      }
      for (std::size_t delta = 2; delta <= n; ++delta) {
        auto q = std::make_shared<LASProblem>(*p);
        for (auto& c : constraints::separation_windows(n, delta)) q->constraints.push_back(c);
        compositions(n, N, [&](const ExactDesign& w) {
          const auto sup = w.support();
          bool ok = true;
          for (std::size_t k = 1; k < sup.size(); ++k) ok = ok && sup[k] - sup[k - 1] >= delta;
          CHECK(is_feasible(w, *q) == ok);
        });
      }
      for (Count L = 0; L <= N; ++L) {
        for (Count U = std::max<Count>(L, 1); U <= N; ++U) {
          auto q = std::make_shared<LASProblem>(*p);
          q->constraints = constraints::support_replication_bounds(std::vector<Count>(n, L), std::vector<Count>(n, U), N);
          compositions(n, N, [&](const ExactDesign& w) {
            bool ok = true;
            for (Count c : w.counts) ok = ok && (c == 0 || (c >= L && c <= U));
            CHECK(is_feasible(w, *q) == ok);
          });
        }
      }
    }
  }
}

TEST_CASE("problem validation") {
  auto p = line_problem({0, 1}, 2);
  CHECK_NOTHROW(p->validate());
  p->constraints.push_back(constraints::linear({1, 0, 0}, 1));
  CHECK_THROWS_AS(p->validate(), std::invalid_argument);
  p->constraints.clear();
  p->N = -1;
  CHECK_THROWS_AS(p->validate(), std::invalid_argument);
}
