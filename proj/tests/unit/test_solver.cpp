#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/instances.hpp"
#include "lasdesign/reduce.hpp"
#include "lasdesign/solver.hpp"

using namespace lasdesign;

namespace {

std::shared_ptr<LASProblem> line_problem(const std::vector<double>& xs, Count N) {
  auto p = std::make_shared<LASProblem>();
  p->space = DesignSpace::from_coordinates(xs);
  p->model = std::make_shared<PolynomialModel>(p->space, 1);
  p->N = N;
  return p;
}

SolverOptions exact_options() {
  SolverOptions o;
  o.relative_gap = 0.0;
  return o;
}

double best_by_enumeration(const LASProblem& p, const Box* box = nullptr) {
  double best = -1.0;
  testing_support::for_each_composition(p.n(), p.N, [&](const ExactDesign& w) {
    if (!is_feasible(w, p)) return;
    if (box && !box->contains(w)) return;
    best = std::max(best, criterion_d(information_matrix(p, w)));
  });
  return best;
}

}  // namespace

TEST_CASE("three-point line, size only") {
  auto p = line_problem({-1.0, 0.0, 1.0}, 2);
  const auto r = solve(p, exact_options());
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.design == ExactDesign({1, 0, 1}));
  CHECK(r.phi == doctest::Approx(2.0).epsilon(1e-12));
  const auto b = brute_force(*p);
  CHECK(b.design == ExactDesign({1, 0, 1}));
  CHECK(b.phi == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.ties.size() == 1);
}

TEST_CASE("two-point line, size only") {
  auto p = line_problem({0.0, 1.0}, 2);
  const auto r = solve(p, exact_options());
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.design == ExactDesign({1, 1}));
  CHECK(r.phi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(brute_force(*p).design == ExactDesign({1, 1}));
}

TEST_CASE("relaxation of the symmetric two-point problem") {
  auto p = line_problem({-1.0, 1.0}, 2);
  const auto cp = presolve(build_auxiliary(p));
  const auto rel = solve_relaxation(cp, Box::root(cp));
  REQUIRE(rel.feasible);
  CHECK_FALSE(rel.singular);
  CHECK(rel.w[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rel.w[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rel.log_det == doctest::Approx(std::log(4.0)).epsilon(1e-7));
  CHECK(rel.bound_log_det >= std::log(4.0) - 1e-12);
  CHECK(rel.bound_log_det <= std::log(4.0) + 1e-6);
}

TEST_CASE("forced inclusion beyond N is infeasible") {
  auto p = line_problem({0.0, 1.0, 2.0}, 2);
  p->constraints.push_back(constraints::inclusion({-1.0, 0.0, 0.0}, -3.0));
  const auto cp = presolve(build_auxiliary(p));
  const auto rel = solve_relaxation(cp, Box::root(cp));
  CHECK_FALSE(rel.feasible);
  const auto r = solve(p);
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK_FALSE(r.has_design());
  const auto b = brute_force(*p);
  CHECK(b.status == SolveStatus::Infeasible);
}

TEST_CASE("relaxation bound dominates integer designs") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto p = testing_support::random_problem(rng);
    const auto cp = presolve(build_auxiliary(p));
    const auto rel = solve_relaxation(cp, Box::root(cp));
    const double best = best_by_enumeration(*p);
    if (best < 0) continue;
    REQUIRE(rel.feasible);
    CHECK(rel.bound_phi >= best - 1e-8 * std::max(1.0, best));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("rounding keeps an integral relaxation") {
  auto p = line_problem({-1.0, 0.0, 1.0}, 4);
  const auto cp = presolve(build_auxiliary(p));
  RelaxationResult rel;
  rel.feasible = true;
  rel.w = {2.0, 0.0, 2.0};
  rel.s = {1.0, 0.0, 1.0};
  const auto w = rounding_incumbent(rel, cp, Box::root(cp));
  REQUIRE(w.has_value());
  CHECK(*w == ExactDesign({2, 0, 2}));
}

TEST_CASE("rounding a half-split relaxation") {
  auto p = line_problem({0.0, 1.0}, 2);
  const auto cp = presolve(build_auxiliary(p));
  RelaxationResult rel;
  rel.feasible = true;
  rel.w = {0.5, 1.5};
  rel.s = {1.0, 1.0};
  const auto w = rounding_incumbent(rel, cp, Box::root(cp));
  REQUIRE(w.has_value());
  // (0, 2) is singular, (1, 1) has det 1
  CHECK(*w == ExactDesign({1, 1}));
}

TEST_CASE("rounding incumbents are feasible and never exceed the optimum") {
  std::mt19937_64 rng(17);
  int produced = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto p = testing_support::random_problem(rng);
    const auto cp = presolve(build_auxiliary(p));
    const Box box = Box::root(cp);
    const auto rel = solve_relaxation(cp, box);
    const auto w = rounding_incumbent(rel, cp, box);
    if (!w) continue;
    ++produced;
    CHECK(is_feasible(*w, *p));
    const double phi = criterion_d(information_matrix(*p, *w));
    const double best = best_by_enumeration(*p);
    CHECK(phi <= best + 1e-9 * std::max(1.0, best));
  }
  CHECK(produced > 250);
}

TEST_CASE("exactness against brute force on random instances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 150; ++trial) {
    auto p = testing_support::random_problem(rng);
    const auto b = brute_force(*p);
    const auto r = solve(p, exact_options());
    CHECK(r.status == b.status);
    if (b.status == SolveStatus::Infeasible) continue;
    CHECK(std::abs(r.phi - b.phi) <= 1e-9 * std::max(1.0, b.phi));
    CHECK(is_feasible(r.design, *p));
    CHECK(r.bound >= r.phi - 1e-9);
  }
}

TEST_CASE("deterministic runs repeat the node sequence") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = testing_support::random_problem(rng);
    auto o = exact_options();
    o.record_trace = true;
    const auto aux = build_auxiliary(p);
    const auto a = branch_and_bound(aux, o);
    const auto b = branch_and_bound(aux, o);
    CHECK(a.status == b.status);
    CHECK(a.design == b.design);
    CHECK(a.phi == b.phi);
    CHECK(a.nodes == b.nodes);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      CHECK(a.trace[k].id == b.trace[k].id);
      CHECK(a.trace[k].bound == b.trace[k].bound);
    }
  }
}

TEST_CASE("incumbent value never decreases") {
  auto p = std::make_shared<LASProblem>();
  p->space = DesignSpace::grid(0, 100, 41);
  p->model = std::make_shared<CRModel>(p->space, CRParameters::nominal());
  p->N = 30;
  p->constraints.push_back(constraints::max_support_size(41, 3, 30));
  SolverOptions o;
  o.relative_gap = 1e-4;
  o.node_limit = 200;
  const auto r = solve(p, o);
  REQUIRE_FALSE(r.incumbents.empty());
  for (std::size_t k = 1; k < r.incumbents.size(); ++k) CHECK(r.incumbents[k].phi >= r.incumbents[k - 1].phi);
  CHECK(r.incumbents.back().phi == doctest::Approx(r.phi));
  CHECK(r.design.support_size() <= 3);
}

TEST_CASE("zero trials give the empty design") {
  auto p = line_problem({0.0, 1.0, 2.0}, 0);
  const auto r = solve(p);
  CHECK(r.design == ExactDesign::zeros(3));
  CHECK(r.phi == 0.0);
  const auto b = brute_force(*p);
  CHECK(b.design == ExactDesign::zeros(3));
  CHECK(b.phi == 0.0);
}

TEST_CASE("brute force refuses oversized spaces") {
  auto p = std::make_shared<LASProblem>();
  p->space = DesignSpace::grid(0, 100, 101);
  p->model = std::make_shared<CRModel>(p->space, CRParameters::nominal());
  p->N = 100;
  CHECK(composition_count(101, 100) > 1e50);
  CHECK(composition_count(3, 2) == doctest::Approx(6.0));
  try {
    brute_force(*p);
    FAIL("expected a refusal");
  } catch (const std::length_error& e) {
    CHECK(std::string(e.what()).find("e+") != std::string::npos);
  }
}

TEST_CASE("brute force lists ties") {
  auto p = line_problem({-1.0, 1.0}, 3);
  const auto b = brute_force(*p);
  CHECK(b.status == SolveStatus::Optimal);
  CHECK(b.ties.size() == 2);
  // (2,1) and (1,2) both give det 8
  CHECK(b.phi == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("all designs infeasible") {
  auto p = line_problem({0.0, 1.0}, 2);
  p->constraints.push_back(constraints::exclusion({1.0, 1.0}, 1.0));
  CHECK(brute_force(*p).status == SolveStatus::Infeasible);
  CHECK(solve(p).status == SolveStatus::Infeasible);
}

TEST_CASE("auxiliary brute force matches the primary one") {
  std::mt19937_64 rng(31);
  testing_support::InstanceShape shape;
  shape.max_n = 4;
  shape.max_N = 4;
  for (int trial = 0; trial < 40; ++trial) {
    auto p = testing_support::random_problem(rng, shape);
    const auto a = brute_force(build_auxiliary(p));
    const auto b = brute_force(*p);
    CHECK(a.status == b.status);
    if (b.status != SolveStatus::Infeasible) CHECK(std::abs(a.phi - b.phi) <= 1e-10 * std::max(1.0, b.phi));
  }
}

TEST_CASE("parallel search agrees with the serial one") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = testing_support::random_problem(rng);
    auto serial = exact_options();
    auto parallel = exact_options();
    parallel.deterministic = false;
    parallel.threads = 4;
    const auto a = solve(p, serial);
    const auto b = solve(p, parallel);
    CHECK(a.status == b.status);
    if (a.status != SolveStatus::Infeasible) CHECK(std::abs(a.phi - b.phi) <= 1e-9 * std::max(1.0, a.phi));
  }
}

TEST_CASE("node bounds cover every completion inside the node box") {
  std::mt19937_64 rng(41);
  std::size_t nodes_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto p = testing_support::random_problem(rng);
    auto o = exact_options();
    o.record_trace = true;
    const auto aux = build_auxiliary(p);
    const auto r = branch_and_bound(aux, o);
    for (std::size_t k = 0; k < r.trace.size(); k += 3) {
      const auto& node = r.trace[k];
      const double best = best_by_enumeration(*p, &node.box);
      if (best < 0) continue;
      CHECK(node.bound >= best - 1e-8 * std::max(1.0, best));
      ++nodes_checked;
    }
  }
  CHECK(nodes_checked > 30);
}

TEST_CASE("explicit limits are reported") {
  auto p = std::make_shared<LASProblem>();
  p->space = DesignSpace::grid(0, 100, 31);
  p->model = std::make_shared<CRModel>(p->space, CRParameters::nominal());
  p->N = 20;
  p->constraints.push_back(constraints::max_support_size(31, 2, 20));
  SolverOptions o;
  o.relative_gap = 0.0;
  o.absolute_gap = 0.0;
  o.node_limit = 1;
  const auto r = solve(p, o);
  CHECK((r.status == SolveStatus::NodeLimit || r.status == SolveStatus::Optimal));
  CHECK(to_string(SolveStatus::GapLimit) == "gap_limit");
  CHECK(to_string(SolveStatus::Infeasible) == "infeasible");
}
