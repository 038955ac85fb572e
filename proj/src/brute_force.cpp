#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lasdesign/solver.hpp"

namespace lasdesign {

double composition_count(std::size_t n, Count N) {
  if (n == 0) return N == 0 ? 1.0 : 0.0;
  // C(N + n - 1, n - 1) via lgamma to stay finite for large inputs.
  const double a = static_cast<double>(N) + static_cast<double>(n) - 1.0;
  const double k = static_cast<double>(n) - 1.0;
  return std::round(std::exp(std::lgamma(a + 1.0) - std::lgamma(k + 1.0) - std::lgamma(a - k + 1.0)));
}

namespace {

struct Tracker {
  double tie_tolerance;
  SolverResult res;
  bool any = false;

  void offer(const ExactDesign& w, double phi) {
    if (!any || phi > res.phi + tie_tolerance * std::max(1.0, res.phi)) {
      any = true;
      res.phi = phi;
      res.design = w;
      res.ties.assign(1, w);
    } else if (std::abs(phi - res.phi) <= tie_tolerance * std::max(1.0, res.phi)) {
      res.ties.push_back(w);
      if (phi > res.phi) {
        res.phi = phi;
        res.design = w;
      }
    }
  }

  SolverResult finish(double seconds) {
    res.seconds = seconds;
    if (!any) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    res.status = SolveStatus::Optimal;
    res.bound = res.phi;
    res.root_bound = res.phi;
    res.gap = 0.0;
    return res;
  }
};

void check_cap(double count, double cap) {
  if (count > cap) {
    std::ostringstream os;
    os << "brute force: about " << count << " designs to enumerate exceeds the cap of " << cap;
    throw std::length_error(os.str());
  }
}

}  // namespace

SolverResult brute_force(const LASProblem& problem, const BruteForceOptions& options) {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = problem.n();
  check_cap(composition_count(n, problem.N), options.cap);

  std::vector<Matrix> H;
  H.reserve(n);
  for (std::size_t i = 0; i < n; ++i) H.push_back(problem.model->elementary(i));
  const auto m = static_cast<Eigen::Index>(problem.m());

  Tracker t{options.tie_tolerance, {}};
  ExactDesign w = ExactDesign::zeros(n);
  std::vector<Matrix> partial(n + 1, Matrix::Zero(m, m));
  std::uint64_t visited = 0;

  // Depth-first over compositions with the running information matrix.
  auto recurse = [&](auto&& self, std::size_t i, Count left) -> void {
    if (i + 1 == n) {
      w.counts[i] = left;
      const Matrix M = partial[i] + static_cast<double>(left) * H[i];
      ++visited;
      if (is_feasible(w, problem)) t.offer(w, criterion_d(M));
      return;
    }
    for (Count v = 0; v <= left; ++v) {
      w.counts[i] = v;
      partial[i + 1] = partial[i] + static_cast<double>(v) * H[i];
      self(self, i + 1, left - v);
    }
    w.counts[i] = 0;
  };
  if (n > 0) recurse(recurse, 0, problem.N);

  SolverResult res = t.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  res.nodes = visited;
  return res;
}

SolverResult brute_force(const AuxiliaryProblem& aux, const BruteForceOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Tracker t{options.tie_tolerance, {}};
  std::uint64_t visited = 0;
  for_each_aux_feasible(
      aux,
      [&](const AuxiliaryDesign& w) {
        ++visited;
        t.offer(kappa(w, aux), aux_objective(w, aux));
      },
      options.cap);
  SolverResult res = t.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  res.nodes = visited;
  return res;
}

SolverResult solve(std::shared_ptr<const LASProblem> problem, const SolverOptions& options, FactorRoute route) {
  if (!problem) throw std::invalid_argument("solve: null problem");
  problem->validate();
  const AuxiliaryProblem aux = build_auxiliary(problem, route);
  SolverResult res = branch_and_bound(aux, options);
  if (res.design.size() > 0) {
    const auto report = check_feasible(res.design, *problem);
    if (!report.feasible) throw std::logic_error("solve: returned design violates the source problem");
  }
  return res;
}

}  // namespace lasdesign
