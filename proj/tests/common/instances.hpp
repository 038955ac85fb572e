#ifndef LASDESIGN_TESTS_INSTANCES_HPP
#define LASDESIGN_TESTS_INSTANCES_HPP

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "lasdesign/core.hpp"
#include "lasdesign/models.hpp"

namespace testing_support {

using namespace lasdesign;

inline Matrix random_psd(std::mt19937_64& rng, std::size_t m, std::size_t rank, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix G(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(rank));
  for (Eigen::Index a = 0; a < G.rows(); ++a)
    for (Eigen::Index b = 0; b < G.cols(); ++b) G(a, b) = g(rng);
  return G * G.transpose();
}

inline ExactDesign random_design(std::mt19937_64& rng, std::size_t n, Count N) {
  ExactDesign w = ExactDesign::zeros(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (Count k = 0; k < N; ++k) ++w.counts[pick(rng)];
  return w;
}

// Every design of size N on n points, in lexicographic order.
inline void for_each_composition(std::size_t n, Count N, const std::function<void(const ExactDesign&)>& visit) {
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
    w.counts[i] = 0;
  };
  if (n > 0) rec(0, N);
}

struct InstanceShape {
  std::size_t max_n = 6;
  Count max_N = 5;
  std::size_t max_m = 3;
  std::size_t max_r = 2;
  std::size_t max_rows = 3;
};

// Random raw-matrix problem with small integer LAS rows. Right-hand sides are
// set from a random design so most instances are feasible; some are not.
inline std::shared_ptr<LASProblem> random_problem(std::mt19937_64& rng, const InstanceShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> dn(2, shape.max_n), dm(1, shape.max_m), dr(1, shape.max_r),
      drows(0, shape.max_rows);
  std::uniform_int_distribution<Count> dN(1, shape.max_N);
  std::uniform_int_distribution<int> coef(-2, 2), slack(-1, 2), coin(0, 3);
  const std::size_t n = dn(rng), m = dm(rng), r = std::min(dr(rng), m);
  const Count N = dN(rng);

  std::vector<Matrix> H;
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> rank(coin(rng) == 0 ? 0 : 1, r);
    H.push_back(random_psd(rng, m, rank(rng)));
  }
  auto p = std::make_shared<LASProblem>();
  p->space = DesignSpace::grid(0.0, static_cast<double>(n - 1), n);
  p->model = std::make_shared<RawMatrixModel>(H, r);
  p->N = N;
  const std::size_t rows = drows(rng);
  for (std::size_t k = 0; k < rows; ++k) {
    std::vector<double> a(n), c(n);
    bool nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = coin(rng) == 0 ? 0.0 : coef(rng);
      c[i] = coin(rng) < 2 ? 0.0 : coef(rng);
      nonzero = nonzero || a[i] != 0.0 || c[i] != 0.0;
    }
    if (!nonzero) c[0] = 1.0;
    LinearSparsityConstraint row{a, c, 0.0, Sense::LessEqual, "random"};
    row.b = row.evaluate(random_design(rng, n, N)) + slack(rng);
    p->constraints.push_back(row);
  }
  return p;
}

}  // namespace testing_support

#endif  // LASDESIGN_TESTS_INSTANCES_HPP
