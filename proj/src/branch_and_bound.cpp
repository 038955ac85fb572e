#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>

#include "lasdesign/solver.hpp"

namespace lasdesign {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  std::uint64_t id = 0;
  std::uint64_t parent = 0;
  std::size_t depth = 0;
  Box box;
  RelaxationResult relax;

  double bound() const { return relax.bound_phi; }
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound() != b.bound()) return a.bound() < b.bound();
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

enum class Branch { None, Indicator, Count };

struct BranchChoice {
  Branch kind = Branch::None;
  std::size_t var = 0;
  double value = 0.0;
};

BranchChoice choose_branch(const CompiledProblem& p, const Node& node, double tol) {
  const auto& box = node.box;
  BranchChoice best;
  double best_frac = tol;
  for (std::size_t i = 0; i < p.n; ++i) {
    if (!p.indicator_used[i] || box.s_lo[i] == box.s_hi[i]) continue;
    const double v = node.relax.s[i];
    const double f = std::abs(v - std::round(v));
    if (f > best_frac) {
      best_frac = f;
      best = {Branch::Indicator, i, v};
    }
  }
  if (best.kind != Branch::None) return best;
  for (std::size_t i = 0; i < p.n; ++i) {
    if (box.w_lo[i] == box.w_hi[i]) continue;
    const double v = node.relax.w[i];
    const double f = std::abs(v - std::round(v));
    if (f > best_frac) {
      best_frac = f;
      best = {Branch::Count, i, v};
    }
  }
  if (best.kind != Branch::None) return best;
  // Integral but unresolved: split the first free variable.
  for (std::size_t i = 0; i < p.n; ++i)
    if (p.indicator_used[i] && box.s_lo[i] < box.s_hi[i]) return {Branch::Indicator, i, node.relax.s[i]};
  for (std::size_t i = 0; i < p.n; ++i)
    if (box.w_lo[i] < box.w_hi[i]) {
      double v = std::round(node.relax.w[i]);
      v = v < static_cast<double>(box.w_hi[i]) ? v + 0.5 : v - 0.5;
      return {Branch::Count, i, v};
    }
  return best;
}

std::vector<Box> split(const Box& box, const BranchChoice& choice) {
  Box down = box, up = box;
  const std::size_t i = choice.var;
  if (choice.kind == Branch::Indicator) {
    down.s_hi[i] = 0;
    up.s_lo[i] = 1;
  } else {
    down.w_hi[i] = static_cast<Count>(std::floor(choice.value));
    up.w_lo[i] = static_cast<Count>(std::floor(choice.value)) + 1;
  }
  std::vector<Box> out;
  for (Box* b : {&down, &up}) {
    b->tighten();
    if (!b->empty()) out.push_back(std::move(*b));
  }
  return out;
}

bool all_fixed(const Box& box) {
  for (std::size_t i = 0; i < box.w_lo.size(); ++i)
    if (box.w_lo[i] != box.w_hi[i]) return false;
  return true;
}

bool integral(const RelaxationResult& r, const CompiledProblem& p, double tol) {
  for (std::size_t i = 0; i < p.n; ++i) {
    if (std::abs(r.w[i] - std::round(r.w[i])) > tol) return false;
    if (p.indicator_used[i] && std::abs(r.s[i] - std::round(r.s[i])) > tol) return false;
  }
  return true;
}

class Search {
 public:
  Search(const CompiledProblem& p, const SolverOptions& o) : p_(p), opt_(o), start_(Clock::now()) {}

  SolverResult run() {
    SolverResult res;
    Node root;
    root.id = next_id_++;
    root.box = Box::root(p_);
    if (!root.box.empty()) root.relax = solve_relaxation(p_, root.box, opt_.relaxation);
    if (root.box.empty() || !root.relax.feasible) {
      res.status = SolveStatus::Infeasible;
      res.nodes = 1;
      res.seconds = elapsed();
      return res;
    }
    res.root_bound = root.bound();
    heuristics(root);
    // a root closed by its own heuristics still counts as one node
    std::uint64_t closed_root = 0;
    if (!prunable(root.bound())) queue_.push(std::move(root));
    else {
      max_pruned_ = std::max(max_pruned_, root.bound());
      closed_root = 1;
    }

    const unsigned workers = opt_.deterministic ? 1u : std::max(1u, opt_.threads);
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back([this] { worker(); });
      for (auto& th : pool) th.join();
    }

    res.nodes = processed_ + closed_root;
    res.incumbents = std::move(events_);
    res.trace = std::move(trace_);
    double bound = std::max(inc_phi_, max_pruned_);
    if (!queue_.empty()) bound = std::max(bound, queue_.top().bound());
    bound = std::max(bound, in_flight_bound_);
    res.seconds = elapsed();
    if (!incumbent_) {
      res.status = stop_ ? stop_status_ : SolveStatus::Infeasible;
      res.bound = stop_ ? bound : 0.0;
      res.gap = std::numeric_limits<double>::infinity();
      return res;
    }
    res.design = *incumbent_;
    res.phi = inc_phi_;
    res.bound = std::max(bound, inc_phi_);
    const double diff = res.bound - inc_phi_;
    res.gap = inc_phi_ > 0.0 ? diff / inc_phi_ : (diff <= opt_.absolute_gap ? 0.0 : std::numeric_limits<double>::infinity());
    if (stop_) res.status = stop_status_;
    else if (res.gap <= kOptimalGap || diff <= opt_.absolute_gap) res.status = SolveStatus::Optimal;
    else res.status = SolveStatus::GapLimit;
    return res;
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  // Caller holds the lock (or runs single-threaded).
  bool prunable(double bound) const {
    if (!incumbent_) return false;
    return bound <= inc_phi_ + std::max(opt_.relative_gap * inc_phi_, opt_.absolute_gap);
  }

  void offer(const ExactDesign& w, std::uint64_t node) {
    if (!compiled_feasible(w, p_)) return;
    const double phi = compiled_phi(w, p_);
    std::lock_guard<std::mutex> lock(mu_);
    if (!incumbent_ || phi > inc_phi_) {
      incumbent_ = w;
      inc_phi_ = phi;
      events_.push_back({node, phi});
    }
  }

  void heuristics(const Node& node) {
    if (node.relax.singular) {
      // Any feasible point is worth Phi = 0; rounding still supplies one.
      std::lock_guard<std::mutex> lock(mu_);
      if (incumbent_) return;
    }
    if (auto w = rounding_incumbent(node.relax, p_, node.box, opt_.rounding_passes)) offer(*w, node.id);
  }

  void expand(Node& node, std::vector<Node>& children) {
    const double tol = opt_.integrality_tolerance;
    if (all_fixed(node.box)) {
      offer(ExactDesign(node.box.w_lo), node.id);
      return;
    }
    if (!node.relax.singular && integral(node.relax, p_, tol)) {
      std::vector<Count> w(p_.n);
      for (std::size_t i = 0; i < p_.n; ++i) w[i] = static_cast<Count>(std::llround(node.relax.w[i]));
      offer(ExactDesign(std::move(w)), node.id);
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (prunable(node.bound())) {
        max_pruned_ = std::max(max_pruned_, node.bound());
        return;
      }
    }
    const BranchChoice choice = choose_branch(p_, node, tol);
    if (choice.kind == Branch::None) return;
    for (Box& b : split(node.box, choice)) {
      Node child;
      child.parent = node.id;
      child.depth = node.depth + 1;
      child.box = std::move(b);
      child.relax = solve_relaxation(p_, child.box, opt_.relaxation);
      if (!child.relax.feasible) continue;
      // A child cannot exceed its parent's bound.
      if (child.relax.bound_phi > node.bound()) child.relax.bound_phi = node.bound();
      heuristics(child);
      children.push_back(std::move(child));
    }
  }

  void worker() {
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      cv_.wait(lock, [this] { return stop_ || !queue_.empty() || busy_ == 0; });
      if (stop_ || (queue_.empty() && busy_ == 0)) break;
      if (queue_.empty()) continue;
      if (opt_.time_limit > 0.0 && elapsed() >= opt_.time_limit) {
        halt(SolveStatus::TimeLimit);
        break;
      }
      if (opt_.node_limit > 0 && processed_ >= opt_.node_limit) {
        halt(SolveStatus::NodeLimit);
        break;
      }
      Node node = queue_.top();
      queue_.pop();
      if (prunable(node.bound())) {
        // Best-first: everything left is dominated as well.
        max_pruned_ = std::max(max_pruned_, node.bound());
        while (!queue_.empty()) {
          max_pruned_ = std::max(max_pruned_, queue_.top().bound());
          queue_.pop();
        }
        cv_.notify_all();
        continue;
      }
      ++processed_;
      if (opt_.record_trace) trace_.push_back({node.id, node.parent, node.depth, node.bound(), node.box});
      ++busy_;
      in_flight_bound_ = std::max(in_flight_bound_, node.bound());
      lock.unlock();

      std::vector<Node> children;
      expand(node, children);

      lock.lock();
      --busy_;
      for (auto& c : children) {
        c.id = next_id_++;
        if (prunable(c.bound())) max_pruned_ = std::max(max_pruned_, c.bound());
        else queue_.push(std::move(c));
      }
      if (busy_ == 0) in_flight_bound_ = -std::numeric_limits<double>::infinity();
      cv_.notify_all();
    }
    cv_.notify_all();
  }

  void halt(SolveStatus s) {
    if (!stop_) {
      stop_ = true;
      stop_status_ = s;
    }
    cv_.notify_all();
  }

  const CompiledProblem& p_;
  const SolverOptions& opt_;
  Clock::time_point start_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
  std::uint64_t next_id_ = 0;
  std::uint64_t processed_ = 0;
  unsigned busy_ = 0;
  bool stop_ = false;
  SolveStatus stop_status_ = SolveStatus::NodeLimit;
  double in_flight_bound_ = -std::numeric_limits<double>::infinity();

  std::optional<ExactDesign> incumbent_;
  double inc_phi_ = -1.0;
  double max_pruned_ = -std::numeric_limits<double>::infinity();
  std::vector<IncumbentEvent> events_;
  std::vector<NodeTrace> trace_;
};

}  // namespace

SolverResult branch_and_bound(const AuxiliaryProblem& aux, const SolverOptions& options) {
  const CompiledProblem p = presolve(aux);
  Search search(p, options);
  SolverResult res = search.run();
  if (res.design.size() == 0) return res;

  // Back to primary coordinates through the auxiliary problem.
  AuxiliaryDesign lifted;
  lifted.counts.assign(aux.aux_size(), 0);
  for (std::size_t i = 0; i < aux.n; ++i) {
    for (std::size_t j = 0; j < aux.r; ++j) lifted.counts[aux.replica_index(i, j)] = res.design.counts[i];
    lifted.counts[aux.label_index(i)] = res.design.counts[i] > 0 ? 1 : 0;
  }
  res.design = kappa(lifted, aux);
  return res;
}

}  // namespace lasdesign
