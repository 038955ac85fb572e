#include "lasdesign/reduce.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lasdesign {

std::string to_string(AuxRowKind kind) {
  switch (kind) {
    case AuxRowKind::ReplicaEquality: return "replica_eq";
    case AuxRowKind::LabelBound: return "label_bound";
    case AuxRowKind::LinkLower: return "link_lower";
    case AuxRowKind::LinkUpper: return "link_upper";
    case AuxRowKind::Las: return "las";
  }
  return "las";
}

AuxRowKind aux_row_kind_from_string(const std::string& s) {
  if (s == "replica_eq") return AuxRowKind::ReplicaEquality;
  if (s == "label_bound") return AuxRowKind::LabelBound;
  if (s == "link_lower") return AuxRowKind::LinkLower;
  if (s == "link_upper") return AuxRowKind::LinkUpper;
  if (s == "las") return AuxRowKind::Las;
  throw std::invalid_argument("unknown auxiliary row kind '" + s + "'");
}

bool AuxiliaryProblem::same_structure(const AuxiliaryProblem& o) const {
  if (n != o.n || r != o.r || m != o.m || N != o.N) return false;
  if (points.size() != o.points.size() || rows != o.rows || !(size_row == o.size_row)) return false;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& a = points[k];
    const auto& b = o.points[k];
    if (a.kind != b.kind || a.point != b.point || a.replica != b.replica || a.name != b.name) return false;
  }
  if (regressors.size() != o.regressors.size()) return false;
  for (std::size_t k = 0; k < regressors.size(); ++k)
    if (regressors[k].size() != o.regressors[k].size() || regressors[k] != o.regressors[k]) return false;
  return true;
}

// ---------------------------------------------------------------------------

AuxiliaryProblem build_auxiliary(std::shared_ptr<const LASProblem> problem, FactorRoute route) {
  if (!problem) throw std::invalid_argument("null problem");
  problem->validate();
  return build_auxiliary(problem, factorize_model(*problem->model, problem->model->rank_bound(), route));
}

AuxiliaryProblem build_auxiliary(std::shared_ptr<const LASProblem> problem, const std::vector<RankFactors>& factors) {
  if (!problem) throw std::invalid_argument("null problem");
  problem->validate();
  const std::size_t n = problem->n();
  if (factors.size() != n)
    throw std::invalid_argument("missing factors: got " + std::to_string(factors.size()) + " for " +
                                std::to_string(n) + " points");
  const std::size_t r = factors.front().size();
  if (r == 0) throw std::invalid_argument("rank bound must be positive");
  const auto m = static_cast<Eigen::Index>(problem->m());
  for (std::size_t i = 0; i < n; ++i) {
    if (factors[i].size() != r)
      throw std::invalid_argument("rank mismatch: point " + std::to_string(i + 1) + " has " +
                                  std::to_string(factors[i].size()) + " factors, expected " + std::to_string(r));
    for (const auto& f : factors[i].vectors)
      if (f.size() != m) throw std::invalid_argument("factor dimension differs from model dimension");
  }

  AuxiliaryProblem aux;
  aux.n = n;
  aux.r = r;
  aux.m = problem->m();
  aux.N = problem->N;
  aux.origin = problem;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      aux.points.push_back(AuxPoint{AuxPoint::Kind::Replica, i, j,
                                    "x" + std::to_string(i + 1) + "_" + std::to_string(j + 1)});
      aux.regressors.push_back(factors[i].vectors[j]);
    }
  for (std::size_t i = 0; i < n; ++i) {
    aux.points.push_back(AuxPoint{AuxPoint::Kind::Label, i, 0, "z" + std::to_string(i + 1)});
    aux.regressors.push_back(Vector::Zero(m));
  }

  const double bigM = static_cast<double>(problem->N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j < r; ++j)
      aux.rows.push_back(AuxRow{AuxRowKind::ReplicaEquality, Sense::Equal,
                                {{aux.replica_index(i, 0), 1.0}, {aux.replica_index(i, j), -1.0}}, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    aux.rows.push_back(AuxRow{AuxRowKind::LabelBound, Sense::LessEqual, {{aux.label_index(i), 1.0}}, 1.0});
  for (std::size_t i = 0; i < n; ++i) {
    aux.rows.push_back(AuxRow{AuxRowKind::LinkLower, Sense::LessEqual,
                              {{aux.replica_index(i, 0), -1.0}, {aux.label_index(i), 1.0}}, 0.0});
    aux.rows.push_back(AuxRow{AuxRowKind::LinkUpper, Sense::LessEqual,
                              {{aux.replica_index(i, 0), 1.0}, {aux.label_index(i), -bigM}}, 0.0});
  }
  for (const auto& row : normalize(problem->constraints)) {
    AuxRow out{AuxRowKind::Las, Sense::LessEqual, {}, row.b};
    for (std::size_t i = 0; i < n; ++i)
      if (row.a[i] != 0.0) out.terms.emplace_back(aux.replica_index(i, 0), row.a[i]);
    for (std::size_t i = 0; i < n; ++i)
      if (row.c[i] != 0.0) out.terms.emplace_back(aux.label_index(i), row.c[i]);
    aux.rows.push_back(std::move(out));
  }
  aux.size_row.kind = AuxRowKind::Las;
  aux.size_row.sense = Sense::Equal;
  aux.size_row.rhs = bigM;
  for (std::size_t i = 0; i < n; ++i) aux.size_row.terms.emplace_back(aux.replica_index(i, 0), 1.0);
  return aux;
}

// ---------------------------------------------------------------------------

namespace {

double row_value(const AuxRow& row, const std::vector<Count>& counts) {
  double v = 0.0;
  for (const auto& [idx, coef] : row.terms) v += coef * static_cast<double>(counts[idx]);
  return v;
}

bool row_ok(const AuxRow& row, const std::vector<Count>& counts) {
  const double v = row_value(row, counts);
  if (row.sense == Sense::Equal) return std::abs(v - row.rhs) <= kFeasibilityTolerance;
  return v <= row.rhs + kFeasibilityTolerance;
}

}  // namespace

bool aux_feasible(const AuxiliaryDesign& w, const AuxiliaryProblem& aux) {
  if (w.counts.size() != aux.aux_size()) return false;
  for (Count c : w.counts)
    if (c < 0) return false;
  if (!row_ok(aux.size_row, w.counts)) return false;
  for (const auto& row : aux.rows)
    if (!row_ok(row, w.counts)) return false;
  return true;
}

ExactDesign kappa(const AuxiliaryDesign& w, const AuxiliaryProblem& aux) {
  if (!aux_feasible(w, aux)) throw std::invalid_argument("kappa: auxiliary design is infeasible");
  ExactDesign out = ExactDesign::zeros(aux.n);
  for (std::size_t i = 0; i < aux.n; ++i) out.counts[i] = w.counts[aux.replica_index(i, 0)];
  return out;
}

AuxiliaryDesign lift(const ExactDesign& w, const AuxiliaryProblem& aux) {
  if (aux.origin) {
    if (!is_feasible(w, *aux.origin)) throw std::invalid_argument("lift: design is infeasible for the source problem");
  } else if (w.size() != aux.n) {
    throw std::invalid_argument("lift: design length differs from the auxiliary problem");
  }
  AuxiliaryDesign out{std::vector<Count>(aux.aux_size(), 0)};
  for (std::size_t i = 0; i < aux.n; ++i) {
    for (std::size_t j = 0; j < aux.r; ++j) out.counts[aux.replica_index(i, j)] = w.counts[i];
    out.counts[aux.label_index(i)] = w.counts[i] > 0 ? 1 : 0;
  }
  if (!aux.origin && !aux_feasible(out, aux)) throw std::invalid_argument("lift: lifted design is infeasible");
  return out;
}

Matrix aux_information(const AuxiliaryDesign& w, const AuxiliaryProblem& aux) {
  const auto m = static_cast<Eigen::Index>(aux.m);
  Matrix M = Matrix::Zero(m, m);
  for (std::size_t k = 0; k < aux.aux_size(); ++k)
    if (w.counts[k] != 0) M.noalias() += static_cast<double>(w.counts[k]) * aux.regressors[k] * aux.regressors[k].transpose();
  return M;
}

double aux_objective(const AuxiliaryDesign& w, const AuxiliaryProblem& aux) {
  if (w.counts.size() != aux.aux_size()) throw std::invalid_argument("aux_objective: length mismatch");
  return criterion_d(aux_information(w, aux));
}

void for_each_aux_feasible(const AuxiliaryProblem& aux, const std::function<void(const AuxiliaryDesign&)>& visit,
                           double cap) {
  const std::size_t n = aux.n;
  const Count N = aux.N;
  // C(N+n-1, n-1) * (N+1)^(n(r-1)) * 2^n
  double estimate = 1.0;
  for (std::size_t k = 1; k < n; ++k) estimate *= static_cast<double>(N + static_cast<Count>(k)) / static_cast<double>(k);
  estimate *= std::pow(static_cast<double>(N + 1), static_cast<double>(n * (aux.r - 1)));
  estimate *= std::pow(2.0, static_cast<double>(n));
  if (estimate > cap) {
    std::ostringstream os;
    os << "auxiliary enumeration needs about " << estimate << " candidates (cap " << cap << ")";
    throw std::length_error(os.str());
  }

  // Free variables: replicas j >= 1 and labels, in aux order.
  std::vector<std::size_t> free_vars;
  std::vector<Count> free_max;
  for (std::size_t k = 0; k < aux.aux_size(); ++k) {
    const auto& p = aux.points[k];
    if (p.kind == AuxPoint::Kind::Replica && p.replica == 0) continue;
    free_vars.push_back(k);
    free_max.push_back(p.kind == AuxPoint::Kind::Label ? 1 : N);
  }

  AuxiliaryDesign w{std::vector<Count>(aux.aux_size(), 0)};
  std::vector<Count> comp(n, 0);
  // Compositions of N over n parts in lexicographic order.
  std::function<void(std::size_t, Count)> compose = [&](std::size_t i, Count left) {
    if (i + 1 == n) {
      comp[i] = left;
      for (std::size_t p = 0; p < n; ++p) w.counts[aux.replica_index(p, 0)] = comp[p];
      for (std::size_t f : free_vars) w.counts[f] = 0;
      while (true) {
        if (aux_feasible(w, aux)) visit(w);
        std::size_t pos = 0;
        while (pos < free_vars.size()) {
          if (w.counts[free_vars[pos]] < free_max[pos]) {
            ++w.counts[free_vars[pos]];
            break;
          }
          w.counts[free_vars[pos]] = 0;
          ++pos;
        }
        if (pos == free_vars.size()) break;
      }
      return;
    }
    for (Count v = 0; v <= left; ++v) {
      comp[i] = v;
      compose(i + 1, left - v);
    }
  };
  if (n > 0) compose(0, N);
}

// ---------------------------------------------------------------------------

namespace {

const char* sense_token(Sense s) { return s == Sense::Equal ? "=" : "<="; }

Sense parse_sense(const std::string& tok, std::size_t line) {
  if (tok == "=") return Sense::Equal;
  if (tok == "<=") return Sense::LessEqual;
  throw std::runtime_error("line " + std::to_string(line) + ": expected '<=' or '=', got '" + tok + "'");
}

void write_terms(std::ostream& os, const SparseTerms& terms) {
  os << ' ' << terms.size();
  for (const auto& [idx, v] : terms) os << ' ' << idx << ':' << v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  // Next non-blank, non-comment line split into tokens.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> toks;
      std::string t;
      while (ss >> t) toks.push_back(t);
      if (!toks.empty()) return toks;
    }
    fail("unexpected end of file");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("auxiliary file line " + std::to_string(line_no_) + ": " + what);
  }
  std::size_t line() const { return line_no_; }

  std::vector<std::string> expect(const std::string& keyword, std::size_t min_tokens) {
    auto toks = next();
    if (toks.front() != keyword) fail("expected '" + keyword + "', got '" + toks.front() + "'");
    if (toks.size() < min_tokens) fail("too few fields after '" + keyword + "'");
    return toks;
  }

  double number(const std::string& tok) const {
    double v = 0.0;
    std::istringstream ss(tok);
    ss >> v;
    if (ss.fail() || !ss.eof()) fail("invalid number '" + tok + "'");
    return v;
  }
  std::size_t index(const std::string& tok) const {
    std::size_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail("invalid index '" + tok + "'");
    return v;
  }

 private:
  std::istream& is_;
  std::size_t line_no_ = 0;
};

SparseTerms read_terms(LineReader& lr, const std::vector<std::string>& toks, std::size_t at, std::size_t limit) {
  if (toks.size() <= at) lr.fail("missing term count");
  const std::size_t nnz = lr.index(toks[at]);
  if (toks.size() != at + 1 + nnz) lr.fail("term count does not match the number of terms");
  SparseTerms terms;
  for (std::size_t k = 0; k < nnz; ++k) {
    const auto& t = toks[at + 1 + k];
    const auto colon = t.find(':');
    if (colon == std::string::npos) lr.fail("term '" + t + "' is not index:value");
    const std::size_t idx = lr.index(t.substr(0, colon));
    if (idx >= limit) lr.fail("term references variable " + std::to_string(idx) + " out of range");
    terms.emplace_back(idx, lr.number(t.substr(colon + 1)));
  }
  return terms;
}

}  // namespace

void write_auxiliary(std::ostream& os, const AuxiliaryProblem& aux) {
  const auto old_precision = os.precision(17);
  os << "# auxiliary univariate-response design problem\n";
  os << "LASAUX 1\n";
  os << "HEADER n " << aux.n << " r " << aux.r << " N " << aux.N << " m " << aux.m << '\n';
  os << "VARIABLES " << aux.aux_size() << '\n';
  for (std::size_t k = 0; k < aux.aux_size(); ++k) {
    const auto& p = aux.points[k];
    if (p.kind == AuxPoint::Kind::Replica)
      os << k << ' ' << p.name << " replica " << (p.point + 1) << ' ' << (p.replica + 1) << " integer 0 " << aux.N
         << '\n';
    else
      os << k << ' ' << p.name << " label " << (p.point + 1) << " binary 0 1\n";
  }
  os << "ROWS " << aux.rows.size() << '\n';
  for (std::size_t k = 0; k < aux.rows.size(); ++k) {
    const auto& row = aux.rows[k];
    os << k << ' ' << to_string(row.kind) << ' ' << sense_token(row.sense) << ' ' << row.rhs;
    write_terms(os, row.terms);
    os << '\n';
  }
  os << "SIZE " << sense_token(aux.size_row.sense) << ' ' << aux.size_row.rhs;
  write_terms(os, aux.size_row.terms);
  os << '\n';
  os << "REGRESSORS " << aux.regressors.size() << '\n';
  for (std::size_t k = 0; k < aux.regressors.size(); ++k) {
    os << k;
    for (Eigen::Index c = 0; c < aux.regressors[k].size(); ++c) os << ' ' << aux.regressors[k][c];
    os << '\n';
  }
  os << "END\n";
  os.precision(old_precision);
}

void write_auxiliary(const std::string& path, const AuxiliaryProblem& aux) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_auxiliary(os, aux);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

AuxiliaryProblem read_auxiliary(std::istream& is) {
  LineReader lr(is);
  AuxiliaryProblem aux;

  auto toks = lr.expect("LASAUX", 2);
  if (toks[1] != "1") lr.fail("unsupported format version " + toks[1]);

  toks = lr.expect("HEADER", 9);
  if (toks[1] != "n" || toks[3] != "r" || toks[5] != "N" || toks[7] != "m") lr.fail("malformed HEADER");
  aux.n = lr.index(toks[2]);
  aux.r = lr.index(toks[4]);
  aux.N = static_cast<Count>(lr.index(toks[6]));
  aux.m = lr.index(toks[8]);

  toks = lr.expect("VARIABLES", 2);
  const std::size_t nvars = lr.index(toks[1]);
  if (nvars != aux.n * aux.r + aux.n) lr.fail("variable count differs from n*r + n");
  for (std::size_t k = 0; k < nvars; ++k) {
    toks = lr.next();
    if (toks.size() < 3 || lr.index(toks[0]) != k) lr.fail("expected variable " + std::to_string(k));
    AuxPoint p;
    p.name = toks[1];
    if (toks[2] == "replica") {
      if (toks.size() != 8) lr.fail("replica variable needs 8 fields");
      p.kind = AuxPoint::Kind::Replica;
      p.point = lr.index(toks[3]) - 1;
      p.replica = lr.index(toks[4]) - 1;
    } else if (toks[2] == "label") {
      if (toks.size() != 7) lr.fail("label variable needs 7 fields");
      p.kind = AuxPoint::Kind::Label;
      p.point = lr.index(toks[3]) - 1;
    } else {
      lr.fail("unknown variable role '" + toks[2] + "'");
    }
    aux.points.push_back(std::move(p));
  }

  toks = lr.expect("ROWS", 2);
  const std::size_t nrows = lr.index(toks[1]);
  for (std::size_t k = 0; k < nrows; ++k) {
    toks = lr.next();
    if (toks.size() < 5 || lr.index(toks[0]) != k) lr.fail("expected row " + std::to_string(k));
    AuxRow row;
    try {
      row.kind = aux_row_kind_from_string(toks[1]);
    } catch (const std::invalid_argument& e) {
      lr.fail(e.what());
    }
    row.sense = parse_sense(toks[2], lr.line());
    row.rhs = lr.number(toks[3]);
    row.terms = read_terms(lr, toks, 4, nvars);
    aux.rows.push_back(std::move(row));
  }

  toks = lr.expect("SIZE", 4);
  aux.size_row.kind = AuxRowKind::Las;
  aux.size_row.sense = parse_sense(toks[1], lr.line());
  aux.size_row.rhs = lr.number(toks[2]);
  aux.size_row.terms = read_terms(lr, toks, 3, nvars);

  toks = lr.expect("REGRESSORS", 2);
  if (lr.index(toks[1]) != nvars) lr.fail("regressor count differs from variable count");
  for (std::size_t k = 0; k < nvars; ++k) {
    toks = lr.next();
    if (toks.size() != aux.m + 1 || lr.index(toks[0]) != k) lr.fail("malformed regressor " + std::to_string(k));
    Vector f(static_cast<Eigen::Index>(aux.m));
    for (std::size_t c = 0; c < aux.m; ++c) f[static_cast<Eigen::Index>(c)] = lr.number(toks[c + 1]);
    aux.regressors.push_back(std::move(f));
  }
  lr.expect("END", 1);
  return aux;
}

AuxiliaryProblem read_auxiliary_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_auxiliary(is);
}

}  // namespace lasdesign
