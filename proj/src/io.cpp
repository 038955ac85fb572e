#include "lasdesign/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lasdesign/models.hpp"

namespace lasdesign {

using nlohmann::json;

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is 1-based and points just past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    throw ParseError(source + ":" + line_column(text, at), pos == std::string::npos ? msg : msg.substr(pos));
  }
}

// Field access with a dotted path for diagnostics.
class Field {
 public:
  Field(const json& j, std::string source, std::string path) : j_(j), source_(std::move(source)), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_ + ": " + (path_.empty() ? "<root>" : path_), what);
  }

  const json& value() const { return j_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Field operator[](const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) Field(j_, source_, join(key)).fail("missing required field");
    return Field(j_.at(key), source_, join(key));
  }
  Field operator[](std::size_t k) const { return Field(j_.at(k), source_, path_ + "[" + std::to_string(k) + "]"); }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  Count integer() const {
    if (j_.is_number_integer()) return j_.get<Count>();
    if (j_.is_number_float()) {
      const double v = j_.get<double>();
      if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<Count>(v);
    }
    fail("expected an integer");
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < size(); ++k) out.push_back((*this)[k].number());
    return out;
  }
  std::vector<double> numbers(std::size_t expected) const {
    auto v = numbers();
    if (v.size() != expected)
      fail("expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    return v;
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? (*this)[key].number() : fallback; }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? (*this)[key].string() : fallback;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string source_;
  std::string path_;
};

DesignSpace parse_space(const Field& f) {
  try {
    if (f.has("grid")) {
      const Field g = f["grid"];
      const Count count = g["count"].integer();
      if (count < 1) g["count"].fail("grid needs at least one point");
      return DesignSpace::grid(g["start"].number(), g["stop"].number(), static_cast<std::size_t>(count));
    }
    const Field pts = f["points"];
    std::vector<DesignPoint> points;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Field p = pts[k];
      DesignPoint dp;
      if (p.value().is_number()) {
        dp.coords = {p.number()};
      } else if (p.value().is_object()) {
        const Field x = p["x"];
        dp.coords = x.value().is_array() ? x.numbers() : std::vector<double>{x.number()};
        if (p.has("label")) dp.label = p["label"].string();
      } else {
        p.fail("expected a number or an object with x");
      }
      if (dp.label.empty()) {
        std::ostringstream os;
        os << std::setprecision(15) << dp.x();
        dp.label = os.str();
      }
      points.push_back(std::move(dp));
    }
    return DesignSpace(std::move(points));
  } catch (const std::invalid_argument& e) {
    f.fail(e.what());
  }
}

std::shared_ptr<const InformationModel> parse_model(const Field& f, const DesignSpace& space) {
  const std::string type = f["type"].string();
  try {
    if (type == "continuation_ratio") {
      const auto nominal = CRParameters::nominal();
      CRParameters theta(f.number_or("a1", nominal.a1()), f.number_or("a2", nominal.a2()),
                         f.number_or("b1", nominal.b1()), f.number_or("b2", nominal.b2()));
      return std::make_shared<CRModel>(space, theta);
    }
    if (type == "polynomial") {
      const Count d = f["degree"].integer();
      if (d < 0) f["degree"].fail("degree must be non-negative");
      return std::make_shared<PolynomialModel>(space, static_cast<std::size_t>(d));
    }
    if (type == "raw_matrices") {
      const Count r = f["rank"].integer();
      if (r < 1) f["rank"].fail("rank must be positive");
      const Field mats = f["matrices"];
      if (mats.size() != space.size())
        mats.fail("expected one matrix per design point (" + std::to_string(space.size()) + ")");
      std::vector<Matrix> H;
      for (std::size_t k = 0; k < mats.size(); ++k) {
        const Field rows = mats[k];
        const std::size_t m = rows.size();
        Matrix M(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t a = 0; a < m; ++a) {
          const auto row = rows[a].numbers(m);
          for (std::size_t b = 0; b < m; ++b) M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = row[b];
        }
        H.push_back(std::move(M));
      }
      return std::make_shared<RawMatrixModel>(std::move(H), static_cast<std::size_t>(r));
    }
  } catch (const std::invalid_argument& e) {
    f.fail(e.what());
  }
  f["type"].fail("unknown model type '" + type + "'");
}

Sense parse_sense(const Field& f) {
  const std::string s = f.string();
  if (s == "<=" || s == "le") return Sense::LessEqual;
  if (s == "=" || s == "==" || s == "eq") return Sense::Equal;
  f.fail("sense must be \"<=\" or \"=\"");
}

std::vector<Count> per_point(const Field& f, std::size_t n) {
  if (f.value().is_array()) {
    std::vector<Count> out;
    if (f.size() != n) f.fail("expected " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) out.push_back(f[k].integer());
    return out;
  }
  return std::vector<Count>(n, f.integer());
}

const CRModel& require_cr(const Field& f, const LASProblem& p) {
  const auto* cr = dynamic_cast<const CRModel*>(p.model.get());
  if (!cr) f.fail("this constraint needs a continuation_ratio model");
  return *cr;
}

void parse_constraint(const Field& f, LASProblem& p) {
  const std::string type = f["type"].string();
  const std::size_t n = p.n();
  auto& out = p.constraints;
  auto named = [&](LinearSparsityConstraint c) {
    if (f.has("name")) c.name = f["name"].string();
    out.push_back(std::move(c));
  };
  try {
    if (type == "expected_failures") {
      const auto& cr = require_cr(f, p);
      std::vector<double> a(n);
      for (std::size_t i = 0; i < n; ++i) a[i] = cr_failure_prob(p.space.point(i).x(), cr.theta0());
      named(constraints::linear(std::move(a), f["max"].number(), Sense::LessEqual, "expected_failures"));
    } else if (type == "cr_budget") {
      const auto& cr = require_cr(f, p);
      auto cc = cr_cost_coefficients(p.space, cr.theta0());
      auto c = constraints::budget(std::move(cc.per_trial), std::move(cc.per_support), f["budget"].number());
      c.name = "cost";
      named(std::move(c));
    } else if (type == "budget") {
      named(constraints::budget(f["gamma"].numbers(n), f["gamma_prime"].numbers(n), f["B"].number()));
    } else if (type == "min_support_size") {
      named(constraints::min_support_size(n, f["S"].integer(), p.N));
    } else if (type == "max_support_size") {
      named(constraints::max_support_size(n, f["S"].integer(), p.N));
    } else if (type == "separation_windows") {
      const Count d = f["delta"].integer();
      if (d < 1) f["delta"].fail("delta must be positive");
      for (auto& c : constraints::separation_windows(n, static_cast<std::size_t>(d))) out.push_back(std::move(c));
    } else if (type == "support_replication_bounds") {
      for (auto& c : constraints::support_replication_bounds(per_point(f["L"], n), per_point(f["U"], n), p.N))
        out.push_back(std::move(c));
    } else if (type == "las") {
      const Sense s = f.has("sense") ? parse_sense(f["sense"]) : Sense::LessEqual;
      named(constraints::las(f["a"].numbers(n), f["c"].numbers(n), f["b"].number(), s));
    } else if (type == "linear") {
      const Sense s = f.has("sense") ? parse_sense(f["sense"]) : Sense::LessEqual;
      named(constraints::linear(f["a"].numbers(n), f["b"].number(), s));
    } else if (type == "exclusion") {
      named(constraints::exclusion(f["a"].numbers(n), f["b"].number()));
    } else if (type == "inclusion") {
      named(constraints::inclusion(f["a"].numbers(n), f["b"].number()));
    } else if (type == "mixed") {
      const Sense s = f.has("sense") ? parse_sense(f["sense"]) : Sense::LessEqual;
      named(constraints::mixed(f["a"].numbers(n), f["b"].number(), s));
    } else {
      f["type"].fail("unknown constraint type '" + type + "'");
    }
  } catch (const std::invalid_argument& e) {
    f.fail(e.what());
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void assign(ExactDesign& w, std::size_t pos, Count count, std::vector<bool>& seen, const std::string& where) {
  if (count < 0) throw ParseError(where, "count must be non-negative");
  if (seen[pos]) throw ParseError(where, "design point listed twice");
  seen[pos] = true;
  w.counts[pos] = count;
}

std::size_t locate(const DesignSpace& space, const std::optional<Count>& index, const std::optional<std::string>& label,
                   const std::string& where) {
  std::size_t pos = DesignSpace::npos;
  if (index) {
    if (*index < 1 || static_cast<std::size_t>(*index) > space.size())
      throw ParseError(where, "index " + std::to_string(*index) + " outside 1.." + std::to_string(space.size()));
    pos = static_cast<std::size_t>(*index - 1);
  }
  if (label) {
    const std::size_t by_label = space.find_label(*label);
    if (by_label == DesignSpace::npos) throw ParseError(where, "unknown design point label '" + *label + "'");
    if (pos != DesignSpace::npos && pos != by_label)
      throw ParseError(where, "index and label refer to different design points");
    pos = by_label;
  }
  if (pos == DesignSpace::npos) throw ParseError(where, "entry needs an index or a label");
  return pos;
}

ExactDesign parse_design_csv(const std::string& text, const DesignSpace& space, const std::string& source) {
  ExactDesign w = ExactDesign::zeros(space.size());
  std::vector<bool> seen(space.size(), false);
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  int ci = -1, cl = -1, cc = -1;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = source + ":" + std::to_string(lineno);
    auto cells = split_csv(t);
    if (header.empty()) {
      header = cells;
      for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == "index") ci = static_cast<int>(k);
        else if (header[k] == "label") cl = static_cast<int>(k);
        else if (header[k] == "count") cc = static_cast<int>(k);
      }
      if (cc < 0 || (ci < 0 && cl < 0)) throw ParseError(where, "header needs a count column and an index or label column");
      continue;
    }
    if (cells.size() != header.size())
      throw ParseError(where, "expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    auto to_int = [&](const std::string& s, const char* what) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size()) throw ParseError(where, std::string("bad ") + what + " '" + s + "'");
      return static_cast<Count>(v);
    };
    std::optional<Count> index;
    std::optional<std::string> label;
    if (ci >= 0 && !cells[static_cast<std::size_t>(ci)].empty()) index = to_int(cells[static_cast<std::size_t>(ci)], "index");
    if (cl >= 0 && !cells[static_cast<std::size_t>(cl)].empty()) label = cells[static_cast<std::size_t>(cl)];
    const std::size_t pos = locate(space, index, label, where);
    assign(w, pos, to_int(cells[static_cast<std::size_t>(cc)], "count"), seen, where);
  }
  if (header.empty()) throw ParseError(source, "empty design file");
  return w;
}

ExactDesign parse_design_json(const std::string& text, const DesignSpace& space, const std::string& source) {
  const json j = parse_json(text, source);
  const Field root(j, source, "");
  const Field entries = root["entries"];
  ExactDesign w = ExactDesign::zeros(space.size());
  std::vector<bool> seen(space.size(), false);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Field e = entries[k];
    std::optional<Count> index;
    std::optional<std::string> label;
    if (e.has("index")) index = e["index"].integer();
    if (e.has("label")) label = e["label"].string();
    const std::string where = source + ": " + e.path();
    const std::size_t pos = locate(space, index, label, where);
    assign(w, pos, e["count"].integer(), seen, where);
  }
  if (root.has("points") && root["points"].integer() != static_cast<Count>(space.size()))
    root["points"].fail("design was written for " + std::to_string(root["points"].integer()) +
                        " design points, problem has " + std::to_string(space.size()));
  return w;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path q(p);
  return q.is_absolute() ? q : base / q;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::shared_ptr<LASProblem> parse_problem(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const Field root(j, source, "");
  auto p = std::make_shared<LASProblem>();
  p->name = root.string_or("name", "");
  p->space = parse_space(root["space"]);
  p->model = parse_model(root["model"], p->space);
  p->N = root["N"].integer();
  if (p->N < 0) root["N"].fail("N must be non-negative");
  const std::string crit = root.string_or("criterion", "D");
  if (crit != "D") root["criterion"].fail("only the D criterion is supported");
  if (root.has("constraints")) {
    const Field cs = root["constraints"];
    for (std::size_t k = 0; k < cs.size(); ++k) parse_constraint(cs[k], *p);
  }
  try {
    p->validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, e.what());
  }
  return p;
}

std::shared_ptr<LASProblem> load_problem(const std::filesystem::path& path) {
  return parse_problem(read_text_file(path), path.string());
}

ExactDesign parse_design(const std::string& text, const DesignSpace& space, const std::string& source) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_design_json(text, space, source);
  return parse_design_csv(text, space, source);
}

ExactDesign load_design(const std::filesystem::path& path, const DesignSpace& space) {
  return parse_design(read_text_file(path), space, path.string());
}

void write_design_csv(std::ostream& os, const ExactDesign& design, const DesignSpace& space) {
  if (design.size() != space.size()) throw std::invalid_argument("write_design_csv: design and space sizes differ");
  os << "index,label,x,count\n";
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i : design.support()) {
    const auto& p = space.point(i);
    os << p.index << ',' << p.label << ',' << p.x() << ',' << design.counts[i] << '\n';
  }
  os.precision(old);
}

void write_design_json(std::ostream& os, const ExactDesign& design, const DesignSpace& space) {
  if (design.size() != space.size()) throw std::invalid_argument("write_design_json: design and space sizes differ");
  json entries = json::array();
  for (std::size_t i : design.support())
    entries.push_back({{"index", space.point(i).index}, {"label", space.point(i).label}, {"count", design.counts[i]}});
  json j = {{"points", space.size()}, {"entries", entries}};
  os << j.dump(2) << '\n';
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string source = path.string();
  const json j = parse_json(read_text_file(path), source);
  const Field root(j, source, "");
  const auto base = path.parent_path();
  Scenario s;
  s.name = root.string_or("name", path.stem().string());
  s.problem = resolve(base, root["problem"].string());
  if (!std::filesystem::exists(s.problem)) root["problem"].fail("file not found: " + s.problem.string());
  if (root.has("baseline")) {
    s.baseline = resolve(base, root["baseline"].string());
    if (!std::filesystem::exists(*s.baseline)) root["baseline"].fail("file not found: " + s.baseline->string());
  }
  if (root.has("reference")) {
    s.reference = resolve(base, root["reference"].string());
    if (!std::filesystem::exists(*s.reference)) root["reference"].fail("file not found: " + s.reference->string());
  }
  if (root.has("report")) {
    const Field r = root["report"];
    if (r.has("plot")) {
      if (!r["plot"].value().is_boolean()) r["plot"].fail("expected true or false");
      s.report.plot = r["plot"].value().get<bool>();
    }
  }
  return s;
}

}  // namespace lasdesign
