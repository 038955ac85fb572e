#include "lasdesign/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lasdesign/models.hpp"

namespace lasdesign {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string support_text(const ExactDesign& w, const DesignSpace& space, char sep) {
  std::string out;
  for (std::size_t i : w.support()) {
    if (!out.empty()) out += sep;
    out += space.point(i).label + ":" + std::to_string(w.counts[i]);
  }
  return out.empty() ? "-" : out;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

ReportRow evaluate_design(const LASProblem& problem, const ExactDesign& design, const ExactDesign* baseline,
                          std::string name) {
  if (design.size() != problem.n())
    throw std::invalid_argument("design has " + std::to_string(design.size()) + " entries, problem has " +
                                std::to_string(problem.n()) + " design points");
  if (baseline && baseline->size() != problem.n())
    throw std::invalid_argument("baseline has " + std::to_string(baseline->size()) + " entries, problem has " +
                                std::to_string(problem.n()) + " design points");
  ReportRow row;
  row.name = std::move(name);
  row.design = design;
  row.phi = criterion_d(information_matrix(problem, design));
  if (baseline) {
    try {
      row.efficiency = d_efficiency(design, *baseline, problem);
    } catch (const std::domain_error&) {
      row.efficiency.reset();
    }
  }
  if (const auto* cr = dynamic_cast<const CRModel*>(problem.model.get())) {
    row.expected_failures = cr_expected_failures(problem.space, cr->theta0(), design);
    row.cost = cr_total_cost(problem.space, cr->theta0(), design);
  }
  row.feasibility = check_feasible(design, problem);
  return row;
}

std::string format_report(const std::vector<ReportRow>& rows, const DesignSpace& space) {
  const std::vector<std::string> head = {"design", "Phi", "eff", "E(fail)", "cost", "feasible", "support"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.name.empty() ? "-" : r.name, fixed(r.phi, 2), r.efficiency ? fixed(*r.efficiency, 2) : "-",
                     r.expected_failures ? fixed(*r.expected_failures, 2) : "-", r.cost ? fixed(*r.cost, 2) : "-",
                     r.feasibility.feasible ? "yes" : "no", support_text(r.design, space, ' ')});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool numeric = c >= 1 && c <= 4;
      if (c > 0) line += "  ";
      line += c + 1 == row.size() ? row[c] : pad(row[c], width[c], numeric);
    }
    os << line << '\n';
  };
  emit(head);
  std::size_t total = 0;
  for (std::size_t c = 0; c < head.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
  os << std::string(total, '-') << '\n';
  for (const auto& row : cells) emit(row);
  return os.str();
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows, const DesignSpace& space) {
  os << "design,phi,efficiency,expected_failures,cost,feasible,support\n";
  for (const auto& r : rows) {
    os << r.name << ',' << full(r.phi) << ',' << (r.efficiency ? full(*r.efficiency) : "") << ','
       << (r.expected_failures ? full(*r.expected_failures) : "") << ',' << (r.cost ? full(*r.cost) : "") << ','
       << (r.feasibility.feasible ? "true" : "false") << ',' << support_text(r.design, space, ';') << '\n';
  }
}

std::string render_svg(const ExactDesign& design, const DesignSpace& space, const std::string& title) {
  if (design.size() != space.size()) throw std::invalid_argument("render_svg: design and space sizes differ");
  constexpr double W = 640, H = 360, left = 56, right = 16, top = 32, bottom = 48;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const auto& p : space.points()) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
  }
  if (!(xmax > xmin)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  Count ymax = 0;
  for (Count c : design.counts) ymax = std::max(ymax, c);
  const double ytop = ymax > 0 ? static_cast<double>(ymax) : 1.0;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + ph - y / ytop * ph; };
  const double bar = std::max(2.0, std::min(12.0, pw / static_cast<double>(space.size()) * 0.8));

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(W, 0) << "\" height=\"" << fixed(H, 0)
     << "\" viewBox=\"0 0 " << fixed(W, 0) << ' ' << fixed(H, 0) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"" << fixed(W / 2, 1) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"14\">" << xml_escape(title) << "</text>\n";
  os << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(top + ph, 1) << "\" x2=\"" << fixed(left + pw, 1)
     << "\" y2=\"" << fixed(top + ph, 1) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(top, 1) << "\" x2=\"" << fixed(left, 1) << "\" y2=\""
     << fixed(top + ph, 1) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ytop * k / 4.0;
    os << "<text x=\"" << fixed(sx(xv), 1) << "\" y=\"" << fixed(top + ph + 18, 1)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(xv, 1) << "</text>\n";
    os << "<text x=\"" << fixed(left - 6, 1) << "\" y=\"" << fixed(sy(yv) + 4, 1)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(yv, 1) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + pw / 2, 1) << "\" y=\"" << fixed(H - 8, 1)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">dose</text>\n";
  os << "<text x=\"14\" y=\"" << fixed(top + ph / 2, 1) << "\" transform=\"rotate(-90 14 " << fixed(top + ph / 2, 1)
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">count</text>\n";
  for (std::size_t i : design.support()) {
    const double x = sx(space.point(i).x()) - bar / 2;
    const double y = sy(static_cast<double>(design.counts[i]));
    os << "<rect x=\"" << fixed(x, 2) << "\" y=\"" << fixed(y, 2) << "\" width=\"" << fixed(bar, 2) << "\" height=\""
       << fixed(top + ph - y, 2) << "\" fill=\"steelblue\"><title>" << xml_escape(space.point(i).label) << ": "
       << design.counts[i] << "</title></rect>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace lasdesign
