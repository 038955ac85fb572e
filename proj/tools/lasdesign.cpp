// Command-line front end: solve scenarios, evaluate and plot designs, export
// the auxiliary model.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "lasdesign/io.hpp"
#include "lasdesign/reduce.hpp"
#include "lasdesign/report.hpp"
#include "lasdesign/solver.hpp"

namespace fs = std::filesystem;
using namespace lasdesign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitLimit = 3;

struct SolveArgs {
  std::string input;
  double gap = kOptimalGap;
  double time_limit = 0.0;
  std::uint64_t node_limit = 0;
  bool deterministic = false;
  unsigned threads = 1;
  bool oracle = false;
  std::string export_aux;
  std::string factor = "eigen";
  std::string out_dir;
};

FactorRoute parse_route(const std::string& s) {
  if (s == "eigen") return FactorRoute::Eigen;
  if (s == "cholesky") return FactorRoute::PivotedCholesky;
  throw std::invalid_argument("unknown factor route '" + s + "' (eigen or cholesky)");
}

bool is_scenario(const fs::path& path) {
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    return j.is_object() && j.contains("problem");
  } catch (const nlohmann::json::exception&) {
    return false;  // let the problem parser report the syntax error
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int run_solve(const SolveArgs& a) {
  Scenario sc;
  const fs::path input(a.input);
  if (is_scenario(input)) {
    sc = load_scenario(input);
  } else {
    sc.name = input.stem().string();
    sc.problem = input;
  }
  const auto problem = load_problem(sc.problem);
  const FactorRoute route = parse_route(a.factor);

  if (!a.export_aux.empty()) write_auxiliary(a.export_aux, build_auxiliary(problem, route));

  SolverResult res;
  if (a.oracle) {
    res = brute_force(*problem);
  } else {
    SolverOptions opt;
    opt.relative_gap = a.gap;
    opt.time_limit = a.time_limit;
    opt.node_limit = a.node_limit;
    opt.deterministic = a.deterministic;
    opt.threads = a.deterministic ? 1 : a.threads;
    res = solve(problem, opt, route);
  }

  std::cout << "scenario " << sc.name << ": status " << to_string(res.status);
  if (res.design.size() > 0) std::cout << "  phi " << fmt(res.phi, "%.6f");
  std::cout << "  bound " << fmt(res.bound, "%.6f") << "  gap " << fmt(res.gap) << "  nodes " << res.nodes
            << "  time " << fmt(res.seconds, "%.2f") << "s\n";
  if (a.oracle && res.ties.size() > 1) std::cout << "note: " << res.ties.size() << " optimal designs tie\n";

  std::vector<ReportRow> rows;
  std::optional<ExactDesign> baseline;
  if (sc.baseline) baseline = load_design(*sc.baseline, problem->space);
  if (res.design.size() > 0)
    rows.push_back(evaluate_design(*problem, res.design, baseline ? &*baseline : nullptr, sc.name));
  if (sc.reference) {
    const auto ref = load_design(*sc.reference, problem->space);
    rows.push_back(evaluate_design(*problem, ref, baseline ? &*baseline : nullptr, sc.name + " (reference)"));
  }
  if (!rows.empty()) std::cout << '\n' << format_report(rows, problem->space);

  if (!a.out_dir.empty()) {
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    write_file(dir / (sc.name + "_report.txt"), format_report(rows, problem->space));
    std::ostringstream csv;
    write_report_csv(csv, rows, problem->space);
    write_file(dir / (sc.name + "_report.csv"), csv.str());
    if (res.design.size() > 0) {
      std::ostringstream d;
      write_design_csv(d, res.design, problem->space);
      write_file(dir / (sc.name + "_design.csv"), d.str());
      if (sc.report.plot) write_file(dir / (sc.name + ".svg"), render_svg(res.design, problem->space, sc.name));
    }
  }

  switch (res.status) {
    case SolveStatus::Optimal:
    case SolveStatus::GapLimit: return kExitOk;
    case SolveStatus::Infeasible: return kExitInfeasible;
    case SolveStatus::NodeLimit:
    case SolveStatus::TimeLimit: return kExitLimit;
  }
  return kExitError;
}

int run_eval(const std::string& design_path, const std::string& problem_path, const std::string& baseline_path,
             bool csv) {
  const auto problem = load_problem(problem_path);
  const auto design = load_design(design_path, problem->space);
  std::optional<ExactDesign> baseline;
  if (!baseline_path.empty()) baseline = load_design(baseline_path, problem->space);
  const auto row =
      evaluate_design(*problem, design, baseline ? &*baseline : nullptr, fs::path(design_path).stem().string());
  if (csv) {
    write_report_csv(std::cout, {row}, problem->space);
  } else {
    std::cout << format_report({row}, problem->space);
    if (row.feasibility.size_violation) std::cout << "violated: sum of counts is " << design.total() << ", N is " << problem->N << '\n';
    if (row.feasibility.negative_counts) std::cout << "violated: negative count\n";
    for (const auto& v : row.feasibility.violations)
      std::cout << "violated: " << v.name << " (lhs " << fmt(v.lhs, "%.6f") << ", rhs " << fmt(v.rhs, "%.6f") << ")\n";
  }
  return kExitOk;
}

// Without a problem file the design must be CSV with label, x and count
// columns; the plot space is then the listed points.
std::pair<DesignSpace, ExactDesign> standalone_csv(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<DesignPoint> points;
  std::vector<Count> counts;
  int cl = -1, cx = -1, cc = -1;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == "label") cl = static_cast<int>(k);
        if (header[k] == "x") cx = static_cast<int>(k);
        if (header[k] == "count") cc = static_cast<int>(k);
      }
      if (cl < 0 || cx < 0 || cc < 0)
        throw ParseError(source, "plotting without --problem needs label, x and count columns");
      continue;
    }
    if (cells.size() != header.size()) throw ParseError(source, "row has the wrong number of cells");
    DesignPoint p;
    p.label = cells[static_cast<std::size_t>(cl)];
    p.coords = {std::stod(cells[static_cast<std::size_t>(cx)])};
    points.push_back(std::move(p));
    counts.push_back(std::stoll(cells[static_cast<std::size_t>(cc)]));
  }
  if (points.empty()) throw ParseError(source, "no design points to plot; pass --problem");
  return {DesignSpace(std::move(points)), ExactDesign(std::move(counts))};
}

int run_plot(const std::string& design_path, const std::string& problem_path, const std::string& svg_path,
             const std::string& csv_path) {
  DesignSpace space;
  ExactDesign design;
  if (!problem_path.empty()) {
    space = load_problem(problem_path)->space;
    design = load_design(design_path, space);
  } else {
    std::tie(space, design) = standalone_csv(read_text_file(design_path), design_path);
  }
  const std::string svg = render_svg(design, space, fs::path(design_path).stem().string());
  if (svg_path.empty() || svg_path == "-") std::cout << svg;
  else write_file(svg_path, svg);
  if (!csv_path.empty()) {
    std::ostringstream os;
    write_design_csv(os, design, space);
    write_file(csv_path, os.str());
  }
  return kExitOk;
}

int run_export(const std::string& problem_path, const std::string& out, const std::string& factor) {
  const auto problem = load_problem(problem_path);
  const auto aux = build_auxiliary(problem, parse_route(factor));
  if (out.empty() || out == "-") write_auxiliary(std::cout, aux);
  else write_auxiliary(out, aux);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact D-optimal designs under linear and sparsity constraints"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a scenario or problem file");
  solve_cmd->add_option("input", sa.input, "Scenario or problem file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--gap", sa.gap, "Relative optimality gap")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--time-limit", sa.time_limit, "Seconds, 0 for none")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--node-limit", sa.node_limit, "Processed nodes, 0 for none");
  solve_cmd->add_flag("--deterministic", sa.deterministic, "Serial search with a reproducible node order");
  solve_cmd->add_option("--threads", sa.threads, "Worker threads")->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--oracle", sa.oracle, "Enumerate all designs instead of branch and bound");
  solve_cmd->add_option("--export-aux", sa.export_aux, "Also write the auxiliary model to this file");
  solve_cmd->add_option("--factor", sa.factor, "Factor route: eigen or cholesky");
  solve_cmd->add_option("--out", sa.out_dir, "Directory for report, design CSV and plot");

  std::string eval_design, eval_problem, eval_baseline;
  bool eval_csv = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a design without solving");
  eval_cmd->add_option("design", eval_design, "Design file (JSON or CSV)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("problem", eval_problem, "Problem file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--baseline", eval_baseline, "Design for the efficiency column")->check(CLI::ExistingFile);
  eval_cmd->add_flag("--csv", eval_csv, "Full-precision CSV instead of the table");

  std::string plot_design, plot_problem, plot_svg, plot_csv;
  auto* plot_cmd = app.add_subcommand("plot", "Bar chart of a design");
  plot_cmd->add_option("design", plot_design, "Design file")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--problem", plot_problem, "Problem file supplying the design space")->check(CLI::ExistingFile);
  plot_cmd->add_option("-o,--output", plot_svg, "SVG output (default stdout)");
  plot_cmd->add_option("--csv", plot_csv, "Also write dose,count data");

  std::string export_problem, export_out, export_factor = "eigen";
  auto* export_cmd = app.add_subcommand("export", "Write the auxiliary model in text form");
  export_cmd->add_option("problem", export_problem, "Problem file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("-o,--output", export_out, "Output file (default stdout)");
  export_cmd->add_option("--factor", export_factor, "Factor route: eigen or cholesky");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve_cmd) return run_solve(sa);
    if (*eval_cmd) return run_eval(eval_design, eval_problem, eval_baseline, eval_csv);
    if (*plot_cmd) return run_plot(plot_design, plot_problem, plot_svg, plot_csv);
    if (*export_cmd) return run_export(export_problem, export_out, export_factor);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
