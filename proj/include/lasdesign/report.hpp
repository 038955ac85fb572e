#ifndef LASDESIGN_REPORT_HPP
#define LASDESIGN_REPORT_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lasdesign/core.hpp"

namespace lasdesign {

struct ReportRow {
  std::string name;
  ExactDesign design;
  double phi = 0.0;
  std::optional<double> efficiency;         // against the baseline design
  std::optional<double> expected_failures;  // continuation-ratio models only
  std::optional<double> cost;               // continuation-ratio models only
  FeasibilityReport feasibility;
};

/// Evaluates a design without solving. Throws std::invalid_argument when
/// the design length differs from the problem's design space.
ReportRow evaluate_design(const LASProblem& problem, const ExactDesign& design,
                          const ExactDesign* baseline = nullptr, std::string name = "");

/// Fixed-width table, numbers with 2 decimals.
std::string format_report(const std::vector<ReportRow>& rows, const DesignSpace& space);
/// Same columns at full precision.
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows, const DesignSpace& space);

/// Bar chart of counts against the first coordinate. Byte-identical output
/// for identical input; an empty design still gets axes.
std::string render_svg(const ExactDesign& design, const DesignSpace& space, const std::string& title = "");

}  // namespace lasdesign

#endif  // LASDESIGN_REPORT_HPP
