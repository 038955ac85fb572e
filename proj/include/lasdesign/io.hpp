#ifndef LASDESIGN_IO_HPP
#define LASDESIGN_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "lasdesign/core.hpp"

namespace lasdesign {

/// Malformed or inconsistent input. `where` is "file:line:column" for
/// syntax errors and "file: field.path" for semantic ones.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Problem files are JSON; see docs/formats.md.
std::shared_ptr<LASProblem> parse_problem(const std::string& text, const std::string& source = "<problem>");
std::shared_ptr<LASProblem> load_problem(const std::filesystem::path& path);

/// Design files: JSON {"entries": [...]} or CSV with an index,label,x,count
/// header. The format is detected from the first non-blank character.
ExactDesign parse_design(const std::string& text, const DesignSpace& space, const std::string& source = "<design>");
ExactDesign load_design(const std::filesystem::path& path, const DesignSpace& space);

/// Support rows only, full precision; parse_design reads it back losslessly.
void write_design_csv(std::ostream& os, const ExactDesign& design, const DesignSpace& space);
void write_design_json(std::ostream& os, const ExactDesign& design, const DesignSpace& space);

struct ReportOptions {
  bool plot = false;
};

struct Scenario {
  std::string name;
  std::filesystem::path problem;
  std::optional<std::filesystem::path> baseline;   // design file for the efficiency column
  std::optional<std::filesystem::path> reference;  // expected design, reported alongside
  ReportOptions report;
};

/// Relative paths are resolved against the scenario file's directory.
Scenario load_scenario(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace lasdesign

#endif  // LASDESIGN_IO_HPP
