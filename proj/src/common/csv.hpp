#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace inpaint_lab {

// Minimal RFC-4180 table: header row mandatory, CRLF-free output (LF line
// ends are accepted by every reader we care about), quoted when needed.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  static CsvTable parse(const std::string& text);
  static CsvTable read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  // Index of a header column, or throws.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

// Shortest round-trippable decimal form of a double.
std::string format_real(double v);

}  // namespace inpaint_lab
