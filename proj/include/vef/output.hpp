#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vef/config.hpp"

namespace vef {

/// Key/value lines written as `# key = value` at the top of every output file.
struct RunMetadata {
  std::vector<std::pair<std::string, std::string>> items;
  void add(const std::string& key, const std::string& value) { items.emplace_back(key, value); }
  /// Command name, fixed conventions and every configuration entry.
  static RunMetadata for_run(const std::string& command, const ProblemConfig& cfg);
};
void write_metadata(std::ostream& os, const RunMetadata& meta);

/// Shortest round-trip text for a double.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  void write(std::ostream& os, const RunMetadata& meta) const;
  void write(const std::filesystem::path& path, const RunMetadata& meta) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct LineoutPoint {
  double s;  // arc length from the start point
  Vec2 x;
  double value;
};
/// `count` equally spaced samples on the segment [a, b].
std::vector<LineoutPoint> sample_lineout(const GridFunction& u, const Vec2& a, const Vec2& b, int count);
void write_lineout(const std::filesystem::path& path, const RunMetadata& meta, const std::vector<LineoutPoint>& pts);

void write_grid_function(const std::filesystem::path& path, const RunMetadata& meta, const GridFunction& u);

}  // namespace vef
