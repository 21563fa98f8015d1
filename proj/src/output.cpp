#include "vef/output.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace vef {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

RunMetadata RunMetadata::for_run(const std::string& command, const ProblemConfig& cfg) {
  RunMetadata m;
  m.add("command", command);
  m.add("outer_norm", "relative L2 of the drift-diffusion scalar flux");
  m.add("initial_guess", "zero scalar flux, zero lagged angular flux");
  for (const auto& [k, v] : cfg.entries()) m.add(k, v);
  return m;
}

void write_metadata(std::ostream& os, const RunMetadata& meta) {
  for (const auto& [k, v] : meta.items) os << "# " << k << " = " << v << "\n";
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width does not match the header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& os, const RunMetadata& meta) const {
  write_metadata(os, meta);
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

void CsvTable::write(const std::filesystem::path& path, const RunMetadata& meta) const {
  auto os = open_for_write(path);
  write(os, meta);
}

std::vector<LineoutPoint> sample_lineout(const GridFunction& u, const Vec2& a, const Vec2& b, int count) {
  if (count < 2) throw std::invalid_argument("sample_lineout: need at least 2 points");
  std::vector<LineoutPoint> out;
  out.reserve(count);
  const double len = (b - a).norm();
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    const Vec2 x = a + t * (b - a);
    const PointLocation loc = u.space().mesh().locate_point(x);
    out.push_back({t * len, x, u.eval(loc.elem, loc.xi)});
  }
  return out;
}

void write_lineout(const std::filesystem::path& path, const RunMetadata& meta, const std::vector<LineoutPoint>& pts) {
  CsvTable t({"s", "x", "y", "value"});
  for (const auto& p : pts) {
    t.add_row({format_number(p.s), format_number(p.x[0]), format_number(p.x[1]), format_number(p.value)});
  }
  t.write(path, meta);
}

void write_grid_function(const std::filesystem::path& path, const RunMetadata& meta, const GridFunction& u) {
  auto os = open_for_write(path);
  std::vector<std::string> header;
  for (const auto& [k, v] : meta.items) header.push_back(k + " = " + v);
  write_grid_function(os, u, header);
}

}  // namespace vef
