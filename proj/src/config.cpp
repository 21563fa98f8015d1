#include "vef/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vef {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const std::string& v) { return v; }
std::string fmt(DiscKind v) { return to_string(v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T v{};
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw ConfigError("config key '" + key + "': bad number '" + text + "'");
  return v;
}

void parse_into(const std::string& key, const std::string& text, double& out) { out = parse_number<double>(key, text); }
void parse_into(const std::string& key, const std::string& text, int& out) { out = parse_number<int>(key, text); }
void parse_into(const std::string&, const std::string& text, std::string& out) { out = trim(text); }
void parse_into(const std::string& key, const std::string& text, bool& out) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") out = true;
  else if (t == "false" || t == "0" || t == "no") out = false;
  else throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}
void parse_into(const std::string& key, const std::string& text, DiscKind& out) {
  try {
    out = parse_disc_kind(trim(text));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

template <typename T>
std::string fmt(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

template <typename T>
void parse_into(const std::string& key, const std::string& text, std::vector<T>& out) {
  out.clear();
  if (trim(text).empty()) return;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T v{};
    parse_into(key, item, v);
    out.push_back(v);
  }
}

struct Field {
  std::string key;
  std::function<std::string(const ProblemConfig&)> get;
  std::function<void(ProblemConfig&, const std::string&)> set;
};

template <typename T>
Field field(std::string key, T ProblemConfig::*member) {
  return {key, [member](const ProblemConfig& c) { return fmt(c.*member); },
          [key, member](ProblemConfig& c, const std::string& v) { parse_into(key, v, c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      field("run.experiment", &ProblemConfig::experiment),
      field("run.output_dir", &ProblemConfig::output_dir),
      field("mesh.nx", &ProblemConfig::nx),
      field("mesh.ny", &ProblemConfig::ny),
      field("mesh.xmin", &ProblemConfig::xmin),
      field("mesh.xmax", &ProblemConfig::xmax),
      field("mesh.ymin", &ProblemConfig::ymin),
      field("mesh.ymax", &ProblemConfig::ymax),
      field("mesh.geometric_degree", &ProblemConfig::geometric_degree),
      field("mesh.refine", &ProblemConfig::refine),
      field("mesh.distort_time", &ProblemConfig::distort_time),
      field("mesh.distort_steps", &ProblemConfig::distort_steps),
      field("mesh.file", &ProblemConfig::mesh_file),
      field("discretization.kind", &ProblemConfig::kind),
      field("discretization.p", &ProblemConfig::p),
      field("discretization.quadrature", &ProblemConfig::quadrature),
      field("discretization.penalty_scale", &ProblemConfig::penalty_scale),
      field("discretization.br2_eta", &ProblemConfig::br2_eta),
      field("physics.sigma_t", &ProblemConfig::sigma_t),
      field("physics.sigma_s", &ProblemConfig::sigma_s),
      field("physics.source", &ProblemConfig::source),
      field("physics.inflow", &ProblemConfig::inflow),
      field("physics.fixup", &ProblemConfig::fixup),
      field("solver.precond", &ProblemConfig::precond),
      field("solver.inner_tol", &ProblemConfig::inner_tol),
      field("solver.inner_max_iter", &ProblemConfig::inner_max_iter),
      field("solver.outer_tol", &ProblemConfig::outer_tol),
      field("solver.max_outer", &ProblemConfig::max_outer),
      field("solver.anderson", &ProblemConfig::anderson),
      field("solver.augmented", &ProblemConfig::augmented),
      field("solver.sweeps", &ProblemConfig::sweeps),
      field("study.p_list", &ProblemConfig::p_list),
      field("study.kinds", &ProblemConfig::kinds),
      field("study.epsilons", &ProblemConfig::epsilons),
      field("study.mesh_sizes", &ProblemConfig::mesh_sizes),
      field("study.precond_list", &ProblemConfig::precond_list),
  };
  return table;
}

const std::vector<DiscKind> kAllKinds = {DiscKind::ip, DiscKind::br2, DiscKind::mdldg, DiscKind::cg};

}  // namespace

ProblemConfig ProblemConfig::defaults_for(const std::string& experiment) {
  ProblemConfig c;
  c.experiment = experiment;
  if (experiment == "mms") {
    c.geometric_degree = 3;
    c.distort_time = 0.3 * std::numbers::pi;
    c.distort_steps = 300;
    c.refine = 3;
    c.mesh_sizes = {12, 18, 24, 30};
    c.p_list = {1, 2, 3};
    c.kinds = kAllKinds;
    c.quadrature = 4;
    c.sigma_t = 1.0;
    c.sigma_s = 0.5;
    c.precond = "direct";
  } else if (experiment == "difflim") {
    c.p = 2;
    c.quadrature = 4;
    c.kinds = kAllKinds;
    c.epsilons = {1e-1, 1e-2, 1e-3, 1e-4};
    c.anderson = 0;
  } else if (experiment == "pipe" || experiment == "mockdata") {
    c.nx = 14;
    c.ny = 8;
    c.xmin = 0.0;
    c.xmax = 7.0;
    c.ymin = -2.0;
    c.ymax = 2.0;
    c.quadrature = 12;
    c.fixup = true;
    c.source = 0.1;
    c.inflow = 0.5 / std::numbers::pi;
    c.refine = 2;
    if (experiment == "pipe") {
      c.anderson = 2;
      c.inner_tol = 1e-8;
      c.p_list = {1, 2, 3};
      c.kinds = kAllKinds;
    } else {
      c.kind = DiscKind::ip;
      c.p = 2;
      c.inner_tol = 1e-6;
      c.precond_list = {"usc", "exact", "usc-sym", "usc-sym3"};
    }
  } else if (experiment != "solve") {
    throw ConfigError("unknown experiment '" + experiment + "' (expected mms, difflim, pipe, mockdata, solve)");
  }
  return c;
}

void ProblemConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("invalid configuration: " + m); };
  if (nx < 1 || ny < 1) fail("mesh.nx and mesh.ny must be >= 1");
  if (!(xmax > xmin) || !(ymax > ymin)) fail("mesh box has zero area");
  if (geometric_degree < 1) fail("mesh.geometric_degree must be >= 1");
  if (refine < 0) fail("mesh.refine must be >= 0");
  if (distort_time != 0.0 && distort_steps < 1) fail("mesh.distort_steps must be >= 1");
  if (p < 1) fail("discretization.p must be >= 1");
  for (int q : p_list) if (q < 1) fail("study.p_list entries must be >= 1");
  if (quadrature != 4 && quadrature != 12) fail("discretization.quadrature must be 4 or 12");
  if (!(sigma_t > 0.0) || sigma_s < 0.0 || sigma_s > sigma_t) fail("need sigma_t > 0 and 0 <= sigma_s <= sigma_t");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) fail("tolerances must be positive");
  if (inner_max_iter < 1 || max_outer < 1) fail("iteration limits must be >= 1");
  if (anderson < 0) fail("solver.anderson must be >= 0");
  if (sweeps < 1 || sweeps > 3) fail("solver.sweeps must be 1, 2 or 3");
  for (double e : epsilons) if (!(e > 0.0) || e >= 1.0) fail("study.epsilons must lie in (0, 1)");
  for (int n : mesh_sizes) if (n < 1) fail("study.mesh_sizes entries must be >= 1");
  if (precond != "auto") {
    try {
      parse_precond_kind(precond);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  for (const auto& s : precond_list) {
    try {
      parse_precond_kind(s);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> ProblemConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

void set_config_value(ProblemConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

ProblemConfig parse_config(std::istream& is, ProblemConfig base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, node] : tree) {
    if (node.empty() && !node.data().empty()) throw ConfigError("config key '" + section + "' must appear inside a [section]");
    for (const auto& [key, value] : node) set_config_value(base, section + "." + key, value.data());
  }
  base.validate();
  return base;
}

ProblemConfig load_config(const std::string& path, ProblemConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

void write_config(std::ostream& os, const ProblemConfig& cfg) {
  std::string section;
  for (const auto& [key, value] : cfg.entries()) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      os << (section.empty() ? "" : "\n") << "[" << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << value << "\n";
  }
}

}  // namespace vef
