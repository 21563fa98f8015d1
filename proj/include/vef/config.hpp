#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vef/vef_solve.hpp"

namespace vef {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every run parameter with its default. Text form: INI sections with
/// `key = value` lines; list values are comma separated.
struct ProblemConfig {
  std::string experiment = "solve";  // mms, difflim, pipe, mockdata, solve
  std::string output_dir = "out";

  // [mesh]
  int nx = 8, ny = 8;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  int geometric_degree = 1;
  int refine = 0;               // uniform refinements (sweep limit for multi-size studies)
  double distort_time = 0.0;    // Taylor-Green distortion, 0 disables
  int distort_steps = 300;
  std::string mesh_file;        // overrides the Cartesian box when set

  // [discretization]
  DiscKind kind = DiscKind::ip;
  int p = 2;
  int quadrature = 4;           // level-symmetric order, 4 or 12
  double penalty_scale = 1.0;
  double br2_eta = 4.0;

  // [physics]
  double sigma_t = 1.0;
  double sigma_s = 0.5;
  double source = 1.0;          // isotropic source per steradian
  double inflow = 0.0;          // isotropic inflow intensity
  bool fixup = false;

  // [solver]
  std::string precond = "auto";
  double inner_tol = 1e-8;
  int inner_max_iter = 1000;
  double outer_tol = 1e-6;
  int max_outer = 200;
  int anderson = 0;
  bool augmented = false;
  int sweeps = 1;

  // [study]
  std::vector<int> p_list;
  std::vector<DiscKind> kinds;
  std::vector<double> epsilons;
  std::vector<int> mesh_sizes;
  std::vector<std::string> precond_list;

  /// Defaults of one experiment (unknown names rejected).
  static ProblemConfig defaults_for(const std::string& experiment);
  void validate() const;
  /// Every key as (section.key, value), in file order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Applies `key = value` settings from an INI stream on top of `base`.
ProblemConfig parse_config(std::istream& is, ProblemConfig base);
ProblemConfig load_config(const std::string& path, ProblemConfig base);
void write_config(std::ostream& os, const ProblemConfig& cfg);

/// Sets one key (section.key) from text; throws ConfigError on unknown keys or bad values.
void set_config_value(ProblemConfig& cfg, const std::string& key, const std::string& value);

}  // namespace vef
