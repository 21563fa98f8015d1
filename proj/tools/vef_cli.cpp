// Command-line front end for the drift-diffusion transport studies.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <utility>

#include "vef/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string kind;
  int p = 0;
  int refine = -1;
  std::string quadrature;
  int anderson = -1;
  bool augmented = false;
  int sweeps = 0;
  std::string precond;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "INI configuration file applied over the experiment defaults");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--kind", f.kind, "discretization")->check(CLI::IsMember({"ip", "br2", "mdldg", "cg", "cg-sym"}));
  cmd->add_option("--p", f.p, "polynomial degree")->check(CLI::Range(1, 8));
  cmd->add_option("--refine", f.refine, "uniform refinements (largest level for size sweeps)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--quadrature", f.quadrature, "angular quadrature")->check(CLI::IsMember({"s4", "s12"}));
  cmd->add_option("--anderson", f.anderson, "Anderson window, 0 for plain fixed point")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--augmented", f.augmented, "mix angular fluxes in the Anderson vectors");
  cmd->add_option("--sweeps", f.sweeps, "transport sweeps per outer iteration")->check(CLI::Range(1, 3));
  cmd->add_option("--precond", f.precond, "inner preconditioner")
      ->check(CLI::IsMember({"usc", "usc-sym", "usc-sym3", "substitute", "exact", "direct", "jacobi", "none"}));
}

vef::ProblemConfig resolve(const std::string& experiment, const Flags& f) {
  vef::ProblemConfig cfg = vef::ProblemConfig::defaults_for(experiment);
  if (!f.config.empty()) cfg = vef::load_config(f.config, cfg);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.kind.empty()) {
    cfg.kind = vef::parse_disc_kind(f.kind);
    cfg.kinds = {cfg.kind};
  }
  if (f.p > 0) {
    cfg.p = f.p;
    cfg.p_list = {f.p};
  }
  if (f.refine >= 0) cfg.refine = f.refine;
  if (!f.quadrature.empty()) cfg.quadrature = f.quadrature == "s4" ? 4 : 12;
  if (f.anderson >= 0) cfg.anderson = f.anderson;
  if (f.augmented) cfg.augmented = true;
  if (f.sweeps > 0) cfg.sweeps = f.sweeps;
  if (!f.precond.empty()) {
    cfg.precond = f.precond;
    if (experiment == "mockdata") cfg.precond_list = {f.precond};
  }
  cfg.experiment = experiment;
  cfg.validate();
  return cfg;
}

int run(const std::string& experiment, const Flags& flags) {
  const vef::ProblemConfig cfg = resolve(experiment, flags);
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const vef::RunMetadata meta = vef::RunMetadata::for_run(experiment, cfg);
  {
    std::ofstream os(dir / (experiment + "_config.ini"));
    vef::write_config(os, cfg);
  }
  if (experiment == "mms") {
    const auto r = vef::mms_run(cfg);
    vef::write_outputs(r, dir, meta);
    for (const auto& f : r.fits) {
      std::cout << "p=" << f.p << " " << vef::to_string(f.kind) << " order " << f.fit.order << " constant "
                << f.fit.constant << "\n";
    }
  } else if (experiment == "difflim") {
    const auto r = vef::diffusion_limit_run(cfg);
    vef::write_outputs(r, dir, meta);
    for (const auto& row : r.rows) {
      std::cout << "eps=" << row.epsilon << " " << vef::to_string(row.kind) << " outers " << row.outers
                << (row.converged ? "" : " (not converged)") << "\n";
    }
  } else if (experiment == "pipe") {
    auto sink = [&](const vef::PipeRow& row, const vef::FixedPointResult& fp) {
      const std::string tag = "p" + std::to_string(row.p) + "_ne" + std::to_string(row.elements) + "_" + vef::to_string(row.kind);
      std::ofstream log(dir / ("pipe_log_" + tag + ".csv"));
      vef::write_metadata(log, meta);
      fp.log.write_csv(log);
      vef::write_grid_function(dir / ("pipe_varphi_" + tag + ".gf"), meta, fp.varphi);
      vef::write_lineout(dir / ("pipe_lineout_" + tag + ".csv"), meta,
                         vef::sample_lineout(fp.varphi, vef::Vec2(0.0, 0.0), vef::Vec2(7.0, 0.0), 141));
      std::cout << tag << ": outers " << row.outers << (row.converged ? "" : " (not converged)") << ", inner max "
                << row.inner_max << " min " << row.inner_min << " mean " << row.inner_mean << "\n";
    };
    vef::write_outputs(vef::crooked_pipe_run(cfg, sink), dir, meta);
  } else if (experiment == "mockdata") {
    const auto r = vef::mock_data_run(cfg);
    vef::write_outputs(r, dir, meta);
    for (const auto& row : r.rows) {
      std::cout << "elements " << row.elements << " " << row.mode << ": "
                << (row.converged ? std::to_string(row.iterations) : std::string("--")) << "\n";
    }
    for (const auto& row : r.first_outer) {
      std::cout << "elements " << row.elements << " first outer: vef usc " << row.vef_usc << ", vef usc-sym "
                << row.vef_usc_sym << ", diffusion " << row.diffusion << "\n";
    }
  } else {
    const auto r = vef::generic_run(cfg);
    vef::write_outputs(r, dir, meta);
    std::cout << "outers " << r.result.log.outers() << (r.result.converged ? "" : " (not converged)") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order drift-diffusion accelerated transport solver"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"mms", "manufactured-solution convergence study on distorted meshes"},
      {"difflim", "outer iteration counts in the thick diffusion limit"},
      {"pipe", "linearized crooked pipe, refined in h and p"},
      {"mockdata", "preconditioner study with prescribed closures"},
      {"solve", "single run driven by the configuration"}};
  for (const auto& [name, about] : commands) add_flags(app.add_subcommand(name, about), flags);
  CLI11_PARSE(app, argc, argv);
  try {
    return run(app.get_subcommands().front()->get_name(), flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
