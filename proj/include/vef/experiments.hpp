#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "vef/config.hpp"
#include "vef/driver.hpp"
#include "vef/output.hpp"

namespace vef {

/// Manufactured angular flux with spatially varying, quadratically
/// anisotropic and uniform isotropic parts on [0,1]^2.
struct MmsDefinition {
  double delta = 0.1;
  double gamma = 0.5;
  double sigma_t = 1.0;
  double sigma_s = 0.5;

  double psi(const Vec2& x, const Vec3& omega) const;
  Vec2 grad_psi(const Vec2& x, const Vec3& omega) const;
  double phi(const Vec2& x) const;
  /// Omega . grad psi + sigma_t psi - sigma_s / (4 pi) phi.
  double source(const Vec2& x, const Vec3& omega) const;
};

struct Regression {
  double order = 0.0;
  double constant = 0.0;
};
/// Least-squares fit of log err = log C + order log h.
Regression log_regression(const std::vector<double>& h, const std::vector<double>& err);

/// Population standard deviation.
double standard_deviation(const std::vector<double>& values);

/// Cartesian mesh of the configured box refined `level` times (or read from
/// mesh.file), then Taylor-Green distorted when configured.
std::shared_ptr<const Mesh> make_mesh(const ProblemConfig& cfg, int level);
/// Copy of a mesh with new element attributes.
std::shared_ptr<const Mesh> with_attributes(const Mesh& mesh, const std::vector<int>& attributes);

/// Element-wise L2 projection of f onto a DG scalar space.
GridFunction project(const ElementFunction& f, std::shared_ptr<const FeSpace> space);

PrecondKind resolve_precond(const ProblemConfig& cfg, DiscKind kind);

// Manufactured-solution convergence.
struct MmsRow {
  int p = 0;
  int n = 0;
  double h = 0.0;
  std::vector<double> errors;  // one per kind
  double deviation = 0.0;
};
struct MmsFit {
  int p = 0;
  DiscKind kind = DiscKind::ip;
  Regression fit;
};
struct MmsResult {
  std::vector<DiscKind> kinds;
  std::vector<MmsRow> rows;
  std::vector<MmsFit> fits;
};
/// L2 error of the drift-diffusion solution with manufactured closures and sources.
double mms_error(const MmsDefinition& mms, std::shared_ptr<const Mesh> mesh, int p, DiscKind kind,
                 const SolverConfig& solver);
MmsResult mms_run(const ProblemConfig& cfg);

// Thick diffusion limit.
struct DiffusionLimitRow {
  double epsilon = 0.0;
  DiscKind kind = DiscKind::ip;
  int outers = 0;
  bool converged = false;
  double diffusion_difference = -1.0;  // relative L2 gap to the forced diffusion solve (smallest epsilon only)
};
struct DiffusionLimitResult {
  std::vector<DiffusionLimitRow> rows;
  std::vector<std::pair<DiscKind, std::vector<LineoutPoint>>> lineouts;  // smallest epsilon
};
DiffusionLimitResult diffusion_limit_run(const ProblemConfig& cfg);

// Linearized crooked pipe.
bool in_pipe(const Vec2& x);
/// Pipe attribute 1, wall attribute 2, assigned by element centroid.
std::shared_ptr<const Mesh> pipe_mesh(const ProblemConfig& cfg, int level);
Material pipe_material(const Mesh& mesh);
TransportProblem pipe_problem(const Mesh& mesh, double source);

struct PipeRow {
  int p = 0;
  int elements = 0;
  DiscKind kind = DiscKind::ip;
  int outers = 0;
  bool converged = false;
  int inner_max = 0;
  int inner_min = 0;
  double inner_mean = 0.0;
  double seconds = 0.0;
};
struct PipeResult {
  std::vector<PipeRow> rows;
};
/// Runs every (p, level, kind); `sink` receives each finished solve (may be empty).
using PipeSink = std::function<void(const PipeRow&, const FixedPointResult&)>;
PipeResult crooked_pipe_run(const ProblemConfig& cfg, const PipeSink& sink = {});

// Prescribed-closure preconditioner study.
struct MockRow {
  int elements = 0;
  int unknowns = 0;
  std::string mode;
  int iterations = 0;
  bool converged = false;
};
struct FirstOuterRow {
  int elements = 0;
  int vef_usc = 0;
  int vef_usc_sym = 0;
  int diffusion = 0;
  bool converged = false;
};
struct MockResult {
  std::vector<MockRow> rows;
  std::vector<FirstOuterRow> first_outer;
};
MockResult mock_data_run(const ProblemConfig& cfg);

// Generic single run from the configuration.
struct SolveResult {
  std::shared_ptr<const Mesh> mesh;
  FixedPointResult result;
};
SolveResult generic_run(const ProblemConfig& cfg);

/// Writes the CSV outputs of each study into `dir`.
void write_outputs(const MmsResult& r, const std::filesystem::path& dir, const RunMetadata& meta);
void write_outputs(const DiffusionLimitResult& r, const std::filesystem::path& dir, const RunMetadata& meta);
void write_outputs(const PipeResult& r, const std::filesystem::path& dir, const RunMetadata& meta);
void write_outputs(const MockResult& r, const std::filesystem::path& dir, const RunMetadata& meta);
void write_outputs(const SolveResult& r, const std::filesystem::path& dir, const RunMetadata& meta);

}  // namespace vef
