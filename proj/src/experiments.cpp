#include "vef/experiments.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace vef {

namespace {

constexpr double kPi = std::numbers::pi;

/// Element-wise L2 projection with cached mass factorizations.
class Projector {
 public:
  explicit Projector(std::shared_ptr<const FeSpace> space)
      : space_(std::move(space)),
        vq_(space_->mesh(), quadrature_points(space_->degree(), space_->mesh().geometric_degree())),
        table_(tabulate(space_->basis(), vq_.reference_points())) {
    const int n = space_->local_size();
    for (int e = 0; e < space_->mesh().num_elements(); ++e) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
      for (int q = 0; q < vq_.points_per_element(); ++q) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) M(i, j) += vq_.wJ(e, q) * table_.value(q, i) * table_.value(q, j);
        }
      }
      mass_.emplace_back(M);
    }
  }

  GridFunction operator()(const ElementFunction& f) const {
    const int n = space_->local_size();
    GridFunction u(space_);
    Eigen::VectorXd b(n);
    for (int e = 0; e < space_->mesh().num_elements(); ++e) {
      b.setZero();
      for (int q = 0; q < vq_.points_per_element(); ++q) {
        const double fq = vq_.wJ(e, q) * f(e, vq_.x(e, q));
        for (int i = 0; i < n; ++i) b[i] += fq * table_.value(q, i);
      }
      const Eigen::VectorXd c = mass_[e].solve(b);
      for (int i = 0; i < n; ++i) u.values()[space_->dof(e, i)] = c[i];
    }
    return u;
  }

 private:
  std::shared_ptr<const FeSpace> space_;
  VolumeQuadrature vq_;
  ShapeTable table_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> mass_;
};

OuterConfig outer_config(const ProblemConfig& cfg, DiscKind kind) {
  OuterConfig oc;
  oc.kind = kind;
  oc.tolerance = cfg.outer_tol;
  oc.max_outer = cfg.max_outer;
  oc.anderson = cfg.anderson;
  oc.augmented = cfg.augmented;
  oc.sweeps = cfg.sweeps;
  oc.closure.enabled = cfg.fixup;
  oc.vef.penalty_scale = cfg.penalty_scale;
  oc.vef.br2_eta = cfg.br2_eta;
  oc.inner.precond = resolve_precond(cfg, kind);
  oc.inner.rel_tol = cfg.inner_tol;
  oc.inner.max_iter = cfg.inner_max_iter;
  return oc;
}

std::vector<int> degrees(const ProblemConfig& cfg) { return cfg.p_list.empty() ? std::vector<int>{cfg.p} : cfg.p_list; }
std::vector<DiscKind> kinds(const ProblemConfig& cfg) {
  return cfg.kinds.empty() ? std::vector<DiscKind>{cfg.kind} : cfg.kinds;
}

std::shared_ptr<const FeSpace> transport_space(std::shared_ptr<const Mesh> mesh, int p) {
  return std::make_shared<FeSpace>(std::move(mesh), p, SpaceFamily::dg_scalar, PointKind::open);
}

TransportProblem isotropic_problem(Material mat, double source, double inflow) {
  TransportProblem prob;
  prob.material = std::move(mat);
  if (source != 0.0) prob.source = [source](int, const Vec2&, const Vec3&) { return source; };
  if (inflow != 0.0) prob.inflow = [inflow](const Vec2&, const Vec3&) { return inflow; };
  return prob;
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

}  // namespace

double MmsDefinition::psi(const Vec2& x, const Vec3& o) const {
  const double a = 3.0 * kPi / (1.0 + 2.0 * delta);
  const double A = std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
  const double B = std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]);
  const double C = std::sin(a * (x[0] + delta)) * std::sin(a * (x[1] + delta));
  return (A + o[0] * o[1] * B + o[0] * o[0] * C + gamma) / (4.0 * kPi);
}

Vec2 MmsDefinition::grad_psi(const Vec2& x, const Vec3& o) const {
  const double a = 3.0 * kPi / (1.0 + 2.0 * delta);
  const Vec2 gA(kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]), kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]));
  const Vec2 gB(2 * kPi * std::cos(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]),
                2 * kPi * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]));
  const Vec2 gC(a * std::cos(a * (x[0] + delta)) * std::sin(a * (x[1] + delta)),
                a * std::sin(a * (x[0] + delta)) * std::cos(a * (x[1] + delta)));
  return (gA + o[0] * o[1] * gB + o[0] * o[0] * gC) / (4.0 * kPi);
}

double MmsDefinition::phi(const Vec2& x) const {
  const double a = 3.0 * kPi / (1.0 + 2.0 * delta);
  return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) +
         std::sin(a * (x[0] + delta)) * std::sin(a * (x[1] + delta)) / 3.0 + gamma;
}

double MmsDefinition::source(const Vec2& x, const Vec3& o) const {
  return Vec2(o[0], o[1]).dot(grad_psi(x, o)) + sigma_t * psi(x, o) - sigma_s / (4.0 * kPi) * phi(x);
}

Regression log_regression(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw std::invalid_argument("log_regression: size mismatch");
  if (h.size() < 2) throw std::invalid_argument("log_regression: need at least 2 points");
  Eigen::MatrixXd X(h.size(), 2);
  Eigen::VectorXd y(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw std::invalid_argument("log_regression: values must be positive");
    X(i, 0) = 1.0;
    X(i, 1) = std::log(h[i]);
    y[i] = std::log(err[i]);
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
  return {c[1], std::exp(c[0])};
}

double standard_deviation(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double s = 0.0;
  for (double v : values) s += (v - mean) * (v - mean);
  return std::sqrt(s / static_cast<double>(values.size()));
}

std::shared_ptr<const Mesh> make_mesh(const ProblemConfig& cfg, int level) {
  std::shared_ptr<Mesh> mesh;
  if (!cfg.mesh_file.empty()) {
    if (level > 0) throw ConfigError("uniform refinement of a mesh read from file is not supported");
    std::ifstream in(cfg.mesh_file);
    if (!in) throw ConfigError("cannot open mesh file '" + cfg.mesh_file + "'");
    mesh = std::make_shared<Mesh>(read_mesh(in));
  } else {
    mesh = std::make_shared<Mesh>(build_cartesian_mesh(cfg.nx << level, cfg.ny << level,
                                                       {Vec2(cfg.xmin, cfg.ymin), Vec2(cfg.xmax, cfg.ymax)},
                                                       cfg.geometric_degree));
  }
  if (cfg.distort_time > 0.0) return std::make_shared<Mesh>(distort_taylor_green(*mesh, cfg.distort_time, cfg.distort_steps, kPi));
  return mesh;
}

std::shared_ptr<const Mesh> with_attributes(const Mesh& mesh, const std::vector<int>& attributes) {
  std::vector<int> conn;
  conn.reserve(static_cast<std::size_t>(mesh.num_elements()) * mesh.nodes_per_element());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int v : mesh.element_nodes(e)) conn.push_back(v);
  }
  return std::make_shared<Mesh>(mesh.geometric_degree(), mesh.nodes(), std::move(conn), attributes);
}

GridFunction project(const ElementFunction& f, std::shared_ptr<const FeSpace> space) {
  if (space->family() != SpaceFamily::dg_scalar) throw std::invalid_argument("project: expects a DG scalar space");
  return Projector(std::move(space))(f);
}

PrecondKind resolve_precond(const ProblemConfig& cfg, DiscKind kind) {
  return cfg.precond == "auto" ? default_precond(kind) : parse_precond_kind(cfg.precond);
}

double mms_error(const MmsDefinition& mms, std::shared_ptr<const Mesh> mesh, int p, DiscKind kind,
                 const SolverConfig& solver) {
  const auto tspace = transport_space(mesh, p);
  const AngularQuadrature quad = level_symmetric(4);
  const Projector proj(tspace);
  DirectionalFluxSet psi(tspace, quad.size());
  for (int d = 0; d < quad.size(); ++d) {
    const Vec3 o = quad.directions[d];
    psi.psi[d] = proj([&mms, o](int, const Vec2& x) { return mms.psi(x, o); }).values();
  }
  const FluxVefData data(psi, quad);
  const Material mat = Material::uniform(mesh->num_elements(), mms.sigma_t, mms.sigma_s);
  const MomentSources src = moment_sources([mms](int, const Vec2& x, const Vec3& o) { return mms.source(x, o); },
                                           [mms](const Vec2& x, const Vec3& o) { return mms.psi(x, o); }, quad);
  const VefSpaces spaces = VefSpaces::build(mesh, p);
  VefOptions opts;
  opts.build_symmetrized = solver.precond == PrecondKind::usc_sym || solver.precond == PrecondKind::usc_sym3;
  const VefSystem sys = assemble_vef(kind, spaces, data, mat, src, opts);
  const GridFunction u = solve_vef(sys, spaces, solver);
  return l2_error(u, [&mms](const Vec2& x) { return mms.phi(x); });
}

MmsResult mms_run(const ProblemConfig& cfg) {
  MmsDefinition mms;
  mms.sigma_t = cfg.sigma_t;
  mms.sigma_s = cfg.sigma_s;
  MmsResult result;
  result.kinds = kinds(cfg);
  std::vector<int> sizes = cfg.mesh_sizes.empty() ? std::vector<int>{cfg.nx} : cfg.mesh_sizes;
  if (static_cast<int>(sizes.size()) > cfg.refine + 1) sizes.resize(cfg.refine + 1);
  for (int p : degrees(cfg)) {
    std::vector<double> hs;
    std::vector<std::vector<double>> errs(result.kinds.size());
    for (int n : sizes) {
      ProblemConfig mc = cfg;
      mc.nx = mc.ny = n;
      const auto mesh = make_mesh(mc, 0);
      MmsRow row;
      row.p = p;
      row.n = n;
      row.h = mesh->max_characteristic_length();
      for (std::size_t k = 0; k < result.kinds.size(); ++k) {
        SolverConfig solver;
        solver.precond = resolve_precond(cfg, result.kinds[k]);
        solver.rel_tol = std::min(cfg.inner_tol, 1e-12);
        solver.max_iter = cfg.inner_max_iter;
        const double err = mms_error(mms, mesh, p, result.kinds[k], solver);
        row.errors.push_back(err);
        errs[k].push_back(err);
      }
      row.deviation = standard_deviation(row.errors);
      hs.push_back(row.h);
      result.rows.push_back(row);
    }
    if (hs.size() >= 2) {
      for (std::size_t k = 0; k < result.kinds.size(); ++k) result.fits.push_back({p, result.kinds[k], log_regression(hs, errs[k])});
    }
  }
  return result;
}

DiffusionLimitResult diffusion_limit_run(const ProblemConfig& cfg) {
  DiffusionLimitResult result;
  const auto mesh = make_mesh(cfg, cfg.refine);
  const int p = cfg.p;
  const auto tspace = transport_space(mesh, p);
  const VefSpaces spaces = VefSpaces::build(mesh, p);
  const AngularQuadrature quad = level_symmetric(cfg.quadrature);
  double smallest = 1.0;
  for (double eps : cfg.epsilons) smallest = std::min(smallest, eps);
  for (double eps : cfg.epsilons) {
    const Material mat = Material::uniform(mesh->num_elements(), 1.0 / eps, 1.0 / eps - eps);
    const TransportSolver ts(tspace, quad, isotropic_problem(mat, eps, 0.0), {cfg.fixup});
    for (DiscKind kind : kinds(cfg)) {
      const FixedPointResult fp = fixed_point_solve(ts, spaces, outer_config(cfg, kind));
      DiffusionLimitRow row{eps, kind, fp.log.outers(), fp.converged, -1.0};
      if (eps == smallest) {
        const PrescribedVefData iso = PrescribedVefData::isotropic(*mesh);
        const MomentSources src = moment_sources(ts.problem().source, ts.problem().inflow, quad);
        const VefSystem sys = assemble_vef(kind, spaces, iso, mat, src, outer_config(cfg, kind).vef);
        SolverConfig solver = outer_config(cfg, kind).inner;
        const GridFunction diff = to_dg(solve_vef(sys, spaces, solver), spaces);
        row.diffusion_difference = l2_distance(fp.varphi, diff) / l2_norm(diff);
        const double ym = 0.5 * (cfg.ymin + cfg.ymax);
        result.lineouts.emplace_back(kind, sample_lineout(fp.varphi, Vec2(cfg.xmin, ym), Vec2(cfg.xmax, ym), 101));
      }
      result.rows.push_back(row);
    }
  }
  return result;
}

bool in_pipe(const Vec2& x) {
  auto box = [&x](double x0, double x1, double y0, double y1) { return x[0] >= x0 && x[0] <= x1 && x[1] >= y0 && x[1] <= y1; };
  return box(0.0, 2.5, -0.5, 0.5) || box(2.5, 3.5, -0.5, 1.5) || box(3.5, 5.5, 0.5, 1.5) || box(5.5, 6.5, -0.5, 1.5) ||
         box(6.5, 7.0, -0.5, 0.5);
}

std::shared_ptr<const Mesh> pipe_mesh(const ProblemConfig& cfg, int level) {
  const auto base = make_mesh(cfg, level);
  std::vector<int> attrs(base->num_elements());
  for (int e = 0; e < base->num_elements(); ++e) attrs[e] = in_pipe(base->transform(e).map(Vec2(0.5, 0.5))) ? 1 : 2;
  return with_attributes(*base, attrs);
}

Material pipe_material(const Mesh& mesh) {
  constexpr double kPipe = 0.2, kWall = 200.0, kAbsorption = 1e-3;
  Material m;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double s = mesh.attribute(e) == 1 ? kPipe : kWall;
    m.sigma_t.push_back(s + kAbsorption);
    m.sigma_s.push_back(s);
  }
  return m;
}

TransportProblem pipe_problem(const Mesh& mesh, double source) {
  TransportProblem prob = isotropic_problem(pipe_material(mesh), source, 0.0);
  prob.inflow = [](const Vec2& x, const Vec3&) {
    return std::abs(x[0]) < 1e-9 && std::abs(x[1]) <= 0.5 ? 0.5 / kPi : 0.0;
  };
  return prob;
}

PipeResult crooked_pipe_run(const ProblemConfig& cfg, const PipeSink& sink) {
  PipeResult result;
  const AngularQuadrature quad = level_symmetric(cfg.quadrature);
  for (int p : degrees(cfg)) {
    for (int level = 0; level <= cfg.refine; ++level) {
      const auto mesh = pipe_mesh(cfg, level);
      const TransportSolver ts(transport_space(mesh, p), quad, pipe_problem(*mesh, cfg.source), {cfg.fixup});
      const VefSpaces spaces = VefSpaces::build(mesh, p);
      for (DiscKind kind : kinds(cfg)) {
        const FixedPointResult fp = fixed_point_solve(ts, spaces, outer_config(cfg, kind));
        PipeRow row;
        row.p = p;
        row.elements = mesh->num_elements();
        row.kind = kind;
        row.outers = fp.log.outers();
        row.converged = fp.converged;
        row.inner_max = fp.log.max_inner();
        row.inner_min = fp.log.min_inner();
        row.inner_mean = fp.log.mean_inner();
        for (const auto& r : fp.log.records) row.seconds += r.seconds;
        if (sink) sink(row, fp);
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

MockResult mock_data_run(const ProblemConfig& cfg) {
  MockResult result;
  const AngularQuadrature quad = level_symmetric(cfg.quadrature);
  for (int level = 0; level <= cfg.refine; ++level) {
    const auto mesh = pipe_mesh(cfg, level);
    const int p = cfg.p;
    const VefSpaces spaces = VefSpaces::build(mesh, p);
    const Material mat = pipe_material(*mesh);
    const TransportProblem prob = pipe_problem(*mesh, cfg.source);
    const MomentSources src = moment_sources(prob.source, prob.inflow, quad);
    const PrescribedVefData mock(
        *mesh,
        [mesh](int e, const Vec2&) {
          Mat2 E = Mat2::Identity() / 3.0;
          if (mesh->attribute(e) == 1) E << 9.0 / 11.0, 0.0, 0.0, 1.0 / 11.0;
          return E;
        },
        {},
        [mesh](int bface, const Vec2&, const Vec2&) {
          return mesh->attribute(mesh->boundary_faces()[bface].elem) == 1 ? 0.9 : 0.5;
        });
    VefOptions opts;
    opts.build_symmetrized = true;
    opts.penalty_scale = cfg.penalty_scale;
    const VefSystem sys = assemble_vef(cfg.kind, spaces, mock, mat, src, opts);
    for (const std::string& mode : cfg.precond_list) {
      SolverConfig solver{parse_precond_kind(mode), cfg.inner_tol, cfg.inner_max_iter, false};
      VefSolveStats stats;
      solve_vef(sys, spaces, solver, nullptr, &stats);
      result.rows.push_back({mesh->num_elements(), static_cast<int>(sys.b.size()), mode, stats.iterations, stats.converged()});
    }

    // First outer of the physical problem: one sweep from a zero scalar flux.
    const TransportSolver ts(transport_space(mesh, p), quad, prob, {cfg.fixup});
    DirectionalFluxSet psi(ts.space_ptr(), quad.size());
    ts.sweep(Vector::Zero(ts.space().size()), psi);
    const FluxVefData data(psi, quad, ClosureGuard{cfg.fixup});
    const VefSystem vef = assemble_vef(DiscKind::ip, spaces, data, mat, src, opts);
    const VefSystem diff = assemble_vef(DiscKind::ip, spaces, PrescribedVefData::isotropic(*mesh), mat, src, opts);
    FirstOuterRow row;
    row.elements = mesh->num_elements();
    VefSolveStats s1, s2, s3;
    solve_vef(vef, spaces, {PrecondKind::usc, cfg.inner_tol, cfg.inner_max_iter, false}, nullptr, &s1);
    solve_vef(vef, spaces, {PrecondKind::usc_sym, cfg.inner_tol, cfg.inner_max_iter, false}, nullptr, &s2);
    solve_vef(diff, spaces, {PrecondKind::usc, cfg.inner_tol, cfg.inner_max_iter, false}, nullptr, &s3);
    row.vef_usc = s1.iterations;
    row.vef_usc_sym = s2.iterations;
    row.diffusion = s3.iterations;
    row.converged = s1.converged() && s2.converged() && s3.converged();
    result.first_outer.push_back(row);
  }
  return result;
}

SolveResult generic_run(const ProblemConfig& cfg) {
  const auto mesh = make_mesh(cfg, cfg.refine);
  const Material mat = Material::uniform(mesh->num_elements(), cfg.sigma_t, cfg.sigma_s);
  const TransportSolver ts(transport_space(mesh, cfg.p), level_symmetric(cfg.quadrature),
                           isotropic_problem(mat, cfg.source, cfg.inflow), {cfg.fixup});
  const VefSpaces spaces = VefSpaces::build(mesh, cfg.p);
  return {mesh, fixed_point_solve(ts, spaces, outer_config(cfg, cfg.kind))};
}

void write_outputs(const MmsResult& r, const std::filesystem::path& dir, const RunMetadata& meta) {
  std::vector<std::string> cols = {"p", "n", "h"};
  for (DiscKind k : r.kinds) cols.push_back(to_string(k));
  cols.push_back("deviation");
  CsvTable errors(cols);
  for (const auto& row : r.rows) {
    std::vector<std::string> v = {fmt(row.p), fmt(row.n), fmt(row.h)};
    for (double e : row.errors) v.push_back(fmt(e));
    v.push_back(fmt(row.deviation));
    errors.add_row(v);
  }
  errors.write(dir / "mms_errors.csv", meta);
  CsvTable fits({"p", "kind", "order", "constant"});
  for (const auto& f : r.fits) fits.add_row({fmt(f.p), to_string(f.kind), fmt(f.fit.order), fmt(f.fit.constant)});
  fits.write(dir / "mms_regression.csv", meta);
}

void write_outputs(const DiffusionLimitResult& r, const std::filesystem::path& dir, const RunMetadata& meta) {
  CsvTable t({"epsilon", "kind", "outers", "converged", "diffusion_difference"});
  for (const auto& row : r.rows) {
    t.add_row({fmt(row.epsilon), to_string(row.kind), fmt(row.outers), fmt(row.converged), fmt(row.diffusion_difference)});
  }
  t.write(dir / "difflim_outers.csv", meta);
  for (const auto& [kind, pts] : r.lineouts) write_lineout(dir / ("difflim_lineout_" + to_string(kind) + ".csv"), meta, pts);
}

void write_outputs(const PipeResult& r, const std::filesystem::path& dir, const RunMetadata& meta) {
  CsvTable outer({"p", "elements", "kind", "outers", "converged", "seconds"});
  CsvTable inner({"p", "elements", "kind", "inner_max", "inner_min", "inner_mean"});
  for (const auto& row : r.rows) {
    outer.add_row({fmt(row.p), fmt(row.elements), to_string(row.kind), fmt(row.outers), fmt(row.converged), fmt(row.seconds)});
    inner.add_row({fmt(row.p), fmt(row.elements), to_string(row.kind), fmt(row.inner_max), fmt(row.inner_min),
                   fmt(row.inner_mean)});
  }
  outer.write(dir / "pipe_outer.csv", meta);
  inner.write(dir / "pipe_inner.csv", meta);
}

void write_outputs(const MockResult& r, const std::filesystem::path& dir, const RunMetadata& meta) {
  CsvTable t({"elements", "unknowns", "mode", "iterations", "converged"});
  for (const auto& row : r.rows) {
    t.add_row({fmt(row.elements), fmt(row.unknowns), row.mode, fmt(row.iterations), fmt(row.converged)});
  }
  t.write(dir / "mock_precond.csv", meta);
  CsvTable f({"elements", "vef_usc", "vef_usc_sym", "diffusion_usc", "converged"});
  for (const auto& row : r.first_outer) {
    f.add_row({fmt(row.elements), fmt(row.vef_usc), fmt(row.vef_usc_sym), fmt(row.diffusion), fmt(row.converged)});
  }
  f.write(dir / "mock_first_outer.csv", meta);
}

void write_outputs(const SolveResult& r, const std::filesystem::path& dir, const RunMetadata& meta) {
  CsvTable t({"outer", "residual", "inner_iterations", "sweeps", "transport_difference", "seconds"});
  for (const auto& rec : r.result.log.records) {
    t.add_row({fmt(rec.outer), fmt(rec.residual), fmt(rec.inner_iterations), fmt(rec.sweeps), fmt(rec.transport_difference),
               fmt(rec.seconds)});
  }
  t.write(dir / "solve_outer.csv", meta);
  write_grid_function(dir / "solve_varphi.gf", meta, r.result.varphi);
  const BoundingBox box = r.mesh->bounding_box();
  const double ym = 0.5 * (box.lo[1] + box.hi[1]);
  write_lineout(dir / "solve_lineout.csv", meta, sample_lineout(r.result.varphi, Vec2(box.lo[0], ym), Vec2(box.hi[0], ym), 101));
}

}  // namespace vef
