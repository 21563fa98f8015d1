#include "vef/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "vef/anderson.hpp"

namespace vef {

int IterationLog::max_inner() const {
  int m = 0;
  for (const auto& r : records) m = std::max(m, r.inner_iterations);
  return m;
}

int IterationLog::min_inner() const {
  if (records.empty()) return 0;
  int m = records.front().inner_iterations;
  for (const auto& r : records) m = std::min(m, r.inner_iterations);
  return m;
}

double IterationLog::mean_inner() const {
  if (records.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : records) s += r.inner_iterations;
  return s / static_cast<double>(records.size());
}

void IterationLog::write_csv(std::ostream& os) const {
  os << "outer,residual,inner_iterations,sweeps,transport_difference,seconds\n";
  for (const auto& r : records) {
    os << r.outer << "," << std::setprecision(10) << r.residual << "," << r.inner_iterations << "," << r.sweeps << ","
       << r.transport_difference << "," << std::setprecision(4) << r.seconds << "\n";
  }
}

double l2_distance(const GridFunction& a, const GridFunction& b) {
  if (&a.space().mesh() != &b.space().mesh()) throw std::invalid_argument("l2_distance: functions live on different meshes");
  const Mesh& mesh = a.space().mesh();
  const int p = std::max(a.space().degree(), b.space().degree());
  const VolumeQuadrature vq(mesh, quadrature_points(p, mesh.geometric_degree()));
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int q = 0; q < vq.points_per_element(); ++q) {
      const Vec2& xi = vq.reference_points()[q];
      const double d = a.eval(e, xi) - b.eval(e, xi);
      s += vq.wJ(e, q) * d * d;
    }
  }
  return std::sqrt(s);
}

VefIteration::VefIteration(const TransportSolver& transport, const VefSpaces& spaces, OuterConfig config)
    : transport_(transport), spaces_(spaces), config_(std::move(config)) {
  if (config_.sweeps < 1 || config_.sweeps > 3) throw std::invalid_argument("OuterConfig: sweeps per outer must be 1, 2 or 3");
  if (config_.anderson < 0) throw std::invalid_argument("OuterConfig: anderson window must be >= 0");
  if (&transport.space().mesh() != &spaces.dg->mesh()) {
    throw std::invalid_argument("VefIteration: transport and drift-diffusion spaces live on different meshes");
  }
  const auto& prob = transport.problem();
  sources_ = moment_sources(prob.source, prob.inflow, transport.quadrature());
  const bool needs_sym = config_.inner.precond == PrecondKind::usc_sym || config_.inner.precond == PrecondKind::usc_sym3;
  if (needs_sym) config_.vef.build_symmetrized = true;
}

GridFunction VefIteration::apply(const GridFunction& varphi, DirectionalFluxSet& psi, OuterRecord* record) const {
  const Vector scatter = transport_.scattering_source(varphi);
  for (int k = 0; k < config_.sweeps; ++k) transport_.sweep(scatter, psi);
  const FluxVefData data(psi, transport_.quadrature(), config_.closure);
  const VefSystem sys = assemble_vef(config_.kind, spaces_, data, transport_.problem().material, sources_, config_.vef);
  VefSolveStats stats;
  const GridFunction next = to_dg(solve_vef(sys, spaces_, config_.inner, &varphi, &stats), spaces_);
  if (record) {
    record->inner_iterations = stats.iterations;
    record->sweeps = config_.sweeps;
    const GridFunction phi(transport_.space_ptr(), data.moments().phi);
    record->transport_difference = l2_distance(phi, next);
  }
  return next;
}

FixedPointResult fixed_point_solve(const TransportSolver& transport, const VefSpaces& spaces, const OuterConfig& config,
                                   const GridFunction* initial) {
  using Clock = std::chrono::steady_clock;
  const VefIteration G(transport, spaces, config);
  FixedPointResult result{GridFunction(spaces.dg), DirectionalFluxSet(transport.space_ptr(), transport.quadrature().size()),
                          {}, false};
  GridFunction x = initial ? to_dg(*initial, spaces) : GridFunction(spaces.dg);
  std::unique_ptr<AndersonAccelerator> mixer;
  if (config.anderson > 0) mixer = std::make_unique<AndersonAccelerator>(config.anderson);
  const int nvar = spaces.dg->size();
  const int npsi = transport.space().size();
  const int nd = transport.quadrature().size();

  for (int k = 1; k <= config.max_outer; ++k) {
    const auto t0 = Clock::now();
    OuterRecord rec;
    rec.outer = k;
    std::vector<Vector> psi_in;
    if (mixer && config.augmented) psi_in = result.psi.psi;
    GridFunction gx = G.apply(x, result.psi, &rec);
    const double diff = l2_distance(gx, x);
    const double norm = l2_norm(gx);
    rec.residual = norm > 0.0 ? diff / norm : diff;
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.log.records.push_back(rec);
    if (rec.residual <= config.tolerance) {
      result.varphi = std::move(gx);
      result.converged = true;
      return result;
    }
    if (!mixer) {
      x = std::move(gx);
      continue;
    }
    if (config.augmented) {
      Vector xa(nvar + nd * npsi), ga(nvar + nd * npsi);
      xa.head(nvar) = x.values();
      ga.head(nvar) = gx.values();
      for (int d = 0; d < nd; ++d) {
        xa.segment(nvar + d * npsi, npsi) = psi_in[d];
        ga.segment(nvar + d * npsi, npsi) = result.psi.psi[d];
      }
      const Vector next = mixer->update(xa, ga);
      x.values() = next.head(nvar);
      for (int d = 0; d < nd; ++d) result.psi.psi[d] = next.segment(nvar + d * npsi, npsi);
    } else {
      x.values() = mixer->update(x.values(), gx.values());
    }
  }
  result.varphi = std::move(x);
  return result;
}

}  // namespace vef
