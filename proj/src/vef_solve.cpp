#include "vef/vef_solve.hpp"

#include <chrono>
#include <sstream>

namespace vef {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool is_continuous(DiscKind k) { return k == DiscKind::cg || k == DiscKind::cg_symmetrized; }

/// Continuous coefficients read off a DG vector at the shared lattice points.
Vector restrict_by_sampling(const SparseMatrix& Z, const Vector& dg) {
  Vector out = Vector::Zero(Z.cols());
  for (int r = 0; r < Z.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(Z, r); it; ++it) out[it.col()] = dg[r];
  }
  return out;
}

class DirectOperator final : public LinearOperator {
 public:
  explicit DirectOperator(const SparseMatrix& A) : lu_(A) {}
  int size() const override { return lu_.size(); }
  void apply(const Vector& x, Vector& y) const override { lu_.apply(x, y); }

 private:
  DirectSolver lu_;
};

const SparseMatrix& require_symmetrized(const VefSystem& sys, PrecondKind kind) {
  if (sys.symmetrized.rows() == 0) {
    throw std::invalid_argument("preconditioner " + to_string(kind) + " needs the symmetrized operator; assemble with build_symmetrized");
  }
  return sys.symmetrized;
}

}  // namespace

std::string to_string(PrecondKind kind) {
  switch (kind) {
    case PrecondKind::none: return "none";
    case PrecondKind::jacobi: return "jacobi";
    case PrecondKind::usc: return "usc";
    case PrecondKind::usc_sym: return "usc-sym";
    case PrecondKind::usc_sym3: return "usc-sym3";
    case PrecondKind::exact: return "exact";
    case PrecondKind::substitute: return "substitute";
    case PrecondKind::direct: return "direct";
  }
  return "unknown";
}

PrecondKind parse_precond_kind(const std::string& name) {
  for (PrecondKind k : {PrecondKind::none, PrecondKind::jacobi, PrecondKind::usc, PrecondKind::usc_sym,
                        PrecondKind::usc_sym3, PrecondKind::exact, PrecondKind::substitute, PrecondKind::direct}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown preconditioner '" + name +
                              "' (expected usc, usc-sym, usc-sym3, substitute, exact, direct, jacobi, none)");
}

PrecondKind default_precond(DiscKind kind) {
  return kind == DiscKind::ip || kind == DiscKind::br2 ? PrecondKind::usc : PrecondKind::substitute;
}

std::shared_ptr<const LinearOperator> make_preconditioner(const VefSystem& sys, const VefSpaces& spaces,
                                                          PrecondKind kind) {
  switch (kind) {
    case PrecondKind::none: return nullptr;
    case PrecondKind::jacobi: return std::make_shared<JacobiPreconditioner>(sys.A);
    case PrecondKind::direct: return std::make_shared<DirectOperator>(sys.A);
    case PrecondKind::substitute: return std::make_shared<TwoLevelSubstitute>(sys.A);
    default: break;
  }
  if (is_continuous(sys.kind)) {
    switch (kind) {
      case PrecondKind::usc: return std::make_shared<TwoLevelSubstitute>(sys.A);
      case PrecondKind::usc_sym: return std::make_shared<TwoLevelSubstitute>(require_symmetrized(sys, kind));
      case PrecondKind::usc_sym3:
        return make_continuous_solver(ContinuousMode::substitute_k_inner, sys.A, &require_symmetrized(sys, kind), 3);
      case PrecondKind::exact: return std::make_shared<DirectOperator>(sys.A);
      default: break;
    }
  }
  const SparseMatrix& Z = spaces.prolongation;
  const SparseMatrix A_V = triple_product(Z, sys.A, Z);
  std::shared_ptr<const LinearOperator> inner;
  switch (kind) {
    case PrecondKind::usc: inner = make_continuous_solver(ContinuousMode::substitute, A_V); break;
    case PrecondKind::usc_sym:
      inner = make_continuous_solver(ContinuousMode::substitute, A_V, &require_symmetrized(sys, kind));
      break;
    case PrecondKind::usc_sym3:
      inner = make_continuous_solver(ContinuousMode::substitute_k_inner, A_V, &require_symmetrized(sys, kind), 3);
      break;
    case PrecondKind::exact: inner = make_continuous_solver(ContinuousMode::exact, A_V); break;
    default: throw std::invalid_argument("make_preconditioner: unsupported preconditioner " + to_string(kind));
  }
  return std::make_shared<SubspaceCorrectionPreconditioner>(sys.A, Z, spaces.boundary_dofs, inner);
}

GridFunction to_dg(const GridFunction& u, const VefSpaces& spaces) {
  if (u.space_ptr() == spaces.dg) return u;
  if (u.space_ptr() == spaces.continuous) return GridFunction(spaces.dg, spmv(spaces.prolongation, u.values()));
  throw std::invalid_argument("to_dg: function does not live on the drift-diffusion spaces");
}

GridFunction solve_vef(const VefSystem& sys, const VefSpaces& spaces, const SolverConfig& config,
                       const GridFunction* initial, VefSolveStats* stats) {
  const auto t0 = Clock::now();
  VefSolveStats local;
  Vector x0 = Vector::Zero(sys.b.size());
  if (initial) {
    if (initial->values().size() == sys.b.size()) {
      x0 = initial->values();
    } else if (is_continuous(sys.kind) && initial->space_ptr() == spaces.dg) {
      x0 = restrict_by_sampling(spaces.prolongation, initial->values());
    } else if (!is_continuous(sys.kind) && initial->space_ptr() == spaces.continuous) {
      x0 = spmv(spaces.prolongation, initial->values());
    } else {
      throw DimensionError("solve_vef: initial guess does not match the solution space");
    }
  }
  Vector x;
  if (config.precond == PrecondKind::direct) {
    const DirectSolver lu(sys.A);
    local.setup_seconds = seconds_since(t0);
    lu.apply(sys.b, x);
    const double bn = sys.b.norm();
    local.relative_residual = bn > 0 ? (sys.b - sys.A * x).norm() / bn : 0.0;
    local.solve_seconds = seconds_since(t0) - local.setup_seconds;
  } else {
    const auto precond = make_preconditioner(sys, spaces, config.precond);
    local.setup_seconds = seconds_since(t0);
    const KrylovResult r = bicgstab(sys.A, sys.b, precond.get(), &x0, {config.rel_tol, config.max_iter});
    local.solve_seconds = seconds_since(t0) - local.setup_seconds;
    local.iterations = r.iterations;
    local.status = r.status;
    local.relative_residual = r.relative_residual;
    x = r.x;
    if (!r.converged() && config.throw_on_failure) {
      const Mesh& mesh = spaces.dg->mesh();
      std::ostringstream msg;
      msg << "drift-diffusion solve failed (" << to_string(r.status) << ") for kind " << to_string(sys.kind)
          << " with preconditioner " << to_string(config.precond) << ": " << r.iterations
          << " iterations, relative residual " << r.relative_residual << ", " << mesh.num_elements()
          << " elements, p = " << spaces.dg->degree() << ", " << sys.b.size() << " unknowns";
      throw VefSolveError(msg.str());
    }
  }
  if (stats) *stats = local;
  return GridFunction(sys.space, std::move(x));
}

}  // namespace vef
