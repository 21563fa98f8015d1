#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "vef/preconditioners.hpp"
#include "vef/vef_assembly.hpp"

namespace vef {

/// Preconditioner choices for the drift-diffusion solve.
///   usc       subspace correction, substitute cycle on Z^T A Z
///   usc_sym   subspace correction, substitute cycle on the symmetrized operator
///   usc_sym3  subspace correction, 3 Richardson steps on Z^T A Z preconditioned as usc_sym
///   exact     subspace correction, sparse LU of Z^T A Z
///   substitute  substitute cycle on the whole operator
///   direct    sparse LU of the whole operator (no Krylov iterations)
/// On the continuous kinds usc/substitute act on A, usc_sym on the symmetrized operator.
enum class PrecondKind { none, jacobi, usc, usc_sym, usc_sym3, exact, substitute, direct };
std::string to_string(PrecondKind kind);
PrecondKind parse_precond_kind(const std::string& name);

/// Default preconditioner per kind: subspace correction for IP/BR2, substitute otherwise.
PrecondKind default_precond(DiscKind kind);

struct SolverConfig {
  PrecondKind precond = PrecondKind::usc;
  double rel_tol = 1e-8;
  int max_iter = 1000;
  bool throw_on_failure = true;
};

class VefSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VefSolveStats {
  int iterations = 0;
  KrylovStatus status = KrylovStatus::converged;
  double relative_residual = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  bool converged() const { return status == KrylovStatus::converged; }
};

/// Preconditioner for `sys`; usc_sym and usc_sym3 require sys.symmetrized.
std::shared_ptr<const LinearOperator> make_preconditioner(const VefSystem& sys, const VefSpaces& spaces,
                                                          PrecondKind kind);

/// BiCGStab on the assembled system, warm-started from `initial` when given.
/// `initial` may live on the DG space for a continuous system (it is then
/// sampled at the continuous dofs) and vice versa.
GridFunction solve_vef(const VefSystem& sys, const VefSpaces& spaces, const SolverConfig& config,
                       const GridFunction* initial = nullptr, VefSolveStats* stats = nullptr);

/// Transfers a drift-diffusion solution onto the DG space.
GridFunction to_dg(const GridFunction& u, const VefSpaces& spaces);

}  // namespace vef
