#pragma once

#include <iosfwd>
#include <vector>

#include "vef/transport.hpp"
#include "vef/vef_solve.hpp"

namespace vef {

struct OuterConfig {
  DiscKind kind = DiscKind::ip;
  double tolerance = 1e-6;
  int max_outer = 200;
  int anderson = 0;         // 0 is plain fixed-point iteration
  bool augmented = false;   // mix the angular fluxes along with the scalar flux
  int sweeps = 1;           // transport inversions per outer, same scattering source
  ClosureGuard closure;     // treatment of nonpositive scalar flux in the closures
  VefOptions vef;
  SolverConfig inner;
};

struct OuterRecord {
  int outer = 0;
  double residual = 0.0;
  int inner_iterations = 0;
  int sweeps = 0;
  double transport_difference = 0.0;  // ||phi - varphi||
  double seconds = 0.0;
};

struct IterationLog {
  std::vector<OuterRecord> records;
  int outers() const { return static_cast<int>(records.size()); }
  int max_inner() const;
  int min_inner() const;
  double mean_inner() const;
  /// Header line then one row per outer.
  void write_csv(std::ostream& os) const;
};

/// L2 distance between two functions on the same mesh (any spaces).
double l2_distance(const GridFunction& a, const GridFunction& b);

/// The fixed-point map: transport sweeps driven by the scattering source of
/// varphi, then the drift-diffusion solve closed with the new fluxes.
class VefIteration {
 public:
  VefIteration(const TransportSolver& transport, const VefSpaces& spaces, OuterConfig config);

  /// Returns G(varphi) on the DG space; `psi` carries the lagged fluxes in and
  /// the new fluxes out.
  GridFunction apply(const GridFunction& varphi, DirectionalFluxSet& psi, OuterRecord* record = nullptr) const;

  const OuterConfig& config() const { return config_; }
  const VefSpaces& spaces() const { return spaces_; }
  const TransportSolver& transport() const { return transport_; }

 private:
  const TransportSolver& transport_;
  const VefSpaces& spaces_;
  OuterConfig config_;
  MomentSources sources_;
};

struct FixedPointResult {
  GridFunction varphi;
  DirectionalFluxSet psi;
  IterationLog log;
  bool converged = false;
};

/// Iterates until ||varphi_{k+1} - varphi_k|| <= tol ||varphi_{k+1}|| in L2,
/// starting from varphi = 0 and zero fluxes unless `initial` is given.
FixedPointResult fixed_point_solve(const TransportSolver& transport, const VefSpaces& spaces, const OuterConfig& config,
                                   const GridFunction* initial = nullptr);

}  // namespace vef
