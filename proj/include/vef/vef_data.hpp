#pragma once

#include <functional>
#include <stdexcept>

#include "vef/transport.hpp"

namespace vef {

class VefDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eddington tensor (in-plane block) and its divergence at a point.
struct EddingtonPoint {
  Mat2 E;
  Vec2 divE;
};

/// Closure data consumed by the drift-diffusion assembly.
class VefData {
 public:
  virtual ~VefData() = default;
  virtual EddingtonPoint eval(int elem, const Vec2& xi) const = 0;
  /// Boundary factor at a point of boundary face `bface` with outward normal.
  virtual double boundary_factor(int bface, const Vec2& xi, const Vec2& x, const Vec2& normal) const = 0;
};

/// Behaviour where the interpolated fluxes are not safely positive.
struct ClosureGuard {
  /// Off: a nonpositive scalar flux is an error. On: each directional flux is
  /// first scaled toward its element mean so that it is at least
  /// relative_floor times that mean on a check lattice; any remaining point
  /// with a nonpositive scalar flux or an indefinite in-plane second moment
  /// uses the element-mean closure with zero divergence.
  bool enabled = false;
  double relative_floor = 1e-3;
};

/// Per element and ordinate, psi <- mean + theta (psi - mean) with the largest
/// theta in [0, 1] giving psi >= floor * mean on a lattice of Lobatto points.
/// Element means (reference-element weights) are unchanged.
DirectionalFluxSet limit_positivity(const DirectionalFluxSet& fluxes, double relative_floor);

/// Closures from directional fluxes: numerator moments and the scalar flux are
/// interpolated independently and combined pointwise. Without a guard this
/// holds a reference to the flux set, which must outlive this object.
class FluxVefData final : public VefData {
 public:
  FluxVefData(const DirectionalFluxSet& fluxes, const AngularQuadrature& quad, ClosureGuard guard = {});

  EddingtonPoint eval(int elem, const Vec2& xi) const override;
  double boundary_factor(int bface, const Vec2& xi, const Vec2& x, const Vec2& normal) const override;
  /// Full 3x3 tensor P / phi at a point (trace 1 for unit ordinates).
  Eigen::Matrix3d full_tensor(int elem, const Vec2& xi) const;
  const AngularMoments& moments() const { return moments_; }
  /// Fluxes the closures are built from (limited when guarded).
  const DirectionalFluxSet& fluxes() const { return *fluxes_; }
  /// Evaluations that fell back to the element-mean closure so far.
  long fallback_count() const { return fallbacks_; }

 private:
  double positive_phi(int elem, double phi) const;
  bool use_mean(double phi, const Mat2& P) const;
  double element_mean(const Vector& field, int elem) const;

  DirectionalFluxSet limited_;
  const DirectionalFluxSet* fluxes_;
  const AngularQuadrature& quad_;
  ClosureGuard guard_;
  AngularMoments moments_;
  std::vector<double> ref_weights_;  // int of each basis function over the reference square
  mutable long fallbacks_ = 0;
};

using TensorFunction = std::function<Mat2(int elem, const Vec2& x)>;
using ElementVectorFunction = std::function<Vec2(int elem, const Vec2& x)>;
using BoundaryFunction = std::function<double(int bface, const Vec2& x, const Vec2& normal)>;

/// Closures given directly as functions (forced diffusion, mock data).
class PrescribedVefData final : public VefData {
 public:
  PrescribedVefData(const Mesh& mesh, TensorFunction E, ElementVectorFunction divE, BoundaryFunction Eb);
  /// E = I/3, div E = 0, E_b = 1/2.
  static PrescribedVefData isotropic(const Mesh& mesh);

  EddingtonPoint eval(int elem, const Vec2& xi) const override;
  double boundary_factor(int bface, const Vec2& xi, const Vec2& x, const Vec2& normal) const override;

 private:
  const Mesh& mesh_;
  TensorFunction E_;
  ElementVectorFunction divE_;
  BoundaryFunction Eb_;
};

/// Angular moments of the fixed source and the inflow.
struct MomentSources {
  ElementFunction Q0;           // sum w q
  ElementVectorFunction Q1;     // sum w Omega q (in-plane part)
  BoundaryFunction g;           // sum over incoming w (Omega . n) f, nonpositive
};

MomentSources moment_sources(const AngularSource& q, const InflowFunction& f, const AngularQuadrature& quad);

}  // namespace vef
