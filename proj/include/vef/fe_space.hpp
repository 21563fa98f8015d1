#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vef/basis.hpp"
#include "vef/mesh.hpp"
#include "vef/sparse.hpp"

namespace vef {

enum class SpaceFamily { dg_scalar, dg_vector, continuous };

/// Tensor-product Q_p space on a quadrilateral mesh. Local index i + (p+1) j
/// with i along xi_1. DG vector layout is elem * 2 * nloc + comp * nloc + local.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree, SpaceFamily family, PointKind kind);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  SpaceFamily family() const { return family_; }
  PointKind point_kind() const { return basis_.kind(); }
  const Basis1D& basis() const { return basis_; }
  bool discontinuous() const { return family_ != SpaceFamily::continuous; }

  int local_size() const { return nloc_; }
  int num_components() const { return family_ == SpaceFamily::dg_vector ? 2 : 1; }
  int size() const { return ndof_; }

  /// Global indices of element e, all components, component-major.
  std::span<const int> element_dofs(int e) const {
    const std::size_t n = static_cast<std::size_t>(nloc_) * num_components();
    return {edofs_.data() + static_cast<std::size_t>(e) * n, n};
  }
  int dof(int e, int local, int comp = 0) const { return element_dofs(e)[comp * nloc_ + local]; }

  Vec2 node_reference(int local) const;
  Vec2 node_physical(int e, int local) const { return mesh_->transform(e).map(node_reference(local)); }

  std::string describe() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  SpaceFamily family_;
  Basis1D basis_;
  int nloc_;
  int ndof_ = 0;
  std::vector<int> edofs_;
};

/// Tensor basis values and reference gradients at a point.
void eval_shape(const Basis1D& basis, const Vec2& xi, std::span<double> values, std::span<Vec2> ref_grads = {});

/// Basis values and reference gradients tabulated at a point set.
struct ShapeTable {
  int nloc = 0;
  int npts = 0;
  std::vector<double> values;    // [q * nloc + i]
  std::vector<Vec2> ref_grads;   // [q * nloc + i]
  double value(int q, int i) const { return values[q * nloc + i]; }
  const Vec2& ref_grad(int q, int i) const { return ref_grads[q * nloc + i]; }
};
ShapeTable tabulate(const Basis1D& basis, std::span<const Vec2> ref_points);

/// Geometry at the tensor Gauss points of every element.
class VolumeQuadrature {
 public:
  VolumeQuadrature(const Mesh& mesh, int points_per_dim);

  int points_per_element() const { return static_cast<int>(ref_points_.size()); }
  const std::vector<Vec2>& reference_points() const { return ref_points_; }
  const Vec2& x(int e, int q) const { return x_[index(e, q)]; }
  double wJ(int e, int q) const { return wJ_[index(e, q)]; }
  /// F^{-T}; physical gradient = inv_jac_t * reference gradient.
  const Mat2& inv_jac_t(int e, int q) const { return invFt_[index(e, q)]; }

 private:
  std::size_t index(int e, int q) const { return static_cast<std::size_t>(e) * ref_points_.size() + q; }
  std::vector<Vec2> ref_points_;
  std::vector<Vec2> x_;
  std::vector<double> wJ_;
  std::vector<Mat2> invFt_;
};

struct FacePoint {
  Vec2 x;
  Vec2 normal;  // elem1 -> elem2 on interior faces, outward on the boundary
  double wdS;
  Vec2 xi1;     // reference point in elem1 (or the boundary element)
  Vec2 xi2;     // reference point in elem2 (interior faces only)
};

/// Gauss points on every interior and boundary face.
class FaceQuadrature {
 public:
  FaceQuadrature(const Mesh& mesh, int points_per_face);

  int points_per_face() const { return npts_; }
  std::span<const FacePoint> interior(int f) const {
    return {interior_.data() + static_cast<std::size_t>(f) * npts_, static_cast<std::size_t>(npts_)};
  }
  std::span<const FacePoint> boundary(int f) const {
    return {boundary_.data() + static_cast<std::size_t>(f) * npts_, static_cast<std::size_t>(npts_)};
  }

 private:
  int npts_;
  std::vector<FacePoint> interior_;
  std::vector<FacePoint> boundary_;
};

class GridFunction {
 public:
  explicit GridFunction(std::shared_ptr<const FeSpace> space);
  GridFunction(std::shared_ptr<const FeSpace> space, Vector values);

  const FeSpace& space() const { return *space_; }
  const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  double eval(int e, const Vec2& xi, int comp = 0) const;
  /// Physical gradient of one component.
  Vec2 gradient(int e, const Vec2& xi, int comp = 0) const;

 private:
  std::shared_ptr<const FeSpace> space_;
  Vector values_;
};

using PointFunction = std::function<double(const Vec2& x)>;
using VectorFunction = std::function<Vec2(const Vec2& x)>;
/// Coefficient that may depend on the element (piecewise material data).
using ElementFunction = std::function<double(int elem, const Vec2& x)>;

SparseMatrix assemble_mass(const FeSpace& space, const ElementFunction& coeff = {});
SparseMatrix assemble_mixed_mass(const FeSpace& test, const FeSpace& trial, const ElementFunction& coeff = {});

GridFunction interpolate(const PointFunction& f, std::shared_ptr<const FeSpace> space);
GridFunction interpolate(const VectorFunction& f, std::shared_ptr<const FeSpace> space);

struct JumpAvg {
  double jump;
  double avg;
};
/// Scalar jump/average at parameter t of interior face f (jump = u1 - u2).
JumpAvg eval_jump_avg(const GridFunction& u, int interior_face, double t);
/// On a boundary face jump = avg = u.
JumpAvg eval_boundary_jump_avg(const GridFunction& u, int boundary_face, double t);

double l2_error(const GridFunction& u, const PointFunction& exact);
double l2_norm(const GridFunction& u);

/// Injection of V_p coefficients into Y_p (closed bases, same degree).
SparseMatrix conforming_prolongation(const FeSpace& continuous, const FeSpace& dg);
/// Y_p dofs whose lattice point lies on the element boundary.
std::vector<int> boundary_dof_selector(const FeSpace& dg);

/// Plain-text dump: header lines starting with '#', then "index,value" rows.
void write_grid_function(std::ostream& os, const GridFunction& u, const std::vector<std::string>& header = {});

}  // namespace vef
