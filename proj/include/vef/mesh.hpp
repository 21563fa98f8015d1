#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "vef/basis.hpp"

namespace vef {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

struct TransformEval {
  Vec2 x;
  Mat2 F;    // dT/dxi, column k = derivative along xi_k
  double J;  // det F
};

/// Polynomial map from [0,1]^2 to a physical quadrilateral. Control points sit
/// on the tensor Gauss-Lobatto lattice, index i + (m+1) j with i along xi_1.
class ElementTransform {
 public:
  ElementTransform(std::shared_ptr<const Basis1D> basis, std::vector<Vec2> control_points);

  int geometric_degree() const { return basis_->degree(); }
  const std::vector<Vec2>& control_points() const { return points_; }

  TransformEval eval(const Vec2& xi) const;
  Vec2 map(const Vec2& xi) const { return eval(xi).x; }

 private:
  std::shared_ptr<const Basis1D> basis_;
  std::vector<Vec2> points_;
};

/// Local faces: 0 bottom (xi_2 = 0), 1 right (xi_1 = 1), 2 top (xi_2 = 1),
/// 3 left (xi_1 = 0). Each face is parameterized by t in [0,1] running in the
/// increasing xi direction.
Vec2 face_reference_point(int local_face, double t);

struct InteriorFace {
  int elem1 = -1;
  int local1 = -1;
  int elem2 = -1;
  int local2 = -1;
  bool reversed = false;  // t on elem1 corresponds to 1 - t on elem2
};

struct BoundaryFace {
  int elem = -1;
  int local = -1;
  int attribute = 0;
};

struct FaceEval {
  Vec2 x;
  Vec2 normal;  // unit, outward from the evaluating element
  double dS;    // |dx/dt|
};

inline double neighbor_parameter(const InteriorFace& f, double t) { return f.reversed ? 1.0 - t : t; }

struct PointLocation {
  int elem = -1;
  Vec2 xi;
};

/// Conforming quadrilateral mesh of geometric degree m. Immutable after
/// construction; construction validates J > 0 and builds the face lists.
class Mesh {
 public:
  Mesh(int geometric_degree, std::vector<Vec2> nodes, std::vector<int> element_nodes,
       std::vector<int> attributes);

  int geometric_degree() const { return degree_; }
  int num_elements() const { return static_cast<int>(attributes_.size()); }
  int nodes_per_element() const { return (degree_ + 1) * (degree_ + 1); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  std::span<const int> element_nodes(int e) const {
    return {element_nodes_.data() + static_cast<std::size_t>(e) * nodes_per_element(),
            static_cast<std::size_t>(nodes_per_element())};
  }
  int attribute(int e) const { return attributes_[e]; }
  const std::vector<int>& attributes() const { return attributes_; }

  const ElementTransform& transform(int e) const { return transforms_[e]; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }

  /// Neighbor across local face f of element e, or -1 on the boundary.
  int neighbor(int e, int f) const { return neighbors_[4 * e + f]; }
  /// Index into interior_faces() (>= 0) or -(index into boundary_faces()) - 1.
  int face_index(int e, int f) const { return face_ids_[4 * e + f]; }

  FaceEval face_geometry(int elem, int local_face, double t) const;
  FaceEval face_geometry(const InteriorFace& face, double t) const {
    return face_geometry(face.elem1, face.local1, t);
  }

  double element_area(int e) const { return area_[e]; }
  /// h_e = (int J dxi)^(1/2).
  double characteristic_length(int e) const;
  double max_characteristic_length() const;
  /// max over volume points of cond_2(F_e).
  double jacobian_condition(int e) const { return condition_[e]; }
  double domain_area() const;
  BoundingBox bounding_box(int e) const { return boxes_[e]; }
  BoundingBox bounding_box() const;

  /// Finds (e, xi) with T_e(xi) = x to 1e-12; throws MeshError if not found.
  PointLocation locate_point(const Vec2& x) const;

 private:
  void build_faces();
  void validate_and_measure();

  int degree_;
  std::shared_ptr<const Basis1D> basis_;
  std::vector<Vec2> nodes_;
  std::vector<int> element_nodes_;
  std::vector<int> attributes_;
  std::vector<ElementTransform> transforms_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
  std::vector<int> neighbors_;
  std::vector<int> face_ids_;
  std::vector<double> area_;
  std::vector<double> condition_;
  std::vector<BoundingBox> boxes_;
};

/// Number of Gauss points per direction for volume and face integrals on a
/// degree-p solution over degree-m geometry.
inline int quadrature_points(int p, int m) { return std::max(2, 2 * p + 2 * m); }

Mesh build_cartesian_mesh(int nx, int ny, const BoundingBox& box, int geometric_degree);

/// Advects every unique control point through the Taylor-Green velocity
/// v = (sin x cos y, -cos x sin y) with forward Euler. With length_scale s the
/// velocity is evaluated in the coordinates X = s x (s = pi maps [0,1]^2 onto
/// the invariant vortex cell).
Mesh distort_taylor_green(const Mesh& mesh, double final_time, int steps, double length_scale = 1.0);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace vef
