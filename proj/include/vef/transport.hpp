#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "vef/angular.hpp"
#include "vef/fe_space.hpp"

namespace vef {

/// Fixed source q(x, Omega) per steradian, may depend on the element.
using AngularSource = std::function<double(int elem, const Vec2& x, const Vec3& omega)>;
/// Boundary inflow f(x, Omega), used where Omega . n < 0.
using InflowFunction = std::function<double(const Vec2& x, const Vec3& omega)>;

/// Piecewise-constant cross sections (1/cm) indexed by element.
struct Material {
  std::vector<double> sigma_t;
  std::vector<double> sigma_s;
  double sigma_a(int e) const { return sigma_t[e] - sigma_s[e]; }
  static Material uniform(int num_elements, double sigma_t, double sigma_s);
  void validate(int num_elements) const;
};

struct TransportProblem {
  Material material;
  AngularSource source;   // empty means q = 0
  InflowFunction inflow;  // empty means vacuum
};

/// One Y_p coefficient vector per ordinate, all on one (open-basis) space.
struct DirectionalFluxSet {
  std::shared_ptr<const FeSpace> space;
  std::vector<Vector> psi;
  DirectionalFluxSet() = default;
  DirectionalFluxSet(std::shared_ptr<const FeSpace> s, int num_directions)
      : space(std::move(s)), psi(num_directions, Vector::Zero(space->size())) {}
};

struct SweepOrdering {
  std::vector<int> order;
  /// Graph edges (upstream, downstream) whose upstream value is taken from the
  /// previous iterate.
  std::vector<std::pair<int, int>> lagged;
};

/// Topological order of a directed graph; cycles are broken by lagging the
/// incoming edges of the remaining node with the fewest unresolved inputs.
SweepOrdering order_graph(int num_nodes, const std::vector<std::pair<int, int>>& edges);

/// Upwind element graph for one direction from face-midpoint normals.
/// Faces whose Omega . n changes sign along the face are reported as lagged.
SweepOrdering sweep_ordering(const Mesh& mesh, const Vec3& omega);

/// Per element: negative values clipped to zero and the rest rescaled to keep
/// sum(weights * values). If that sum is <= 0 the element is zeroed.
void zero_and_scale(std::span<double> values, std::span<const double> weights);

struct AngularMoments {
  Vector phi, Jx, Jy, Pxx, Pxy, Pyy, Pzz;
};
AngularMoments compute_moments(const DirectionalFluxSet& fluxes, const AngularQuadrature& quad);

struct SweepOptions {
  bool fixup = false;
};

/// Upwind DG discrete-ordinates operator with cached element data.
class TransportSolver {
 public:
  TransportSolver(std::shared_ptr<const FeSpace> space, AngularQuadrature quad, TransportProblem problem,
                  SweepOptions opts = {});

  const FeSpace& space() const { return *space_; }
  const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
  const AngularQuadrature& quadrature() const { return quad_; }
  const TransportProblem& problem() const { return problem_; }
  const SweepOrdering& ordering(int d) const { return orderings_[d]; }
  int lagged_face_count() const;

  /// Integrated isotropic scattering source sigma_s/(4 pi) * varphi against
  /// the transport test functions; varphi may live on any space of the mesh.
  Vector scattering_source(const GridFunction& varphi) const;

  /// One transport inversion for every ordinate. `psi` holds the previous
  /// iterate on entry (read on lagged faces) and the new fluxes on exit.
  void sweep(const Vector& scattering_rhs, DirectionalFluxSet& psi) const;

  /// Element weights int l_i dx used by the fixup.
  std::span<const double> fixup_weights(int e) const;

  /// Dense global matrix of one direction (for verification on small meshes).
  Eigen::MatrixXd dense_operator(int direction) const;
  /// Right-hand side of one direction with inflow data and the given source.
  Vector dense_rhs(int direction, const Vector& scattering_rhs) const;

 private:
  struct FaceData {
    int neighbor = -1;  // -1 on the boundary
    std::vector<Vec2> normal;
    std::vector<Vec2> x;
    std::vector<double> wdS;
    Eigen::MatrixXd self;      // [q, i]
    Eigen::MatrixXd other;     // [q, j] of the neighbor
    Eigen::MatrixXd Nx, Ny;    // int n_k l_i l_j dS
  };
  struct ElementData {
    Eigen::MatrixXd mass_t;  // int sigma_t l_i l_j
    Eigen::MatrixXd Cx, Cy;  // int l_j d_k l_i
    std::array<FaceData, 4> faces;
    std::vector<double> weights;
  };

  void build_element(int e);
  void local_system(int e, int d, const DirectionalFluxSet& psi, Eigen::MatrixXd& A, Eigen::VectorXd& rhs,
                    bool couple_neighbors) const;

  std::shared_ptr<const FeSpace> space_;
  AngularQuadrature quad_;
  TransportProblem problem_;
  SweepOptions opts_;
  std::vector<ElementData> elements_;
  std::vector<SweepOrdering> orderings_;
  std::vector<Vector> fixed_rhs_;  // per direction
};

}  // namespace vef
