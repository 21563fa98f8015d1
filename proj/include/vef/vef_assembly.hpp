#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vef/vef_data.hpp"

namespace vef {

enum class DiscKind { ip, br2, mdldg, cg, cg_symmetrized };
std::string to_string(DiscKind kind);
DiscKind parse_disc_kind(const std::string& name);

/// Spaces of the drift-diffusion solve: DG scalar and vector spaces on a
/// closed basis, the continuous subspace, and the transfers between them.
struct VefSpaces {
  std::shared_ptr<const FeSpace> dg;
  std::shared_ptr<const FeSpace> vector;
  std::shared_ptr<const FeSpace> continuous;
  SparseMatrix prolongation;        // continuous -> dg
  std::vector<int> boundary_dofs;   // dg dofs on element boundaries

  static VefSpaces build(std::shared_ptr<const Mesh> mesh, int p);
  const FeSpace& solution_space(DiscKind kind) const;
  std::shared_ptr<const FeSpace> solution_space_ptr(DiscKind kind) const;
};

struct VefOptions {
  double penalty_scale = 1.0;   // multiplies the interior penalty
  double br2_eta = 4.0;
  Vec2 ldg_direction = Vec2(std::sqrt(0.5), std::sqrt(0.5));
  double ldg_kappa = 0.0;
  bool build_symmetrized = false;
};

struct VefSystem {
  DiscKind kind = DiscKind::ip;
  std::shared_ptr<const FeSpace> space;
  SparseMatrix A;
  Vector b;
  /// Z^T S Z with S the symmetrized operator (only when requested).
  SparseMatrix symmetrized;
};

/// Pointwise data available to family flux coefficients on interior faces.
struct FaceContext {
  int face = -1;
  Vec2 x;
  Vec2 normal;
  double h1 = 0, h2 = 0;
  double sigma_t1 = 0, sigma_t2 = 0;
};
using FaceCoefficient = std::function<double(const FaceContext&)>;

/// Stabilizing parts of the interior numerical fluxes:
///   alpha = alpha_jump [phi] + alpha_current_jump [(Q1 - div(E phi)) / sigma_t . n]
///   theta = theta_jump [E phi n]
/// plus an already assembled operator contribution.
struct FamilyFluxes {
  FaceCoefficient alpha_jump;
  FaceCoefficient alpha_current_jump;
  FaceCoefficient theta_jump;
  SparseMatrix extra;
};

/// Assembles the DG family on the closed-basis DG space.
VefSystem assemble_family(const FeSpace& dg, const VefData& data, const Material& mat, const MomentSources& src,
                          const FamilyFluxes& fluxes);

/// Face average of (p+1)^2 / (sigma_t h_e) times `scale`; a boundary face uses its one element.
double penalty(const Mesh& mesh, const InteriorFace& face, int p, const Material& mat, double scale = 1.0);
double boundary_penalty(const Mesh& mesh, const BoundaryFace& face, int p, const Material& mat, double scale = 1.0);

/// Sum over interior faces of int kappa [u][phi].
SparseMatrix penalty_matrix(const FeSpace& dg, const Material& mat, double scale = 1.0);

/// Lifting matrices on the vector space, each W x Y:
///   v^T jump_avg_n u = -int {v . n}[u],  v^T jump_n u = -int [v . n] beta [u],
///   v^T flux_avg phi = -int {v} . [E phi n],  v^T flux_jump phi = -int [v] . beta [E phi n].
struct LiftingMatrices {
  SparseMatrix avg_normal;   // interior faces
  SparseMatrix jump_normal;
  SparseMatrix flux_avg;
  SparseMatrix flux_jump;
  SparseMatrix mass;         // plain vector mass
  SparseMatrix mass_t;       // sigma_t weighted vector mass
  int block_size = 0;        // vector dofs per element
};
LiftingMatrices assemble_lifting_matrices(const FeSpace& dg, const FeSpace& vec, const VefData& data,
                                          const Material& mat, const Vec2& ldg_direction);

/// Lifting operator of a single interior face, rows = vector dofs of both
/// elements (elem1 comp 0, elem1 comp 1, elem2 comp 0, elem2 comp 1), columns
/// = scalar dofs of elem1 then elem2.
Eigen::MatrixXd face_lifting_block(const FeSpace& dg, int face);
/// eta * A_f^T M^{-1} A_f on the dofs of the two elements of face f.
Eigen::MatrixXd br2_face_block(const FeSpace& dg, int face, double eta);
SparseMatrix br2_stabilization(const FeSpace& dg, double eta);

/// (A + Lambda)^T M_t^{-1} (B + L).
SparseMatrix mdldg_stabilization(const LiftingMatrices& lift);

/// Upwinding sign +-1/2 from w . n; ties give +1/2.
double ldg_beta(const Vec2& w, const Vec2& normal);

/// int_b E_b u phi + int grad u . E grad phi / sigma_t + int sigma_a u phi on the DG space.
SparseMatrix assemble_symmetrized(const FeSpace& dg, const VefData& data, const Material& mat);

VefSystem assemble_vef(DiscKind kind, const VefSpaces& spaces, const VefData& data, const Material& mat,
                       const MomentSources& src, const VefOptions& opts = {});

}  // namespace vef
