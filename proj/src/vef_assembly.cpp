#include "vef/vef_assembly.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vef {

namespace {

/// Shape values, physical gradients and closure data at one point of one element.
struct SideEval {
  int elem = -1;
  Eigen::VectorXd v;
  Eigen::Matrix<double, 2, Eigen::Dynamic> g;
  EddingtonPoint ed;
  double sigma_t = 1.0;

  explicit SideEval(int n) : v(n), g(2, n), ref_(static_cast<std::size_t>(n)) {}

  void values(const FeSpace& space, int e, const Vec2& xi) {
    elem = e;
    eval_shape(space.basis(), xi, {v.data(), static_cast<std::size_t>(v.size())});
  }

  void full(const FeSpace& space, const VefData* data, const Material& mat, int e, const Vec2& xi) {
    elem = e;
    eval_shape(space.basis(), xi, {v.data(), static_cast<std::size_t>(v.size())}, ref_);
    const Mat2 invFt = space.mesh().transform(e).eval(xi).F.inverse().transpose();
    for (int i = 0; i < v.size(); ++i) g.col(i) = invFt * ref_[i];
    if (data) ed = data->eval(e, xi);
    sigma_t = mat.sigma_t[e];
  }

 private:
  std::vector<Vec2> ref_;
};

void scatter(const FeSpace& space, int e1, int e2, const Eigen::MatrixXd& block, std::vector<Triplet>& trip) {
  const int n = space.local_size();
  const int elems[2] = {e1, e2};
  const int sides = e2 < 0 ? 1 : 2;
  for (int a = 0; a < sides; ++a) {
    for (int i = 0; i < n; ++i) {
      const int row = space.dof(elems[a], i);
      for (int b = 0; b < sides; ++b) {
        for (int j = 0; j < n; ++j) {
          const double val = block(a * n + i, b * n + j);
          if (val != 0.0) trip.emplace_back(row, space.dof(elems[b], j), val);
        }
      }
    }
  }
}

void require_closed_scalar(const FeSpace& dg, const char* who) {
  if (dg.family() != SpaceFamily::dg_scalar) throw std::invalid_argument(std::string(who) + ": expects a DG scalar space");
  if (dg.point_kind() != PointKind::closed) {
    throw std::invalid_argument(std::string(who) + ": the drift-diffusion space must use a closed basis");
  }
}

int face_points(const FeSpace& space) { return quadrature_points(space.degree(), space.mesh().geometric_degree()); }

FaceContext make_context(const Mesh& mesh, const Material& mat, int f, const FacePoint& fp) {
  const auto& face = mesh.interior_faces()[f];
  FaceContext c;
  c.face = f;
  c.x = fp.x;
  c.normal = fp.normal;
  c.h1 = mesh.characteristic_length(face.elem1);
  c.h2 = mesh.characteristic_length(face.elem2);
  c.sigma_t1 = mat.sigma_t[face.elem1];
  c.sigma_t2 = mat.sigma_t[face.elem2];
  return c;
}

double eval_coeff(const FaceCoefficient& c, const FaceContext& ctx) { return c ? c(ctx) : 0.0; }

Eigen::MatrixXd element_mass(const FeSpace& space, int e) {
  const int n = space.local_size();
  const auto rule = gauss_legendre(quadrature_points(space.degree(), space.mesh().geometric_degree()));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd v(n);
  for (std::size_t a = 0; a < rule.points.size(); ++a) {
    for (std::size_t b = 0; b < rule.points.size(); ++b) {
      const Vec2 xi(rule.points[a], rule.points[b]);
      eval_shape(space.basis(), xi, {v.data(), static_cast<std::size_t>(n)});
      const double w = rule.weights[a] * rule.weights[b] * space.mesh().transform(e).eval(xi).J;
      M.noalias() += w * v * v.transpose();
    }
  }
  return M;
}

/// Boundary mass int E_b u phi and, when `rhs` is given, -2 int u g.
void assemble_boundary(const FeSpace& dg, const VefData& data, const MomentSources* src, std::vector<Triplet>& trip,
                       Vector* rhs) {
  const Mesh& mesh = dg.mesh();
  const int n = dg.local_size();
  const FaceQuadrature fq(mesh, face_points(dg));
  SideEval s(n);
  Eigen::MatrixXd block(n, n);
  for (int f = 0; f < static_cast<int>(mesh.boundary_faces().size()); ++f) {
    const int e = mesh.boundary_faces()[f].elem;
    block.setZero();
    for (const FacePoint& fp : fq.boundary(f)) {
      s.values(dg, e, fp.xi1);
      const double eb = data.boundary_factor(f, fp.xi1, fp.x, fp.normal);
      block.noalias() += (fp.wdS * eb) * s.v * s.v.transpose();
      if (rhs && src && src->g) {
        const double g = src->g(f, fp.x, fp.normal);
        for (int i = 0; i < n; ++i) (*rhs)[dg.dof(e, i)] -= 2.0 * fp.wdS * g * s.v[i];
      }
    }
    scatter(dg, e, -1, block, trip);
  }
}

}  // namespace

std::string to_string(DiscKind kind) {
  switch (kind) {
    case DiscKind::ip: return "ip";
    case DiscKind::br2: return "br2";
    case DiscKind::mdldg: return "mdldg";
    case DiscKind::cg: return "cg";
    case DiscKind::cg_symmetrized: return "cg-sym";
  }
  return "unknown";
}

DiscKind parse_disc_kind(const std::string& name) {
  if (name == "ip") return DiscKind::ip;
  if (name == "br2") return DiscKind::br2;
  if (name == "mdldg") return DiscKind::mdldg;
  if (name == "cg") return DiscKind::cg;
  if (name == "cg-sym") return DiscKind::cg_symmetrized;
  throw std::invalid_argument("unknown discretization kind '" + name + "' (expected ip, br2, mdldg, cg, cg-sym)");
}

VefSpaces VefSpaces::build(std::shared_ptr<const Mesh> mesh, int p) {
  VefSpaces s;
  s.dg = std::make_shared<FeSpace>(mesh, p, SpaceFamily::dg_scalar, PointKind::closed);
  s.vector = std::make_shared<FeSpace>(mesh, p, SpaceFamily::dg_vector, PointKind::closed);
  s.continuous = std::make_shared<FeSpace>(mesh, p, SpaceFamily::continuous, PointKind::closed);
  s.prolongation = conforming_prolongation(*s.continuous, *s.dg);
  s.boundary_dofs = boundary_dof_selector(*s.dg);
  return s;
}

std::shared_ptr<const FeSpace> VefSpaces::solution_space_ptr(DiscKind kind) const {
  return kind == DiscKind::cg || kind == DiscKind::cg_symmetrized ? continuous : dg;
}

const FeSpace& VefSpaces::solution_space(DiscKind kind) const { return *solution_space_ptr(kind); }

double ldg_beta(const Vec2& w, const Vec2& normal) { return w.dot(normal) >= 0.0 ? 0.5 : -0.5; }

double penalty(const Mesh& mesh, const InteriorFace& face, int p, const Material& mat, double scale) {
  const double c = (p + 1.0) * (p + 1.0);
  const double k1 = c / (mat.sigma_t[face.elem1] * mesh.characteristic_length(face.elem1));
  const double k2 = c / (mat.sigma_t[face.elem2] * mesh.characteristic_length(face.elem2));
  return 0.5 * (k1 + k2) * scale;
}

double boundary_penalty(const Mesh& mesh, const BoundaryFace& face, int p, const Material& mat, double scale) {
  return (p + 1.0) * (p + 1.0) / (mat.sigma_t[face.elem] * mesh.characteristic_length(face.elem)) * scale;
}

VefSystem assemble_family(const FeSpace& dg, const VefData& data, const Material& mat, const MomentSources& src,
                          const FamilyFluxes& fluxes) {
  require_closed_scalar(dg, "assemble_family");
  const Mesh& mesh = dg.mesh();
  mat.validate(mesh.num_elements());
  const int n = dg.local_size();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * n * n * 5);
  Vector b = Vector::Zero(dg.size());

  // Volume: int grad u . D(phi) + sigma_a u phi against u Q0 + grad u . Q1 / sigma_t.
  {
    const VolumeQuadrature vq(mesh, face_points(dg));
    const ShapeTable st = tabulate(dg.basis(), vq.reference_points());
    Eigen::MatrixXd block(n, n);
    Eigen::VectorXd v(n);
    Eigen::Matrix<double, 2, Eigen::Dynamic> G(2, n), D(2, n);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      block.setZero();
      const double sig_t = mat.sigma_t[e], sig_a = mat.sigma_a(e);
      for (int q = 0; q < vq.points_per_element(); ++q) {
        const Mat2& invFt = vq.inv_jac_t(e, q);
        for (int i = 0; i < n; ++i) {
          v[i] = st.value(q, i);
          G.col(i) = invFt * st.ref_grad(q, i);
        }
        const EddingtonPoint ed = data.eval(e, vq.reference_points()[q]);
        D = (ed.E * G + ed.divE * v.transpose()) / sig_t;
        const double w = vq.wJ(e, q);
        block.noalias() += w * (G.transpose() * D + sig_a * v * v.transpose());
        const Vec2& x = vq.x(e, q);
        const double q0 = src.Q0 ? src.Q0(e, x) : 0.0;
        const Vec2 q1 = src.Q1 ? src.Q1(e, x) : Vec2::Zero();
        for (int i = 0; i < n; ++i) b[dg.dof(e, i)] += w * (v[i] * q0 + G.col(i).dot(q1) / sig_t);
      }
      scatter(dg, e, -1, block, trip);
    }
  }

  // Interior faces.
  {
    const FaceQuadrature fq(mesh, face_points(dg));
    SideEval s1(n), s2(n);
    Eigen::MatrixXd block(2 * n, 2 * n);
    Eigen::VectorXd ju(2 * n), jphi(2 * n), avg_dn(2 * n), jump_dn(2 * n);
    Eigen::Matrix<double, 2, Eigen::Dynamic> avg_gu(2, 2 * n), jump_gu(2, 2 * n), jump_en(2, 2 * n);
    for (int f = 0; f < static_cast<int>(mesh.interior_faces().size()); ++f) {
      const auto& face = mesh.interior_faces()[f];
      block.setZero();
      for (const FacePoint& fp : fq.interior(f)) {
        s1.full(dg, &data, mat, face.elem1, fp.xi1);
        s2.full(dg, &data, mat, face.elem2, fp.xi2);
        const Vec2& nrm = fp.normal;
        const SideEval* sides[2] = {&s1, &s2};
        for (int a = 0; a < 2; ++a) {
          const SideEval& s = *sides[a];
          const double sgn = a == 0 ? 1.0 : -1.0;
          const Vec2 En = s.ed.E * nrm;
          for (int i = 0; i < n; ++i) {
            const int k = a * n + i;
            const Vec2 gs = s.g.col(i) / s.sigma_t;
            const double dn = (En.dot(s.g.col(i)) + s.ed.divE.dot(nrm) * s.v[i]) / s.sigma_t;
            ju[k] = sgn * s.v[i];
            jphi[k] = sgn * s.v[i];
            avg_gu.col(k) = 0.5 * gs;
            jump_gu.col(k) = sgn * gs;
            avg_dn[k] = 0.5 * dn;
            jump_dn[k] = sgn * dn;
            jump_en.col(k) = sgn * s.v[i] * En;
          }
        }
        const FaceContext ctx = make_context(mesh, mat, f, fp);
        const double alpha = eval_coeff(fluxes.alpha_jump, ctx);
        const double alpha_j = eval_coeff(fluxes.alpha_current_jump, ctx);
        const double theta = eval_coeff(fluxes.theta_jump, ctx);
        const double w = fp.wdS;
        block.noalias() -= w * ju * avg_dn.transpose();
        block.noalias() -= w * avg_gu.transpose() * jump_en;
        if (alpha != 0.0) block.noalias() += (w * alpha) * ju * jphi.transpose();
        if (alpha_j != 0.0) block.noalias() -= (w * alpha_j) * ju * jump_dn.transpose();
        if (theta != 0.0) block.noalias() += (w * theta) * jump_gu.transpose() * jump_en;

        if (src.Q1) {
          const double q1n = src.Q1(face.elem1, fp.x).dot(nrm) / s1.sigma_t;
          const double q2n = src.Q1(face.elem2, fp.x).dot(nrm) / s2.sigma_t;
          const double coef = 0.5 * (q1n + q2n) + alpha_j * (q1n - q2n);
          for (int i = 0; i < n; ++i) {
            b[dg.dof(face.elem1, i)] -= w * coef * ju[i];
            b[dg.dof(face.elem2, i)] -= w * coef * ju[n + i];
          }
        }
      }
      scatter(dg, face.elem1, face.elem2, block, trip);
    }
  }

  assemble_boundary(dg, data, &src, trip, &b);

  VefSystem sys;
  sys.A = from_triplets(dg.size(), dg.size(), trip);
  if (fluxes.extra.rows() > 0) {
    if (fluxes.extra.rows() != dg.size() || fluxes.extra.cols() != dg.size()) {
      throw DimensionError("assemble_family: extra operator does not match the space");
    }
    sys.A += fluxes.extra;
  }
  sys.b = std::move(b);
  return sys;
}

SparseMatrix penalty_matrix(const FeSpace& dg, const Material& mat, double scale) {
  const Mesh& mesh = dg.mesh();
  const int n = dg.local_size();
  const FaceQuadrature fq(mesh, face_points(dg));
  SideEval s1(n), s2(n);
  Eigen::VectorXd jump(2 * n);
  Eigen::MatrixXd block(2 * n, 2 * n);
  std::vector<Triplet> trip;
  for (int f = 0; f < static_cast<int>(mesh.interior_faces().size()); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const double kappa = penalty(mesh, face, dg.degree(), mat, scale);
    block.setZero();
    for (const FacePoint& fp : fq.interior(f)) {
      s1.values(dg, face.elem1, fp.xi1);
      s2.values(dg, face.elem2, fp.xi2);
      jump << s1.v, -s2.v;
      block.noalias() += (fp.wdS * kappa) * jump * jump.transpose();
    }
    scatter(dg, face.elem1, face.elem2, block, trip);
  }
  return from_triplets(dg.size(), dg.size(), trip);
}

Eigen::MatrixXd face_lifting_block(const FeSpace& dg, int f) {
  const Mesh& mesh = dg.mesh();
  const auto& face = mesh.interior_faces().at(f);
  const int n = dg.local_size();
  const auto rule = gauss_legendre(face_points(dg));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * n, 2 * n);
  Eigen::VectorXd v1(n), v2(n), jump(2 * n);
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    const double t = rule.points[k];
    const FaceEval fe = mesh.face_geometry(face, t);
    const double w = rule.weights[k] * fe.dS;
    eval_shape(dg.basis(), face_reference_point(face.local1, t), {v1.data(), static_cast<std::size_t>(n)});
    eval_shape(dg.basis(), face_reference_point(face.local2, neighbor_parameter(face, t)),
               {v2.data(), static_cast<std::size_t>(n)});
    jump << v1, -v2;
    for (int c = 0; c < 2; ++c) {
      A.middleRows(c * n, n).noalias() -= (0.5 * w * fe.normal[c]) * v1 * jump.transpose();
      A.middleRows(2 * n + c * n, n).noalias() -= (0.5 * w * fe.normal[c]) * v2 * jump.transpose();
    }
  }
  return A;
}

namespace {

Eigen::MatrixXd br2_block_with(const Eigen::MatrixXd& lift, const Eigen::LLT<Eigen::MatrixXd>& m1,
                               const Eigen::LLT<Eigen::MatrixXd>& m2, int n, double eta) {
  Eigen::MatrixXd solved(lift.rows(), lift.cols());
  solved.middleRows(0, n) = m1.solve(lift.middleRows(0, n));
  solved.middleRows(n, n) = m1.solve(lift.middleRows(n, n));
  solved.middleRows(2 * n, n) = m2.solve(lift.middleRows(2 * n, n));
  solved.middleRows(3 * n, n) = m2.solve(lift.middleRows(3 * n, n));
  Eigen::MatrixXd block = eta * lift.transpose() * solved;
  return 0.5 * (block + block.transpose());
}

}  // namespace

Eigen::MatrixXd br2_face_block(const FeSpace& dg, int f, double eta) {
  const auto& face = dg.mesh().interior_faces().at(f);
  const Eigen::LLT<Eigen::MatrixXd> m1(element_mass(dg, face.elem1)), m2(element_mass(dg, face.elem2));
  return br2_block_with(face_lifting_block(dg, f), m1, m2, dg.local_size(), eta);
}

SparseMatrix br2_stabilization(const FeSpace& dg, double eta) {
  const Mesh& mesh = dg.mesh();
  std::vector<Eigen::LLT<Eigen::MatrixXd>> mass;
  mass.reserve(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) mass.emplace_back(element_mass(dg, e));
  std::vector<Triplet> trip;
  for (int f = 0; f < static_cast<int>(mesh.interior_faces().size()); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const Eigen::MatrixXd block =
        br2_block_with(face_lifting_block(dg, f), mass[face.elem1], mass[face.elem2], dg.local_size(), eta);
    scatter(dg, face.elem1, face.elem2, block, trip);
  }
  return from_triplets(dg.size(), dg.size(), trip);
}

LiftingMatrices assemble_lifting_matrices(const FeSpace& dg, const FeSpace& vec, const VefData& data,
                                          const Material& mat, const Vec2& ldg_direction) {
  if (vec.family() != SpaceFamily::dg_vector) throw std::invalid_argument("assemble_lifting_matrices: expects a DG vector space");
  if (&vec.mesh() != &dg.mesh()) throw std::invalid_argument("assemble_lifting_matrices: spaces live on different meshes");
  const Mesh& mesh = dg.mesh();
  const int n = dg.local_size(), nv = vec.local_size();
  const FaceQuadrature fq(mesh, face_points(dg));
  Eigen::VectorXd u1(n), u2(n), t1(nv), t2(nv);
  std::vector<Triplet> ta, tl, tb, tlb;
  for (int f = 0; f < static_cast<int>(mesh.interior_faces().size()); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const int elems[2] = {face.elem1, face.elem2};
    for (const FacePoint& fp : fq.interior(f)) {
      eval_shape(dg.basis(), fp.xi1, {u1.data(), static_cast<std::size_t>(n)});
      eval_shape(dg.basis(), fp.xi2, {u2.data(), static_cast<std::size_t>(n)});
      eval_shape(vec.basis(), fp.xi1, {t1.data(), static_cast<std::size_t>(nv)});
      eval_shape(vec.basis(), fp.xi2, {t2.data(), static_cast<std::size_t>(nv)});
      const Vec2 En[2] = {data.eval(face.elem1, fp.xi1).E * fp.normal, data.eval(face.elem2, fp.xi2).E * fp.normal};
      const Eigen::VectorXd* trial[2] = {&u1, &u2};
      const Eigen::VectorXd* test[2] = {&t1, &t2};
      const double beta = ldg_beta(ldg_direction, fp.normal);
      const double w = fp.wdS;
      for (int s = 0; s < 2; ++s) {
        const double sgn_s = s == 0 ? 1.0 : -1.0;
        for (int c = 0; c < 2; ++c) {
          for (int k = 0; k < nv; ++k) {
            const int row = vec.dof(elems[s], k, c);
            const double tk = (*test[s])[k];
            if (tk == 0.0) continue;
            for (int r = 0; r < 2; ++r) {
              const double sgn_r = r == 0 ? 1.0 : -1.0;
              for (int j = 0; j < n; ++j) {
                const double uj = (*trial[r])[j];
                if (uj == 0.0) continue;
                const int col = dg.dof(elems[r], j);
                const double base = -w * tk * sgn_r * uj;
                ta.emplace_back(row, col, base * 0.5 * fp.normal[c]);
                tl.emplace_back(row, col, base * sgn_s * beta * fp.normal[c]);
                tb.emplace_back(row, col, base * 0.5 * En[r][c]);
                tlb.emplace_back(row, col, base * sgn_s * beta * En[r][c]);
              }
            }
          }
        }
      }
    }
  }
  LiftingMatrices lift;
  lift.avg_normal = from_triplets(vec.size(), dg.size(), ta);
  lift.jump_normal = from_triplets(vec.size(), dg.size(), tl);
  lift.flux_avg = from_triplets(vec.size(), dg.size(), tb);
  lift.flux_jump = from_triplets(vec.size(), dg.size(), tlb);
  lift.mass = assemble_mass(vec);
  lift.mass_t = assemble_mass(vec, [&mat](int e, const Vec2&) { return mat.sigma_t[e]; });
  lift.block_size = 2 * nv;
  return lift;
}

SparseMatrix mdldg_stabilization(const LiftingMatrices& lift) {
  const BlockDiagInverse inv(lift.mass_t, lift.block_size);
  const SparseMatrix left = lift.avg_normal + lift.jump_normal;
  const SparseMatrix right = lift.flux_avg + lift.flux_jump;
  return triple_product(left, inv.as_matrix(), right);
}

SparseMatrix assemble_symmetrized(const FeSpace& dg, const VefData& data, const Material& mat) {
  require_closed_scalar(dg, "assemble_symmetrized");
  const Mesh& mesh = dg.mesh();
  const int n = dg.local_size();
  std::vector<Triplet> trip;
  const VolumeQuadrature vq(mesh, face_points(dg));
  const ShapeTable st = tabulate(dg.basis(), vq.reference_points());
  Eigen::MatrixXd block(n, n);
  Eigen::VectorXd v(n);
  Eigen::Matrix<double, 2, Eigen::Dynamic> G(2, n);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    block.setZero();
    const double sig_t = mat.sigma_t[e], sig_a = mat.sigma_a(e);
    for (int q = 0; q < vq.points_per_element(); ++q) {
      for (int i = 0; i < n; ++i) {
        v[i] = st.value(q, i);
        G.col(i) = vq.inv_jac_t(e, q) * st.ref_grad(q, i);
      }
      const Mat2 E = data.eval(e, vq.reference_points()[q]).E;
      block.noalias() += vq.wJ(e, q) * (G.transpose() * E * G / sig_t + sig_a * v * v.transpose());
    }
    scatter(dg, e, -1, block, trip);
  }
  assemble_boundary(dg, data, nullptr, trip, nullptr);
  return from_triplets(dg.size(), dg.size(), trip);
}

VefSystem assemble_vef(DiscKind kind, const VefSpaces& spaces, const VefData& data, const Material& mat,
                       const MomentSources& src, const VefOptions& opts) {
  const FeSpace& dg = *spaces.dg;
  require_closed_scalar(dg, "assemble_vef");
  const Mesh& mesh = dg.mesh();
  const int p = dg.degree();
  FamilyFluxes fluxes;
  auto kappa = [p](double scale) {
    return [p, scale](const FaceContext& c) {
      const double q = (p + 1.0) * (p + 1.0);
      return 0.5 * (q / (c.sigma_t1 * c.h1) + q / (c.sigma_t2 * c.h2)) * scale;
    };
  };
  switch (kind) {
    case DiscKind::ip:
      fluxes.alpha_jump = kappa(opts.penalty_scale);
      break;
    case DiscKind::br2:
      fluxes.extra = br2_stabilization(dg, opts.br2_eta);
      break;
    case DiscKind::mdldg: {
      const Vec2 w = opts.ldg_direction;
      if (opts.ldg_kappa != 0.0) fluxes.alpha_jump = kappa(opts.ldg_kappa);
      fluxes.alpha_current_jump = [w](const FaceContext& c) { return ldg_beta(w, c.normal); };
      fluxes.theta_jump = [w](const FaceContext& c) { return -ldg_beta(w, c.normal); };
      fluxes.extra = mdldg_stabilization(assemble_lifting_matrices(dg, *spaces.vector, data, mat, w));
      break;
    }
    case DiscKind::cg:
    case DiscKind::cg_symmetrized:
      break;
  }
  VefSystem sys = assemble_family(dg, data, mat, src, fluxes);
  sys.kind = kind;
  sys.space = spaces.solution_space_ptr(kind);
  const SparseMatrix& Z = spaces.prolongation;
  SparseMatrix sym;
  if (opts.build_symmetrized || kind == DiscKind::cg_symmetrized) sym = triple_product(Z, assemble_symmetrized(dg, data, mat), Z);
  if (kind == DiscKind::cg || kind == DiscKind::cg_symmetrized) {
    sys.A = kind == DiscKind::cg ? triple_product(Z, sys.A, Z) : sym;
    sys.b = spmv(transpose(Z), sys.b);
  }
  if (opts.build_symmetrized) sys.symmetrized = std::move(sym);
  if (!sys.b.allFinite()) {
    std::ostringstream msg;
    msg << "assemble_vef(" << to_string(kind) << "): non-finite right-hand side on " << mesh.num_elements()
        << " elements";
    throw std::runtime_error(msg.str());
  }
  return sys;
}

}  // namespace vef
