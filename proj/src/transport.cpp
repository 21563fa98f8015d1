#include "vef/transport.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vef {

namespace {

constexpr double kGrazing = 1e-12;

}  // namespace

Material Material::uniform(int num_elements, double sigma_t, double sigma_s) {
  Material m;
  m.sigma_t.assign(num_elements, sigma_t);
  m.sigma_s.assign(num_elements, sigma_s);
  return m;
}

void Material::validate(int num_elements) const {
  if (static_cast<int>(sigma_t.size()) != num_elements || static_cast<int>(sigma_s.size()) != num_elements) {
    throw std::invalid_argument("Material: cross sections must be given per element");
  }
  for (int e = 0; e < num_elements; ++e) {
    if (sigma_s[e] < 0.0 || sigma_t[e] < sigma_s[e]) {
      throw std::invalid_argument("Material: need 0 <= sigma_s <= sigma_t in element " + std::to_string(e));
    }
  }
}

SweepOrdering order_graph(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> out(num_nodes), in(num_nodes);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) throw std::out_of_range("order_graph: node out of range");
    out[a].push_back(b);
    in[b].push_back(a);
  }
  std::vector<int> pending(num_nodes);
  for (int v = 0; v < num_nodes; ++v) pending[v] = static_cast<int>(in[v].size());
  std::vector<char> done(num_nodes, 0), queued(num_nodes, 0);
  SweepOrdering result;
  result.order.reserve(num_nodes);
  std::vector<int> queue;
  std::size_t head = 0;
  for (int v = 0; v < num_nodes; ++v) {
    if (pending[v] == 0) {
      queue.push_back(v);
      queued[v] = 1;
    }
  }
  while (static_cast<int>(result.order.size()) < num_nodes) {
    if (head == queue.size()) {
      // cycle: release the unprocessed node with the fewest unresolved inputs
      int pick = -1;
      for (int v = 0; v < num_nodes; ++v) {
        if (!queued[v] && (pick < 0 || pending[v] < pending[pick])) pick = v;
      }
      for (int u : in[pick]) {
        if (!done[u]) result.lagged.emplace_back(u, pick);
      }
      pending[pick] = 0;
      queue.push_back(pick);
      queued[pick] = 1;
    }
    const int v = queue[head++];
    done[v] = 1;
    result.order.push_back(v);
    for (int w : out[v]) {
      if (queued[w]) continue;
      if (--pending[w] == 0) {
        queue.push_back(w);
        queued[w] = 1;
      }
    }
  }
  return result;
}

SweepOrdering sweep_ordering(const Mesh& mesh, const Vec3& omega) {
  const Vec2 dir(omega[0], omega[1]);
  std::vector<std::pair<int, int>> edges;
  std::vector<std::pair<int, int>> mixed;
  const auto rule = gauss_legendre(4);
  for (const auto& f : mesh.interior_faces()) {
    const double mid = dir.dot(mesh.face_geometry(f, 0.5).normal);
    bool pos = false, neg = false;
    for (double t : rule.points) {
      const double s = dir.dot(mesh.face_geometry(f, t).normal);
      pos = pos || s > kGrazing;
      neg = neg || s < -kGrazing;
    }
    if (mid > kGrazing) {
      edges.emplace_back(f.elem1, f.elem2);
      if (neg) mixed.emplace_back(f.elem2, f.elem1);
    } else if (mid < -kGrazing) {
      edges.emplace_back(f.elem2, f.elem1);
      if (pos) mixed.emplace_back(f.elem1, f.elem2);
    } else if (pos || neg) {
      mixed.emplace_back(f.elem1, f.elem2);
      mixed.emplace_back(f.elem2, f.elem1);
    }
  }
  SweepOrdering s = order_graph(mesh.num_elements(), edges);
  s.lagged.insert(s.lagged.end(), mixed.begin(), mixed.end());
  return s;
}

void zero_and_scale(std::span<double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw DimensionError("zero_and_scale: size mismatch");
  double original = 0.0, clipped = 0.0;
  bool negative = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    original += weights[i] * values[i];
    if (values[i] < 0.0) {
      negative = true;
    } else {
      clipped += weights[i] * values[i];
    }
  }
  if (!negative) return;
  if (original <= 0.0 || clipped <= 0.0) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  const double scale = original / clipped;
  for (double& v : values) v = v < 0.0 ? 0.0 : v * scale;
}

AngularMoments compute_moments(const DirectionalFluxSet& fluxes, const AngularQuadrature& quad) {
  if (static_cast<int>(fluxes.psi.size()) != quad.size()) throw DimensionError("compute_moments: ordinate count mismatch");
  const int n = fluxes.space->size();
  AngularMoments m;
  for (Vector* v : {&m.phi, &m.Jx, &m.Jy, &m.Pxx, &m.Pxy, &m.Pyy, &m.Pzz}) *v = Vector::Zero(n);
  for (int d = 0; d < quad.size(); ++d) {
    const double w = quad.weights[d];
    const Vec3& o = quad.directions[d];
    const Vector& psi = fluxes.psi[d];
    m.phi += w * psi;
    m.Jx += (w * o[0]) * psi;
    m.Jy += (w * o[1]) * psi;
    m.Pxx += (w * o[0] * o[0]) * psi;
    m.Pxy += (w * o[0] * o[1]) * psi;
    m.Pyy += (w * o[1] * o[1]) * psi;
    m.Pzz += (w * o[2] * o[2]) * psi;
  }
  return m;
}

TransportSolver::TransportSolver(std::shared_ptr<const FeSpace> space, AngularQuadrature quad, TransportProblem problem,
                                 SweepOptions opts)
    : space_(std::move(space)), quad_(std::move(quad)), problem_(std::move(problem)), opts_(opts) {
  if (space_->family() != SpaceFamily::dg_scalar) throw std::invalid_argument("TransportSolver: needs a DG scalar space");
  const Mesh& mesh = space_->mesh();
  problem_.material.validate(mesh.num_elements());
  elements_.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) build_element(e);
  orderings_.reserve(quad_.size());
  for (const auto& o : quad_.directions) orderings_.push_back(sweep_ordering(mesh, o));

  const VolumeQuadrature vq(mesh, quadrature_points(space_->degree(), mesh.geometric_degree()));
  const ShapeTable st = tabulate(space_->basis(), vq.reference_points());
  fixed_rhs_.assign(quad_.size(), Vector::Zero(space_->size()));
  if (!problem_.source) return;
  for (int d = 0; d < quad_.size(); ++d) {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      for (int q = 0; q < vq.points_per_element(); ++q) {
        const double s = vq.wJ(e, q) * problem_.source(e, vq.x(e, q), quad_.directions[d]);
        if (s == 0.0) continue;
        for (int i = 0; i < st.nloc; ++i) fixed_rhs_[d][space_->dof(e, i)] += s * st.value(q, i);
      }
    }
  }
}

void TransportSolver::build_element(int e) {
  const Mesh& mesh = space_->mesh();
  const int n = space_->local_size();
  const int nq1 = quadrature_points(space_->degree(), mesh.geometric_degree());
  const double st_e = problem_.material.sigma_t[e];
  ElementData& ed = elements_[e];
  ed.mass_t = Eigen::MatrixXd::Zero(n, n);
  ed.Cx = Eigen::MatrixXd::Zero(n, n);
  ed.Cy = Eigen::MatrixXd::Zero(n, n);
  ed.weights.assign(n, 0.0);
  const auto rule = gauss_legendre(nq1);
  std::vector<double> v(n);
  std::vector<Vec2> g(n);
  for (int b = 0; b < nq1; ++b) {
    for (int a = 0; a < nq1; ++a) {
      const Vec2 xi(rule.points[a], rule.points[b]);
      const auto te = mesh.transform(e).eval(xi);
      const double wJ = rule.weights[a] * rule.weights[b] * te.J;
      const Mat2 invFt = te.F.inverse().transpose();
      eval_shape(space_->basis(), xi, v, g);
      for (int i = 0; i < n; ++i) {
        const Vec2 gi = invFt * g[i];
        ed.weights[i] += wJ * v[i];
        for (int j = 0; j < n; ++j) {
          ed.mass_t(i, j) += wJ * st_e * v[i] * v[j];
          ed.Cx(i, j) += wJ * v[j] * gi[0];
          ed.Cy(i, j) += wJ * v[j] * gi[1];
        }
      }
    }
  }
  for (int f = 0; f < 4; ++f) {
    FaceData& fd = ed.faces[f];
    fd.neighbor = mesh.neighbor(e, f);
    fd.self.resize(nq1, n);
    fd.Nx = Eigen::MatrixXd::Zero(n, n);
    fd.Ny = Eigen::MatrixXd::Zero(n, n);
    if (fd.neighbor >= 0) fd.other.resize(nq1, n);
    int nf = -1;
    const InteriorFace* face = nullptr;
    if (fd.neighbor >= 0) {
      face = &mesh.interior_faces()[mesh.face_index(e, f)];
      nf = face->elem1 == e ? face->local2 : face->local1;
    }
    for (int k = 0; k < nq1; ++k) {
      const double t = rule.points[k];
      const auto geo = mesh.face_geometry(e, f, t);
      fd.normal.push_back(geo.normal);
      fd.x.push_back(geo.x);
      fd.wdS.push_back(rule.weights[k] * geo.dS);
      eval_shape(space_->basis(), face_reference_point(f, t), v);
      for (int i = 0; i < n; ++i) fd.self(k, i) = v[i];
      if (face) {
        eval_shape(space_->basis(), face_reference_point(nf, neighbor_parameter(*face, t)), v);
        for (int j = 0; j < n; ++j) fd.other(k, j) = v[j];
      }
      const Eigen::RowVectorXd row = fd.self.row(k);
      fd.Nx.noalias() += (fd.wdS.back() * geo.normal[0]) * row.transpose() * row;
      fd.Ny.noalias() += (fd.wdS.back() * geo.normal[1]) * row.transpose() * row;
    }
  }
}

int TransportSolver::lagged_face_count() const {
  int c = 0;
  for (const auto& o : orderings_) c += static_cast<int>(o.lagged.size());
  return c;
}

std::span<const double> TransportSolver::fixup_weights(int e) const { return elements_[e].weights; }

Vector TransportSolver::scattering_source(const GridFunction& varphi) const {
  const auto& mat = problem_.material;
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  const SparseMatrix Ms =
      assemble_mixed_mass(*space_, varphi.space(), [&](int e, const Vec2&) { return mat.sigma_s[e] * inv4pi; });
  return Ms * varphi.values();
}

void TransportSolver::local_system(int e, int d, const DirectionalFluxSet& psi, Eigen::MatrixXd& A,
                                   Eigen::VectorXd& rhs, bool couple_neighbors) const {
  const ElementData& ed = elements_[e];
  const Vec3& o3 = quad_.directions[d];
  const Vec2 o(o3[0], o3[1]);
  A = ed.mass_t - o[0] * ed.Cx - o[1] * ed.Cy;
  for (int f = 0; f < 4; ++f) {
    const FaceData& fd = ed.faces[f];
    const int nq = static_cast<int>(fd.wdS.size());
    bool all_out = true;
    for (int k = 0; k < nq && all_out; ++k) all_out = o.dot(fd.normal[k]) > kGrazing;
    if (all_out) {
      A.noalias() += o[0] * fd.Nx + o[1] * fd.Ny;
      continue;
    }
    for (int k = 0; k < nq; ++k) {
      const double on = o.dot(fd.normal[k]);
      if (on > kGrazing) {
        const Eigen::RowVectorXd row = fd.self.row(k);
        A.noalias() += (on * fd.wdS[k]) * row.transpose() * row;
      } else if (on < -kGrazing) {
        double upstream = 0.0;
        if (fd.neighbor >= 0) {
          if (!couple_neighbors) continue;
          upstream = fd.other.row(k).dot(psi.psi[d].segment(fd.neighbor * fd.other.cols(), fd.other.cols()));
        } else if (problem_.inflow) {
          upstream = problem_.inflow(fd.x[k], o3);
        }
        if (upstream != 0.0) rhs.noalias() -= (on * fd.wdS[k] * upstream) * fd.self.row(k).transpose();
      }
    }
  }
}

void TransportSolver::sweep(const Vector& scattering_rhs, DirectionalFluxSet& psi) const {
  const int n = space_->local_size();
  const int nd = quad_.size();
  if (static_cast<int>(psi.psi.size()) != nd || scattering_rhs.size() != space_->size()) {
    throw DimensionError("TransportSolver::sweep: size mismatch");
  }
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(n);
  for (int d = 0; d < nd; ++d) {
    Vector& out = psi.psi[d];
    for (int e : orderings_[d].order) {
      rhs = fixed_rhs_[d].segment(e * n, n) + scattering_rhs.segment(e * n, n);
      local_system(e, d, psi, A, rhs, true);
      lu.compute(A);
      out.segment(e * n, n) = lu.solve(rhs);
      if (!out.segment(e * n, n).allFinite()) {
        throw std::runtime_error("TransportSolver: singular element system in element " + std::to_string(e));
      }
      if (opts_.fixup) zero_and_scale({out.data() + e * n, static_cast<std::size_t>(n)}, elements_[e].weights);
    }
  }
}

Eigen::MatrixXd TransportSolver::dense_operator(int d) const {
  const int n = space_->local_size();
  const int N = space_->size();
  const Vec2 o(quad_.directions[d][0], quad_.directions[d][1]);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
  DirectionalFluxSet dummy;
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < space_->mesh().num_elements(); ++e) {
    local_system(e, d, dummy, A, rhs, false);
    G.block(e * n, e * n, n, n) = A;
    for (const FaceData& fd : elements_[e].faces) {
      if (fd.neighbor < 0) continue;
      for (int k = 0; k < static_cast<int>(fd.wdS.size()); ++k) {
        const double on = o.dot(fd.normal[k]);
        if (on < -kGrazing) {
          G.block(e * n, fd.neighbor * n, n, n).noalias() +=
              (on * fd.wdS[k]) * fd.self.row(k).transpose() * fd.other.row(k);
        }
      }
    }
  }
  return G;
}

Vector TransportSolver::dense_rhs(int d, const Vector& scattering_rhs) const {
  const int n = space_->local_size();
  Vector b = fixed_rhs_[d] + scattering_rhs;
  DirectionalFluxSet dummy;
  Eigen::MatrixXd A;
  for (int e = 0; e < space_->mesh().num_elements(); ++e) {
    Eigen::VectorXd rhs = b.segment(e * n, n);
    local_system(e, d, dummy, A, rhs, false);
    b.segment(e * n, n) = rhs;
  }
  return b;
}

}  // namespace vef
