#include "vef/fe_space.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace vef {

namespace {

constexpr int kMaxLocal1D = 16;

struct CellKey {
  long long i, j;
  bool operator==(const CellKey&) const = default;
};
struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return std::hash<long long>()(k.i) * 1000003u ^ std::hash<long long>()(k.j);
  }
};

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree, SpaceFamily family, PointKind kind)
    : mesh_(std::move(mesh)), degree_(degree), family_(family), basis_(degree, kind) {
  if (!mesh_) throw std::invalid_argument("FeSpace: null mesh");
  nloc_ = basis_.size() * basis_.size();
  const int ne = mesh_->num_elements();
  if (family_ != SpaceFamily::continuous) {
    const int per = nloc_ * num_components();
    ndof_ = ne * per;
    edofs_.resize(static_cast<std::size_t>(ndof_));
    for (int k = 0; k < ndof_; ++k) edofs_[k] = k;
    return;
  }
  if (kind != PointKind::closed) throw std::invalid_argument("FeSpace: continuous space requires a closed basis");
  // identify coincident lattice points; cells are coarser than the match tolerance
  const double h = mesh_->max_characteristic_length();
  const double tol = 1e-10 * h;
  const double cell = 1e-7 * h;
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  std::vector<Vec2> positions;
  edofs_.resize(static_cast<std::size_t>(ne) * nloc_);
  for (int e = 0; e < ne; ++e) {
    for (int i = 0; i < nloc_; ++i) {
      const Vec2 x = node_physical(e, i);
      const long long ci = static_cast<long long>(std::floor(x[0] / cell));
      const long long cj = static_cast<long long>(std::floor(x[1] / cell));
      int found = -1;
      for (long long di = -1; di <= 1 && found < 0; ++di) {
        for (long long dj = -1; dj <= 1 && found < 0; ++dj) {
          auto it = grid.find({ci + di, cj + dj});
          if (it == grid.end()) continue;
          for (int id : it->second) {
            if ((positions[id] - x).norm() <= tol) {
              found = id;
              break;
            }
          }
        }
      }
      if (found < 0) {
        found = static_cast<int>(positions.size());
        positions.push_back(x);
        grid[{ci, cj}].push_back(found);
      }
      edofs_[static_cast<std::size_t>(e) * nloc_ + i] = found;
    }
  }
  ndof_ = static_cast<int>(positions.size());
}

Vec2 FeSpace::node_reference(int local) const {
  const int n = basis_.size();
  return {basis_.nodes()[local % n], basis_.nodes()[local / n]};
}

std::string FeSpace::describe() const {
  std::ostringstream s;
  const char* fam = family_ == SpaceFamily::dg_scalar ? "dg_scalar" : family_ == SpaceFamily::dg_vector ? "dg_vector" : "continuous";
  s << fam << " p=" << degree_ << " basis=" << (point_kind() == PointKind::closed ? "closed" : "open")
    << " elements=" << mesh_->num_elements() << " dofs=" << ndof_;
  return s.str();
}

void eval_shape(const Basis1D& basis, const Vec2& xi, std::span<double> values, std::span<Vec2> ref_grads) {
  const int n = basis.size();
  double a[kMaxLocal1D], b[kMaxLocal1D], da[kMaxLocal1D], db[kMaxLocal1D];
  const std::span<double> sa(a, n), sb(b, n);
  basis.eval(xi[0], sa);
  basis.eval(xi[1], sb);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) values[i + n * j] = a[i] * b[j];
  }
  if (ref_grads.empty()) return;
  basis.eval_deriv(xi[0], {da, static_cast<std::size_t>(n)});
  basis.eval_deriv(xi[1], {db, static_cast<std::size_t>(n)});
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) ref_grads[i + n * j] = Vec2(da[i] * b[j], a[i] * db[j]);
  }
}

ShapeTable tabulate(const Basis1D& basis, std::span<const Vec2> ref_points) {
  ShapeTable t;
  t.nloc = basis.size() * basis.size();
  t.npts = static_cast<int>(ref_points.size());
  t.values.resize(static_cast<std::size_t>(t.nloc) * t.npts);
  t.ref_grads.resize(static_cast<std::size_t>(t.nloc) * t.npts);
  for (int q = 0; q < t.npts; ++q) {
    eval_shape(basis, ref_points[q], {t.values.data() + q * t.nloc, static_cast<std::size_t>(t.nloc)},
               {t.ref_grads.data() + q * t.nloc, static_cast<std::size_t>(t.nloc)});
  }
  return t;
}

VolumeQuadrature::VolumeQuadrature(const Mesh& mesh, int points_per_dim) {
  const auto rule = gauss_legendre(points_per_dim);
  std::vector<double> w;
  for (int j = 0; j < points_per_dim; ++j) {
    for (int i = 0; i < points_per_dim; ++i) {
      ref_points_.emplace_back(rule.points[i], rule.points[j]);
      w.push_back(rule.weights[i] * rule.weights[j]);
    }
  }
  const std::size_t total = static_cast<std::size_t>(mesh.num_elements()) * ref_points_.size();
  x_.resize(total);
  wJ_.resize(total);
  invFt_.resize(total);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int q = 0; q < points_per_element(); ++q) {
      const auto te = mesh.transform(e).eval(ref_points_[q]);
      x_[index(e, q)] = te.x;
      wJ_[index(e, q)] = w[q] * te.J;
      invFt_[index(e, q)] = te.F.inverse().transpose();
    }
  }
}

FaceQuadrature::FaceQuadrature(const Mesh& mesh, int points_per_face) : npts_(points_per_face) {
  const auto rule = gauss_legendre(points_per_face);
  for (const auto& f : mesh.interior_faces()) {
    for (int k = 0; k < npts_; ++k) {
      const double t = rule.points[k];
      const auto g = mesh.face_geometry(f.elem1, f.local1, t);
      interior_.push_back({g.x, g.normal, rule.weights[k] * g.dS, face_reference_point(f.local1, t),
                           face_reference_point(f.local2, neighbor_parameter(f, t))});
    }
  }
  for (const auto& f : mesh.boundary_faces()) {
    for (int k = 0; k < npts_; ++k) {
      const double t = rule.points[k];
      const auto g = mesh.face_geometry(f.elem, f.local, t);
      boundary_.push_back({g.x, g.normal, rule.weights[k] * g.dS, face_reference_point(f.local, t), Vec2::Zero()});
    }
  }
}

GridFunction::GridFunction(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)), values_(Vector::Zero(space_->size())) {}

GridFunction::GridFunction(std::shared_ptr<const FeSpace> space, Vector values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_->size()) throw DimensionError("GridFunction: coefficient count does not match space");
}

double GridFunction::eval(int e, const Vec2& xi, int comp) const {
  const int n = space_->local_size();
  double v[kMaxLocal1D * kMaxLocal1D];
  eval_shape(space_->basis(), xi, {v, static_cast<std::size_t>(n)});
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * values_[space_->dof(e, i, comp)];
  return s;
}

Vec2 GridFunction::gradient(int e, const Vec2& xi, int comp) const {
  const int n = space_->local_size();
  double v[kMaxLocal1D * kMaxLocal1D];
  Vec2 g[kMaxLocal1D * kMaxLocal1D];
  eval_shape(space_->basis(), xi, {v, static_cast<std::size_t>(n)}, {g, static_cast<std::size_t>(n)});
  Vec2 s = Vec2::Zero();
  for (int i = 0; i < n; ++i) s += g[i] * values_[space_->dof(e, i, comp)];
  const auto te = space_->mesh().transform(e).eval(xi);
  return te.F.inverse().transpose() * s;
}

SparseMatrix assemble_mixed_mass(const FeSpace& test, const FeSpace& trial, const ElementFunction& coeff) {
  if (&test.mesh() != &trial.mesh()) throw std::invalid_argument("assemble_mixed_mass: spaces live on different meshes");
  if (test.num_components() != trial.num_components()) {
    throw std::invalid_argument("assemble_mixed_mass: component count mismatch");
  }
  const Mesh& mesh = test.mesh();
  const int p = std::max(test.degree(), trial.degree());
  const VolumeQuadrature vq(mesh, quadrature_points(p, mesh.geometric_degree()));
  const ShapeTable st = tabulate(test.basis(), vq.reference_points());
  const ShapeTable sr = tabulate(trial.basis(), vq.reference_points());
  const int nt = st.nloc, nr = sr.nloc, nq = vq.points_per_element();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_elements()) * nt * nr * test.num_components());
  Eigen::MatrixXd local(nt, nr);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    local.setZero();
    for (int q = 0; q < nq; ++q) {
      const double c = vq.wJ(e, q) * (coeff ? coeff(e, vq.x(e, q)) : 1.0);
      if (c == 0.0) continue;
      for (int i = 0; i < nt; ++i) {
        const double ci = c * st.value(q, i);
        for (int j = 0; j < nr; ++j) local(i, j) += ci * sr.value(q, j);
      }
    }
    for (int comp = 0; comp < test.num_components(); ++comp) {
      for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nr; ++j) {
          if (local(i, j) != 0.0) trip.emplace_back(test.dof(e, i, comp), trial.dof(e, j, comp), local(i, j));
        }
      }
    }
  }
  return from_triplets(test.size(), trial.size(), trip);
}

SparseMatrix assemble_mass(const FeSpace& space, const ElementFunction& coeff) {
  return assemble_mixed_mass(space, space, coeff);
}

GridFunction interpolate(const PointFunction& f, std::shared_ptr<const FeSpace> space) {
  if (space->num_components() != 1) throw std::invalid_argument("interpolate: scalar function on a vector space");
  GridFunction u(space);
  for (int e = 0; e < space->mesh().num_elements(); ++e) {
    for (int i = 0; i < space->local_size(); ++i) u.values()[space->dof(e, i)] = f(space->node_physical(e, i));
  }
  return u;
}

GridFunction interpolate(const VectorFunction& f, std::shared_ptr<const FeSpace> space) {
  if (space->num_components() != 2) throw std::invalid_argument("interpolate: vector function on a scalar space");
  GridFunction u(space);
  for (int e = 0; e < space->mesh().num_elements(); ++e) {
    for (int i = 0; i < space->local_size(); ++i) {
      const Vec2 v = f(space->node_physical(e, i));
      u.values()[space->dof(e, i, 0)] = v[0];
      u.values()[space->dof(e, i, 1)] = v[1];
    }
  }
  return u;
}

JumpAvg eval_jump_avg(const GridFunction& u, int interior_face, double t) {
  const auto& f = u.space().mesh().interior_faces().at(interior_face);
  const double u1 = u.eval(f.elem1, face_reference_point(f.local1, t));
  const double u2 = u.eval(f.elem2, face_reference_point(f.local2, neighbor_parameter(f, t)));
  return {u1 - u2, 0.5 * (u1 + u2)};
}

JumpAvg eval_boundary_jump_avg(const GridFunction& u, int boundary_face, double t) {
  const auto& f = u.space().mesh().boundary_faces().at(boundary_face);
  const double v = u.eval(f.elem, face_reference_point(f.local, t));
  return {v, v};
}

namespace {

double integrate_squared(const GridFunction& u, const PointFunction* exact) {
  const FeSpace& space = u.space();
  const Mesh& mesh = space.mesh();
  const VolumeQuadrature vq(mesh, quadrature_points(space.degree() + 1, mesh.geometric_degree()));
  const ShapeTable st = tabulate(space.basis(), vq.reference_points());
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int q = 0; q < vq.points_per_element(); ++q) {
      for (int c = 0; c < space.num_components(); ++c) {
        double v = 0.0;
        for (int i = 0; i < st.nloc; ++i) v += st.value(q, i) * u.values()[space.dof(e, i, c)];
        if (exact && c == 0) v -= (*exact)(vq.x(e, q));
        sum += vq.wJ(e, q) * v * v;
      }
    }
  }
  return sum;
}

}  // namespace

double l2_error(const GridFunction& u, const PointFunction& exact) {
  if (u.space().num_components() != 1) throw std::invalid_argument("l2_error: scalar spaces only");
  return std::sqrt(integrate_squared(u, &exact));
}

double l2_norm(const GridFunction& u) { return std::sqrt(integrate_squared(u, nullptr)); }

SparseMatrix conforming_prolongation(const FeSpace& continuous, const FeSpace& dg) {
  if (continuous.family() != SpaceFamily::continuous || dg.family() != SpaceFamily::dg_scalar) {
    throw std::invalid_argument("conforming_prolongation: expects (continuous, dg_scalar) spaces");
  }
  if (dg.point_kind() != PointKind::closed) throw std::invalid_argument("conforming_prolongation: DG space must use a closed basis");
  if (continuous.degree() != dg.degree() || &continuous.mesh() != &dg.mesh()) {
    throw std::invalid_argument("conforming_prolongation: spaces differ in degree or mesh");
  }
  std::vector<Triplet> t;
  t.reserve(dg.size());
  for (int e = 0; e < dg.mesh().num_elements(); ++e) {
    for (int i = 0; i < dg.local_size(); ++i) t.emplace_back(dg.dof(e, i), continuous.dof(e, i), 1.0);
  }
  return from_triplets(dg.size(), continuous.size(), t);
}

std::vector<int> boundary_dof_selector(const FeSpace& dg) {
  if (dg.point_kind() != PointKind::closed) throw std::invalid_argument("boundary_dof_selector: DG space must use a closed basis");
  const int n = dg.basis().size();
  std::vector<int> out;
  for (int e = 0; e < dg.mesh().num_elements(); ++e) {
    for (int c = 0; c < dg.num_components(); ++c) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          if (i == 0 || j == 0 || i == n - 1 || j == n - 1) out.push_back(dg.dof(e, i + n * j, c));
        }
      }
    }
  }
  return out;
}

void write_grid_function(std::ostream& os, const GridFunction& u, const std::vector<std::string>& header) {
  for (const auto& line : header) os << "# " << line << "\n";
  os << "# space " << u.space().describe() << "\n";
  os << "index,value\n";
  os << std::setprecision(17);
  for (int k = 0; k < u.values().size(); ++k) os << k << "," << u.values()[k] << "\n";
}

}  // namespace vef
