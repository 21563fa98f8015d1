#include "vef/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace vef {

ElementTransform::ElementTransform(std::shared_ptr<const Basis1D> basis, std::vector<Vec2> control_points)
    : basis_(std::move(basis)), points_(std::move(control_points)) {}

TransformEval ElementTransform::eval(const Vec2& xi) const {
  const int n = basis_->size();
  double v1[16], v2[16], d1[16], d2[16];
  basis_->eval(xi[0], {v1, static_cast<std::size_t>(n)});
  basis_->eval(xi[1], {v2, static_cast<std::size_t>(n)});
  basis_->eval_deriv(xi[0], {d1, static_cast<std::size_t>(n)});
  basis_->eval_deriv(xi[1], {d2, static_cast<std::size_t>(n)});
  TransformEval out;
  out.x.setZero();
  out.F.setZero();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Vec2& X = points_[i + n * j];
      out.x += v1[i] * v2[j] * X;
      out.F.col(0) += d1[i] * v2[j] * X;
      out.F.col(1) += v1[i] * d2[j] * X;
    }
  }
  out.J = out.F.determinant();
  return out;
}

Vec2 face_reference_point(int local_face, double t) {
  switch (local_face) {
    case 0: return {t, 0.0};
    case 1: return {1.0, t};
    case 2: return {t, 1.0};
    case 3: return {0.0, t};
    default: throw std::out_of_range("face_reference_point: local face must be 0..3");
  }
}

namespace {

// Lattice coordinates (i, j) of the t = 0 and t = 1 corners of a local face.
std::array<int, 2> face_corner_nodes(int local_face, int m) {
  const int n = m + 1;
  switch (local_face) {
    case 0: return {0, m};
    case 1: return {m, m + n * m};
    case 2: return {n * m, m + n * m};
    case 3: return {0, n * m};
    default: return {0, 0};
  }
}

}  // namespace

Mesh::Mesh(int geometric_degree, std::vector<Vec2> node_coords, std::vector<int> connectivity,
           std::vector<int> attrs)
    : degree_(geometric_degree),
      nodes_(std::move(node_coords)),
      element_nodes_(std::move(connectivity)),
      attributes_(std::move(attrs)) {
  if (degree_ < 1) throw MeshError("Mesh: geometric degree must be >= 1");
  basis_ = std::make_shared<Basis1D>(degree_, PointKind::closed);
  const int npe = nodes_per_element();
  if (element_nodes_.size() != attributes_.size() * static_cast<std::size_t>(npe)) {
    throw MeshError("Mesh: element node list does not match element count");
  }
  transforms_.reserve(attributes_.size());
  for (int e = 0; e < num_elements(); ++e) {
    std::vector<Vec2> pts;
    pts.reserve(npe);
    for (int id : element_nodes(e)) {
      if (id < 0 || id >= static_cast<int>(nodes_.size())) throw MeshError("Mesh: node index out of range");
      pts.push_back(nodes_[id]);
    }
    transforms_.emplace_back(basis_, std::move(pts));
  }
  build_faces();
  validate_and_measure();
}

void Mesh::build_faces() {
  const int m = degree_;
  neighbors_.assign(4 * num_elements(), -1);
  face_ids_.assign(4 * num_elements(), 0);
  std::map<std::pair<int, int>, std::pair<int, int>> open_faces;
  for (int e = 0; e < num_elements(); ++e) {
    const auto ids = element_nodes(e);
    for (int f = 0; f < 4; ++f) {
      const auto c = face_corner_nodes(f, m);
      const int a = ids[c[0]], b = ids[c[1]];
      const auto key = std::minmax(a, b);
      auto it = open_faces.find(key);
      if (it == open_faces.end()) {
        open_faces.emplace(key, std::make_pair(e, f));
        continue;
      }
      const auto [e1, f1] = it->second;
      open_faces.erase(it);
      InteriorFace face;
      face.elem1 = e1;
      face.local1 = f1;
      face.elem2 = e;
      face.local2 = f;
      const int start1 = element_nodes(e1)[face_corner_nodes(f1, m)[0]];
      face.reversed = (start1 != a);
      face_ids_[4 * e1 + f1] = static_cast<int>(interior_.size());
      face_ids_[4 * e + f] = static_cast<int>(interior_.size());
      neighbors_[4 * e1 + f1] = e;
      neighbors_[4 * e + f] = e1;
      interior_.push_back(face);
    }
  }
  // boundary faces in deterministic element order
  std::vector<std::pair<int, int>> bfaces;
  for (const auto& [key, ef] : open_faces) bfaces.push_back(ef);
  std::sort(bfaces.begin(), bfaces.end());
  for (const auto& [e, f] : bfaces) {
    face_ids_[4 * e + f] = -static_cast<int>(boundary_.size()) - 1;
    boundary_.push_back({e, f, f + 1});
  }
}

void Mesh::validate_and_measure() {
  const auto rule = gauss_legendre(2 * degree_ + 2);
  const auto lattice = basis_->nodes();
  area_.assign(num_elements(), 0.0);
  condition_.assign(num_elements(), 1.0);
  boxes_.resize(num_elements());
  for (int e = 0; e < num_elements(); ++e) {
    const auto& T = transforms_[e];
    double area = 0.0, cond = 1.0;
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      for (std::size_t i = 0; i < rule.points.size(); ++i) {
        const auto te = T.eval({rule.points[i], rule.points[j]});
        if (!(te.J > 0.0)) {
          std::ostringstream msg;
          msg << "Mesh: non-positive Jacobian " << te.J << " in element " << e;
          throw MeshError(msg.str());
        }
        area += rule.weights[i] * rule.weights[j] * te.J;
        Eigen::JacobiSVD<Mat2> svd(te.F);
        const auto s = svd.singularValues();
        cond = std::max(cond, s[0] / s[1]);
      }
    }
    for (double b : lattice) {
      for (double a : lattice) {
        if (!(T.eval({a, b}).J > 0.0)) {
          throw MeshError("Mesh: non-positive Jacobian at a lattice point of element " + std::to_string(e));
        }
      }
    }
    area_[e] = area;
    condition_[e] = cond;
    BoundingBox box{T.control_points()[0], T.control_points()[0]};
    for (const auto& X : T.control_points()) {
      box.lo = box.lo.cwiseMin(X);
      box.hi = box.hi.cwiseMax(X);
    }
    boxes_[e] = box;
  }
}

FaceEval Mesh::face_geometry(int elem, int local_face, double t) const {
  const auto te = transforms_[elem].eval(face_reference_point(local_face, t));
  const Vec2 tangent = (local_face == 0 || local_face == 2) ? Vec2(te.F.col(0)) : Vec2(te.F.col(1));
  FaceEval out;
  out.x = te.x;
  out.dS = tangent.norm();
  // faces 0,1 run counter-clockwise, faces 2,3 clockwise
  if (local_face <= 1) {
    out.normal = Vec2(tangent[1], -tangent[0]) / out.dS;
  } else {
    out.normal = Vec2(-tangent[1], tangent[0]) / out.dS;
  }
  return out;
}

double Mesh::characteristic_length(int e) const { return std::sqrt(area_[e]); }

double Mesh::max_characteristic_length() const {
  double h = 0.0;
  for (int e = 0; e < num_elements(); ++e) h = std::max(h, characteristic_length(e));
  return h;
}

double Mesh::domain_area() const {
  double a = 0.0;
  for (double v : area_) a += v;
  return a;
}

BoundingBox Mesh::bounding_box() const {
  BoundingBox box{boxes_.front().lo, boxes_.front().hi};
  for (const auto& b : boxes_) {
    box.lo = box.lo.cwiseMin(b.lo);
    box.hi = box.hi.cwiseMax(b.hi);
  }
  return box;
}

PointLocation Mesh::locate_point(const Vec2& x) const {
  const double tol = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
  const double xi_tol = 1e-10;
  for (int e = 0; e < num_elements(); ++e) {
    const auto& box = boxes_[e];
    const Vec2 pad = 0.1 * (box.hi - box.lo) + Vec2::Constant(1e-14);
    if ((x.array() < (box.lo - pad).array()).any() || (x.array() > (box.hi + pad).array()).any()) continue;
    const auto& T = transforms_[e];
    Vec2 xi(0.5, 0.5);
    auto te = T.eval(xi);
    double res = (te.x - x).norm();
    for (int it = 0; it < 50 && res > tol; ++it) {
      const Vec2 step = te.F.partialPivLu().solve(te.x - x);
      double damping = 1.0;
      Vec2 trial = xi - step;
      auto tt = T.eval(trial);
      double trial_res = (tt.x - x).norm();
      while (trial_res > res && damping > 1e-4) {
        damping *= 0.5;
        trial = xi - damping * step;
        tt = T.eval(trial);
        trial_res = (tt.x - x).norm();
      }
      xi = trial;
      te = tt;
      res = trial_res;
      if ((xi.array() < -0.5).any() || (xi.array() > 1.5).any()) break;
    }
    if (res <= tol && (xi.array() >= -xi_tol).all() && (xi.array() <= 1.0 + xi_tol).all()) {
      return {e, xi.cwiseMax(0.0).cwiseMin(1.0)};
    }
  }
  std::ostringstream msg;
  msg << std::setprecision(17) << "locate_point: point (" << x[0] << ", " << x[1] << ") not found";
  throw MeshError(msg.str());
}

Mesh build_cartesian_mesh(int nx, int ny, const BoundingBox& box, int m) {
  if (nx < 1 || ny < 1) throw MeshError("build_cartesian_mesh: nx, ny must be >= 1");
  if (m < 1) throw MeshError("build_cartesian_mesh: geometric degree must be >= 1");
  const Vec2 ext = box.hi - box.lo;
  if (!(ext[0] > 0.0) || !(ext[1] > 0.0)) throw MeshError("build_cartesian_mesh: degenerate bounding box");
  const auto lattice = gauss_lobatto(m + 1).points;
  const int gx = nx * m + 1, gy = ny * m + 1;
  auto coord = [&](int g, int n_cells, double lo, double len) {
    const int cell = std::min(g / m, n_cells - 1);
    const int k = g - cell * m;
    return lo + len * (cell + lattice[k]) / n_cells;
  };
  std::vector<Vec2> nodes(static_cast<std::size_t>(gx) * gy);
  for (int j = 0; j < gy; ++j) {
    for (int i = 0; i < gx; ++i) {
      nodes[i + gx * j] = Vec2(coord(i, nx, box.lo[0], ext[0]), coord(j, ny, box.lo[1], ext[1]));
    }
  }
  const int npe = (m + 1) * (m + 1);
  std::vector<int> elem_nodes;
  elem_nodes.reserve(static_cast<std::size_t>(nx) * ny * npe);
  for (int ey = 0; ey < ny; ++ey) {
    for (int ex = 0; ex < nx; ++ex) {
      for (int b = 0; b <= m; ++b) {
        for (int a = 0; a <= m; ++a) elem_nodes.push_back((ex * m + a) + gx * (ey * m + b));
      }
    }
  }
  return Mesh(m, std::move(nodes), std::move(elem_nodes), std::vector<int>(static_cast<std::size_t>(nx) * ny, 1));
}

Mesh distort_taylor_green(const Mesh& mesh, double final_time, int steps, double length_scale) {
  if (steps < 1) throw MeshError("distort_taylor_green: steps must be >= 1");
  const double dt = final_time / steps;
  std::vector<Vec2> nodes = mesh.nodes();
  for (auto& x : nodes) {
    Vec2 X = length_scale * x;
    for (int s = 0; s < steps; ++s) {
      const Vec2 v(std::sin(X[0]) * std::cos(X[1]), -std::cos(X[0]) * std::sin(X[1]));
      X += dt * v;
    }
    x = X / length_scale;
  }
  std::vector<int> elem_nodes;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto ids = mesh.element_nodes(e);
    elem_nodes.insert(elem_nodes.end(), ids.begin(), ids.end());
  }
  return Mesh(mesh.geometric_degree(), std::move(nodes), std::move(elem_nodes), mesh.attributes());
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "vef-mesh 1\n";
  os << "geometric_degree " << mesh.geometric_degree() << "\n";
  os << "nodes " << mesh.nodes().size() << "\n";
  os << std::setprecision(17);
  for (const auto& x : mesh.nodes()) os << x[0] << " " << x[1] << "\n";
  os << "elements " << mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    os << mesh.attribute(e);
    for (int id : mesh.element_nodes(e)) os << " " << id;
    os << "\n";
  }
}

Mesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw MeshError("read_mesh: expected '" + word + "'");
  };
  expect("vef-mesh");
  int version = 0;
  is >> version;
  if (version != 1) throw MeshError("read_mesh: unsupported version");
  expect("geometric_degree");
  int m = 0;
  is >> m;
  expect("nodes");
  std::size_t n_nodes = 0;
  is >> n_nodes;
  std::vector<Vec2> nodes(n_nodes);
  for (auto& x : nodes) {
    std::string a, b;
    is >> a >> b;
    x = Vec2(std::stod(a), std::stod(b));
  }
  expect("elements");
  std::size_t n_elem = 0;
  is >> n_elem;
  const std::size_t npe = static_cast<std::size_t>((m + 1) * (m + 1));
  std::vector<int> attrs(n_elem), ids(n_elem * npe);
  for (std::size_t e = 0; e < n_elem; ++e) {
    is >> attrs[e];
    for (std::size_t k = 0; k < npe; ++k) is >> ids[e * npe + k];
  }
  if (!is) throw MeshError("read_mesh: truncated input");
  return Mesh(m, std::move(nodes), std::move(ids), std::move(attrs));
}

}  // namespace vef
