#include "vef/vef_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vef {

namespace {

constexpr int kMaxLocal = 256;

std::vector<double> reference_weights(const FeSpace& space) {
  const int n = space.local_size();
  const auto rule = gauss_legendre(space.degree() + 1);
  std::vector<double> w(n, 0.0);
  double v[kMaxLocal];
  for (std::size_t a = 0; a < rule.points.size(); ++a) {
    for (std::size_t b = 0; b < rule.points.size(); ++b) {
      eval_shape(space.basis(), Vec2(rule.points[a], rule.points[b]), {v, static_cast<std::size_t>(n)});
      for (int i = 0; i < n; ++i) w[i] += rule.weights[a] * rule.weights[b] * v[i];
    }
  }
  return w;
}

}  // namespace

DirectionalFluxSet limit_positivity(const DirectionalFluxSet& fluxes, double relative_floor) {
  const FeSpace& space = *fluxes.space;
  const int n = space.local_size();
  const std::vector<double> weights = reference_weights(space);
  const auto lattice = gauss_lobatto(2 * space.degree() + 3);
  const int m = static_cast<int>(lattice.points.size());
  Eigen::MatrixXd shapes(m * m, n);
  double v[kMaxLocal];
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      eval_shape(space.basis(), Vec2(lattice.points[a], lattice.points[b]), {v, static_cast<std::size_t>(n)});
      for (int i = 0; i < n; ++i) shapes(a * m + b, i) = v[i];
    }
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), n);
  DirectionalFluxSet out = fluxes;
  for (Vector& psi : out.psi) {
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
      auto c = psi.segment(e * n, n);
      const double mean = w.dot(c);
      if (!(mean > 0.0)) continue;
      const double low = (shapes * c).minCoeff();
      const double target = relative_floor * mean;
      if (low >= target) continue;
      const double theta = (mean - target) / (mean - low);
      c = (mean + theta * (c.array() - mean)).matrix();
    }
  }
  return out;
}

FluxVefData::FluxVefData(const DirectionalFluxSet& fluxes, const AngularQuadrature& quad, ClosureGuard guard)
    : fluxes_(&fluxes), quad_(quad), guard_(guard) {
  if (guard_.enabled) {
    limited_ = limit_positivity(fluxes, guard_.relative_floor);
    fluxes_ = &limited_;
    ref_weights_ = reference_weights(*fluxes.space);
  }
  moments_ = compute_moments(*fluxes_, quad_);
}

double FluxVefData::element_mean(const Vector& field, int elem) const {
  const int n = static_cast<int>(ref_weights_.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += ref_weights_[i] * field[elem * n + i];
  return s;
}

bool FluxVefData::use_mean(double phi, const Mat2& P) const {
  if (!guard_.enabled) return false;
  if (phi > 0.0 && P(0, 0) > 0.0 && P.determinant() > 0.0) return false;
  ++fallbacks_;
  return true;
}

double FluxVefData::positive_phi(int elem, double phi) const {
  if (!(phi > 0.0)) {
    std::ostringstream msg;
    msg << "VEF closure: nonpositive scalar flux " << phi << " in element " << elem;
    throw VefDataError(msg.str());
  }
  return phi;
}

EddingtonPoint FluxVefData::eval(int elem, const Vec2& xi) const {
  const FeSpace& space = *fluxes_->space;
  const int n = space.local_size();
  double v[kMaxLocal];
  Vec2 g[kMaxLocal];
  eval_shape(space.basis(), xi, {v, static_cast<std::size_t>(n)}, {g, static_cast<std::size_t>(n)});
  const Mat2 invFt = space.mesh().transform(elem).eval(xi).F.inverse().transpose();
  double phi = 0, pxx = 0, pxy = 0, pyy = 0;
  Vec2 gphi = Vec2::Zero(), gxx = Vec2::Zero(), gxy = Vec2::Zero(), gyy = Vec2::Zero();
  const int off = elem * n;
  for (int i = 0; i < n; ++i) {
    const Vec2 gi = invFt * g[i];
    const double a = moments_.phi[off + i], b = moments_.Pxx[off + i], c = moments_.Pxy[off + i],
                 d = moments_.Pyy[off + i];
    phi += v[i] * a;
    pxx += v[i] * b;
    pxy += v[i] * c;
    pyy += v[i] * d;
    gphi += a * gi;
    gxx += b * gi;
    gxy += c * gi;
    gyy += d * gi;
  }
  Mat2 P;
  P << pxx, pxy, pxy, pyy;
  if (use_mean(phi, P)) {
    const double pm = element_mean(moments_.phi, elem);
    if (!(pm > 0.0)) return {Mat2::Identity() / 3.0, Vec2::Zero()};
    Mat2 Pm;
    Pm << element_mean(moments_.Pxx, elem), element_mean(moments_.Pxy, elem), element_mean(moments_.Pxy, elem),
        element_mean(moments_.Pyy, elem);
    return {Pm / pm, Vec2::Zero()};
  }
  positive_phi(elem, phi);
  const Vec2 divP(gxx[0] + gxy[1], gxy[0] + gyy[1]);
  return {P / phi, (divP * phi - P * gphi) / (phi * phi)};
}

Eigen::Matrix3d FluxVefData::full_tensor(int elem, const Vec2& xi) const {
  const FeSpace& space = *fluxes_->space;
  const int n = space.local_size();
  double v[kMaxLocal];
  eval_shape(space.basis(), xi, {v, static_cast<std::size_t>(n)});
  auto at = [&](const Vector& f) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += v[i] * f[elem * n + i];
    return s;
  };
  Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
  Mat2 inplane;
  inplane << at(moments_.Pxx), at(moments_.Pxy), at(moments_.Pxy), at(moments_.Pyy);
  if (use_mean(at(moments_.phi), inplane)) {
    const double pm = element_mean(moments_.phi, elem);
    if (!(pm > 0.0)) return Eigen::Matrix3d::Identity() / 3.0;
    P(0, 0) = element_mean(moments_.Pxx, elem);
    P(0, 1) = P(1, 0) = element_mean(moments_.Pxy, elem);
    P(1, 1) = element_mean(moments_.Pyy, elem);
    P(2, 2) = element_mean(moments_.Pzz, elem);
    return P / pm;
  }
  const double phi = positive_phi(elem, at(moments_.phi));
  P(0, 0) = at(moments_.Pxx);
  P(0, 1) = P(1, 0) = at(moments_.Pxy);
  P(1, 1) = at(moments_.Pyy);
  P(2, 2) = at(moments_.Pzz);
  return P / phi;
}

double FluxVefData::boundary_factor(int bface, const Vec2& xi, const Vec2&, const Vec2& normal) const {
  const FeSpace& space = *fluxes_->space;
  const int elem = space.mesh().boundary_faces().at(bface).elem;
  const int n = space.local_size();
  double v[kMaxLocal];
  eval_shape(space.basis(), xi, {v, static_cast<std::size_t>(n)});
  const Eigen::Map<const Eigen::VectorXd> shape(v, n);
  const double phi_here = shape.dot(moments_.phi.segment(elem * n, n));
  if (guard_.enabled && !(phi_here > 0.0)) {
    ++fallbacks_;
    const double pm = element_mean(moments_.phi, elem);
    if (!(pm > 0.0)) return 0.5;
    double num = 0.0;
    for (int d = 0; d < quad_.size(); ++d) {
      const Vec3& o = quad_.directions[d];
      num += quad_.weights[d] * std::abs(o[0] * normal[0] + o[1] * normal[1]) * element_mean(fluxes_->psi[d], elem);
    }
    return num / pm;
  }
  double num = 0.0;
  for (int d = 0; d < quad_.size(); ++d) {
    const Vec3& o = quad_.directions[d];
    const double on = std::abs(o[0] * normal[0] + o[1] * normal[1]);
    num += quad_.weights[d] * on * shape.dot(fluxes_->psi[d].segment(elem * n, n));
  }
  const double phi = positive_phi(elem, phi_here);
  return num / phi;
}

PrescribedVefData::PrescribedVefData(const Mesh& mesh, TensorFunction E, ElementVectorFunction divE, BoundaryFunction Eb)
    : mesh_(mesh), E_(std::move(E)), divE_(std::move(divE)), Eb_(std::move(Eb)) {}

PrescribedVefData PrescribedVefData::isotropic(const Mesh& mesh) {
  return PrescribedVefData(
      mesh, [](int, const Vec2&) { return Mat2(Mat2::Identity() / 3.0); }, {},
      [](int, const Vec2&, const Vec2&) { return 0.5; });
}

EddingtonPoint PrescribedVefData::eval(int elem, const Vec2& xi) const {
  const Vec2 x = mesh_.transform(elem).map(xi);
  return {E_(elem, x), divE_ ? divE_(elem, x) : Vec2::Zero()};
}

double PrescribedVefData::boundary_factor(int bface, const Vec2&, const Vec2& x, const Vec2& normal) const {
  return Eb_(bface, x, normal);
}

MomentSources moment_sources(const AngularSource& q, const InflowFunction& f, const AngularQuadrature& quad) {
  MomentSources m;
  if (q) {
    m.Q0 = [q, quad](int e, const Vec2& x) {
      double s = 0.0;
      for (int d = 0; d < quad.size(); ++d) s += quad.weights[d] * q(e, x, quad.directions[d]);
      return s;
    };
    m.Q1 = [q, quad](int e, const Vec2& x) {
      Vec2 s = Vec2::Zero();
      for (int d = 0; d < quad.size(); ++d) {
        const Vec3& o = quad.directions[d];
        s += quad.weights[d] * q(e, x, o) * Vec2(o[0], o[1]);
      }
      return s;
    };
  } else {
    m.Q0 = [](int, const Vec2&) { return 0.0; };
    m.Q1 = [](int, const Vec2&) { return Vec2(Vec2::Zero()); };
  }
  if (f) {
    m.g = [f, quad](int, const Vec2& x, const Vec2& n) {
      double s = 0.0;
      for (int d = 0; d < quad.size(); ++d) {
        const Vec3& o = quad.directions[d];
        const double on = o[0] * n[0] + o[1] * n[1];
        if (on < 0.0) s += quad.weights[d] * on * f(x, o);
      }
      return s;
    };
  } else {
    m.g = [](int, const Vec2&, const Vec2&) { return 0.0; };
  }
  return m;
}

}  // namespace vef
