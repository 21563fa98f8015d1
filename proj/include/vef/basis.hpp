#pragma once

#include <span>
#include <vector>

namespace vef {

/// Closed bases interpolate at Gauss-Lobatto points (endpoints included),
/// open bases at Gauss-Legendre points (interior only).
enum class PointKind { closed, open };

struct QuadratureRule1D {
  std::vector<double> points;   // in [0,1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0,1].
QuadratureRule1D gauss_legendre(int n);

/// n-point Gauss-Lobatto rule mapped to [0,1] (n >= 2).
QuadratureRule1D gauss_lobatto(int n);

/// Lagrange nodal basis of degree p on [0,1].
class Basis1D {
 public:
  Basis1D() = default;
  Basis1D(int degree, PointKind kind);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  PointKind kind() const { return kind_; }
  const std::vector<double>& nodes() const { return nodes_; }

  void eval(double x, std::span<double> values) const;
  void eval_deriv(double x, std::span<double> derivs) const;

 private:
  int degree_ = 0;
  PointKind kind_ = PointKind::open;
  std::vector<double> nodes_;
  std::vector<double> denom_;  // prod_{k != i} (x_i - x_k)
};

Basis1D basis1d(int degree, PointKind kind);

}  // namespace vef
