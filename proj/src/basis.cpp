#include "vef/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vef {

namespace {

// Legendre P_n and P_{n-1} at x in [-1,1].
void legendre(int n, double x, double& pn, double& pnm1) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    pn = 1.0;
    pnm1 = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  pn = p1;
  pnm1 = p0;
}

}  // namespace

QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pn = 0, pnm1 = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, pn, pnm1);
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, pn, pnm1);
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    // ascending order on [0,1]
    const int j = n - 1 - i;
    rule.points[j] = 0.5 * (x + 1.0);
    rule.weights[j] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule1D gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: n must be >= 2");
  const int N = n - 1;
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on (1 - x^2) P_N'(x) = 0 starting from Chebyshev-Lobatto points
    double x = -std::cos(std::numbers::pi * i / N);
    if (i != 0 && i != N) {
      for (int it = 0; it < 100; ++it) {
        double pn = 0, pnm1 = 0;
        legendre(N, x, pn, pnm1);
        const double dx = (x * pn - pnm1) / ((N + 1) * pn);
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    double pn = 0, pnm1 = 0;
    legendre(N, x, pn, pnm1);
    rule.points[i] = 0.5 * (x + 1.0);
    rule.weights[i] = 1.0 / (N * (N + 1) * pn * pn);
  }
  rule.points.front() = 0.0;
  rule.points.back() = 1.0;
  return rule;
}

Basis1D::Basis1D(int degree, PointKind kind) : degree_(degree), kind_(kind) {
  if (degree < 0 || degree > 12) {
    throw std::invalid_argument("Basis1D: unsupported degree " + std::to_string(degree));
  }
  if (kind == PointKind::closed) {
    if (degree < 1) throw std::invalid_argument("Basis1D: closed basis requires degree >= 1");
    nodes_ = gauss_lobatto(degree + 1).points;
  } else {
    nodes_ = gauss_legendre(degree + 1).points;
  }
  denom_.assign(nodes_.size(), 1.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      if (k != i) denom_[i] *= nodes_[i] - nodes_[k];
    }
  }
}

void Basis1D::eval(double x, std::span<double> values) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    double num = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k != i) num *= x - nodes_[k];
    }
    values[i] = num / denom_[i];
  }
}

void Basis1D::eval_deriv(double x, std::span<double> derivs) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      double prod = 1.0;
      for (int m = 0; m < n; ++m) {
        if (m != i && m != k) prod *= x - nodes_[m];
      }
      sum += prod;
    }
    derivs[i] = sum / denom_[i];
  }
}

Basis1D basis1d(int degree, PointKind kind) { return Basis1D(degree, kind); }

}  // namespace vef
