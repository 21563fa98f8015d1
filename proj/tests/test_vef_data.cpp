#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vef/vef_data.hpp"

namespace vef {
namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const FeSpace> open_space(int n, int p) {
  auto mesh = std::make_shared<Mesh>(build_cartesian_mesh(n, n, {Vec2(0, 0), Vec2(1, 1)}, 1));
  return std::make_shared<FeSpace>(std::move(mesh), p, SpaceFamily::dg_scalar, PointKind::open);
}

// Interpolates psi_d(x) = f(x, Omega_d) onto the open space, one vector per ordinate.
DirectionalFluxSet fill(std::shared_ptr<const FeSpace> space, const AngularQuadrature& quad,
                        const std::function<double(const Vec2&, const Vec3&)>& f) {
  DirectionalFluxSet psi(space, quad.size());
  for (int d = 0; d < quad.size(); ++d) {
    psi.psi[d] = interpolate([&](const Vec2& x) { return f(x, quad.directions[d]); }, space).values();
  }
  return psi;
}

double mean_abs_cosine(const AngularQuadrature& quad, const Vec2& n) {
  double s = 0.0;
  for (int d = 0; d < quad.size(); ++d) {
    s += quad.weights[d] * std::abs(quad.directions[d][0] * n[0] + quad.directions[d][1] * n[1]);
  }
  return s / (4.0 * kPi);
}

TEST(FluxClosure, IsotropicFluxGivesDiffusionClosure) {
  const auto space = open_space(2, 2);
  const AngularQuadrature quad = level_symmetric(4);
  const DirectionalFluxSet psi = fill(space, quad, [](const Vec2&, const Vec3&) { return 3.0; });
  const FluxVefData data(psi, quad);
  const EddingtonPoint ep = data.eval(1, Vec2(0.3, 0.7));
  EXPECT_LT((ep.E - Mat2::Identity() / 3.0).norm(), 1e-6);
  EXPECT_LT(ep.divE.norm(), 1e-10);
  const Vec2 n(1.0, 0.0);
  EXPECT_NEAR(data.boundary_factor(0, Vec2(0.5, 0.0), Vec2(0.25, 0.0), Vec2(0.0, -1.0)),
              mean_abs_cosine(quad, Vec2(0.0, -1.0)), 1e-13);
  // S4 half-range mean of |Omega . n|; the continuous value is 1/2.
  EXPECT_NEAR(mean_abs_cosine(quad, n), 0.5229776, 1e-7);
  EXPECT_NEAR(mean_abs_cosine(level_symmetric(12), n), 0.5, 5e-3);
}

TEST(FluxClosure, PeakedFluxAnalyticValues) {
  // psi = Omega_x^8: E_xx = 9/11, E_yy = 1/11, boundary factor on n = e_x is 9/10.
  const auto space = open_space(1, 1);
  const AngularQuadrature quad = level_symmetric(12);
  const DirectionalFluxSet psi = fill(space, quad, [](const Vec2&, const Vec3& o) { return std::pow(o[0], 8); });
  const FluxVefData data(psi, quad);
  const EddingtonPoint ep = data.eval(0, Vec2(0.5, 0.5));
  EXPECT_NEAR(ep.E(0, 0), 9.0 / 11.0, 1e-7);
  EXPECT_NEAR(ep.E(1, 1), 1.0 / 11.0, 2e-3);
  EXPECT_NEAR(ep.E(0, 1), 0.0, 1e-13);
  EXPECT_NEAR(data.boundary_factor(1, Vec2(1.0, 0.5), Vec2(1.0, 0.5), Vec2(1.0, 0.0)), 0.9, 1e-2);
  const Eigen::Matrix3d T = data.full_tensor(0, Vec2(0.5, 0.5));
  EXPECT_NEAR(T.trace(), 1.0, 1e-13);
  EXPECT_NEAR(T(1, 1), T(2, 2), 1e-12);
}

TEST(FluxClosure, TensorHasUnitTraceAndIsPositive) {
  const auto space = open_space(2, 2);
  const AngularQuadrature quad = level_symmetric(4);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  DirectionalFluxSet psi(space, quad.size());
  for (Vector& v : psi.psi) v = Vector::NullaryExpr(space->size(), [&](Eigen::Index) { return u(rng); });
  const FluxVefData data(psi, quad);
  for (int e = 0; e < 4; ++e) {
    for (const Vec2 xi : {Vec2(0.1, 0.2), Vec2(0.5, 0.5), Vec2(0.9, 0.4)}) {
      const Eigen::Matrix3d T = data.full_tensor(e, xi);
      EXPECT_NEAR(T.trace(), 1.0, 1e-13);
      EXPECT_LT((T - T.transpose()).norm(), 1e-15);
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(T).eigenvalues().minCoeff(), 0.0);
      EXPECT_LT((T.topLeftCorner<2, 2>() - data.eval(e, xi).E).norm(), 1e-14);
    }
  }
}

TEST(FluxClosure, DivergenceMatchesFiniteDifferences) {
  const auto space = open_space(1, 2);
  const AngularQuadrature quad = level_symmetric(4);
  const DirectionalFluxSet psi = fill(space, quad, [](const Vec2& x, const Vec3& o) {
    return 2.0 + o[0] * x[0] + 0.5 * o[1] * x[1] * x[1] + o[0] * o[1] * x[0] * x[1];
  });
  const FluxVefData data(psi, quad);
  const double h = 1e-5;
  for (const Vec2 x : {Vec2(0.3, 0.4), Vec2(0.7, 0.2), Vec2(0.5, 0.9)}) {
    const Mat2 dx = (data.eval(0, x + Vec2(h, 0)).E - data.eval(0, x - Vec2(h, 0)).E) / (2 * h);
    const Mat2 dy = (data.eval(0, x + Vec2(0, h)).E - data.eval(0, x - Vec2(0, h)).E) / (2 * h);
    const Vec2 fd(dx(0, 0) + dy(0, 1), dx(1, 0) + dy(1, 1));
    EXPECT_LT((data.eval(0, x).divE - fd).norm(), 1e-8);
  }
}

TEST(FluxClosure, ConstantFluxHasZeroDivergenceOnCurvedElements) {
  auto mesh = std::make_shared<Mesh>(distort_taylor_green(
      build_cartesian_mesh(3, 3, {Vec2(0, 0), Vec2(1, 1)}, 3), 0.3 * kPi, 300, kPi));
  const auto space = std::make_shared<FeSpace>(mesh, 2, SpaceFamily::dg_scalar, PointKind::open);
  const AngularQuadrature quad = level_symmetric(4);
  const DirectionalFluxSet psi =
      fill(space, quad, [](const Vec2&, const Vec3& o) { return 1.0 + 0.5 * o[0] + 0.25 * o[0] * o[1]; });
  const FluxVefData data(psi, quad);
  for (int e = 0; e < 9; ++e) EXPECT_LT(data.eval(e, Vec2(0.4, 0.6)).divE.norm(), 1e-10);
}

TEST(FluxClosure, UnguardedNonpositiveFluxThrows) {
  const auto space = open_space(1, 1);
  const AngularQuadrature quad = level_symmetric(4);
  const DirectionalFluxSet psi = fill(space, quad, [](const Vec2& x, const Vec3&) { return x[0] - 0.5; });
  const FluxVefData data(psi, quad);
  EXPECT_THROW(data.eval(0, Vec2(0.1, 0.5)), VefDataError);
  EXPECT_NO_THROW(data.eval(0, Vec2(0.9, 0.5)));
}

TEST(FluxClosure, GuardedClosureFallsBackToElementMean) {
  const auto space = open_space(1, 1);
  const AngularQuadrature quad = level_symmetric(4);
  // Mean 0.25 > 0 with negative values near x = 0.
  const DirectionalFluxSet psi = fill(space, quad, [](const Vec2& x, const Vec3&) { return x[0] - 0.25; });
  const FluxVefData data(psi, quad, ClosureGuard{true});
  for (const Vec2 xi : {Vec2(0.0, 0.0), Vec2(0.05, 0.5), Vec2(1.0, 1.0)}) {
    const EddingtonPoint ep = data.eval(0, xi);
    EXPECT_TRUE(ep.E.allFinite());
    EXPECT_LT((ep.E - Mat2::Identity() / 3.0).norm(), 1e-6);
  }
  // The limiter alone makes the fluxes positive, so no pointwise fallback was needed.
  EXPECT_EQ(data.fallback_count(), 0);
  EXPECT_GT(data.fluxes().psi[0].minCoeff(), 0.0);
  EXPECT_NO_THROW(data.boundary_factor(3, Vec2(0.0, 0.5), Vec2(0.0, 0.5), Vec2(-1.0, 0.0)));
}

TEST(FluxClosure, GuardedClosureWithNonpositiveMean) {
  const auto space = open_space(1, 1);
  const AngularQuadrature quad = level_symmetric(4);
  const DirectionalFluxSet psi = fill(space, quad, [](const Vec2& x, const Vec3&) { return -x[0]; });
  const FluxVefData data(psi, quad, ClosureGuard{true});
  EXPECT_LT((data.eval(0, Vec2(0.5, 0.5)).E - Mat2::Identity() / 3.0).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(data.boundary_factor(0, Vec2(0.5, 0.0), Vec2(0.5, 0.0), Vec2(0.0, -1.0)), 0.5);
  EXPECT_GT(data.fallback_count(), 0);
}

TEST(Limiter, PreservesMeansAndEnforcesFloor) {
  const auto space = open_space(2, 3);
  const auto lattice = gauss_lobatto(2 * 3 + 3);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  DirectionalFluxSet psi(space, 4);
  for (Vector& v : psi.psi) v = Vector::NullaryExpr(space->size(), [&](Eigen::Index) { return u(rng); });
  const double floor = 1e-3;
  const DirectionalFluxSet out = limit_positivity(psi, floor);
  const int n = space->local_size();
  for (int d = 0; d < 4; ++d) {
    for (int e = 0; e < 4; ++e) {
      const GridFunction before(space, psi.psi[d]), after(space, out.psi[d]);
      double mb = 0.0, ma = 0.0;
      const auto rule = gauss_legendre(6);
      for (std::size_t a = 0; a < rule.points.size(); ++a) {
        for (std::size_t b = 0; b < rule.points.size(); ++b) {
          const Vec2 xi(rule.points[a], rule.points[b]);
          mb += rule.weights[a] * rule.weights[b] * before.eval(e, xi);
          ma += rule.weights[a] * rule.weights[b] * after.eval(e, xi);
        }
      }
      EXPECT_NEAR(ma, mb, 1e-13);
      if (mb > 0.0) {
        for (double a : lattice.points) {
          for (double b : lattice.points) EXPECT_GE(after.eval(e, Vec2(a, b)), floor * mb - 1e-12);
        }
      } else {
        EXPECT_EQ((out.psi[d].segment(e * n, n) - psi.psi[d].segment(e * n, n)).norm(), 0.0);
      }
    }
  }
}

TEST(Limiter, PositiveFluxesUntouched) {
  const auto space = open_space(2, 2);
  DirectionalFluxSet psi(space, 2);
  psi.psi[0].setConstant(1.0);
  psi.psi[1] = interpolate([](const Vec2& x) { return 1.0 + x[0] * x[1]; }, space).values();
  const DirectionalFluxSet out = limit_positivity(psi, 1e-3);
  EXPECT_EQ(out.psi[0], psi.psi[0]);
  EXPECT_EQ(out.psi[1], psi.psi[1]);
}

TEST(PrescribedClosure, Isotropic) {
  const Mesh mesh = build_cartesian_mesh(2, 2, {Vec2(0, 0), Vec2(1, 1)}, 1);
  const PrescribedVefData data = PrescribedVefData::isotropic(mesh);
  const EddingtonPoint ep = data.eval(3, Vec2(0.2, 0.2));
  EXPECT_EQ(ep.E, Mat2(Mat2::Identity() / 3.0));
  EXPECT_EQ(ep.divE, Vec2::Zero());
  EXPECT_EQ(data.boundary_factor(0, Vec2(0, 0), Vec2(0, 0), Vec2(0, -1)), 0.5);
}

TEST(PrescribedClosure, FunctionsSeePhysicalPoints) {
  const Mesh mesh = build_cartesian_mesh(2, 1, {Vec2(0, 0), Vec2(2, 1)}, 1);
  const PrescribedVefData data(
      mesh, [](int, const Vec2& x) { return Mat2(x[0] * Mat2::Identity()); },
      [](int, const Vec2& x) { return Vec2(x[1], 0.0); }, [](int, const Vec2& x, const Vec2&) { return x[0]; });
  const EddingtonPoint ep = data.eval(1, Vec2(0.5, 0.25));
  EXPECT_DOUBLE_EQ(ep.E(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(ep.divE[0], 0.25);
}

TEST(MomentSources, IsotropicSourceAndInflow) {
  const AngularQuadrature quad = level_symmetric(4);
  const MomentSources m =
      moment_sources([](int, const Vec2&, const Vec3&) { return 0.5; }, [](const Vec2&, const Vec3&) { return 1.0; },
                     quad);
  EXPECT_NEAR(m.Q0(0, Vec2(0.1, 0.1)), 2.0 * kPi, 1e-13);
  EXPECT_LT(m.Q1(0, Vec2(0.1, 0.1)).norm(), 1e-13);
  // Incoming half-range current of unit inflow: -2 pi times the mean |Omega . n|.
  EXPECT_NEAR(m.g(0, Vec2(1, 0.5), Vec2(1, 0)), -2.0 * kPi * mean_abs_cosine(quad, Vec2(1, 0)), 1e-13);
}

TEST(MomentSources, AnisotropicSourceFirstMoment) {
  const AngularQuadrature quad = level_symmetric(4);
  const MomentSources m = moment_sources([](int, const Vec2&, const Vec3& o) { return o[0]; }, {}, quad);
  EXPECT_NEAR(m.Q0(0, Vec2(0, 0)), 0.0, 1e-13);
  EXPECT_NEAR(m.Q1(0, Vec2(0, 0))[0], 4.0 * kPi / 3.0, 1e-6);
  EXPECT_EQ(m.g(0, Vec2(0, 0), Vec2(1, 0)), 0.0);
}

}  // namespace
}  // namespace vef
