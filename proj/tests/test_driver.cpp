#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "vef/anderson.hpp"
#include "vef/driver.hpp"

namespace vef {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Anderson, ScalarAffineMapConvergesInTwoMixedSteps) {
  // G(x) = 0.5 x + 1 has fixed point 2; one secant step is exact.
  AndersonAccelerator aa(2);
  Vector x = Vector::Zero(1);
  auto G = [](const Vector& v) { return Vector(0.5 * v.array() + 1.0); };
  x = aa.update(x, G(x));
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  x = aa.update(x, G(x));
  EXPECT_NEAR(x[0], 2.0, 1e-14);
}

TEST(Anderson, LinearMapConvergesWithinDimensionPlusOne) {
  Eigen::Matrix3d M;
  M << 0.5, 0.1, 0.0, -0.2, 0.3, 0.1, 0.0, 0.05, -0.4;
  const Eigen::Vector3d b(1.0, -2.0, 0.5);
  const Eigen::Vector3d fixed = (Eigen::Matrix3d::Identity() - M).lu().solve(b);
  AndersonAccelerator aa(3);
  Vector x = Vector::Zero(3);
  for (int k = 0; k < 4; ++k) x = aa.update(x, M * x + b);
  EXPECT_LT((x - fixed).norm(), 1e-12);
}

TEST(Anderson, HistoryIsBoundedAndResettable) {
  AndersonAccelerator aa(2);
  EXPECT_THROW(AndersonAccelerator(0), std::invalid_argument);
  Vector x = Vector::Ones(4);
  for (int k = 0; k < 6; ++k) {
    x = aa.update(x, 0.9 * x + Vector::LinSpaced(4, 0.0, 1.0) * std::sin(k));
    EXPECT_LE(aa.history_size(), 2);
  }
  aa.reset();
  EXPECT_EQ(aa.history_size(), 0);
  // After a reset the first update is a plain fixed-point step.
  const Vector gx = Vector::Constant(4, 3.0);
  EXPECT_EQ(aa.update(x, gx), gx);
}

TEST(Anderson, RepeatedPairsDoNotBreakTheSolve) {
  AndersonAccelerator aa(3);
  const Vector x = Vector::Ones(2), gx = Vector::Constant(2, 2.0);
  for (int k = 0; k < 4; ++k) {
    const Vector next = aa.update(x, gx);
    EXPECT_TRUE(next.allFinite());
  }
}

struct Slab {
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<TransportSolver> transport;
  VefSpaces spaces;
};

Slab make_setup(int n, int p, double sigma_s, double q, double inflow) {
  Slab s;
  s.mesh = std::make_shared<Mesh>(build_cartesian_mesh(n, n, {Vec2(0, 0), Vec2(1, 1)}, 1));
  auto open = std::make_shared<FeSpace>(s.mesh, p, SpaceFamily::dg_scalar, PointKind::open);
  TransportProblem prob{Material::uniform(n * n, 1.0, sigma_s), {}, {}};
  if (q != 0.0) prob.source = [q](int, const Vec2&, const Vec3&) { return q; };
  if (inflow != 0.0) prob.inflow = [inflow](const Vec2&, const Vec3&) { return inflow; };
  s.transport = std::make_unique<TransportSolver>(open, level_symmetric(4), prob);
  s.spaces = VefSpaces::build(s.mesh, p);
  return s;
}

OuterConfig config_for(DiscKind kind, int anderson = 0) {
  OuterConfig c;
  c.kind = kind;
  c.anderson = anderson;
  c.tolerance = 1e-8;
  c.inner = {PrecondKind::direct};
  return c;
}

TEST(Driver, PureAbsorberConvergesInTwoOuters) {
  const Slab s = make_setup(3, 2, 0.0, 1.0 / (4.0 * kPi), 0.0);
  for (DiscKind k : {DiscKind::ip, DiscKind::br2, DiscKind::mdldg, DiscKind::cg}) {
    const FixedPointResult r = fixed_point_solve(*s.transport, s.spaces, config_for(k));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.log.outers(), 2) << to_string(k);
    EXPECT_NEAR(r.log.records[0].residual, 1.0, 1e-14);
  }
}

TEST(Driver, NoDataGivesZero) {
  const Slab s = make_setup(2, 1, 0.5, 0.0, 0.0);
  // Zero fluxes leave the closure undefined; only the guarded closure accepts them.
  EXPECT_THROW(fixed_point_solve(*s.transport, s.spaces, config_for(DiscKind::ip)), VefDataError);
  OuterConfig guarded = config_for(DiscKind::ip);
  guarded.closure.enabled = true;
  const FixedPointResult r = fixed_point_solve(*s.transport, s.spaces, guarded);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.log.outers(), 1);
  EXPECT_EQ(r.varphi.values().norm(), 0.0);
}

TEST(Driver, AndersonAgreesWithPlainIteration) {
  const Slab s = make_setup(4, 1, 0.9, 1.0 / (4.0 * kPi), 0.0);
  const FixedPointResult plain = fixed_point_solve(*s.transport, s.spaces, config_for(DiscKind::ip, 0));
  const FixedPointResult mixed = fixed_point_solve(*s.transport, s.spaces, config_for(DiscKind::ip, 2));
  OuterConfig aug = config_for(DiscKind::ip, 2);
  aug.augmented = true;
  const FixedPointResult augmented = fixed_point_solve(*s.transport, s.spaces, aug);
  ASSERT_TRUE(plain.converged && mixed.converged && augmented.converged);
  const double scale = l2_norm(plain.varphi);
  EXPECT_LT(l2_distance(plain.varphi, mixed.varphi), 1e-7 * scale);
  EXPECT_LT(l2_distance(plain.varphi, augmented.varphi), 1e-7 * scale);
  EXPECT_LE(mixed.log.outers(), plain.log.outers());
}

TEST(Driver, ExtraSweepsReduceOuterCount) {
  const Slab s = make_setup(4, 1, 0.9, 1.0 / (4.0 * kPi), 0.0);
  OuterConfig one = config_for(DiscKind::ip), three = config_for(DiscKind::ip);
  three.sweeps = 3;
  const FixedPointResult r1 = fixed_point_solve(*s.transport, s.spaces, one);
  const FixedPointResult r3 = fixed_point_solve(*s.transport, s.spaces, three);
  EXPECT_LE(r3.log.outers(), r1.log.outers());
  EXPECT_EQ(r3.log.records[0].sweeps, 3);
  three.sweeps = 4;
  EXPECT_THROW(VefIteration(*s.transport, s.spaces, three), std::invalid_argument);
}

TEST(Driver, VefSolutionTracksTransportScalarFlux) {
  const Slab s = make_setup(6, 2, 0.5, 1.0 / (4.0 * kPi), 0.0);
  for (DiscKind k : {DiscKind::ip, DiscKind::cg}) {
    const FixedPointResult r = fixed_point_solve(*s.transport, s.spaces, config_for(k));
    ASSERT_TRUE(r.converged);
    const double rel = r.log.records.back().transport_difference / l2_norm(r.varphi);
    EXPECT_LT(rel, 5e-3) << to_string(k);
  }
}

TEST(Driver, InitialGuessAtTheSolutionConvergesImmediately) {
  const Slab s = make_setup(3, 1, 0.7, 0.1, 0.0);
  const FixedPointResult first = fixed_point_solve(*s.transport, s.spaces, config_for(DiscKind::br2));
  ASSERT_TRUE(first.converged);
  OuterConfig loose = config_for(DiscKind::br2);
  loose.tolerance = 1e-6;
  const FixedPointResult again = fixed_point_solve(*s.transport, s.spaces, loose, &first.varphi);
  // The fluxes restart from zero, so one sweep is needed to rebuild the closure.
  EXPECT_LE(again.log.outers(), 2);
}

TEST(Driver, MaxOuterStopsWithoutConvergence) {
  const Slab s = make_setup(3, 1, 0.99, 0.1, 0.0);
  OuterConfig c = config_for(DiscKind::ip);
  c.max_outer = 2;
  c.tolerance = 1e-14;
  const FixedPointResult r = fixed_point_solve(*s.transport, s.spaces, c);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.log.outers(), 2);
}

TEST(IterationLog, StatisticsAndCsv) {
  IterationLog log;
  EXPECT_EQ(log.max_inner(), 0);
  EXPECT_EQ(log.min_inner(), 0);
  EXPECT_EQ(log.mean_inner(), 0.0);
  log.records = {{1, 1.0, 4, 1, 0.1, 0.0}, {2, 0.1, 8, 1, 0.01, 0.0}, {3, 0.001, 6, 1, 0.001, 0.0}};
  EXPECT_EQ(log.max_inner(), 8);
  EXPECT_EQ(log.min_inner(), 4);
  EXPECT_DOUBLE_EQ(log.mean_inner(), 6.0);
  std::ostringstream os;
  log.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "outer,residual,inner_iterations,sweeps,transport_difference,seconds");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 6), "1,1,4,");
}

TEST(L2Distance, AcrossSpacesAndMeshes) {
  auto mesh = std::make_shared<Mesh>(build_cartesian_mesh(3, 3, {Vec2(0, 0), Vec2(1, 1)}, 1));
  auto dg = std::make_shared<FeSpace>(mesh, 2, SpaceFamily::dg_scalar, PointKind::open);
  auto cg = std::make_shared<FeSpace>(mesh, 2, SpaceFamily::continuous, PointKind::closed);
  auto f = [](const Vec2& x) { return x[0] * x[1] + 1.0; };
  EXPECT_LT(l2_distance(interpolate(f, dg), interpolate(f, cg)), 1e-13);
  const GridFunction zero(dg);
  const GridFunction one = interpolate([](const Vec2&) { return 1.0; }, cg);
  EXPECT_NEAR(l2_distance(zero, one), 1.0, 1e-13);
  auto other = std::make_shared<Mesh>(build_cartesian_mesh(3, 3, {Vec2(0, 0), Vec2(1, 1)}, 1));
  EXPECT_THROW(l2_distance(zero, GridFunction(std::make_shared<FeSpace>(other, 1, SpaceFamily::dg_scalar,
                                                                        PointKind::open))),
               std::invalid_argument);
}

}  // namespace
}  // namespace vef
