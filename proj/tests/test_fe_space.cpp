#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vef/fe_space.hpp"

namespace vef {
namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Mesh> box_mesh(int nx, int ny, int m = 1, double x1 = 1.0, double y1 = 1.0) {
  return std::make_shared<Mesh>(build_cartesian_mesh(nx, ny, {Vec2(0, 0), Vec2(x1, y1)}, m));
}

std::shared_ptr<const Mesh> curved_mesh(int n) {
  return std::make_shared<Mesh>(
      distort_taylor_green(build_cartesian_mesh(n, n, {Vec2(0, 0), Vec2(1, 1)}, 3), 0.3 * kPi, 300, kPi));
}

std::shared_ptr<const FeSpace> space(std::shared_ptr<const Mesh> mesh, int p, SpaceFamily fam, PointKind kind) {
  return std::make_shared<FeSpace>(std::move(mesh), p, fam, kind);
}

Eigen::MatrixXd dense(const SparseMatrix& A) { return Eigen::MatrixXd(A); }

TEST(FeSpace, Dimensions) {
  const auto mesh = box_mesh(2, 1);
  const auto y = space(mesh, 1, SpaceFamily::dg_scalar, PointKind::closed);
  const auto w = space(mesh, 1, SpaceFamily::dg_vector, PointKind::closed);
  const auto v = space(mesh, 1, SpaceFamily::continuous, PointKind::closed);
  EXPECT_EQ(y->size(), 8);
  EXPECT_EQ(w->size(), 16);
  EXPECT_EQ(v->size(), 6);
  EXPECT_THROW(space(mesh, 1, SpaceFamily::continuous, PointKind::open), std::invalid_argument);
}

TEST(Mass, SingleElementVolume) {
  const auto mesh = box_mesh(1, 1);
  const SparseMatrix M = assemble_mass(*space(mesh, 0, SpaceFamily::dg_scalar, PointKind::open));
  ASSERT_EQ(M.rows(), 1);
  EXPECT_NEAR(M.coeff(0, 0), 1.0, 1e-14);
}

TEST(Mass, TrapezoidArea) {
  const auto mesh = std::make_shared<Mesh>(1, std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0), Vec2(-0.25, 1), Vec2(1.25, 1)},
                                           std::vector<int>{0, 1, 2, 3}, std::vector<int>{1});
  const SparseMatrix M = assemble_mass(*space(mesh, 0, SpaceFamily::dg_scalar, PointKind::open));
  EXPECT_NEAR(M.coeff(0, 0), 1.25, 1e-14);
}

TEST(Mass, OpenVectorMassDiagonalOnAffineMesh) {
  const auto mesh = box_mesh(3, 2, 1, 2.0, 1.0);
  const Eigen::MatrixXd M = dense(assemble_mass(*space(mesh, 2, SpaceFamily::dg_vector, PointKind::open)));
  Eigen::MatrixXd off = M;
  off.diagonal().setZero();
  EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Mass, ZeroCoefficientGivesZero) {
  const auto mesh = box_mesh(2, 2);
  const auto s = space(mesh, 1, SpaceFamily::dg_scalar, PointKind::closed);
  const SparseMatrix M = assemble_mixed_mass(*s, *s, [](int, const Vec2&) { return 0.0; });
  EXPECT_EQ(dense(M).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mass, MixedSameSpaceMatchesMass) {
  const auto mesh = curved_mesh(2);
  const auto s = space(mesh, 2, SpaceFamily::dg_scalar, PointKind::closed);
  EXPECT_LT((dense(assemble_mixed_mass(*s, *s)) - dense(assemble_mass(*s))).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Mass, MixedOpenClosedMatchesBruteForce) {
  const auto mesh = box_mesh(1, 1);
  const auto test = space(mesh, 1, SpaceFamily::dg_scalar, PointKind::open);
  const auto trial = space(mesh, 1, SpaceFamily::dg_scalar, PointKind::closed);
  const Eigen::MatrixXd M = dense(assemble_mixed_mass(*test, *trial));
  const auto rule = gauss_legendre(12);
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(4, 4);
  double a[4], b[4];
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const Vec2 xi(rule.points[i], rule.points[j]);
      eval_shape(test->basis(), xi, a);
      eval_shape(trial->basis(), xi, b);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) oracle(r, c) += rule.weights[i] * rule.weights[j] * a[r] * b[c];
    }
  }
  EXPECT_LT((M - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mass, SymmetricPositiveDefiniteAndBlockDiagonal) {
  const auto mesh = curved_mesh(2);
  for (PointKind kind : {PointKind::open, PointKind::closed}) {
    const auto s = space(mesh, 2, SpaceFamily::dg_scalar, kind);
    const Eigen::MatrixXd M = dense(assemble_mass(*s, [](int, const Vec2& x) { return 1.0 + x[0]; }));
    EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff(), 0.0);
    const int n = s->local_size();
    for (int i = 0; i < M.rows(); ++i)
      for (int j = 0; j < M.cols(); ++j)
        if (i / n != j / n) EXPECT_EQ(M(i, j), 0.0);
  }
  const auto v = space(mesh, 2, SpaceFamily::continuous, PointKind::closed);
  const Eigen::MatrixXd Mv = dense(assemble_mass(*v));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Mv).eigenvalues().minCoeff(), 0.0);
}

TEST(Mass, AffineQuadratureExactFor2p) {
  const auto mesh = box_mesh(2, 3, 1, 2.0, 3.0);
  const auto s = space(mesh, 3, SpaceFamily::dg_scalar, PointKind::closed);
  const GridFunction u = interpolate([](const Vec2& x) { return x[0] * x[0] * x[0] + x[1] * x[0]; }, s);
  const Vector Mu = spmv(assemble_mass(*s), u.values());
  const double integral = u.values().dot(Mu);
  // int_0^2 int_0^3 (x^3 + x y)^2 dy dx
  const double exact = 3.0 * 128.0 / 7.0 + 2.0 * 4.5 * 32.0 / 5.0 + 9.0 * 8.0 / 3.0;
  EXPECT_NEAR(integral, exact, 1e-11);
}

TEST(Interpolate, ConstantsAndLinears) {
  const auto mesh = curved_mesh(2);
  const auto s = space(mesh, 2, SpaceFamily::dg_scalar, PointKind::closed);
  const GridFunction c = interpolate([](const Vec2&) { return 3.5; }, s);
  for (int i = 0; i < s->size(); ++i) EXPECT_EQ(c.values()[i], 3.5);

  const auto affine = box_mesh(3, 3);
  const auto y = space(affine, 1, SpaceFamily::dg_scalar, PointKind::open);
  const GridFunction lin = interpolate([](const Vec2& x) { return 2 * x[0] - x[1]; }, y);
  EXPECT_LT(l2_error(lin, [](const Vec2& x) { return 2 * x[0] - x[1]; }), 1e-13);
  for (int e = 0; e < affine->num_elements(); ++e) {
    const Vec2 g = lin.gradient(e, Vec2(0.3, 0.6));
    EXPECT_NEAR(g[0], 2.0, 1e-12);
    EXPECT_NEAR(g[1], -1.0, 1e-12);
  }
}

TEST(Interpolate, ThirdOrderConvergence) {
  auto f = [](const Vec2& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
  double prev = 0;
  for (int n : {8, 16, 32}) {
    const auto s = space(box_mesh(n, n), 2, SpaceFamily::dg_scalar, PointKind::closed);
    const double err = l2_error(interpolate(f, s), f);
    if (prev > 0) EXPECT_NEAR(prev / err, 8.0, 0.6);
    prev = err;
  }
}

TEST(L2Error, ZeroAgainstOne) {
  const auto s = space(box_mesh(2, 2), 1, SpaceFamily::dg_scalar, PointKind::closed);
  EXPECT_NEAR(l2_error(GridFunction(s), [](const Vec2&) { return 1.0; }), 1.0, 1e-14);
}

TEST(JumpAvg, ContinuousFunctionHasNoJump) {
  const auto mesh = curved_mesh(3);
  const auto v = space(mesh, 2, SpaceFamily::continuous, PointKind::closed);
  std::mt19937 rng(3);
  std::normal_distribution<double> n01;
  GridFunction u(v);
  for (int i = 0; i < v->size(); ++i) u.values()[i] = n01(rng);
  for (int f = 0; f < static_cast<int>(mesh->interior_faces().size()); ++f)
    for (double t : {0.0, 0.21, 0.5, 1.0}) EXPECT_NEAR(eval_jump_avg(u, f, t).jump, 0.0, 1e-12);
}

TEST(JumpAvg, PiecewiseConstants) {
  const auto mesh = box_mesh(2, 1, 1, 2.0, 1.0);
  const auto s = space(mesh, 0, SpaceFamily::dg_scalar, PointKind::open);
  GridFunction u(s, (Vector(2) << 3.0, 1.0).finished());
  const JumpAvg ja = eval_jump_avg(u, 0, 0.5);
  EXPECT_NEAR(ja.jump, 2.0, 1e-15);
  EXPECT_NEAR(ja.avg, 2.0, 1e-15);
  const JumpAvg b = eval_boundary_jump_avg(u, 0, 0.5);
  EXPECT_EQ(b.jump, b.avg);
}

TEST(JumpAvgProperty, JumpsAndAveragesIdentity) {
  const auto mesh = curved_mesh(3);
  const auto ys = space(mesh, 2, SpaceFamily::dg_scalar, PointKind::closed);
  const auto ws = space(mesh, 2, SpaceFamily::dg_vector, PointKind::closed);
  std::mt19937 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 5; ++trial) {
    GridFunction u(ys), v(ws);
    for (int i = 0; i < ys->size(); ++i) u.values()[i] = n01(rng);
    for (int i = 0; i < ws->size(); ++i) v.values()[i] = n01(rng);
    auto vn = [&](int e, const Vec2& xi, const Vec2& n) { return v.eval(e, xi, 0) * n[0] + v.eval(e, xi, 1) * n[1]; };
    const auto rule = gauss_legendre(8);

    double elementwise = 0;
    for (int e = 0; e < mesh->num_elements(); ++e) {
      for (int lf = 0; lf < 4; ++lf) {
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const FaceEval g = mesh->face_geometry(e, lf, rule.points[q]);
          const Vec2 xi = face_reference_point(lf, rule.points[q]);
          elementwise += rule.weights[q] * g.dS * u.eval(e, xi) * vn(e, xi, g.normal);
        }
      }
    }
    double facewise = 0;
    for (const auto& f : mesh->interior_faces()) {
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double t = rule.points[q];
        const FaceEval g = mesh->face_geometry(f, t);
        const Vec2 xi1 = face_reference_point(f.local1, t);
        const Vec2 xi2 = face_reference_point(f.local2, neighbor_parameter(f, t));
        const double u1 = u.eval(f.elem1, xi1), u2 = u.eval(f.elem2, xi2);
        const double v1 = vn(f.elem1, xi1, g.normal), v2 = vn(f.elem2, xi2, g.normal);
        facewise += rule.weights[q] * g.dS * ((u1 - u2) * 0.5 * (v1 + v2) + 0.5 * (u1 + u2) * (v1 - v2));
      }
    }
    for (const auto& f : mesh->boundary_faces()) {
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const FaceEval g = mesh->face_geometry(f.elem, f.local, rule.points[q]);
        const Vec2 xi = face_reference_point(f.local, rule.points[q]);
        facewise += rule.weights[q] * g.dS * u.eval(f.elem, xi) * vn(f.elem, xi, g.normal);
      }
    }
    EXPECT_NEAR(elementwise, facewise, 1e-12 * std::max(1.0, std::abs(elementwise)));
  }
}

TEST(Prolongation, TwoElementCounts) {
  const auto mesh = box_mesh(2, 1, 1, 2.0, 1.0);
  const auto y = space(mesh, 1, SpaceFamily::dg_scalar, PointKind::closed);
  const auto v = space(mesh, 1, SpaceFamily::continuous, PointKind::closed);
  const SparseMatrix Z = conforming_prolongation(*v, *y);
  EXPECT_EQ(Z.rows(), 8);
  EXPECT_EQ(Z.cols(), 6);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(Z.row(i).nonZeros(), 1);
    EXPECT_EQ(Z.row(i).sum(), 1.0);
  }
  const Vector ones = spmv(Z, Vector::Ones(6));
  EXPECT_EQ(ones, Vector::Ones(8));
}

TEST(Prolongation, RejectsOpenBasis) {
  const auto mesh = box_mesh(2, 1);
  const auto y = space(mesh, 1, SpaceFamily::dg_scalar, PointKind::open);
  const auto v = space(mesh, 1, SpaceFamily::continuous, PointKind::closed);
  EXPECT_THROW(conforming_prolongation(*v, *y), std::invalid_argument);
  EXPECT_THROW(boundary_dof_selector(*y), std::invalid_argument);
}

TEST(Prolongation, BoundaryDofsOfQuadratic) {
  const auto y = space(box_mesh(1, 1), 2, SpaceFamily::dg_scalar, PointKind::closed);
  const std::vector<int> b = boundary_dof_selector(*y);
  EXPECT_EQ(b.size(), 8u);
  EXPECT_EQ(std::count(b.begin(), b.end(), 4), 0);
}

TEST(GridFunctionDump, HeaderAndValues) {
  const auto s = space(box_mesh(1, 1), 0, SpaceFamily::dg_scalar, PointKind::open);
  GridFunction u(s, Vector::Constant(1, 0.25));
  std::ostringstream os;
  write_grid_function(os, u, {"run = test"});
  const std::string text = os.str();
  EXPECT_NE(text.find("# run = test"), std::string::npos);
  EXPECT_NE(text.find("index,value\n0,0.25\n"), std::string::npos);
}

}  // namespace
}  // namespace vef
