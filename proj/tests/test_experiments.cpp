#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "vef/experiments.hpp"

namespace vef {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Mms, ScalarFluxIsTheAngularIntegral) {
  const MmsDefinition mms;
  const AngularQuadrature quad = level_symmetric(12);
  for (const Vec2 x : {Vec2(0.1, 0.2), Vec2(0.5, 0.5), Vec2(0.93, 0.41)}) {
    double s = 0.0;
    for (int d = 0; d < quad.size(); ++d) s += quad.weights[d] * mms.psi(x, quad.directions[d]);
    EXPECT_NEAR(s, mms.phi(x), 1e-7);
  }
}

TEST(Mms, GradientMatchesFiniteDifferences) {
  const MmsDefinition mms;
  const Vec3 o(0.3, -0.6, std::sqrt(1.0 - 0.45));
  const double h = 1e-6;
  for (const Vec2 x : {Vec2(0.2, 0.7), Vec2(0.65, 0.15)}) {
    const Vec2 fd((mms.psi(x + Vec2(h, 0), o) - mms.psi(x - Vec2(h, 0), o)) / (2 * h),
                  (mms.psi(x + Vec2(0, h), o) - mms.psi(x - Vec2(0, h), o)) / (2 * h));
    EXPECT_LT((mms.grad_psi(x, o) - fd).norm(), 1e-8);
  }
}

TEST(Mms, SourceSatisfiesTransportEquation) {
  const MmsDefinition mms;
  const Vec3 o(-0.5, 0.5, std::sqrt(0.5));
  const Vec2 x(0.37, 0.81);
  const double residual = Vec2(o[0], o[1]).dot(mms.grad_psi(x, o)) + mms.sigma_t * mms.psi(x, o) -
                          mms.sigma_s / (4.0 * kPi) * mms.phi(x) - mms.source(x, o);
  EXPECT_NEAR(residual, 0.0, 1e-12);
}

TEST(Statistics, RegressionRecoversPowerLaw) {
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  std::vector<double> err;
  for (double v : h) err.push_back(7.0 * std::pow(v, 4));
  const Regression r = log_regression(h, err);
  EXPECT_NEAR(r.order, 4.0, 1e-12);
  EXPECT_NEAR(r.constant, 7.0, 1e-11);
  EXPECT_THROW(log_regression({0.1}, {0.2}), std::invalid_argument);
  EXPECT_THROW(log_regression({0.1, 0.2}, {0.0, 1.0}), std::invalid_argument);
}

TEST(Statistics, PopulationStandardDeviation) {
  EXPECT_NEAR(standard_deviation({1.0, 2.0, 3.0, 4.0}), std::sqrt(1.25), 1e-15);
  EXPECT_EQ(standard_deviation({5.0}), 0.0);
}

TEST(Mms, FrozenErrorsOnDistortedMesh) {
  ProblemConfig cfg = ProblemConfig::defaults_for("mms");
  cfg.nx = cfg.ny = 12;
  const auto mesh = make_mesh(cfg, 0);
  EXPECT_NEAR(mesh->max_characteristic_length(), 8.345124e-02, 1e-8);
  const MmsDefinition mms;
  const SolverConfig direct{PrecondKind::direct};
  const std::pair<DiscKind, double> p2[] = {{DiscKind::ip, 1.6880262049e-03},
                                            {DiscKind::br2, 1.7035572716e-03},
                                            {DiscKind::mdldg, 1.6971023098e-03},
                                            {DiscKind::cg, 1.7873008735e-03}};
  for (const auto& [kind, expected] : p2) {
    EXPECT_NEAR(mms_error(mms, mesh, 2, kind, direct), expected, 1e-6 * expected) << to_string(kind);
  }
  EXPECT_NEAR(mms_error(mms, mesh, 1, DiscKind::ip, direct), 2.3695351504e-02, 1e-6 * 2.37e-2);
}

TEST(Mms, SmallStudyOrders) {
  ProblemConfig cfg = ProblemConfig::defaults_for("mms");
  cfg.mesh_sizes = {8, 16};
  cfg.p_list = {1};
  cfg.kinds = {DiscKind::ip, DiscKind::cg};
  const MmsResult r = mms_run(cfg);
  ASSERT_EQ(r.rows.size(), 2u);
  ASSERT_EQ(r.fits.size(), 2u);
  for (const MmsFit& f : r.fits) EXPECT_GT(f.fit.order, 1.5) << to_string(f.kind);
  EXPECT_LT(r.rows[1].errors[0], r.rows[0].errors[0]);
}

TEST(Pipe, Geometry) {
  EXPECT_TRUE(in_pipe(Vec2(1.0, 0.0)));
  EXPECT_TRUE(in_pipe(Vec2(3.0, 1.0)));
  EXPECT_TRUE(in_pipe(Vec2(4.5, 1.0)));
  EXPECT_TRUE(in_pipe(Vec2(6.0, 0.0)));
  EXPECT_TRUE(in_pipe(Vec2(6.9, 0.0)));
  EXPECT_FALSE(in_pipe(Vec2(1.0, 1.0)));
  EXPECT_FALSE(in_pipe(Vec2(4.5, 0.0)));
  EXPECT_FALSE(in_pipe(Vec2(3.0, -1.5)));
}

TEST(Pipe, MeshAndMaterial) {
  const ProblemConfig cfg = ProblemConfig::defaults_for("pipe");
  const auto mesh = pipe_mesh(cfg, 0);
  ASSERT_EQ(mesh->num_elements(), 112);
  int pipe = 0;
  for (int e = 0; e < 112; ++e) pipe += mesh->attribute(e) == 1;
  EXPECT_EQ(pipe, 36);
  EXPECT_EQ(pipe_mesh(cfg, 1)->num_elements(), 448);
  const Material mat = pipe_material(*mesh);
  for (int e = 0; e < 112; ++e) {
    EXPECT_NEAR(mat.sigma_a(e), 1e-3, 1e-12);
    EXPECT_EQ(mat.sigma_s[e], mesh->attribute(e) == 1 ? 0.2 : 200.0);
  }
}

TEST(Pipe, InflowOnlyAtThePipeMouth) {
  const ProblemConfig cfg = ProblemConfig::defaults_for("pipe");
  const auto mesh = pipe_mesh(cfg, 0);
  const TransportProblem prob = pipe_problem(*mesh, 0.1);
  const Vec3 o(1.0, 0.0, 0.0);
  EXPECT_NEAR(prob.inflow(Vec2(0.0, 0.2), o), 0.5 / kPi, 1e-15);
  EXPECT_EQ(prob.inflow(Vec2(0.0, 1.0), o), 0.0);
  EXPECT_EQ(prob.inflow(Vec2(7.0, 0.0), o), 0.0);
  EXPECT_EQ(prob.source(0, Vec2(1.0, 0.0), o), 0.1);
}

TEST(Helpers, ProjectionReproducesPolynomials) {
  ProblemConfig cfg;
  cfg.nx = cfg.ny = 3;
  const auto mesh = make_mesh(cfg, 1);
  EXPECT_EQ(mesh->num_elements(), 36);
  const auto space = std::make_shared<FeSpace>(mesh, 2, SpaceFamily::dg_scalar, PointKind::open);
  const GridFunction u = project([](int, const Vec2& x) { return x[0] * x[0] - x[1]; }, space);
  EXPECT_LT(l2_error(u, [](const Vec2& x) { return x[0] * x[0] - x[1]; }), 1e-13);
  EXPECT_THROW(project([](int, const Vec2&) { return 0.0; },
                       std::make_shared<FeSpace>(mesh, 1, SpaceFamily::continuous, PointKind::closed)),
               std::invalid_argument);
}

TEST(Helpers, AttributesAndPreconditionerResolution) {
  ProblemConfig cfg;
  cfg.nx = 2;
  cfg.ny = 1;
  const auto mesh = make_mesh(cfg, 0);
  const auto tagged = with_attributes(*mesh, {4, 9});
  EXPECT_EQ(tagged->attribute(1), 9);
  EXPECT_EQ(tagged->num_elements(), 2);
  EXPECT_EQ(resolve_precond(cfg, DiscKind::br2), PrecondKind::usc);
  EXPECT_EQ(resolve_precond(cfg, DiscKind::cg), PrecondKind::substitute);
  cfg.precond = "exact";
  EXPECT_EQ(resolve_precond(cfg, DiscKind::cg), PrecondKind::exact);
}

TEST(GenericRun, SmallProblemConvergesAndWritesOutputs) {
  ProblemConfig cfg;
  cfg.nx = cfg.ny = 4;
  cfg.p = 1;
  cfg.kind = DiscKind::br2;
  cfg.anderson = 2;
  const SolveResult r = generic_run(cfg);
  EXPECT_TRUE(r.result.converged);
  EXPECT_GT(l2_norm(r.result.varphi), 0.0);
  const auto dir = std::filesystem::temp_directory_path() / "vef_test_generic";
  std::filesystem::remove_all(dir);
  write_outputs(r, dir, RunMetadata::for_run("solve", cfg));
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    ++files;
    std::ifstream is(entry.path());
    std::string first;
    std::getline(is, first);
    EXPECT_EQ(first, "# command = solve") << entry.path();
  }
  EXPECT_GE(files, 2);
}

}  // namespace
}  // namespace vef
