#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vef/output.hpp"

namespace vef {
namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vef_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Config, DefaultsPerExperiment) {
  const ProblemConfig mms = ProblemConfig::defaults_for("mms");
  EXPECT_EQ(mms.geometric_degree, 3);
  EXPECT_NEAR(mms.distort_time, 0.3 * std::numbers::pi, 1e-15);
  EXPECT_EQ(mms.mesh_sizes, (std::vector<int>{12, 18, 24, 30}));
  const ProblemConfig pipe = ProblemConfig::defaults_for("pipe");
  EXPECT_EQ(pipe.quadrature, 12);
  EXPECT_TRUE(pipe.fixup);
  EXPECT_EQ(pipe.anderson, 2);
  EXPECT_EQ(pipe.nx * pipe.ny, 112);
  const ProblemConfig mock = ProblemConfig::defaults_for("mockdata");
  EXPECT_EQ(mock.precond_list.size(), 4u);
  EXPECT_EQ(ProblemConfig::defaults_for("difflim").epsilons.size(), 4u);
  EXPECT_THROW(ProblemConfig::defaults_for("nonsense"), ConfigError);
  for (const char* name : {"mms", "difflim", "pipe", "mockdata", "solve"}) {
    EXPECT_NO_THROW(ProblemConfig::defaults_for(name).validate()) << name;
  }
}

TEST(Config, ParsesSectionsAndLists) {
  std::istringstream is(
      "[mesh]\nnx = 5\nrefine = 1\n[discretization]\nkind = mdldg\np = 3\n"
      "[solver]\nanderson = 4\naugmented = yes\n[study]\np_list = 1, 2\nkinds = ip,cg\nepsilons = 0.1,0.01\n");
  const ProblemConfig c = parse_config(is, ProblemConfig{});
  EXPECT_EQ(c.nx, 5);
  EXPECT_EQ(c.refine, 1);
  EXPECT_EQ(c.kind, DiscKind::mdldg);
  EXPECT_EQ(c.p, 3);
  EXPECT_EQ(c.anderson, 4);
  EXPECT_TRUE(c.augmented);
  EXPECT_EQ(c.p_list, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.kinds, (std::vector<DiscKind>{DiscKind::ip, DiscKind::cg}));
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.1, 0.01}));
  EXPECT_EQ(c.ny, 8);
}

TEST(Config, RoundTripsThroughText) {
  ProblemConfig c = ProblemConfig::defaults_for("pipe");
  c.sigma_s = 0.123456789012345;
  c.precond_list = {"usc", "exact"};
  std::ostringstream os;
  write_config(os, c);
  std::istringstream is(os.str());
  const ProblemConfig back = parse_config(is, ProblemConfig{});
  EXPECT_EQ(back.entries(), c.entries());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  ProblemConfig c;
  EXPECT_THROW(set_config_value(c, "mesh.nz", "3"), ConfigError);
  EXPECT_THROW(set_config_value(c, "mesh.nx", "three"), ConfigError);
  EXPECT_THROW(set_config_value(c, "mesh.nx", "3.5"), ConfigError);
  EXPECT_THROW(set_config_value(c, "physics.fixup", "maybe"), ConfigError);
  EXPECT_THROW(set_config_value(c, "discretization.kind", "fem"), ConfigError);
  std::istringstream is("[mesh]\ncolor = red\n");
  EXPECT_THROW(parse_config(is, c), ConfigError);
  set_config_value(c, "solver.precond", "usc-sym");
  EXPECT_EQ(c.precond, "usc-sym");
}

TEST(Config, ValidationCatchesBadRanges) {
  auto invalid = [](auto edit) {
    ProblemConfig c;
    edit(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  invalid([](ProblemConfig& c) { c.quadrature = 8; });
  invalid([](ProblemConfig& c) { c.sigma_s = 2.0; });
  invalid([](ProblemConfig& c) { c.sweeps = 4; });
  invalid([](ProblemConfig& c) { c.p = 0; });
  invalid([](ProblemConfig& c) { c.xmax = c.xmin; });
  invalid([](ProblemConfig& c) { c.precond = "ilu"; });
  invalid([](ProblemConfig& c) { c.epsilons = {1.5}; });
}

TEST(Config, LoadFromFile) {
  const auto dir = scratch_dir("config");
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "run.ini");
    os << "[physics]\nsigma_t = 2\nsigma_s = 1.5\n";
  }
  const ProblemConfig c = load_config((dir / "run.ini").string(), ProblemConfig{});
  EXPECT_EQ(c.sigma_t, 2.0);
  EXPECT_EQ(c.sigma_s, 1.5);
  EXPECT_THROW(load_config((dir / "missing.ini").string(), ProblemConfig{}), ConfigError);
}

TEST(Output, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Output, MetadataHeaderPrecedesEveryTable) {
  const ProblemConfig cfg = ProblemConfig::defaults_for("difflim");
  const RunMetadata meta = RunMetadata::for_run("difflim", cfg);
  EXPECT_EQ(meta.items.front().first, "command");
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  EXPECT_THROW(t.add_row({"1"}), std::invalid_argument);
  std::ostringstream os;
  t.write(os, meta);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("# command = difflim\n", 0), 0u);
  EXPECT_NE(text.find("# study.epsilons = 0.1,0.01,0.001,1e-04\n"), std::string::npos);
  EXPECT_NE(text.find("\na,b\n1,2\n"), std::string::npos);
  std::size_t header_lines = 0;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line) && line.rfind("# ", 0) == 0;) ++header_lines;
  EXPECT_EQ(header_lines, meta.items.size());
}

TEST(Output, LineoutSamplesSegment) {
  auto mesh = std::make_shared<Mesh>(build_cartesian_mesh(4, 4, {Vec2(0, 0), Vec2(2, 2)}, 1));
  auto space = std::make_shared<FeSpace>(mesh, 1, SpaceFamily::dg_scalar, PointKind::closed);
  const GridFunction u = interpolate([](const Vec2& x) { return 3.0 * x[0] - x[1]; }, space);
  const auto pts = sample_lineout(u, Vec2(0, 1), Vec2(2, 1), 5);
  ASSERT_EQ(pts.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(pts[i].s, 0.5 * i, 1e-15);
    EXPECT_NEAR(pts[i].x[0], 0.5 * i, 1e-15);
    EXPECT_NEAR(pts[i].value, 1.5 * i - 1.0, 1e-12);
  }
  const auto dir = scratch_dir("lineout");
  write_lineout(dir / "line.csv", RunMetadata::for_run("solve", ProblemConfig{}), pts);
  const std::string text = read_file(dir / "line.csv");
  EXPECT_NE(text.find("\ns,x,y,value\n0,0,1,-1\n"), std::string::npos);
}

TEST(Output, GridFunctionDumpHasHeader) {
  auto mesh = std::make_shared<Mesh>(build_cartesian_mesh(1, 1, {Vec2(0, 0), Vec2(1, 1)}, 1));
  auto space = std::make_shared<FeSpace>(mesh, 1, SpaceFamily::dg_scalar, PointKind::closed);
  const GridFunction u = interpolate([](const Vec2& x) { return x[0]; }, space);
  const auto dir = scratch_dir("gf");
  RunMetadata meta;
  meta.add("command", "solve");
  write_grid_function(dir / "phi.txt", meta, u);
  const std::string text = read_file(dir / "phi.txt");
  EXPECT_EQ(text.rfind("# command = solve\n", 0), 0u);
  EXPECT_NE(text.find("index,value\n0,0\n1,1\n"), std::string::npos);
}

}  // namespace
}  // namespace vef
