#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "poroflow/cli.hpp"

using namespace poroflow;
using cli::Json;

namespace {

int run_main(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "poroflow");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Config, Defaults) {
  const cli::RunConfig c = cli::parse_config(Json::object());
  EXPECT_EQ(c.experiment, cli::Experiment::Convergence);
  EXPECT_EQ(c.case_kind, cli::CaseKind::Example1);
  EXPECT_EQ(c.levels, 5);
  EXPECT_EQ(c.resolved_n(), 2);
  EXPECT_EQ(c.resolved_geometry(), Geometry::UnitSquare);
  EXPECT_EQ(c.solver.method, SolverMethod::Newton);
  EXPECT_EQ(c.solver.tol, 1e-7);
  EXPECT_FALSE(c.marking.has_value());
  const cli::RunConfig l = cli::parse_config(Json{{"case", "example3"}});
  EXPECT_EQ(l.resolved_geometry(), Geometry::LShape);
  EXPECT_EQ(l.resolved_n(), 1);
}

TEST(Config, NestedAndDottedKeys) {
  const cli::RunConfig a = cli::parse_config(
      Json{{"experiment", "adaptive"}, {"marking", {{"zeta", 0.25}, {"strategy", "dorfler"}}}, {"solver.method", "picard"}});
  EXPECT_EQ(a.experiment, cli::Experiment::Adaptive);
  ASSERT_TRUE(a.marking.has_value());
  EXPECT_EQ(a.marking->zeta, 0.25);
  EXPECT_EQ(a.strategy, MarkingStrategy::Dorfler);
  EXPECT_EQ(a.solver.method, SolverMethod::Picard);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW(cli::parse_config(Json{{"experiment", "adaptive"}, {"marking", {{"zeta", 1.5}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"experiment", "adaptive"}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"marking", {{"zeta", 0.5}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"levels", 0}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"solver", {{"tol", -1.0}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"params", {{"mu", -1.0}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"geometry", "mesh:/no/such/file.msh"}}), ConfigError);
}

TEST(Config, UnknownKeysAndTypeMismatchesNameTheKey) {
  try {
    cli::parse_config(Json{{"levles", 3}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("levles"), std::string::npos);
  }
  try {
    cli::parse_config(Json{{"levels", "three"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("levels"), std::string::npos);
  }
  EXPECT_THROW(cli::parse_config(Json{{"levels", 2.5}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"case", "example2"}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"params", {{"law", "linear"}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"params", {{"nu", 0.3}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"regions", {{"x", {{"mu", 2.0}}}}}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json{{"levels", Json::array({1, 2})}}), ConfigError);
  EXPECT_THROW(cli::parse_config(Json::array()), ConfigError);
}

TEST(Config, OverridesWinOverTheFile) {
  const std::string dir = support::temp_dir("cli_override");
  write_file(dir + "/run.json", R"({"levels": 5, "n": 3})");
  const cli::RunConfig c = cli::parse_config(dir + "/run.json", {{"levels", 3}});
  EXPECT_EQ(c.levels, 3);
  EXPECT_EQ(c.resolved_n(), 3);
  write_file(dir + "/bad.json", "{ levels: ");
  EXPECT_THROW(cli::parse_config(dir + "/bad.json"), ConfigError);
  EXPECT_THROW(cli::parse_config(dir + "/missing.json"), ConfigError);
}

TEST(Config, ParametersAndRegions) {
  const cli::RunConfig c = cli::parse_config(
      Json{{"params", {{"lambda", 2.0}, {"law", "exp"}}}, {"regions", {{"1", {{"mu", 5.0}}}}}});
  const ManufacturedCase m = cli::make_case(c);
  EXPECT_EQ(m.materials.base.lambda, 2.0);
  EXPECT_EQ(m.materials.base.law, PermeabilityLaw::Exponential);
  EXPECT_EQ(m.materials.at(1).mu, 5.0);
  EXPECT_EQ(m.materials.at(1).lambda, 2.0);
  EXPECT_EQ(m.materials.at(0).mu, m.materials.base.mu);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli::exit_code(ConfigError("x")), 2);
  EXPECT_EQ(cli::exit_code(MeshError("x")), 3);
  EXPECT_EQ(cli::exit_code(SolverError("x", {})), 4);
  EXPECT_EQ(cli::exit_code(PhysicsError("x")), 4);
  EXPECT_EQ(cli::exit_code(IoError("x")), 5);
  EXPECT_EQ(cli::exit_code(std::runtime_error("x")), 1);
}

TEST(Cli, HelpAndParseErrors) {
  std::string out;
  EXPECT_EQ(run_main({"--help"}, &out), 0);
  EXPECT_NE(out.find("--levels"), std::string::npos);
  EXPECT_EQ(run_main({"--levels", "many"}), 2);
  EXPECT_EQ(run_main({"--bogus"}), 2);
  std::string err;
  EXPECT_EQ(run_main({"adaptive", "--zeta", "2"}, nullptr, &err), 2);
  EXPECT_NE(err.find("marking.zeta"), std::string::npos);
}

TEST(Cli, ConvergenceRunWritesTable) {
  const std::string dir = support::temp_dir("cli_convergence");
  std::string out;
  ASSERT_EQ(run_main({"convergence", "--levels", "2", "--out", dir}, &out), 0);
  const std::vector<TableRow> rows = read_csv(dir + "/convergence.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].dofs, 97);
  EXPECT_LT(rows[1].e_total, rows[0].e_total);
  EXPECT_NE(out.find("e_sigma"), std::string::npos);
}

TEST(Cli, RunsAreDeterministic) {
  const std::string a = support::temp_dir("cli_det_a"), b = support::temp_dir("cli_det_b");
  const std::vector<std::string> args{"adaptive", "--case", "example3", "--levels", "3", "--zeta", "0.3"};
  auto with_out = [&](const std::string& dir) {
    std::vector<std::string> v = args;
    v.insert(v.end(), {"--out", dir});
    return v;
  };
  ASSERT_EQ(run_main(with_out(a)), 0);
  ASSERT_EQ(run_main(with_out(b)), 0);
  const std::string ta = read_file(a + "/adaptive.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, read_file(b + "/adaptive.csv"));
}

TEST(Cli, SolveOnACustomMesh) {
  const std::string dir = support::temp_dir("cli_solve");
  const TriMesh m = support::two_region_square(2);
  write_mesh(m, dir + "/square.msh");
  write_file(dir + "/run.json", R"({"case": "custom", "geometry": "mesh:)" + dir +
                                    R"(/square.msh", "regions": {"1": {"mu": 3.0}}})");
  ASSERT_EQ(run_main({"solve", "--config", dir + "/run.json", "--out", dir + "/out"}), 0);
  const std::string vtk = read_file(dir + "/out/solve_level0.vtk");
  EXPECT_NE(vtk.find("POINTS 9 double"), std::string::npos);
  EXPECT_NE(vtk.find("SCALARS xi"), std::string::npos);
  const std::vector<TableRow> rows = read_csv(dir + "/out/solve.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].e_total, 0.0);
}

TEST(Cli, ErrorsMapToExitCodes) {
  const std::string dir = support::temp_dir("cli_errors");
  write_file(dir + "/broken.msh", "not a mesh\n");
  std::string err;
  EXPECT_EQ(run_main({"solve", "--geometry", "mesh:" + dir + "/broken.msh", "--case", "custom"}, nullptr, &err), 3);
  EXPECT_NE(err.find("error:"), std::string::npos);
  EXPECT_EQ(run_main({"solve", "--method", "picard", "--tol", "1e-14", "--n", "2", "--out", dir}), 0);
  write_file(dir + "/blocked", "");
  EXPECT_EQ(run_main({"solve", "--out", dir + "/blocked/sub"}), 5);
  EXPECT_EQ(run_main({"--config", dir + "/absent.json"}), 2);
}
