#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hydrofrac/output.hpp"
#include "hydrofrac/scenario.hpp"

using namespace hydrofrac;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"yaml(
name: small
geometry: {width_m: 1.0, height_m: 1.0, nx: 4, ny: 4}
material: {youngs_modulus_pa: 1.0e9, poisson_ratio: 0.25, gc_j_per_m2: 100, length_scale_m: 0.3}
fluid:
  biot_reservoir: 1
  porosity_reservoir: 0
  compressibility_per_pa: 0
  permeability_reservoir_m2: 1.0e-12
  permeability_fracture_m2: 1.0e-8
  coupling: domain_decomposition
solver: {scheme: mixed_staggered, tolerance: 1.0e-9}
boundaries:
  - {name: fix_x, field: ux, side: left}
  - {name: fix_y, field: uy, side: bottom}
  - {name: roll_x, field: ux, side: right}
  - {name: roll_y, field: uy, side: top}
  - {name: high, field: p, side: left}
  - {name: low, field: p, side: right}
steps:
  - {name: load, duration_s: 1, dt_s: 1, loads: {high: 1.0e5}}
probes:
  - name: mid
    point_m: [0.5, 0.5]
    quantities: [p, phi, ux]
  - name: domain
    quantities: [reaction:high, reaction:low, max_p]
)yaml";

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("hydrofrac_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int parse_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST(Config, ParsesSmallScenario) {
  const ScenarioSpec s = parse_config_text(kSmall);
  EXPECT_EQ(s.name, "small");
  EXPECT_EQ(s.geometry.nx, 4);
  EXPECT_EQ(s.boundaries.size(), 6u);
  EXPECT_EQ(s.steps.size(), 1u);
  EXPECT_DOUBLE_EQ(s.steps[0].loads.at("high").target, 1e5);
  EXPECT_EQ(s.steps[0].loads.at("high").ramp, Ramp::linear);
  EXPECT_EQ(s.solver.scheme, Scheme::mixed_staggered);
  EXPECT_DOUBLE_EQ(s.end_time(), 1);
}

TEST(Config, Defaults) {
  const ScenarioSpec s = parse_config_text(R"yaml(
geometry: {width_m: 1, height_m: 1, nx: 1, ny: 1}
material: {youngs_modulus_pa: 1.0e9, poisson_ratio: 0.2, gc_j_per_m2: 10, length_scale_m: 0.1}
steps: [{duration_s: 1, dt_s: 0.5}]
)yaml");
  EXPECT_EQ(s.name, "scenario");
  EXPECT_EQ(s.mat.model, CrackModel::AT2);
  EXPECT_DOUBLE_EQ(s.mat.kappa, 1e-7);
  EXPECT_EQ(s.fluid.coupling, Coupling::hybrid);
  EXPECT_DOUBLE_EQ(s.fluid.c1, 0.5);
  EXPECT_DOUBLE_EQ(s.fluid.c2, 1.0);
  EXPECT_EQ(s.split, SplitKind::none);
  EXPECT_EQ(s.solver.scheme, Scheme::mixed_staggered);
  EXPECT_EQ(s.steps[0].name, "step1");
  EXPECT_EQ(s.output.snapshot_every, 0);
  EXPECT_TRUE(s.output.snapshots);
}

TEST(Config, UnknownKeyReportsItsLine) {
  const std::string text = replace(kSmall, "  coupling: domain_decomposition\n",
                                   "  coupling: domain_decomposition\n  colour: blue\n");
  EXPECT_EQ(parse_line(text), 12);
}

TEST(Config, SyntaxErrorReportsItsLine) {
  EXPECT_EQ(parse_line("geometry: {width_m: 1\nmaterial: [\n"), 2);
}

TEST(Config, BadValuesReportLines) {
  EXPECT_EQ(parse_line(replace(kSmall, "nx: 4", "nx: four")), 3);
  EXPECT_EQ(parse_line(replace(kSmall, "poisson_ratio: 0.25", "poisson_ratio: 0.6")), 4);
  EXPECT_EQ(parse_line(replace(kSmall, "loads: {high:", "loads: {nowhere:")), 21);
  EXPECT_GT(parse_line(replace(kSmall, "quantities: [p, phi, ux]", "quantities: [pressure]")), 0);
  EXPECT_GT(parse_line(replace(kSmall, "dt_s: 1,", "dt_s: -1,")), 0);
}

TEST(Config, RejectsTransitionBoundsOutOfOrder) {
  const std::string text = replace(kSmall, "  coupling: domain_decomposition\n",
                                   "  coupling: domain_decomposition\n  c1: 0.9\n  c2: 0.4\n");
  EXPECT_EQ(parse_line(text), 6);  // first line of the fluid block
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(parse_config("/nonexistent/dir/none.yaml"), IoError);
}

TEST(Config, BundledCaseMatchesScenarioFile) {
  const ScenarioSpec a = bundled_case(1);
  const ScenarioSpec b = parse_config_text(bundled_case_text(1));
  EXPECT_EQ(a.name, "case1");
  EXPECT_DOUBLE_EQ(a.geometry.width, 2.1);
  EXPECT_DOUBLE_EQ(a.geometry.height, 5.0);
  EXPECT_EQ(a.geometry.nx, b.geometry.nx);
  EXPECT_EQ(a.boundaries.size(), b.boundaries.size());
  EXPECT_EQ(a.steps.size(), 2u);
  EXPECT_DOUBLE_EQ(a.steps[1].loads.at("pull").target, -0.1);
  EXPECT_EQ(a.cracks.size(), 1u);
  const fs::path file = fs::path(HYDROFRAC_SOURCE_DIR) / "scenarios" / "case1.yaml";
  EXPECT_EQ(slurp(file), bundled_case_text(1));
}

TEST(Config, ResolutionScalesElementCounts) {
  const ScenarioSpec a = bundled_case(1, 0.5);
  EXPECT_LT(a.geometry.nx, bundled_case(1).geometry.nx);
}

TEST(Loads, LinearRampThenHold) {
  ScenarioSpec s = parse_config_text(kSmall);
  s.steps.push_back({"hold", 2, 1, {}});
  s.steps.push_back({"jump", 1, 1, {{"low", {50, Ramp::instant}}}});
  const int hi = s.boundary_index("high"), lo = s.boundary_index("low");
  EXPECT_DOUBLE_EQ(load_values(s, 0)[hi], 0);
  EXPECT_DOUBLE_EQ(load_values(s, 0.25)[hi], 2.5e4);
  EXPECT_DOUBLE_EQ(load_values(s, 1)[hi], 1e5);
  EXPECT_DOUBLE_EQ(load_values(s, 2.5)[hi], 1e5);
  EXPECT_DOUBLE_EQ(load_values(s, 3)[lo], 0);
  EXPECT_DOUBLE_EQ(load_values(s, 3.01)[lo], 50);
}

TEST(Mesh, GradedLinesMeetRefinedSize) {
  GeometrySpec g;
  g.width = 2;
  g.height = 1;
  g.nx = 4;
  g.ny = 2;
  g.refine.push_back({{0.5, 0.9, 0.0, 1.0}, 0.05});
  const Mesh m = build_scenario_mesh(g);
  for (size_t i = 0; i + 1 < m.xs.size(); ++i) {
    const double mid = (m.xs[i] + m.xs[i + 1]) / 2, h = m.xs[i + 1] - m.xs[i];
    EXPECT_LE(h, (mid > 0.5 && mid < 0.9 ? 0.05 : 0.5) + 1e-12);
  }
  EXPECT_DOUBLE_EQ(m.xs.front(), 0);
  EXPECT_DOUBLE_EQ(m.xs.back(), 2);
  EXPECT_EQ(m.num_elements(), static_cast<int>((m.xs.size() - 1) * (m.ys.size() - 1)));
}

TEST(Crack, SeedsBandOfNodesAndInteriorGaussPoints) {
  const Mesh m = build_structured_mesh(1, 1, 10, 10);
  const CrackSeed a = prescribe_crack(m, {{0, 0.5}, {1, 0.5}, 0});
  EXPECT_EQ(a.nodes.size(), 11u);  // one node row, no full element
  EXPECT_EQ(std::count(a.gp.begin(), a.gp.end(), 1), 0);
  const CrackSeed b = prescribe_crack(m, {{0, 0.55}, {1, 0.55}, 0.1});
  EXPECT_EQ(b.nodes.size(), 22u);  // the element row between y = 0.5 and 0.6
  EXPECT_EQ(std::count(b.gp.begin(), b.gp.end(), 1), 40);
  EXPECT_THROW(prescribe_crack(m, {{0, 0.5}, {1.5, 0.5}, 0}), InvalidArgument);
  EXPECT_THROW(prescribe_crack(m, {{0, 0.5}, {1, 0.5}, -1}), InvalidArgument);
}

TEST(Run, UnloadedScenarioStaysAtRest) {
  ScenarioSpec s = parse_config_text(kSmall);
  s.steps[0].loads.clear();
  const RunResult r = run_scenario(s);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.state.u.lpNorm<Eigen::Infinity>(), 0);
  EXPECT_EQ(r.state.p.lpNorm<Eigen::Infinity>(), 0);
  EXPECT_EQ(r.state.phi.lpNorm<Eigen::Infinity>(), 0);
  for (double v : r.records.back().values) EXPECT_EQ(v, 0);
}

TEST(Run, SteadyFlowConservesMass) {
  // one long increment so the consolidation transient has died out
  const RunResult r =
      run_scenario(parse_config_text(replace(kSmall, "duration_s: 1, dt_s: 1", "duration_s: 1.0e6, dt_s: 1.0e6")));
  ASSERT_TRUE(r.ok);
  const auto& v = r.records.back().values;
  ASSERT_EQ(r.columns[3], "domain.reaction:high");
  const double in = v[3], out = v[4];
  // Darcy rate through a unit-depth slab, rho K / mu * dp / L * height
  EXPECT_NEAR(std::abs(in), 1000 * 1e-12 / 1e-3 * 1e5, 1e-6 * std::abs(in));
  EXPECT_LE(std::abs(in + out), 1e-4 * std::abs(in));
  const double x = r.model.mesh.gauss_point(nearest_gauss_point(r.model.mesh, {0.5, 0.5})).x();
  EXPECT_NEAR(v[0], 1e5 * (1 - x), 1e-6 * 1e5);
}

TEST(Output, SingleRecordGivesHeaderAndOneRow) {
  const fs::path d = scratch("csv");
  write_probes({"a", "b"}, {{1.5, {2, -0.0}}}, (d / "p.csv").string());
  EXPECT_EQ(slurp(d / "p.csv"), "time,a,b\n1.5000000000e+00,2.0000000000e+00,0.0000000000e+00\n");
  EXPECT_THROW(write_probes({"a"}, {}, (d / "q.csv").string()), InvalidArgument);
}

TEST(Output, UnwritablePathIsIoError) {
  Model m;
  m.mesh = build_structured_mesh(1, 1, 1, 1);
  m.mat = MaterialParams::from_engineering(1e9, 0.2, 10, 0.1, CrackModel::AT2, 0);
  m.finalize();
  EXPECT_THROW(write_snapshot(m, State::zeros(m), "/nonexistent/dir/s.vtk"), IoError);
  EXPECT_THROW(ProbeWriter("/nonexistent/dir/p.csv", {"a"}), IoError);
  ScenarioSpec s = parse_config_text(kSmall);
  RunOptions opt;
  opt.out_dir = "/proc/hydrofrac_out";
  EXPECT_THROW(run_scenario(s, opt), IoError);
}

TEST(Output, SingleElementSnapshotLayout) {
  Model m;
  m.mesh = build_structured_mesh(1, 1, 1, 1);
  m.mat = MaterialParams::from_engineering(1e9, 0.2, 10, 0.1, CrackModel::AT2, 0);
  m.finalize();
  const fs::path d = scratch("vtk");
  write_snapshot(m, State::zeros(m), (d / "s.vtk").string());
  const std::string text = slurp(d / "s.vtk");
  EXPECT_EQ(text.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(text.find("POINTS 4 double\n"), std::string::npos);
  EXPECT_NE(text.find("CELLS 1 5\n4 0 1 3 2\n"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 1\n9\n"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 4\n"), std::string::npos);
  EXPECT_NE(text.find("CELL_DATA 1\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS phi double 1"), std::string::npos);
}

TEST(Output, RepeatedRunsWriteIdenticalFiles) {
  const ScenarioSpec s = parse_config_text(kSmall);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunOptions oa, ob;
  oa.out_dir = a.string();
  ob.out_dir = b.string();
  run_scenario(s, oa);
  run_scenario(s, ob);
  for (const char* f : {"probes.csv", "snapshot_0000.vtk", "log.jsonl"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Post, HydrostaticStateHasNoDeviator) {
  Model m;
  m.mesh = build_structured_mesh(1, 1, 2, 2);
  m.mat = MaterialParams::from_engineering(1e9, 0.2, 10, 0.1, CrackModel::AT2, 0);
  m.fluid.alpha_r = 0.8;
  m.finalize();
  State s = State::zeros(m);
  s.p.setConstant(3e6);
  const GpPost r = post_gp(m, s, 0, std::nullopt);
  EXPECT_NEAR(std::sqrt(j2_invariant(r.sigma)), 0, 1e-6);
  EXPECT_NEAR(trace_invariant(r.sigma), -3 * 0.8 * 3e6, 1e-3);
}
