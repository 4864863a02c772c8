#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hydrofrac/assembly.hpp"
#include "hydrofrac/solver.hpp"

namespace hydrofrac {

// strip [x0, x1] x [y0, y1] whose grid lines are spaced at most `size`
struct RefineBox {
  Box box{};
  double size = 0;
};

struct GeometrySpec {
  double width = 0, height = 0;
  int nx = 0, ny = 0;
  Point origin = Point::Zero();
  std::vector<RefineBox> refine;
};

struct CrackSegment {
  Point a = Point::Zero(), b = Point::Zero();
  double width = 0;
};

struct BoundarySpec {
  std::string name;
  BcField field = BcField::ux;
  Box region{};
  double initial = 0;
};

enum class Ramp { linear, instant };

struct LoadSpec {
  double target = 0;
  Ramp ramp = Ramp::linear;
};

struct StepSpec {
  std::string name;
  double duration = 0;
  double dt = 0;
  std::map<std::string, LoadSpec> loads;  // keyed by boundary name
};

struct ProbeSpec {
  std::string name;
  std::optional<Point> point;
  std::vector<std::string> quantities;
};

struct OutputSpec {
  int snapshot_every = 0;  // increments between snapshots, 0 for step ends only
  bool snapshots = true;
};

struct ScenarioSpec {
  std::string name = "scenario";
  GeometrySpec geometry;
  MaterialParams mat;
  PoroFluidParams fluid;
  SplitKind split = SplitKind::none;
  SolverSettings solver;
  double penalty_gamma = 0;
  Eigen::Vector2d body_force = Eigen::Vector2d::Zero();
  std::vector<CrackSegment> cracks;
  std::vector<BoundarySpec> boundaries;
  std::vector<StepSpec> steps;
  std::vector<ProbeSpec> probes;
  OutputSpec output;
  std::vector<std::string> assumptions;

  double end_time() const;
  int boundary_index(const std::string& name) const;
};

ScenarioSpec parse_config(const std::string& path);
ScenarioSpec parse_config_text(const std::string& text);
// structural checks shared by the parser and programmatic specs
void validate(const ScenarioSpec& spec);

Mesh build_scenario_mesh(const GeometrySpec& g);

struct CrackSeed {
  std::vector<int> nodes;
  std::vector<char> gp;  // per Gauss point, set inside fully cracked elements
};

// nodes within half the local element size (or half the crack width) of the segment
CrackSeed prescribe_crack(const Mesh& mesh, const CrackSegment& seg);

Model build_model(const ScenarioSpec& spec);
std::vector<double> load_values(const ScenarioSpec& spec, double t);

struct ProbeRecord {
  double time = 0;
  std::vector<double> values;
};

struct RunOptions {
  std::string out_dir;  // empty: nothing written
  std::optional<double> until;
  // called after every accepted increment
  std::function<void(const Model&, const State&, const IncrementReport&)> on_increment;
};

struct RunResult {
  bool ok = true;
  std::string message;
  int increments = 0;
  Model model;
  State state;
  std::vector<std::string> columns;
  std::vector<ProbeRecord> records;
};

RunResult run_scenario(const ScenarioSpec& spec, const RunOptions& opt = {});

// scenarios shipped with the tool, scaled by a resolution factor
std::string bundled_case_text(int id);
ScenarioSpec bundled_case(int id, double resolution = 1);
ScenarioSpec scale_resolution(ScenarioSpec spec, double factor);

}  // namespace hydrofrac
