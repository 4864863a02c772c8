// command-line driver: run a scenario file, run a bundled case, or run the verification suites
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "hydrofrac/output.hpp"
#include "hydrofrac/scenario.hpp"
#include "hydrofrac/verify.hpp"

using namespace hydrofrac;

namespace {

struct Overrides {
  std::string scheme, split, coupling;
  double dt = 0;
  double until = -1;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scheme", o.scheme, "solution scheme");
  cmd->add_option("--split", o.split, "strain energy split");
  cmd->add_option("--coupling", o.coupling, "permeability coupling");
  cmd->add_option("--dt", o.dt, "time increment for every step [s]")->check(CLI::PositiveNumber);
  cmd->add_option("--until", o.until, "stop at this time [s]")->check(CLI::PositiveNumber);
}

void apply(const Overrides& o, ScenarioSpec& spec) {
  if (!o.scheme.empty()) spec.solver.scheme = parse_scheme(o.scheme);
  if (!o.split.empty()) spec.split = parse_split_kind(o.split);
  if (!o.coupling.empty()) spec.fluid.coupling = parse_coupling(o.coupling);
  if (o.dt > 0)
    for (auto& s : spec.steps) s.dt = o.dt;
  validate(spec);
}

int execute(const ScenarioSpec& spec, const std::string& out, const Overrides& o) {
  RunOptions opt;
  opt.out_dir = out;
  if (o.until > 0) opt.until = o.until;
  opt.on_increment = [](const Model&, const State& s, const IncrementReport& r) {
    std::fprintf(stderr, "t = %-12.6g dt = %-10.4g iterations %d\n", s.time, r.dt, r.iterations);
  };
  const RunResult res = run_scenario(spec, opt);
  if (!res.ok) {
    std::cerr << "error: " << res.message << "\nlast accepted time " << res.state.time << "\n";
    return 2;
  }
  std::cerr << res.increments << " increments, outputs in " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-field hydraulic fracture simulator"};
  app.require_subcommand(1);

  std::string config, out = "run";
  Overrides ov;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory")->required();
  add_overrides(run, ov);

  auto* verify = app.add_subcommand("verify", "run the built-in property suites");

  int case_id = 1;
  double resolution = 1;
  bool print = false;
  auto* cs = app.add_subcommand("case", "run a bundled case study");
  cs->add_option("id", case_id, "case number")->required()->check(CLI::Range(1, 4));
  cs->add_option("--resolution", resolution, "mesh resolution factor")->check(CLI::PositiveNumber);
  cs->add_option("--out", out, "output directory");
  cs->add_flag("--print", print, "print the scenario file and exit");
  add_overrides(cs, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ScenarioSpec spec = parse_config(config);
      apply(ov, spec);
      return execute(spec, out, ov);
    }
    if (*verify) {
      bool all = true;
      for (const auto& r : verify_all()) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.pass;
      }
      return all ? 0 : 1;
    }
    if (*cs) {
      if (print) {
        std::cout << bundled_case_text(case_id);
        return 0;
      }
      ScenarioSpec spec = bundled_case(case_id, resolution);
      apply(ov, spec);
      return execute(spec, out, ov);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
