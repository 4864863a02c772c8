#include <cmath>

#include "hydrofrac/bundled_cases.hpp"
#include "hydrofrac/scenario.hpp"

namespace hydrofrac {

std::string bundled_case_text(int id) {
  switch (id) {
    case 1: return bundled::case1;
    case 2: return bundled::case2;
    case 3: return bundled::case3;
    case 4: return bundled::case4;
  }
  throw InvalidArgument("no bundled case " + std::to_string(id) + " (expected 1 to 4)");
}

ScenarioSpec scale_resolution(ScenarioSpec spec, double factor) {
  if (!(factor > 0)) throw InvalidArgument("resolution factor must be positive");
  auto& g = spec.geometry;
  g.nx = std::max(1, static_cast<int>(std::lround(g.nx * factor)));
  g.ny = std::max(1, static_cast<int>(std::lround(g.ny * factor)));
  for (auto& r : g.refine) r.size /= factor;
  return spec;
}

ScenarioSpec bundled_case(int id, double resolution) {
  ScenarioSpec s = parse_config_text(bundled_case_text(id));
  return resolution == 1 ? s : scale_resolution(std::move(s), resolution);
}

}  // namespace hydrofrac
