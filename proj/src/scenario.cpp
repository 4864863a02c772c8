#include "hydrofrac/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hydrofrac/output.hpp"

namespace hydrofrac {

double ScenarioSpec::end_time() const {
  double t = 0;
  for (const auto& s : steps) t += s.duration;
  return t;
}

int ScenarioSpec::boundary_index(const std::string& name) const {
  for (int b = 0; b < static_cast<int>(boundaries.size()); ++b)
    if (boundaries[b].name == name) return b;
  return -1;
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

// map view that records which keys were read so the rest can be rejected
class Section {
 public:
  Section(const YAML::Node& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node.IsMap()) throw ParseError(where_ + ": expected a mapping", line_of(node));
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node get(const std::string& key) {
    if (!has(key)) throw ParseError(where_ + ": missing required key '" + key + "'", line_of(node_));
    return node_[key];
  }

  double num(const std::string& key) { return as_double(get(key), key); }
  double num(const std::string& key, double def) { return has(key) ? num(key) : def; }

  int integer(const std::string& key) {
    const YAML::Node n = get(key);
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      throw ParseError(where_ + "." + key + ": expected an integer", line_of(n));
    }
  }
  int integer(const std::string& key, int def) { return has(key) ? integer(key) : def; }

  std::string str(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n.IsScalar()) throw ParseError(where_ + "." + key + ": expected a string", line_of(n));
    return n.Scalar();
  }
  std::string str(const std::string& key, const std::string& def) { return has(key) ? str(key) : def; }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const YAML::Node n = node_[key];
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      throw ParseError(where_ + "." + key + ": expected true or false", line_of(n));
    }
  }

  Point point(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n.IsSequence() || n.size() != 2) throw ParseError(where_ + "." + key + ": expected [x, y]", line_of(n));
    return {as_double(n[0], key), as_double(n[1], key)};
  }

  std::vector<double> numbers(const std::string& key, size_t count) {
    const YAML::Node n = get(key);
    if (!n.IsSequence() || n.size() != count)
      throw ParseError(where_ + "." + key + ": expected a list of " + std::to_string(count) + " numbers", line_of(n));
    std::vector<double> v;
    for (const auto& x : n) v.push_back(as_double(x, key));
    return v;
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string k = kv.first.Scalar();
      if (!used_.count(k)) throw ParseError(where_ + ": unknown key '" + k + "'", line_of(kv.first));
    }
  }

  int line() const { return line_of(node_); }
  const std::string& where() const { return where_; }

  double as_double(const YAML::Node& n, const std::string& key) const {
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) throw ParseError(where_ + "." + key + ": value must be finite", line_of(n));
      return v;
    } catch (const YAML::Exception&) {
      throw ParseError(where_ + "." + key + ": expected a number", line_of(n));
    }
  }

 private:
  YAML::Node node_;
  std::string where_;
  std::set<std::string> used_;
};

template <class F>
auto at_line(int line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), line);
  }
}

void require(bool ok, const std::string& msg, int line) {
  if (!ok) throw ParseError(msg, line);
}

GeometrySpec parse_geometry(const YAML::Node& node) {
  Section s(node, "geometry");
  GeometrySpec g;
  g.width = s.num("width_m");
  g.height = s.num("height_m");
  g.nx = s.integer("nx");
  g.ny = s.integer("ny");
  if (s.has("origin_m")) g.origin = s.point("origin_m");
  require(g.width > 0 && g.height > 0, "geometry: width_m and height_m must be positive", s.line());
  require(g.nx > 0 && g.ny > 0, "geometry: nx and ny must be positive", s.line());
  if (s.has("refine")) {
    const YAML::Node list = node["refine"];
    require(list.IsSequence(), "geometry.refine: expected a list", line_of(list));
    for (const auto& item : list) {
      Section r(item, "geometry.refine");
      RefineBox rb;
      const auto b = r.numbers("box_m", 4);
      rb.box = {b[0], b[1], b[2], b[3]};
      rb.size = r.num("size_m");
      require(rb.size > 0, "geometry.refine: size_m must be positive", r.line());
      require(b[0] <= b[1] && b[2] <= b[3], "geometry.refine: box_m is [xmin, xmax, ymin, ymax]", r.line());
      r.finish();
      g.refine.push_back(rb);
    }
  }
  s.finish();
  return g;
}

void parse_material(const YAML::Node& node, ScenarioSpec& spec) {
  Section s(node, "material");
  const double E = s.num("youngs_modulus_pa");
  const double nu = s.num("poisson_ratio");
  const double Gc = s.num("gc_j_per_m2");
  const double ell = s.num("length_scale_m");
  const std::string model = s.str("crack_model", "AT2");
  const double B = s.num("dp_b", 0);
  const double kappa = s.num("residual_stiffness", 1e-7);
  spec.penalty_gamma = s.num("at1_penalty_pa", 0);
  s.finish();
  at_line(s.line(), [&] {
    spec.mat = MaterialParams::from_engineering(E, nu, Gc, ell, parse_crack_model(model), B);
    spec.mat.kappa = kappa;
    spec.mat.validate();
    return 0;
  });
}

void parse_fluid(const YAML::Node& node, ScenarioSpec& spec) {
  Section s(node, "fluid");
  PoroFluidParams& f = spec.fluid;
  f.alpha_r = s.num("biot_reservoir", 1);
  f.n_pr = s.num("porosity_reservoir", 0);
  f.rho_fl = s.num("density_kg_per_m3", 1000);
  f.mu_fl = s.num("viscosity_pa_s", 1e-3);
  f.C_fl = s.num("compressibility_per_pa", 0);
  f.K_r = s.num("permeability_reservoir_m2", 0);
  f.K_f = s.num("permeability_fracture_m2", 0);
  f.c1 = s.num("c1", 0.5);
  f.c2 = s.num("c2", 1);
  f.b = s.num("transition_exponent", 1);
  f.normal_threshold = s.num("normal_threshold", f.normal_threshold);
  const std::string coupling = s.str("coupling", "hybrid");
  s.finish();
  at_line(s.line(), [&] {
    f.coupling = parse_coupling(coupling);
    f.validate();
    return 0;
  });
}

void parse_solver(const YAML::Node& node, ScenarioSpec& spec) {
  Section s(node, "solver");
  const std::string scheme = s.str("scheme", "mixed_staggered");
  const std::string split = s.str("split", "none");
  spec.solver.tol = s.num("tolerance", spec.solver.tol);
  spec.solver.max_iter = s.integer("max_iterations", spec.solver.max_iter);
  spec.solver.max_halvings = s.integer("max_halvings", spec.solver.max_halvings);
  s.finish();
  at_line(s.line(), [&] {
    spec.solver.scheme = parse_scheme(scheme);
    spec.split = parse_split_kind(split);
    spec.solver.validate();
    return 0;
  });
}

Box parse_region(Section& s, const ScenarioSpec& spec) {
  const auto& g = spec.geometry;
  const double x0 = g.origin.x(), y0 = g.origin.y(), x1 = x0 + g.width, y1 = y0 + g.height;
  const bool side = s.has("side"), box = s.has("box_m");
  require(side != box, s.where() + ": give exactly one of 'side' or 'box_m'", s.line());
  if (box) {
    const auto b = s.numbers("box_m", 4);
    require(b[0] <= b[1] && b[2] <= b[3], s.where() + ": box_m is [xmin, xmax, ymin, ymax]", s.line());
    return {b[0], b[1], b[2], b[3]};
  }
  const std::string name = s.str("side");
  double a = 0, b = 0;
  const bool vertical = name == "left" || name == "right";
  if (vertical) {
    a = y0;
    b = y1;
  } else {
    a = x0;
    b = x1;
  }
  if (s.has("range_m")) {
    const auto r = s.numbers("range_m", 2);
    a = r[0];
    b = r[1];
    require(a <= b, s.where() + ": range_m must be increasing", s.line());
  }
  if (name == "left") return {x0, x0, a, b};
  if (name == "right") return {x1, x1, a, b};
  if (name == "bottom") return {a, b, y0, y0};
  if (name == "top") return {a, b, y1, y1};
  throw ParseError(s.where() + ": side must be left, right, bottom or top", s.line());
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  const auto& g = spec.geometry;
  if (!(g.width > 0 && g.height > 0 && g.nx > 0 && g.ny > 0)) throw InvalidArgument("scenario: bad geometry");
  if (spec.steps.empty()) throw InvalidArgument("scenario: at least one step is required");
  const Box dom{g.origin.x(), g.origin.x() + g.width, g.origin.y(), g.origin.y() + g.height};
  const double tol = 1e-9 * std::max(g.width, g.height);
  for (const auto& c : spec.cracks)
    if (!dom.contains(c.a, tol) || !dom.contains(c.b, tol))
      throw InvalidArgument("scenario: crack segment outside the domain");
  for (const auto& p : spec.probes)
    if (p.point && !dom.contains(*p.point, tol))
      throw InvalidArgument("scenario: probe '" + p.name + "' outside the domain");
  std::set<std::string> names;
  for (const auto& b : spec.boundaries)
    if (!names.insert(b.name).second) throw InvalidArgument("scenario: duplicate boundary '" + b.name + "'");
  for (const auto& s : spec.steps) {
    if (!(s.duration > 0 && s.dt > 0)) throw InvalidArgument("scenario: step durations and dt must be positive");
    for (const auto& [name, ld] : s.loads)
      if (spec.boundary_index(name) < 0)
        throw InvalidArgument("scenario: step '" + s.name + "' loads unknown boundary '" + name + "'");
  }
  for (const auto& p : spec.probes)
    for (const auto& q : p.quantities) {
      if (is_point_quantity(q)) {
        if (!p.point) throw InvalidArgument("scenario: probe '" + p.name + "' needs point_m for '" + q + "'");
      } else if (q.rfind("reaction:", 0) == 0) {
        const int b = spec.boundary_index(q.substr(9));
        if (b < 0) throw InvalidArgument("scenario: probe '" + p.name + "' names unknown boundary in '" + q + "'");
        const BcField f = spec.boundaries[b].field;
        if (f != BcField::ux && f != BcField::uy && f != BcField::p)
          throw InvalidArgument("scenario: reactions need a ux, uy or p boundary ('" + q + "')");
      } else if (!is_global_quantity(q)) {
        throw InvalidArgument("scenario: unknown probe quantity '" + q + "'");
      }
    }
  spec.mat.validate();
  spec.fluid.validate();
  spec.solver.validate();
}

ScenarioSpec parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("malformed input: " + e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ParseError("top level must be a mapping", line_of(root));
  Section top(root, "scenario");
  ScenarioSpec spec;
  spec.name = top.str("name", spec.name);
  spec.geometry = parse_geometry(top.get("geometry"));
  parse_material(top.get("material"), spec);
  if (top.has("fluid")) parse_fluid(root["fluid"], spec);
  if (top.has("solver")) parse_solver(root["solver"], spec);
  if (top.has("body_force_n_per_m3")) spec.body_force = top.point("body_force_n_per_m3");

  if (top.has("assumptions")) {
    const YAML::Node a = root["assumptions"];
    require(a.IsSequence(), "assumptions: expected a list of strings", line_of(a));
    for (const auto& x : a) spec.assumptions.push_back(x.Scalar());
  }

  if (top.has("cracks")) {
    const YAML::Node list = root["cracks"];
    require(list.IsSequence(), "cracks: expected a list", line_of(list));
    for (const auto& item : list) {
      Section c(item, "cracks");
      CrackSegment seg;
      seg.a = c.point("from_m");
      seg.b = c.point("to_m");
      seg.width = c.num("width_m", 0);
      require(seg.width >= 0, "cracks: width_m must be non-negative", c.line());
      c.finish();
      spec.cracks.push_back(seg);
    }
  }

  if (top.has("boundaries")) {
    const YAML::Node list = root["boundaries"];
    require(list.IsSequence(), "boundaries: expected a list", line_of(list));
    for (const auto& item : list) {
      Section b(item, "boundaries");
      BoundarySpec bs;
      bs.name = b.str("name");
      const std::string field = b.str("field");
      bs.field = at_line(b.line(), [&] { return parse_bc_field(field); });
      bs.region = parse_region(b, spec);
      bs.initial = b.num("initial", 0);
      b.finish();
      require(spec.boundary_index(bs.name) < 0, "boundaries: duplicate name '" + bs.name + "'", b.line());
      spec.boundaries.push_back(bs);
    }
  }

  {
    const YAML::Node list = top.get("steps");
    require(list.IsSequence() && list.size() > 0, "steps: expected a non-empty list", line_of(list));
    for (const auto& item : list) {
      Section s(item, "steps");
      StepSpec st;
      st.name = s.str("name", "step" + std::to_string(spec.steps.size() + 1));
      st.duration = s.num("duration_s");
      st.dt = s.num("dt_s");
      require(st.duration > 0, "steps: duration_s must be positive", s.line());
      require(st.dt > 0, "steps: dt_s must be positive", s.line());
      if (s.has("loads")) {
        const YAML::Node loads = item["loads"];
        require(loads.IsMap(), "steps.loads: expected a mapping of boundary name to value", line_of(loads));
        for (const auto& kv : loads) {
          const std::string bc = kv.first.Scalar();
          require(spec.boundary_index(bc) >= 0, "steps.loads: unknown boundary '" + bc + "'", line_of(kv.first));
          LoadSpec ld;
          if (kv.second.IsMap()) {
            Section l(kv.second, "steps.loads." + bc);
            ld.target = l.num("value");
            const std::string ramp = l.str("ramp", "linear");
            if (ramp == "instant")
              ld.ramp = Ramp::instant;
            else
              require(ramp == "linear", "steps.loads: ramp must be linear or instant", l.line());
            l.finish();
          } else {
            ld.target = s.as_double(kv.second, bc);
          }
          st.loads[bc] = ld;
        }
      }
      s.finish();
      spec.steps.push_back(st);
    }
  }

  if (top.has("probes")) {
    const YAML::Node list = root["probes"];
    require(list.IsSequence(), "probes: expected a list", line_of(list));
    for (const auto& item : list) {
      Section p(item, "probes");
      ProbeSpec ps;
      ps.name = p.str("name");
      if (p.has("point_m")) ps.point = p.point("point_m");
      const YAML::Node qs = p.get("quantities");
      require(qs.IsSequence() && qs.size() > 0, "probes.quantities: expected a non-empty list", line_of(qs));
      for (const auto& q : qs) {
        const std::string name = q.Scalar();
        require(is_point_quantity(name) || is_global_quantity(name), "probes: unknown quantity '" + name + "'",
                line_of(q));
        require(!is_point_quantity(name) || ps.point.has_value(),
                "probes: quantity '" + name + "' needs point_m", line_of(q));
        ps.quantities.push_back(name);
      }
      p.finish();
      spec.probes.push_back(ps);
    }
  }

  if (top.has("output")) {
    Section o(root["output"], "output");
    spec.output.snapshot_every = o.integer("snapshot_every", 0);
    spec.output.snapshots = o.boolean("snapshots", true);
    require(spec.output.snapshot_every >= 0, "output.snapshot_every must be non-negative", o.line());
    o.finish();
  }
  top.finish();
  at_line(top.line(), [&] {
    validate(spec);
    return 0;
  });
  return spec;
}

ScenarioSpec parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  ScenarioSpec spec = parse_config_text(ss.str());
  if (spec.name == "scenario") spec.name = std::filesystem::path(path).stem().string();
  return spec;
}

namespace {

// grid lines over [a, b], subdivided so that every refined interval meets its size
std::vector<double> grid_lines(double a, double b, int n, const std::vector<std::pair<double, double>>& bands,
                               const std::vector<double>& sizes) {
  std::vector<double> brk{a, b};
  for (const auto& [lo, hi] : bands) {
    if (lo > a && lo < b) brk.push_back(lo);
    if (hi > a && hi < b) brk.push_back(hi);
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
  const double base = (b - a) / n;
  std::vector<double> out{a};
  for (size_t i = 0; i + 1 < brk.size(); ++i) {
    const double lo = brk[i], hi = brk[i + 1], mid = (lo + hi) / 2;
    double h = base;
    for (size_t k = 0; k < bands.size(); ++k)
      if (mid >= bands[k].first && mid <= bands[k].second) h = std::min(h, sizes[k]);
    const int m = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
    for (int j = 1; j <= m; ++j) out.push_back(j == m ? hi : lo + (hi - lo) * j / m);
  }
  return out;
}

}  // namespace

Mesh build_scenario_mesh(const GeometrySpec& g) {
  if (g.refine.empty() && g.origin.isZero()) return build_structured_mesh(g.width, g.height, g.nx, g.ny);
  std::vector<std::pair<double, double>> bx, by;
  std::vector<double> sizes;
  for (const auto& r : g.refine) {
    bx.emplace_back(r.box.xmin, r.box.xmax);
    by.emplace_back(r.box.ymin, r.box.ymax);
    sizes.push_back(r.size);
  }
  const double x0 = g.origin.x(), y0 = g.origin.y();
  return build_graded_mesh(grid_lines(x0, x0 + g.width, g.nx, bx, sizes),
                           grid_lines(y0, y0 + g.height, g.ny, by, sizes));
}

namespace {

double segment_distance(const Point& q, const Point& a, const Point& b) {
  const Point d = b - a;
  const double L2 = d.squaredNorm();
  if (L2 == 0) return (q - a).norm();
  const double t = std::clamp((q - a).dot(d) / L2, 0.0, 1.0);
  return (q - (a + t * d)).norm();
}

}  // namespace

CrackSeed prescribe_crack(const Mesh& mesh, const CrackSegment& seg) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& x : mesh.nodes) {
    xmin = std::min(xmin, x.x());
    xmax = std::max(xmax, x.x());
    ymin = std::min(ymin, x.y());
    ymax = std::max(ymax, x.y());
  }
  const double tol = 1e-9 * std::max(xmax - xmin, ymax - ymin);
  const Box dom{xmin, xmax, ymin, ymax};
  if (!dom.contains(seg.a, tol) || !dom.contains(seg.b, tol))
    throw InvalidArgument("prescribe_crack: segment outside the domain");
  if (seg.width < 0) throw InvalidArgument("prescribe_crack: negative width");

  // local size: shortest edge among the elements around each node
  std::vector<double> h(mesh.num_nodes(), INFINITY);
  for (const auto& el : mesh.elements)
    for (int a = 0; a < 4; ++a) {
      const double L = (mesh.nodes[el[(a + 1) % 4]] - mesh.nodes[el[a]]).norm();
      h[el[a]] = std::min(h[el[a]], L);
      h[el[(a + 1) % 4]] = std::min(h[el[(a + 1) % 4]], L);
    }

  CrackSeed out;
  std::vector<char> mark(mesh.num_nodes(), 0);
  int nearest = -1;
  double nd = INFINITY;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const double d = segment_distance(mesh.nodes[n], seg.a, seg.b);
    const double reach = std::max(seg.width, h[n]) / 2;
    if (d <= reach * (1 + 1e-9)) {
      mark[n] = 1;
      out.nodes.push_back(n);
    }
    if (d < nd) {
      nd = d;
      nearest = n;
    }
  }
  if (out.nodes.empty() && nearest >= 0) {
    mark[nearest] = 1;
    out.nodes.push_back(nearest);
  }
  out.gp.assign(mesh.num_gauss(), 0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    if (mark[el[0]] && mark[el[1]] && mark[el[2]] && mark[el[3]])
      for (int q = 0; q < 4; ++q) out.gp[4 * e + q] = 1;
  }
  return out;
}

Model build_model(const ScenarioSpec& spec) {
  validate(spec);
  Model m;
  m.mesh = build_scenario_mesh(spec.geometry);
  m.mat = spec.mat;
  m.fluid = spec.fluid;
  m.split = spec.split;
  m.body_force = spec.body_force;
  m.penalty_gamma = spec.penalty_gamma;
  for (const auto& b : spec.boundaries) {
    auto set = boundary_set(m.mesh, b.name, b.field, b.region);
    if (set.nodes.empty() && set.edges.empty() && set.elements.empty())
      throw InvalidArgument("scenario: boundary '" + b.name + "' selects nothing on the mesh");
    m.bcs.push_back(std::move(set));
  }
  m.crack_gp.assign(m.mesh.num_gauss(), 0);
  std::vector<char> mark(m.mesh.num_nodes(), 0);
  for (const auto& c : spec.cracks) {
    const auto seed = prescribe_crack(m.mesh, c);
    for (int n : seed.nodes) mark[n] = 1;
    for (int g = 0; g < m.mesh.num_gauss(); ++g) m.crack_gp[g] = m.crack_gp[g] || seed.gp[g];
  }
  for (int n = 0; n < m.mesh.num_nodes(); ++n)
    if (mark[n]) m.crack_nodes.push_back(n);
  m.finalize();
  return m;
}

std::vector<double> load_values(const ScenarioSpec& spec, double t) {
  std::vector<double> v;
  for (const auto& b : spec.boundaries) v.push_back(b.initial);
  double t0 = 0;
  for (const auto& st : spec.steps) {
    const double eps = 1e-12 * std::max(1.0, std::abs(t0));
    if (t <= t0 + eps) break;
    const double s = std::min((t - t0) / st.duration, 1.0);
    for (const auto& [name, ld] : st.loads) {
      const int b = spec.boundary_index(name);
      v[b] = ld.ramp == Ramp::instant ? ld.target : v[b] + (ld.target - v[b]) * s;
    }
    t0 += st.duration;
  }
  return v;
}

namespace {

nlohmann::json spec_summary(const ScenarioSpec& spec, const Model& m) {
  nlohmann::json j;
  j["event"] = "start";
  j["scenario"] = spec.name;
  j["nodes"] = m.mesh.num_nodes();
  j["elements"] = m.mesh.num_elements();
  j["scheme"] = to_string(spec.solver.scheme);
  j["split"] = to_string(spec.split);
  j["coupling"] = to_string(spec.fluid.coupling);
  j["crack_model"] = to_string(spec.mat.model);
  j["crack_nodes"] = m.crack_nodes.size();
  j["assumptions"] = spec.assumptions;
  return j;
}

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec, const RunOptions& opt) {
  RunResult res;
  res.model = build_model(spec);
  const Model& m = res.model;
  const bool write = !opt.out_dir.empty();
  namespace fs = std::filesystem;
  if (write) {
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec || !fs::is_directory(opt.out_dir)) throw IoError("cannot create output directory '" + opt.out_dir + "'");
  }
  const std::string dir = opt.out_dir;
  ProbeSampler sampler(m, spec.probes);
  res.columns = sampler.columns();
  std::optional<ProbeWriter> probes;
  std::ofstream log;
  if (write) {
    probes.emplace((fs::path(dir) / "probes.csv").string(), res.columns);
    log.open((fs::path(dir) / "log.jsonl").string(), std::ios::binary | std::ios::trunc);
    if (!log) throw IoError("cannot open run log in '" + dir + "'");
    log << spec_summary(spec, m).dump() << '\n';
    log.flush();
  }
  int snap = 0;
  auto snapshot = [&](const State& s) {
    if (!write || !spec.output.snapshots) return;
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04d.vtk", snap++);
    write_snapshot(m, s, (fs::path(dir) / name).string());
  };

  SolverSettings settings = spec.solver;
  settings.dt = spec.steps.front().dt;
  Solver solver(m, settings);
  State state = State::zeros(m);
  solver.apply_dirichlet(state, load_values(spec, 0));
  State prev = state;
  const LoadFn loads = [&spec](double t) { return load_values(spec, t); };
  const double until = opt.until ? *opt.until : spec.end_time();

  int step_index = 0;
  auto on_accept = [&](const State& s, const IncrementReport& rep) {
    ++res.increments;
    const ProbeRecord rec = sampler.sample(s, prev, rep.dt, load_values(spec, s.time));
    res.records.push_back(rec);
    if (write) {
      probes->write(rec);
      nlohmann::json j;
      j["event"] = "increment";
      j["increment"] = res.increments;
      j["step"] = spec.steps[step_index].name;
      j["time"] = rep.time;
      j["dt"] = rep.dt;
      j["iterations"] = rep.iterations;
      j["residual"] = {{"u", rep.residual[0]}, {"phi", rep.residual[1]}, {"p", rep.residual[2]}};
      j["reference"] = {{"u", rep.reference[0]}, {"phi", rep.reference[1]}, {"p", rep.reference[2]}};
      j["phi_range"] = {rep.phi_min, rep.phi_max};
      log << j.dump() << '\n';
      log.flush();
      if (spec.output.snapshot_every > 0 && res.increments % spec.output.snapshot_every == 0) snapshot(s);
    }
    if (opt.on_increment) opt.on_increment(m, s, rep);
    prev = s;
  };

  double t_step_end = 0;
  try {
    for (step_index = 0; step_index < static_cast<int>(spec.steps.size()); ++step_index) {
      const auto& st = spec.steps[step_index];
      const double t_start = t_step_end;
      t_step_end += st.duration;
      if (t_start >= until - 1e-12 * std::max(1.0, until)) break;
      solver.settings().dt = st.dt;
      solver.advance(state, loads, std::min(t_step_end, until), on_accept);
      if (spec.output.snapshot_every == 0) snapshot(state);
    }
  } catch (const SolverFailure& e) {
    res.ok = false;
    res.message = e.what();
  }
  if (!res.ok || (spec.output.snapshot_every > 0 && res.increments % spec.output.snapshot_every != 0)) snapshot(state);
  if (write) {
    nlohmann::json j;
    j["event"] = "finish";
    j["status"] = res.ok ? "converged" : "failed";
    j["time"] = state.time;
    j["increments"] = res.increments;
    if (!res.ok) j["message"] = res.message;
    log << j.dump() << '\n';
  }
  res.state = std::move(state);
  return res;
}

}  // namespace hydrofrac
