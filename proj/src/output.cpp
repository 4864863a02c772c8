#include "hydrofrac/output.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>

namespace hydrofrac {

GpPost post_gp(const Model& m, const State& s, int gp, const std::optional<Eigen::Vector2d>& normal) {
  const int e = gp / 4;
  const auto& el = m.mesh.elements[e];
  const auto& se = m.gp_shape[gp];
  const GpSample smp = sample_gp(m, gp, &s.u, &s.phi, &s.p);
  GpPost r;
  r.strain = smp.strain;
  r.phi = clamp01(smp.phi);
  r.p = smp.p;
  r.H = s.H[gp];
  for (int a = 0; a < 4; ++a) r.u += se.N(a) * s.u.segment<2>(2 * el[a]);
  const auto ev = evaluate_split<double>(plane_strain<double>(smp.strain), r.phi, m.split, m.mat);
  r.sigma_eff = ev.stress;
  r.region = ev.region;
  const GpFluid f = gp_fluid(m, r.phi, normal, smp.strain, m.mesh.h_e[e]);
  r.sigma = ev.stress - f.alpha * r.p * Mat3<double>::Identity();
  r.flux = darcy_flux<double>(f.K, smp.grad_p, m.fluid);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(f.K, Eigen::EigenvaluesOnly);
  r.k_eig = eig.eigenvalues();
  return r;
}

std::vector<GpPost> post_all(const Model& m, const State& s) {
  const auto normals = gauss_normals(m, s.phi);
  std::vector<GpPost> out(m.mesh.num_gauss());
  for (int g = 0; g < m.mesh.num_gauss(); ++g) out[g] = post_gp(m, s, g, normals[g]);
  return out;
}

int nearest_gauss_point(const Mesh& mesh, const Point& q) {
  int best = -1;
  double bd = INFINITY;
  for (int g = 0; g < mesh.num_gauss(); ++g) {
    const double d = (mesh.gauss_point(g) - q).squaredNorm();
    if (d < bd) {
      bd = d;
      best = g;
    }
  }
  return best;
}

namespace {

const char* const kPointQuantities[] = {"p",  "phi", "ux", "uy", "qx", "qy", "I1_sigma", "sqrtJ2_sigma",
                                        "I1_sigma_eff", "sqrtJ2_sigma_eff", "I1_eps", "sqrtJ2_eps",
                                        "sigma_xx", "sigma_yy", "sigma_xy", "region", "H"};
const char* const kGlobalQuantities[] = {"cracked_area", "max_p", "max_phi"};

double point_value(const GpPost& r, const std::string& q) {
  if (q == "p") return r.p;
  if (q == "phi") return r.phi;
  if (q == "ux") return r.u.x();
  if (q == "uy") return r.u.y();
  if (q == "qx") return r.flux.x();
  if (q == "qy") return r.flux.y();
  if (q == "I1_sigma") return trace_invariant(r.sigma);
  if (q == "sqrtJ2_sigma") return std::sqrt(j2_invariant(r.sigma));
  if (q == "I1_sigma_eff") return trace_invariant(r.sigma_eff);
  if (q == "sqrtJ2_sigma_eff") return std::sqrt(j2_invariant(r.sigma_eff));
  const Mat3<double> eps = plane_strain<double>(r.strain);
  if (q == "I1_eps") return trace_invariant(eps);
  if (q == "sqrtJ2_eps") return std::sqrt(j2_invariant(eps));
  if (q == "sigma_xx") return r.sigma(0, 0);
  if (q == "sigma_yy") return r.sigma(1, 1);
  if (q == "sigma_xy") return r.sigma(0, 1);
  if (q == "region") return r.region;
  if (q == "H") return r.H;
  throw InvalidArgument("unknown probe quantity '" + q + "'");
}

}  // namespace

bool is_point_quantity(const std::string& q) {
  for (const char* k : kPointQuantities)
    if (q == k) return true;
  return false;
}

bool is_global_quantity(const std::string& q) {
  if (q.rfind("reaction:", 0) == 0) return q.size() > 9;
  for (const char* k : kGlobalQuantities)
    if (q == k) return true;
  return false;
}

double reaction(const Model& m, const State& s, const State& prev, double dt, int bc,
                const std::vector<double>& vals) {
  const auto& set = m.bcs.at(bc);
  if (!is_dirichlet(set.field)) throw InvalidArgument("reaction: '" + set.name + "' is not a Dirichlet boundary");
  std::vector<char> mark(m.mesh.num_nodes(), 0);
  for (int n : set.nodes) mark[n] = 1;
  double sum = 0;
  if (set.field == BcField::ux || set.field == BcField::uy) {
    const int comp = set.field == BcField::ux ? 0 : 1;
    for (int e = 0; e < m.mesh.num_elements(); ++e) {
      const auto& el = m.mesh.elements[e];
      if (!(mark[el[0]] || mark[el[1]] || mark[el[2]] || mark[el[3]])) continue;
      const auto c = element_contrib_u(m, e, s.u, s.phi, s.p, vals);
      for (int a = 0; a < 4; ++a)
        if (mark[el[a]]) sum += c.R(2 * a + comp);
    }
    return sum;
  }
  if (set.field == BcField::p) {
    const auto normals = gauss_normals(m, s.phi);
    FlowInputs in;
    in.p = &s.p;
    in.p_n = &prev.p;
    in.phi = &s.phi;
    in.u = &s.u;
    in.eps_vol_n = &prev.eps_vol;
    in.normals = &normals;
    in.dt = dt;
    for (int e = 0; e < m.mesh.num_elements(); ++e) {
      const auto& el = m.mesh.elements[e];
      if (!(mark[el[0]] || mark[el[1]] || mark[el[2]] || mark[el[3]])) continue;
      const auto c = element_contrib_p(m, e, in, vals);
      for (int a = 0; a < 4; ++a)
        if (mark[el[a]]) sum += c.R(a);
    }
    return sum;
  }
  throw InvalidArgument("reaction: unsupported field for '" + set.name + "'");
}

ProbeSampler::ProbeSampler(const Model& m, const std::vector<ProbeSpec>& probes) : m_(m) {
  for (const auto& pr : probes) {
    int gp = -1;
    if (pr.point) gp = nearest_gauss_point(m.mesh, *pr.point);
    for (const auto& q : pr.quantities) {
      Column c;
      c.quantity = q;
      if (is_point_quantity(q)) {
        if (gp < 0) throw InvalidArgument("probe '" + pr.name + "': quantity '" + q + "' needs a point");
        c.gp = gp;
      } else if (q.rfind("reaction:", 0) == 0) {
        const std::string bc = q.substr(9);
        for (int b = 0; b < static_cast<int>(m.bcs.size()); ++b)
          if (m.bcs[b].name == bc) c.bc = b;
        if (c.bc < 0) throw InvalidArgument("probe '" + pr.name + "': unknown boundary '" + bc + "'");
        if (!is_dirichlet(m.bcs[c.bc].field) || m.bcs[c.bc].field == BcField::phi)
          throw InvalidArgument("probe '" + pr.name + "': reactions need a ux, uy or p boundary");
      } else if (!is_global_quantity(q)) {
        throw InvalidArgument("probe '" + pr.name + "': unknown quantity '" + q + "'");
      }
      cols_.push_back(c);
      columns_.push_back(pr.name + "." + q);
    }
  }
}

ProbeRecord ProbeSampler::sample(const State& s, const State& prev, double dt,
                                 const std::vector<double>& vals) const {
  ProbeRecord r;
  r.time = s.time;
  std::vector<std::optional<Eigen::Vector2d>> normals;
  bool have_normals = false;
  for (const auto& c : cols_) {
    if (c.gp >= 0) {
      if (!have_normals) {
        normals = gauss_normals(m_, s.phi);
        have_normals = true;
      }
      r.values.push_back(point_value(post_gp(m_, s, c.gp, normals[c.gp]), c.quantity));
    } else if (c.bc >= 0) {
      r.values.push_back(reaction(m_, s, prev, dt, c.bc, vals));
    } else if (c.quantity == "max_p") {
      r.values.push_back(s.p.size() ? s.p.maxCoeff() : 0);
    } else if (c.quantity == "max_phi") {
      r.values.push_back(s.phi.size() ? s.phi.maxCoeff() : 0);
    } else {
      // area of Gauss-point cells with phi >= 0.95
      double area = 0;
      for (int g = 0; g < m_.mesh.num_gauss(); ++g) {
        const auto smp = sample_gp(m_, g, nullptr, &s.phi, nullptr);
        if (smp.phi >= 0.95) area += m_.gp_shape[g].detJ * m_.gp_shape[g].weight;
      }
      r.values.push_back(area);
    }
  }
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v == 0 ? 0.0 : v);  // no negative zero
  return buf;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

void write_snapshot(const Model& m, const State& s, const std::string& path) {
  std::ofstream f = open_or_throw(path);
  const Mesh& mesh = m.mesh;
  const int nn = mesh.num_nodes(), ne = mesh.num_elements();
  f << "# vtk DataFile Version 3.0\n";
  f << "hydrofrac t=" << fmt(s.time) << "\n";
  f << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << nn << " double\n";
  for (const auto& x : mesh.nodes) f << fmt(x.x()) << ' ' << fmt(x.y()) << " 0\n";
  f << "CELLS " << ne << ' ' << 5 * ne << '\n';
  for (const auto& el : mesh.elements) f << "4 " << el[0] << ' ' << el[1] << ' ' << el[2] << ' ' << el[3] << '\n';
  f << "CELL_TYPES " << ne << '\n';
  for (int e = 0; e < ne; ++e) f << "9\n";

  f << "POINT_DATA " << nn << '\n';
  f << "VECTORS displacement double\n";
  for (int n = 0; n < nn; ++n) f << fmt(s.u(2 * n)) << ' ' << fmt(s.u(2 * n + 1)) << " 0\n";
  f << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < nn; ++n) f << fmt(s.phi(n)) << '\n';
  f << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < nn; ++n) f << fmt(s.p(n)) << '\n';

  const auto post = post_all(m, s);
  const char* scalars[] = {"I1_sigma", "sqrtJ2_sigma", "I1_sigma_eff", "sqrtJ2_sigma_eff",
                           "sigma_xx", "sigma_yy", "sigma_xy"};
  f << "CELL_DATA " << ne << '\n';
  for (const char* name : scalars) {
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < ne; ++e) {
      double v = 0;
      for (int q = 0; q < 4; ++q) v += point_value(post[4 * e + q], name) / 4;
      f << fmt(v) << '\n';
    }
  }
  f << "VECTORS flux double\n";
  for (int e = 0; e < ne; ++e) {
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    for (int k = 0; k < 4; ++k) q += post[4 * e + k].flux / 4;
    f << fmt(q.x()) << ' ' << fmt(q.y()) << " 0\n";
  }
  for (int i = 0; i < 2; ++i) {
    f << "SCALARS " << (i == 0 ? "k_min" : "k_max") << " double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < ne; ++e) {
      double v = 0;
      for (int q = 0; q < 4; ++q) v += post[4 * e + q].k_eig(i) / 4;
      f << fmt(v) << '\n';
    }
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

std::string format_csv_row(const ProbeRecord& r) {
  std::string line = fmt(r.time);
  for (double v : r.values) line += ',' + fmt(v);
  return line;
}

void write_probes(const std::vector<std::string>& columns, const std::vector<ProbeRecord>& records,
                  const std::string& path) {
  if (records.empty()) throw InvalidArgument("write_probes: no records");
  ProbeWriter w(path, columns);
  for (const auto& r : records) w.write(r);
}

ProbeWriter::ProbeWriter(const std::string& path, const std::vector<std::string>& columns) : path_(path) {
  out_ = open_or_throw(path);
  out_ << "time";
  for (const auto& c : columns) out_ << ',' << c;
  out_ << '\n';
  out_.flush();
}

void ProbeWriter::write(const ProbeRecord& r) {
  out_ << format_csv_row(r) << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed for '" + path_ + "'");
}

}  // namespace hydrofrac
