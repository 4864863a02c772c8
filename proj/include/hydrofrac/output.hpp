#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hydrofrac/assembly.hpp"
#include "hydrofrac/scenario.hpp"

namespace hydrofrac {

// derived quantities at one Gauss point
struct GpPost {
  Eigen::Vector3d strain = Eigen::Vector3d::Zero();
  double phi = 0, p = 0, H = 0;
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Vector2d flux = Eigen::Vector2d::Zero();  // mass flux
  Mat3<double> sigma_eff = Mat3<double>::Zero();
  Mat3<double> sigma = Mat3<double>::Zero();       // total, sigma_eff - alpha p I
  Eigen::Vector2d k_eig = Eigen::Vector2d::Zero(); // ascending
  int region = kNoRegion;
};

GpPost post_gp(const Model& m, const State& s, int gp, const std::optional<Eigen::Vector2d>& normal);
std::vector<GpPost> post_all(const Model& m, const State& s);

int nearest_gauss_point(const Mesh& mesh, const Point& q);

// quantity names accepted by probes
bool is_point_quantity(const std::string& q);
bool is_global_quantity(const std::string& q);

// column layout and sampling for a list of probes
class ProbeSampler {
 public:
  ProbeSampler(const Model& m, const std::vector<ProbeSpec>& probes);
  const std::vector<std::string>& columns() const { return columns_; }
  // prev is the state at the start of the increment, for the flow reactions
  ProbeRecord sample(const State& s, const State& prev, double dt, const std::vector<double>& vals) const;

 private:
  struct Column {
    int gp = -1;
    std::string quantity;
    int bc = -1;
  };
  const Model& m_;
  std::vector<Column> cols_;
  std::vector<std::string> columns_;
};

// summed internal-minus-external residual over the dofs of one Dirichlet boundary;
// for p this is minus the mass rate leaving the domain through it
double reaction(const Model& m, const State& s, const State& prev, double dt, int bc,
                const std::vector<double>& vals);

void write_snapshot(const Model& m, const State& s, const std::string& path);
void write_probes(const std::vector<std::string>& columns, const std::vector<ProbeRecord>& records,
                  const std::string& path);

// appends one row per call and flushes so partial runs keep their data
class ProbeWriter {
 public:
  ProbeWriter(const std::string& path, const std::vector<std::string>& columns);
  void write(const ProbeRecord& r);

 private:
  std::ofstream out_;
  std::string path_;
};

std::string format_csv_row(const ProbeRecord& r);

}  // namespace hydrofrac
