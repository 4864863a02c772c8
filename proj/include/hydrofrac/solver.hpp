#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hydrofrac/assembly.hpp"

namespace hydrofrac {

enum class Scheme { monolithic, single_pass_staggered, multi_pass_staggered, mixed_monolithic, mixed_staggered };

Scheme parse_scheme(const std::string& s);
std::string to_string(Scheme s);

struct SolverSettings {
  Scheme scheme = Scheme::mixed_staggered;
  double tol = 1e-6;
  int max_iter = 100;
  double dt = 1;
  int max_halvings = 8;

  void validate() const;
};

// boundary values for every bc of the model at time t
using LoadFn = std::function<std::vector<double>(double)>;

struct IncrementReport {
  double time = 0;
  double dt = 0;
  int iterations = 0;
  bool converged = false;
  std::array<double, 3> residual{};   // u, phi, p
  std::array<double, 3> reference{};
  double phi_min = 0, phi_max = 0;    // before clamping
};

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);

class LinearSolver {
 public:
  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
};

// history update, phase-field clamping and the volumetric strain bookkeeping of an accepted increment
void enforce_irreversibility(State& s, const Model& m, const State& prev, double dt);

class Solver {
 public:
  Solver(const Model& m, SolverSettings settings);

  const SolverSettings& settings() const { return settings_; }
  SolverSettings& settings() { return settings_; }

  // advances state by dt in place when converged; leaves it untouched otherwise
  IncrementReport newton_increment(State& state, const LoadFn& loads, double dt);

  using AcceptFn = std::function<void(const State&, const IncrementReport&)>;
  // steps from state.time to t_end with dt halving on failure
  void advance(State& state, const LoadFn& loads, double t_end, const AcceptFn& on_accept = {});

  void apply_dirichlet(State& s, const std::vector<double>& values) const;

 private:
  void try_interval(State& state, const LoadFn& loads, double dt, int depth, const AcceptFn& on_accept);

  const Model& m_;
  SolverSettings settings_;
  BlockSystem sys_u_, sys_phi_, sys_p_;
  LinearSolver lin_u_, lin_phi_, lin_p_;
};

}  // namespace hydrofrac
