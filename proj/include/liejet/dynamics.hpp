#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liejet/variational.hpp"

namespace liejet {

/// Explicit first-order ODE obtained from delta L = 0 for a regular
/// Lagrangian. State layout: x^1..x^n, then y^alpha_r for r = 1..2k-1 in
/// level-major order, so a state vector is exactly an order-(2k-1) jet.
///
/// By construction xdot = rho(x) y_1 and ydot_r = y_{r+1} for r < 2k-1;
/// the top block y_{2k} solves the affine system extracted from the
/// Euler-Lagrange residual, with W_{alpha beta} = d^2 L / dy^alpha_k dy^beta_k.
class AssembledODE {
public:
  explicit AssembledODE(const Lagrangian& L);

  const Lagrangian& lagrangian() const { return L_; }
  const LieAlgebroid& algebroid() const { return *A_; }
  int order() const { return k_; }
  int state_size() const { return dim_; }

  /// Reciprocal condition estimate of W at the deterministic sample point
  /// used when the system was assembled.
  double assembly_rcond() const { return assembly_rcond_; }

  /// Reciprocal condition estimate of W at a given state.
  double rcond_at(std::span<const double> state) const;

  /// Time derivative of the state. Throws a regularity error when W is
  /// numerically singular at this state.
  std::vector<double> rhs(std::span<const double> state) const;

  /// The solved top block y_{2k} at this state.
  std::vector<double> top_block(std::span<const double> state) const;

  /// Order-2k jet whose top level is solved from the Euler-Lagrange system;
  /// its residual vanishes by construction.
  JetVals solved_jet(std::span<const double> state) const;

private:
  struct TopSolve;
  TopSolve solve_top(std::span<const double> state) const;

  AlgebroidPtr A_;
  Lagrangian L_;
  int k_ = 0, n_ = 0, m_ = 0, dim_ = 0;
  std::vector<std::vector<FnPtr>> W_; // m x m, symmetric
  std::vector<FnPtr> el_;
  double assembly_rcond_ = 0.0;
};

AssembledODE assemble_ode(const Lagrangian& L);

/// A sampled integral curve. The grid is strictly increasing; each state row
/// is an order-(2k-1) jet in slot order.
struct Trajectory {
  int n = 0, m = 0, order = 0; // order = the Lagrangian's k
  double step = 0.0;
  std::string method = "rk4";
  std::string label;
  std::vector<double> t;
  std::vector<std::vector<double>> states;

  std::size_t size() const { return t.size(); }
  int state_size() const { return n + (2 * order - 1) * m; }
  JetVals state_jet(std::size_t i) const;
  std::vector<std::string> column_names() const;
};

/// Classical fixed-step fourth-order Runge-Kutta; the final step is shortened
/// to land exactly on t1. Deterministic for fixed inputs.
Trajectory integrate(const AssembledODE& ode, std::span<const double> state0, double t0,
                     double t1, double h);

struct DriftRow {
  std::string label;
  double initial = 0.0;
  double max_drift = 0.0;
};

/// Max drift from the initial value for each labeled observable, evaluated
/// at the order-(2k-1) jets the trajectory itself carries.
std::vector<DriftRow> conservation_report(
    const LieAlgebroid& A, const Trajectory& traj,
    const std::vector<std::pair<std::string, FnPtr>>& observables);

/// Directional derivative of the action along the variation generated by
/// sigma: the trapezoidal quadrature of <deltaL(a^{2k}(t)), sigma(t)> over
/// the trajectory. The top level y_{2k} of a^{2k} is reconstructed by
/// differencing the stored y_{2k-1} samples (step h_fd, rounded to a grid
/// stride; 0 means the grid spacing itself), never by solving the
/// Euler-Lagrange system, so non-solutions are detectable. Requires sigma
/// and its first k-1 derivatives to vanish at both endpoints.
double discrete_action_gradient(const Lagrangian& L, const Trajectory& traj,
                                const SectionAlongCurve& sigma, double h_fd = 0.0);

/// CSV export: header "t,x1,..,y1_1,.."; one row per grid point, full double
/// precision.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// JSON export with the same content as the CSV plus metadata.
std::string trajectory_json_string(const Trajectory& traj, int indent = 2);

} // namespace liejet
