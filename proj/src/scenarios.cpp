#include "liejet/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "liejet/error.hpp"

namespace liejet {

namespace {

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Observable obs(const std::string& label, const std::string& expr, double tol) {
  return Observable{label, parse_expr(expr), tol};
}

/// Max absolute difference between the trajectory rows and a closed-form
/// state function of (t - t0).
double closed_form_gap(const Trajectory& traj,
                       const std::function<std::vector<double>(double)>& state_at) {
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const std::vector<double> want = state_at(traj.t[i] - traj.t[0]);
    for (std::size_t c = 0; c < want.size(); ++c)
      worst = std::max(worst, std::abs(traj.states[i][c] - want[c]));
  }
  return worst;
}

// Generic fixed-step RK4 on doubles, with the same grid convention as
// integrate(): whole strides from t0, final step shortened to land on t1.
template <typename State, typename Rhs, typename Axpy>
std::vector<State> rk4(State cur, double t0, double t1, double h, Rhs rhs, Axpy axpy) {
  std::vector<State> out;
  out.push_back(cur);
  double tcur = t0;
  for (long i = 0;; ++i) {
    const double remaining = t1 - tcur;
    if (remaining <= 0) break;
    const bool last = remaining <= h * (1 + 1e-9);
    const double hs = last ? remaining : h;
    const State k1 = rhs(cur);
    State tmp = cur;
    axpy(tmp, hs / 2, k1);
    const State k2 = rhs(tmp);
    tmp = cur;
    axpy(tmp, hs / 2, k2);
    const State k3 = rhs(tmp);
    tmp = cur;
    axpy(tmp, hs, k3);
    const State k4 = rhs(tmp);
    axpy(cur, hs / 6, k1);
    axpy(cur, hs / 3, k2);
    axpy(cur, hs / 3, k3);
    axpy(cur, hs / 6, k4);
    tcur = last ? t1 : t0 + double(i + 1) * h;
    out.push_back(cur);
    if (last) break;
  }
  return out;
}

// ---- the seven bundled systems --------------------------------------------

Scenario make_cubic_spline() {
  Scenario s;
  s.summary = "free second-order Lagrangian on the plane; solutions are cubic polynomials";
  s.config.label = "cubic_spline";
  s.config.algebroid = make_tangent(2);
  s.config.lagrangian =
      Lagrangian(s.config.algebroid, 2, parse_expr("0.5*(y1_2^2+y2_2^2)"), "cubic_spline");
  s.config.initial = {0.2, -0.1, 1.0, 0.5, -0.6, 0.8, 0.9, -1.2};
  s.config.run = RunSpec{0.0, 1.0, 1e-3};
  s.config.observables = {
      obs("energy", "0.5*(y1_2^2+y2_2^2)-(y1_1*y1_3+y2_1*y2_3)", 1e-7),
  };
  s.checks.push_back(
      {"analytic cubic from the initial jet", 1e-8, [](const Scenario& sc, const Trajectory& tr) {
         const std::vector<double>& s0 = sc.config.initial;
         return closed_form_gap(tr, [&](double dt) {
           std::vector<double> w(8);
           for (int i = 0; i < 2; ++i) {
             const double x0 = s0[std::size_t(i)], v = s0[std::size_t(2 + i)],
                          a = s0[std::size_t(4 + i)], jj = s0[std::size_t(6 + i)];
             w[std::size_t(i)] = x0 + dt * (v + dt * (a / 2 + dt * jj / 6));
             w[std::size_t(2 + i)] = v + dt * (a + dt * jj / 2);
             w[std::size_t(4 + i)] = a + dt * jj;
             w[std::size_t(6 + i)] = jj;
           }
           return w;
         });
       }});
  return s;
}

Scenario make_rigid_body() {
  Scenario s;
  s.summary = "free rigid body on so(3) with inertia diag(1,2,3); classical Euler equations";
  s.config.label = "rigid_body";
  s.config.algebroid = make_lie_algebra(3, so3_constants(), "so3");
  s.config.lagrangian = Lagrangian(s.config.algebroid, 1,
                                   parse_expr("0.5*(y1_1^2+2*y2_1^2+3*y3_1^2)"), "rigid_body");
  s.config.initial = {0.3, 1.0, -0.2};
  s.config.run = RunSpec{0.0, 10.0, 1e-3};
  s.config.observables = {
      obs("energy", "0.5*(y1_1^2+2*y2_1^2+3*y3_1^2)", 1e-7),
      obs("momentum_norm", "y1_1^2+4*y2_1^2+9*y3_1^2", 1e-7),
  };
  s.checks.push_back(
      {"independent Euler-equation integrator", 1e-6,
       [](const Scenario& sc, const Trajectory& tr) {
         const auto& s0 = sc.config.initial;
         const auto oracle =
             classical_rigid_body({1.0, 2.0, 3.0}, {s0[0], s0[1], s0[2]}, sc.config.run->t0,
                                  sc.config.run->t1, sc.config.run->h);
         if (oracle.size() != tr.size()) return 1e30;
         double worst = 0.0;
         for (std::size_t i = 0; i < tr.size(); ++i)
           for (int a = 0; a < 3; ++a)
             worst = std::max(worst, std::abs(tr.states[i][std::size_t(a)] -
                                              oracle[i][std::size_t(a)]));
         return worst;
       }});
  return s;
}

Scenario make_nhp_cubic() {
  Scenario s;
  s.summary = "second-order kinetic Lagrangian on so(3); fourth-order interpolation dynamics";
  s.config.label = "nhp_cubic";
  s.config.algebroid = make_lie_algebra(3, so3_constants(), "so3");
  s.config.lagrangian = Lagrangian(s.config.algebroid, 2,
                                   parse_expr("0.5*(y1_2^2+y2_2^2+y3_2^2)"), "nhp_cubic");
  s.config.initial = {0.4, -0.3, 0.5, 0.2, 0.1, -0.4, -0.1, 0.3, 0.2};
  s.config.run = RunSpec{0.0, 3.0, 1e-3};
  s.config.observables = {
      obs("energy", "0.5*(y1_2^2+y2_2^2+y3_2^2)-(y1_1*y1_3+y2_1*y2_3+y3_1*y3_3)", 1e-7),
      obs("jerk_norm", "y1_3^2+y2_3^2+y3_3^2", 1e-7),
  };
  // the equations of motion close to y_4 + y_1 x y_3 = 0 componentwise
  s.checks.push_back(
      {"closed-form fourth-level equation at random jets", 1e-8,
       [](const Scenario& sc, const Trajectory&) {
         Rng rng(5);
         double worst = 0.0;
         for (int c = 0; c < 100; ++c) {
           const JetVals P = sample_jet(0, 3, 4, rng, -1.0, 1.0);
           const std::vector<double> res = el_residual(*sc.config.lagrangian, P);
           std::array<double, 3> y1{}, y3{}, y4{};
           for (int a = 0; a < 3; ++a) {
             y1[std::size_t(a)] = P.y(1, a).as_double();
             y3[std::size_t(a)] = P.y(3, a).as_double();
             y4[std::size_t(a)] = P.y(4, a).as_double();
           }
           const std::array<double, 3> cr = cross(y1, y3);
           for (int a = 0; a < 3; ++a)
             worst = std::max(worst, std::abs(res[std::size_t(a)] -
                                              (y4[std::size_t(a)] + cr[std::size_t(a)])));
         }
         return worst;
       }});
  s.checks.push_back(
      {"action gradient along boundary-vanishing variations", 1e-6,
       [](const Scenario& sc, const Trajectory& tr) {
         const double t0 = sc.config.run->t0, T = sc.config.run->t1 - sc.config.run->t0;
         const std::string bump = "sin(pi*(t-" + num(t0) + ")/" + num(T) + ")^2";
         const std::vector<std::vector<std::string>> sigmas = {
             {"0.3*" + bump, "0", "0"},
             {"0", "-0.2*cos(t)*" + bump, "0.1*sin(t)*" + bump},
             {"0.2*sin(2*t)*" + bump, "0.15*" + bump, "-0.25*cos(2*t)*" + bump},
         };
         double worst = 0.0;
         for (const auto& strs : sigmas)
           worst = std::max(worst, std::abs(discrete_action_gradient(
                                       *sc.config.lagrangian, tr,
                                       SectionAlongCurve::from_strings(strs))));
         return worst;
       }});
  return s;
}

Scenario make_heavy_top() {
  Scenario s;
  s.summary = "heavy top as an action algebroid over the advected gravity direction";
  s.config.label = "heavy_top";
  s.config.algebroid = make_action(3, 3, so3_constants(),
                                   {{"0", "-x3", "x2"}, {"x3", "0", "-x1"}, {"-x2", "x1", "0"}},
                                   "heavy_top");
  s.config.lagrangian = Lagrangian(
      s.config.algebroid, 1, parse_expr("0.5*(y1_1^2+2*y2_1^2+3*y3_1^2)-x3"), "heavy_top");
  s.config.initial = {0.0, 0.0, 1.0, 1.2, 0.5, -0.8};
  s.config.run = RunSpec{0.0, 10.0, 1e-3};
  s.config.observables = {
      obs("gamma_norm", "x1^2+x2^2+x3^2", 1e-7),
      obs("energy", "0.5*(y1_1^2+2*y2_1^2+3*y3_1^2)+x3", 1e-7),
      obs("vertical_momentum", "y1_1*x1+2*y2_1*x2+3*y3_1*x3", 1e-7),
  };
  s.config.noether = NoetherSpec{
      {parse_expr("x1"), parse_expr("x2"), parse_expr("x3")}, Expr{}, 1e-9};
  s.checks.push_back(
      {"independent heavy-top integrator", 1e-6, [](const Scenario& sc, const Trajectory& tr) {
         const auto& s0 = sc.config.initial;
         const auto oracle = classical_heavy_top(
             {1.0, 2.0, 3.0}, 1.0, {0.0, 0.0, 1.0},
             HeavyTopState{{s0[3], s0[4], s0[5]}, {s0[0], s0[1], s0[2]}}, sc.config.run->t0,
             sc.config.run->t1, sc.config.run->h);
         if (oracle.size() != tr.size()) return 1e30;
         double worst = 0.0;
         for (std::size_t i = 0; i < tr.size(); ++i)
           for (int a = 0; a < 3; ++a) {
             worst = std::max(worst, std::abs(tr.states[i][std::size_t(a)] -
                                              oracle[i].gamma[std::size_t(a)]));
             worst = std::max(worst, std::abs(tr.states[i][std::size_t(3 + a)] -
                                              oracle[i].omega[std::size_t(a)]));
           }
         return worst;
       }});
  return s;
}

Scenario make_lp_trivial() {
  Scenario s;
  s.summary = "product of a flat base and so(3): the blocks decouple into free motion "
              "and a bi-invariant algebra flow";
  s.config.label = "lp_trivial";
  s.config.algebroid = make_atiyah_trivial(2, 3, so3_constants(), "atiyah_trivial");
  s.config.lagrangian = Lagrangian(
      s.config.algebroid, 1, parse_expr("0.5*(y1_1^2+y2_1^2+y3_1^2+y4_1^2+y5_1^2)"),
      "lp_trivial");
  s.config.initial = {0.3, -0.2, 0.7, -0.4, 0.5, 0.3, -0.6};
  s.config.run = RunSpec{0.0, 2.0, 1e-3};
  s.config.observables = {
      obs("energy", "0.5*(y1_1^2+y2_1^2+y3_1^2+y4_1^2+y5_1^2)", 1e-12),
      obs("algebra_y3", "y3_1", 1e-12),
      obs("algebra_y4", "y4_1", 1e-12),
      obs("algebra_y5", "y5_1", 1e-12),
  };
  s.checks.push_back(
      {"decoupled closed form (straight base line, frozen algebra part)", 1e-12,
       [](const Scenario& sc, const Trajectory& tr) {
         const std::vector<double>& s0 = sc.config.initial;
         return closed_form_gap(tr, [&](double dt) {
           std::vector<double> w = s0;
           w[0] = s0[0] + dt * s0[2];
           w[1] = s0[1] + dt * s0[3];
           return w;
         });
       }});
  return s;
}

Scenario make_hamel_quasi() {
  Scenario s;
  s.summary = "kinetic Lagrangian in an exponential moving frame; the coordinate-basis "
              "system is the oracle through the frame-change morphism";
  s.config.label = "hamel_quasi";
  s.config.algebroid = make_quasi_velocity(2, {{"1", "0"}, {"0", "exp(x1)"}},
                                           {{1, 0, 1, expr_number(1.0)}}, "hamel_frame");
  s.config.lagrangian =
      Lagrangian(s.config.algebroid, 1, parse_expr("0.5*(y1_1^2+y2_1^2)"), "hamel_quasi");
  s.config.initial = {0.3, -0.2, 0.7, 0.4};
  s.config.run = RunSpec{0.0, 3.0, 1e-3};
  s.config.observables = {
      obs("energy", "0.5*(y1_1^2+y2_1^2)", 1e-7),
  };
  const AlgebroidPtr coord = make_tangent(2);
  s.config.morphism = MorphismSpec{
      Morphism(s.config.algebroid, coord, {parse_expr("x1"), parse_expr("x2")},
               {{parse_expr("1"), parse_expr("0")}, {parse_expr("0"), parse_expr("exp(x1)")}},
               "hamel_frame_change"),
      Lagrangian(coord, 1, parse_expr("0.5*(y1_1^2+exp(-2*x1)*y2_1^2)"), "hamel_coordinate"),
  };
  s.checks.push_back(
      {"coordinate-basis trajectory through the frame change", 1e-6,
       [](const Scenario& sc, const Trajectory&) {
         const ReductionComparison cmp = compare_reduction(
             sc.config.morphism->map, *sc.config.morphism->target_lagrangian, sc.config.initial,
             sc.config.run->t0, sc.config.run->t1, sc.config.run->h);
         return cmp.max_gap;
       }});
  return s;
}

Scenario make_holonomic() {
  Scenario s;
  s.summary = "leafwise dynamics on x3 = const leaves: a harmonic oscillator whose "
              "frequency depends on the frozen leaf parameter";
  s.config.label = "holonomic";
  std::vector<std::vector<Expr>> rho(3);
  rho[0] = {parse_expr("1"), parse_expr("0")};
  rho[1] = {parse_expr("0"), parse_expr("1")};
  rho[2] = {parse_expr("0"), parse_expr("0")};
  s.config.algebroid = std::make_shared<const LieAlgebroid>("holonomic_leaves", 3, 2,
                                                            std::move(rho), std::vector<CEntry>{});
  s.config.lagrangian = Lagrangian(
      s.config.algebroid, 1, parse_expr("0.5*(y1_1^2+y2_1^2)-0.5*(1+0.5*x3)*(x1^2+x2^2)"),
      "holonomic");
  s.config.initial = {0.5, -0.3, 0.6, 0.2, 0.8};
  s.config.run = RunSpec{0.0, 5.0, 1e-3};
  s.config.observables = {
      obs("energy", "0.5*(y1_1^2+y2_1^2)+0.5*(1+0.5*x3)*(x1^2+x2^2)", 1e-7),
      obs("leaf_parameter", "x3", 1e-15),
  };
  s.checks.push_back(
      {"harmonic closed form with the leaf parameter frozen", 1e-8,
       [](const Scenario& sc, const Trajectory& tr) {
         const std::vector<double>& s0 = sc.config.initial;
         const double w = std::sqrt(1.0 + 0.5 * s0[2]);
         return closed_form_gap(tr, [&](double dt) {
           std::vector<double> st(5);
           const double c = std::cos(w * dt), sn = std::sin(w * dt);
           for (int i = 0; i < 2; ++i) {
             const double q0 = s0[std::size_t(i)], v0 = s0[std::size_t(3 + i)];
             st[std::size_t(i)] = q0 * c + v0 / w * sn;
             st[std::size_t(3 + i)] = -q0 * w * sn + v0 * c;
           }
           st[2] = s0[2];
           return st;
         });
       }});
  return s;
}

} // namespace

std::vector<std::string> scenario_names() {
  return {"cubic_spline", "rigid_body", "nhp_cubic", "heavy_top",
          "lp_trivial",   "hamel_quasi", "holonomic"};
}

Scenario scenario(const std::string& name) {
  if (name == "cubic_spline") return make_cubic_spline();
  if (name == "rigid_body") return make_rigid_body();
  if (name == "nhp_cubic") return make_nhp_cubic();
  if (name == "heavy_top") return make_heavy_top();
  if (name == "lp_trivial") return make_lp_trivial();
  if (name == "hamel_quasi") return make_hamel_quasi();
  if (name == "holonomic") return make_holonomic();
  throw_config("unknown scenario '" + name + "'");
}

ScenarioReport run_scenario(const Scenario& s) {
  const ConfigDocument& cfg = s.config;
  if (!cfg.lagrangian || cfg.initial.empty() || !cfg.run)
    throw_config("scenario '" + cfg.label + "' lacks lagrangian, initial state or run window");

  ScenarioReport rep;
  rep.name = cfg.label;
  const AssembledODE ode = assemble_ode(*cfg.lagrangian);
  rep.trajectory = integrate(ode, cfg.initial, cfg.run->t0, cfg.run->t1, cfg.run->h);

  std::vector<std::pair<std::string, FnPtr>> fns;
  for (const auto& o : cfg.observables)
    fns.emplace_back(o.label, fn_expression(cfg.algebroid->n(), cfg.algebroid->m(), o.expr));
  const std::vector<DriftRow> drifts = conservation_report(*cfg.algebroid, rep.trajectory, fns);

  bool all = true;
  for (std::size_t i = 0; i < drifts.size(); ++i) {
    const double tol = cfg.observables[i].tol;
    const bool ok = drifts[i].max_drift <= tol;
    rep.results.push_back({"drift:" + drifts[i].label, drifts[i].max_drift, tol, ok});
    all = all && ok;
  }
  for (const auto& chk : s.checks) {
    const double v = chk.residual(s, rep.trajectory);
    const bool ok = v <= chk.tol;
    rep.results.push_back({chk.label, v, chk.tol, ok});
    all = all && ok;
  }
  rep.passed = all;
  return rep;
}

std::vector<std::array<double, 3>> classical_rigid_body(const std::array<double, 3>& inertia,
                                                        std::array<double, 3> omega0, double t0,
                                                        double t1, double h) {
  const auto rhs = [&](const std::array<double, 3>& w) {
    const std::array<double, 3> p{inertia[0] * w[0], inertia[1] * w[1], inertia[2] * w[2]};
    const std::array<double, 3> torque = cross(p, w);
    return std::array<double, 3>{torque[0] / inertia[0], torque[1] / inertia[1],
                                 torque[2] / inertia[2]};
  };
  const auto axpy = +[](std::array<double, 3>& x, double a, const std::array<double, 3>& d) {
    for (int i = 0; i < 3; ++i) x[std::size_t(i)] += a * d[std::size_t(i)];
  };
  return rk4(omega0, t0, t1, h, rhs, axpy);
}

std::vector<HeavyTopState> classical_heavy_top(const std::array<double, 3>& inertia, double mgl,
                                               const std::array<double, 3>& chi, HeavyTopState s0,
                                               double t0, double t1, double h) {
  const auto rhs = [&](const HeavyTopState& s) {
    const std::array<double, 3> p{inertia[0] * s.omega[0], inertia[1] * s.omega[1],
                                  inertia[2] * s.omega[2]};
    std::array<double, 3> torque = cross(p, s.omega);
    const std::array<double, 3> lever = cross(s.gamma, chi);
    for (int i = 0; i < 3; ++i) torque[std::size_t(i)] += mgl * lever[std::size_t(i)];
    HeavyTopState d;
    for (int i = 0; i < 3; ++i) d.omega[std::size_t(i)] = torque[std::size_t(i)] / inertia[std::size_t(i)];
    d.gamma = cross(s.gamma, s.omega);
    return d;
  };
  const auto axpy = +[](HeavyTopState& x, double a, const HeavyTopState& d) {
    for (int i = 0; i < 3; ++i) {
      x.omega[std::size_t(i)] += a * d.omega[std::size_t(i)];
      x.gamma[std::size_t(i)] += a * d.gamma[std::size_t(i)];
    }
  };
  return rk4(s0, t0, t1, h, rhs, axpy);
}

} // namespace liejet
