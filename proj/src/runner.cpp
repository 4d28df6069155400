#include "liejet/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "liejet/error.hpp"
#include "liejet/forms.hpp"
#include "liejet/scenarios.hpp"

namespace liejet {

namespace {

// matches the abort threshold of the dynamics fiber solves
constexpr double kRcondFloor = 1e-10;
// drift tolerance for the Noether first integral along an RK4 trajectory
constexpr double kNoetherDriftTol = 1e-7;

Verdict make_verdict(std::string label, double value, double tol) {
  Verdict v;
  v.label = std::move(label);
  v.value = value;
  v.tol = tol;
  v.passed = std::isfinite(value) && value <= tol;
  return v;
}

void add(RunReport& R, std::vector<Verdict>& section, Verdict v) {
  R.passed = R.passed && v.passed;
  section.push_back(std::move(v));
}

void add_rows(RunReport& R, std::vector<Verdict>& section, const StructureReport& S,
              const std::string& prefix) {
  for (const IdentityResidual& row : S.identities)
    add(R, section, make_verdict(prefix + row.identity, row.max_residual, S.tol));
}

void fail(RunReport& R, std::string message) {
  R.errors.push_back(std::move(message));
  R.passed = false;
}

SamplePlan plan_of(const RunOptions& opt) {
  SamplePlan plan;
  plan.count = opt.samples;
  plan.seed = opt.seed;
  return plan;
}

/// The Lagrangian the document simulates: the top-level one, or the pullback
/// of the morphism target.
std::optional<Lagrangian> effective_lagrangian(const ConfigDocument& doc) {
  if (doc.lagrangian) return doc.lagrangian;
  if (doc.morphism && doc.morphism->target_lagrangian)
    return reduce_lagrangian(doc.morphism->map, *doc.morphism->target_lagrangian);
  return std::nullopt;
}

void check_noether_premise(RunReport& R, const ConfigDocument& doc, const Lagrangian& L,
                           const RunOptions& opt, NoetherResult* out = nullptr) {
  if (!doc.noether) return;
  const FnPtr F = doc.noether->F
                      ? fn_expression(doc.algebroid->n(), doc.algebroid->m(), doc.noether->F)
                      : FnPtr{};
  const NoetherResult res =
      noether_integral(L, doc.noether->eta, F, plan_of(opt), doc.noether->tol);
  add(R, R.checks,
      make_verdict("noether/symmetry premise", res.symmetry_residual, doc.noether->tol));
  if (out) *out = res;
}

void regularity_info(RunReport& R, const AssembledODE& ode, const ConfigDocument& doc) {
  RegularityInfo info;
  info.assembly_rcond = ode.assembly_rcond();
  info.floor = kRcondFloor;
  info.passed = info.assembly_rcond >= info.floor;
  if (!doc.initial.empty()) {
    info.initial_rcond = ode.rcond_at(doc.initial);
    info.passed = info.passed && *info.initial_rcond >= info.floor;
  }
  R.regularity = info;
  R.passed = R.passed && info.passed;
}

RunSpec run_window(const ConfigDocument& doc) { return doc.run ? *doc.run : RunSpec{}; }

/// Max Euler-Lagrange residual over the trajectory's interior rows. The top
/// jet level y_{2k} comes from central differences of the stored y_{2k-1}
/// samples, never from the assembled solve, so the metric stays meaningful.
Verdict el_along(const Lagrangian& L, const Trajectory& traj, double tol) {
  const int n = traj.n, m = traj.m, k = L.order();
  const int lo = n + (2 * k - 2) * m;  // start of the y_{2k-1} block
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double dtp = traj.t[i + 1] - traj.t[i];
    const double dtm = traj.t[i] - traj.t[i - 1];
    if (std::abs(dtp - dtm) > 1e-9 * traj.step) continue;  // shortened final step
    std::vector<double> entries(traj.states[i]);
    for (int a = 0; a < m; ++a) {
      const std::size_t s = static_cast<std::size_t>(lo + a);
      entries.push_back((traj.states[i + 1][s] - traj.states[i - 1][s]) / (dtp + dtm));
    }
    const JetVals P(n, m, 2 * k, entries);
    for (double r : el_residual(L, P)) worst = std::max(worst, std::abs(r));
  }
  return make_verdict("euler-lagrange residual", worst, tol);
}

void conservation_rows(RunReport& R, const ConfigDocument& doc, const Trajectory& traj) {
  if (doc.observables.empty()) return;
  const int n = doc.algebroid->n(), m = doc.algebroid->m();
  std::vector<std::pair<std::string, FnPtr>> fns;
  for (const Observable& o : doc.observables)
    fns.emplace_back(o.label, fn_expression(n, m, o.expr));
  const std::vector<DriftRow> rows = conservation_report(*doc.algebroid, traj, fns);
  for (std::size_t i = 0; i < rows.size(); ++i)
    add(R, R.conservation,
        make_verdict(rows[i].label, rows[i].max_drift, doc.observables[i].tol));
}

/// Cubic-interpolating sampler over one fiber level of a trajectory: the
/// four grid rows around t define the interpolant; normalized Taylor
/// coefficients above degree three are the interpolant's (zero).
SectionAlongCurve level_one_section(const Trajectory& traj) {
  const int n = traj.n, m = traj.m;
  const std::vector<double> grid = traj.t;
  std::vector<std::vector<double>> vals(traj.size(),
                                        std::vector<double>(static_cast<std::size_t>(m)));
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (int a = 0; a < m; ++a)
      vals[i][static_cast<std::size_t>(a)] = traj.states[i][static_cast<std::size_t>(n + a)];
  auto sample = [grid, vals, m](double t, int degree) {
    const std::size_t N = grid.size();
    if (N < 4) throw_invalid("interpolation needs at least four grid rows");
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(grid.begin(), grid.end(), t) - grid.begin());
    const std::size_t i0 = std::min(N - 4, hi <= 2 ? 0 : hi - 2);
    std::vector<std::vector<double>> out(
        static_cast<std::size_t>(m),
        std::vector<double>(static_cast<std::size_t>(degree + 1), 0.0));
    for (std::size_t j = 0; j < 4; ++j) {
      // basis numerator (s - a)(s - b)(s - c) in s = query-centred time
      double node[4];
      for (std::size_t l = 0; l < 4; ++l) node[l] = grid[i0 + l] - t;
      const double a = node[(j + 1) % 4], b = node[(j + 2) % 4], c = node[(j + 3) % 4];
      const double denom = (node[j] - a) * (node[j] - b) * (node[j] - c);
      const double coeff[4] = {-a * b * c, a * b + a * c + b * c, -(a + b + c), 1.0};
      for (int al = 0; al < m; ++al) {
        const double w = vals[i0 + j][static_cast<std::size_t>(al)] / denom;
        for (int d = 0; d <= std::min(degree, 3); ++d)
          out[static_cast<std::size_t>(al)][static_cast<std::size_t>(d)] += w * coeff[d];
      }
    }
    return out;
  };
  return SectionAlongCurve::from_sampler(m, sample);
}

nlohmann::ordered_json verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["label"] = v.label;
  j["value"] = v.value;
  j["tol"] = v.tol;
  j["passed"] = v.passed;
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void text_rows(std::string& out, const char* heading, const std::vector<Verdict>& rows) {
  if (rows.empty()) return;
  out += heading;
  out += ":\n";
  for (const Verdict& v : rows) {
    out += v.passed ? "  [ok]   " : "  [FAIL] ";
    out += v.label + ": " + fmt(v.value) + " (tol " + fmt(v.tol) + ")\n";
  }
}

} // namespace

std::string RunReport::json(int indent) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["label"] = label;
  if (!structure.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const Verdict& v : structure) arr.push_back(verdict_json(v));
    j["structure"] = std::move(arr);
  }
  if (regularity) {
    nlohmann::ordered_json r;
    r["assembly_rcond"] = regularity->assembly_rcond;
    if (regularity->initial_rcond) r["initial_rcond"] = *regularity->initial_rcond;
    r["floor"] = regularity->floor;
    r["passed"] = regularity->passed;
    j["regularity"] = std::move(r);
  }
  if (!conservation.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const Verdict& v : conservation) arr.push_back(verdict_json(v));
    j["conservation"] = std::move(arr);
  }
  if (el_residual) j["el_residual"] = verdict_json(*el_residual);
  if (!checks.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const Verdict& v : checks) arr.push_back(verdict_json(v));
    j["checks"] = std::move(arr);
  }
  if (!errors.empty()) j["errors"] = errors;
  j["passed"] = passed;
  return j.dump(indent) + "\n";
}

std::string RunReport::text() const {
  std::string out = "liejet " + command;
  if (!label.empty()) out += ": " + label;
  out += "\n";
  text_rows(out, "structure", structure);
  if (regularity) {
    out += "regularity: assembly rcond " + fmt(regularity->assembly_rcond);
    if (regularity->initial_rcond)
      out += ", initial-state rcond " + fmt(*regularity->initial_rcond);
    out += " (floor " + fmt(regularity->floor) + ")";
    out += regularity->passed ? " [ok]\n" : " [FAIL]\n";
  }
  text_rows(out, "conservation", conservation);
  if (el_residual) {
    std::vector<Verdict> one{*el_residual};
    text_rows(out, "along the trajectory", one);
  }
  text_rows(out, "checks", checks);
  for (const std::string& e : errors) out += "error: " + e + "\n";
  out += passed ? "result: PASS\n" : "result: FAIL\n";
  return out;
}

RunReport run_check(const ConfigDocument& doc, const RunOptions& opt) {
  RunReport R;
  R.command = "check";
  R.label = doc.label;
  const SamplePlan plan = plan_of(opt);

  add_rows(R, R.structure, check_structure(*doc.algebroid, plan, opt.tol), "");
  if (doc.morphism) {
    add_rows(R, R.structure,
             check_structure(doc.morphism->map.target(), plan, opt.tol), "target/");
    add_rows(R, R.checks, check_morphism(doc.morphism->map, plan, opt.tol), "morphism/");
  }

  const std::optional<Lagrangian> L = effective_lagrangian(doc);
  const int k = L ? L->order() : 1;
  add_rows(R, R.checks, operator_identity_checks(*doc.algebroid, k, plan, opt.tol),
           "operators/");

  if (L) {
    try {
      const AssembledODE ode = assemble_ode(*L);
      regularity_info(R, ode, doc);
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::regularity) throw;
      fail(R, e.what());
    }
    check_noether_premise(R, doc, *L, opt);
  } else if (doc.noether) {
    throw_config("a noether section needs a lagrangian to act on");
  }
  return R;
}

RunReport run_simulate(const ConfigDocument& doc, const RunOptions& opt,
                       Trajectory* out_trajectory) {
  RunReport R;
  R.command = "simulate";
  R.label = doc.label;
  const std::optional<Lagrangian> L = effective_lagrangian(doc);
  if (!L) throw_config("simulate needs a lagrangian (top level or morphism target)");
  if (doc.initial.empty()) throw_config("simulate needs an initial state");
  const RunSpec run = run_window(doc);

  add_rows(R, R.structure, check_structure(*doc.algebroid, plan_of(opt), opt.tol), "");

  Trajectory traj;
  try {
    const AssembledODE ode = assemble_ode(*L);
    regularity_info(R, ode, doc);
    traj = integrate(ode, doc.initial, run.t0, run.t1, run.h);
  } catch (const Error& e) {
    if (e.kind() != Error::Kind::regularity && e.kind() != Error::Kind::domain) throw;
    fail(R, std::string("integration aborted: ") + e.what());
    return R;
  }

  conservation_rows(R, doc, traj);
  R.el_residual = el_along(*L, traj, opt.el_tol);
  R.passed = R.passed && R.el_residual->passed;

  if (doc.noether) {
    NoetherResult res;
    check_noether_premise(R, doc, *L, opt, &res);
    const std::vector<DriftRow> rows = conservation_report(
        *doc.algebroid, traj, {{"noether/first integral", res.integral}});
    add(R, R.conservation, make_verdict(rows[0].label, rows[0].max_drift, kNoetherDriftTol));
  }

  if (out_trajectory) *out_trajectory = std::move(traj);
  return R;
}

RunReport run_reduce(const ConfigDocument& doc, const RunOptions& opt,
                     Trajectory* out_pushed) {
  RunReport R;
  R.command = "reduce";
  R.label = doc.label;
  if (!doc.morphism) throw_config("reduce needs a morphism section");
  if (!doc.morphism->target_lagrangian)
    throw_config("reduce needs a lagrangian on the morphism target");
  if (doc.initial.empty()) throw_config("reduce needs an initial state");
  const Morphism& M = doc.morphism->map;
  const RunSpec run = run_window(doc);
  const SamplePlan plan = plan_of(opt);

  add_rows(R, R.structure, check_structure(M.source(), plan, opt.tol), "");
  add_rows(R, R.structure, check_structure(M.target(), plan, opt.tol), "target/");
  const StructureReport morph = check_morphism(M, plan, opt.tol);
  add_rows(R, R.checks, morph, "morphism/");
  if (!morph.passed) {
    fail(R, "morphism conditions failed; reduction comparison skipped");
    return R;
  }

  ReductionComparison cmp;
  try {
    cmp = compare_reduction(M, *doc.morphism->target_lagrangian, doc.initial, run.t0,
                            run.t1, run.h);
  } catch (const Error& e) {
    if (e.kind() != Error::Kind::regularity && e.kind() != Error::Kind::domain) throw;
    fail(R, std::string("reduction comparison aborted: ") + e.what());
    return R;
  }
  add(R, R.checks, make_verdict("reduction/pushforward gap", cmp.max_gap, opt.gap_tol));

  if (M.source().m() == M.target().m()) {
    const SectionAlongCurve xi = level_one_section(cmp.target);
    const std::vector<double> x0(doc.initial.begin(),
                                 doc.initial.begin() + M.source().n());
    try {
      const Trajectory rec = reconstruct_through(M, xi, x0, run.t0, run.t1, run.h);
      double gap = 0.0;
      for (std::size_t i = 0; i < rec.size(); ++i)
        for (int j = 0; j < M.source().n(); ++j)
          gap = std::max(gap, std::abs(rec.states[i][static_cast<std::size_t>(j)] -
                                       cmp.source.states[i][static_cast<std::size_t>(j)]));
      add(R, R.checks, make_verdict("reduction/reconstruction round trip", gap, opt.gap_tol));
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::regularity && e.kind() != Error::Kind::domain) throw;
      fail(R, std::string("reconstruction aborted: ") + e.what());
    }
  }

  if (out_pushed) *out_pushed = std::move(cmp.pushed);
  return R;
}

RunReport run_operator_suite(const RunOptions& opt) {
  RunReport R;
  R.command = "operators";
  R.label = "operator identity suite";
  const SamplePlan plan = plan_of(opt);
  const std::pair<std::string, AlgebroidPtr> entries[] = {
      {"tangent(2)", make_tangent(2)},
      {"so3", make_lie_algebra(3, so3_constants(), "so3")},
      {"heisenberg", make_lie_algebra(3, heisenberg_constants(), "heisenberg")},
      {"heavy_top", scenario("heavy_top").config.algebroid},
  };
  for (const auto& [name, A] : entries)
    for (int k = 1; k <= 3; ++k)
      add_rows(R, R.checks, operator_identity_checks(*A, k, plan, opt.tol),
               name + "/k=" + std::to_string(k) + "/");
  return R;
}

RunReport run_scenario_suite(const std::string& name) {
  RunReport R;
  R.command = "scenarios";
  R.label = name.empty() ? "bundled scenarios" : name;
  const std::vector<std::string> names =
      name.empty() ? scenario_names() : std::vector<std::string>{name};
  for (const std::string& nm : names) {
    const ScenarioReport rep = run_scenario(scenario(nm));
    for (const ScenarioCheckResult& row : rep.results) {
      Verdict v;
      v.label = nm + "/" + row.label;
      v.value = row.value;
      v.tol = row.tol;
      v.passed = row.passed;
      add(R, R.checks, std::move(v));
    }
  }
  return R;
}

} // namespace liejet
