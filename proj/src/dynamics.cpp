#include "liejet/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "liejet/error.hpp"

namespace liejet {

namespace {

// reciprocal condition estimate below this aborts; the max(.,1) floor also
// rejects Hessians that are uniformly tiny at unit state scale
constexpr double kRcondMin = 1e-10;

double rcond_of(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smax = s(0), smin = s(s.size() - 1);
  return smin / std::max(smax, 1.0);
}

std::string state_text(std::span<const double> state) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < state.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", state[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out + ")";
}

// derivative at te of the quadratic through (t0,f0), (t1,f1), (t2,f2)
double lagrange3_deriv(double t0, double t1, double t2, double f0, double f1, double f2,
                       double te) {
  return f0 * (2 * te - t1 - t2) / ((t0 - t1) * (t0 - t2)) +
         f1 * (2 * te - t0 - t2) / ((t1 - t0) * (t1 - t2)) +
         f2 * (2 * te - t0 - t1) / ((t2 - t0) * (t2 - t1));
}

} // namespace

struct AssembledODE::TopSolve {
  std::vector<double> y_top;
  double rcond = 0.0;
};

AssembledODE::AssembledODE(const Lagrangian& L)
    : A_(L.algebroid_ptr()), L_(L), k_(L.order()), n_(A_->n()), m_(A_->m()),
      dim_(n_ + (2 * k_ - 1) * m_) {
  W_.assign(std::size_t(m_), std::vector<FnPtr>(std::size_t(m_)));
  for (int a = 0; a < m_; ++a)
    for (int b = a; b < m_; ++b) {
      FnPtr w = fn_partial(fn_partial(L_.fn(), jet_y_slot(n_, m_, k_, a)),
                           jet_y_slot(n_, m_, k_, b));
      W_[std::size_t(a)][std::size_t(b)] = w;
      W_[std::size_t(b)][std::size_t(a)] = w;
    }
  el_ = el_functions(L_);

  // sample a generic point, verify the residual really is affine in y_{2k},
  // and record the regularity estimate there
  Rng rng(0x0DE5EEDULL);
  JetVals P(n_, m_, 2 * k_);
  for (int s = 0; s < jet_slot_count(n_, m_, 2 * k_ - 1); ++s)
    P.at(s) = Scalar(rng.uniform(-1.0, 1.0));
  std::vector<double> ytop(static_cast<std::size_t>(m_));
  for (double& v : ytop) v = rng.uniform(-1.0, 1.0);

  Eigen::MatrixXd W(m_, m_);
  Eigen::VectorXd r0(m_), r1(m_);
  {
    EvalContext ctx(*A_, P);
    for (int a = 0; a < m_; ++a) {
      for (int b = 0; b < m_; ++b)
        W(a, b) = ctx.eval(W_[std::size_t(a)][std::size_t(b)]).as_double();
      r0(a) = ctx.eval(el_[std::size_t(a)]).as_double();
    }
  }
  for (int a = 0; a < m_; ++a) P.y(2 * k_, a) = Scalar(ytop[std::size_t(a)]);
  {
    EvalContext ctx(*A_, P);
    for (int a = 0; a < m_; ++a) r1(a) = ctx.eval(el_[std::size_t(a)]).as_double();
  }
  const double sign = (k_ % 2 == 0) ? 1.0 : -1.0;
  Eigen::VectorXd gap = r1 - r0;
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b) gap(a) -= sign * W(a, b) * ytop[std::size_t(b)];
  const double scale = 1.0 + r0.lpNorm<Eigen::Infinity>() + r1.lpNorm<Eigen::Infinity>();
  if (gap.lpNorm<Eigen::Infinity>() > 1e-9 * scale)
    throw_domain("Euler-Lagrange residual is not affine in the top derivative block");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
  assembly_rcond_ = rcond_of(svd);
  if (assembly_rcond_ < kRcondMin)
    throw_regularity("degenerate Lagrangian: velocity Hessian is singular at the assembly "
                     "sample point " +
                     state_text(P.to_doubles()));
}

AssembledODE::TopSolve AssembledODE::solve_top(std::span<const double> state) const {
  if (int(state.size()) != dim_) throw_shape("state vector has the wrong length");
  JetVals P(n_, m_, 2 * k_);
  for (int s = 0; s < dim_; ++s) P.at(s) = Scalar(state[std::size_t(s)]);

  Eigen::MatrixXd W(m_, m_);
  Eigen::VectorXd b(m_);
  EvalContext ctx(*A_, P);
  for (int a = 0; a < m_; ++a) {
    for (int bb = 0; bb < m_; ++bb)
      W(a, bb) = ctx.eval(W_[std::size_t(a)][std::size_t(bb)]).as_double();
    b(a) = ctx.eval(el_[std::size_t(a)]).as_double();
  }
  // residual(y_{2k}) = residual(0) + (-1)^k W y_{2k} = 0
  if (k_ % 2 == 0) b = -b;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TopSolve out;
  out.rcond = rcond_of(svd);
  if (out.rcond < kRcondMin)
    throw_regularity("velocity Hessian is singular (rcond " + std::to_string(out.rcond) +
                     ") at state " + state_text(state));
  const Eigen::VectorXd y = svd.solve(b);
  out.y_top.assign(y.data(), y.data() + m_);
  return out;
}

double AssembledODE::rcond_at(std::span<const double> state) const {
  if (int(state.size()) != dim_) throw_shape("state vector has the wrong length");
  JetVals P(n_, m_, 2 * k_);
  for (int s = 0; s < dim_; ++s) P.at(s) = Scalar(state[std::size_t(s)]);
  Eigen::MatrixXd W(m_, m_);
  EvalContext ctx(*A_, P);
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b)
      W(a, b) = ctx.eval(W_[std::size_t(a)][std::size_t(b)]).as_double();
  return rcond_of(Eigen::JacobiSVD<Eigen::MatrixXd>(W));
}

std::vector<double> AssembledODE::rhs(std::span<const double> state) const {
  const TopSolve top = solve_top(state);
  std::vector<double> out(std::size_t(dim_), 0.0);
  std::vector<Scalar> base;
  base.reserve(std::size_t(n_));
  for (int i = 0; i < n_; ++i) base.emplace_back(state[std::size_t(i)]);
  for (int i = 0; i < n_; ++i) {
    double v = 0.0;
    for (int a = 0; a < m_; ++a)
      v += A_->rho_at(i, a, base).as_double() * state[std::size_t(n_ + a)];
    out[std::size_t(i)] = v;
  }
  for (int r = 1; r < 2 * k_ - 1; ++r)
    for (int a = 0; a < m_; ++a)
      out[std::size_t(jet_y_slot(n_, m_, r, a))] = state[std::size_t(jet_y_slot(n_, m_, r + 1, a))];
  for (int a = 0; a < m_; ++a)
    out[std::size_t(jet_y_slot(n_, m_, 2 * k_ - 1, a))] = top.y_top[std::size_t(a)];
  return out;
}

std::vector<double> AssembledODE::top_block(std::span<const double> state) const {
  return solve_top(state).y_top;
}

JetVals AssembledODE::solved_jet(std::span<const double> state) const {
  const TopSolve top = solve_top(state);
  JetVals P(n_, m_, 2 * k_);
  for (int s = 0; s < dim_; ++s) P.at(s) = Scalar(state[std::size_t(s)]);
  for (int a = 0; a < m_; ++a) P.y(2 * k_, a) = Scalar(top.y_top[std::size_t(a)]);
  return P;
}

AssembledODE assemble_ode(const Lagrangian& L) { return AssembledODE(L); }

JetVals Trajectory::state_jet(std::size_t i) const {
  return JetVals(n, m, 2 * order - 1, states.at(i));
}

std::vector<std::string> Trajectory::column_names() const {
  std::vector<std::string> names;
  for (int s = 0; s < state_size(); ++s) names.push_back(jet_slot_name(n, m, s));
  return names;
}

Trajectory integrate(const AssembledODE& ode, std::span<const double> state0, double t0,
                     double t1, double h) {
  if (!(h > 0)) throw_invalid("step must be positive");
  if (!(t1 > t0)) throw_invalid("the time interval is empty");
  const int dim = ode.state_size();
  if (int(state0.size()) != dim) throw_shape("initial state has the wrong length");
  for (double v : state0)
    if (!std::isfinite(v)) throw_domain("non-finite initial state");

  Trajectory traj;
  traj.n = ode.algebroid().n();
  traj.m = ode.algebroid().m();
  traj.order = ode.order();
  traj.step = h;
  traj.label = ode.lagrangian().label();
  std::vector<double> cur(state0.begin(), state0.end());
  traj.t.push_back(t0);
  traj.states.push_back(cur);

  std::vector<double> tmp(static_cast<std::size_t>(dim));
  const auto shifted = [&](const std::vector<double>& s, const std::vector<double>& d,
                           double w) -> std::vector<double>& {
    for (int i = 0; i < dim; ++i)
      tmp[std::size_t(i)] = s[std::size_t(i)] + w * d[std::size_t(i)];
    return tmp;
  };

  for (long i = 0;; ++i) {
    const double tcur = traj.t.back();
    const double remaining = t1 - tcur;
    if (remaining <= 0) break;
    const bool last = remaining <= h * (1 + 1e-9);
    const double hs = last ? remaining : h;
    std::vector<double> k1, k2, k3, k4;
    try {
      k1 = ode.rhs(cur);
      k2 = ode.rhs(shifted(cur, k1, hs / 2));
      k3 = ode.rhs(shifted(cur, k2, hs / 2));
      k4 = ode.rhs(shifted(cur, k3, hs));
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::regularity) throw;
      std::string where = "t = " + std::to_string(tcur) + ", state = (";
      for (int j = 0; j < dim; ++j)
        where += (j ? ", " : "") + std::to_string(cur[std::size_t(j)]);
      throw Error(Error::Kind::regularity, std::string(e.what()) + " [" + where + ")]");
    }
    for (int j = 0; j < dim; ++j)
      cur[std::size_t(j)] += hs / 6 *
                             (k1[std::size_t(j)] + 2 * k2[std::size_t(j)] +
                              2 * k3[std::size_t(j)] + k4[std::size_t(j)]);
    const double tnext = last ? t1 : t0 + double(i + 1) * h;
    for (double v : cur)
      if (!std::isfinite(v))
        throw_domain("non-finite state at t = " + std::to_string(tnext));
    traj.t.push_back(tnext);
    traj.states.push_back(cur);
    if (last) break;
  }
  return traj;
}

std::vector<DriftRow> conservation_report(
    const LieAlgebroid& A, const Trajectory& traj,
    const std::vector<std::pair<std::string, FnPtr>>& observables) {
  if (traj.size() == 0) throw_invalid("empty trajectory");
  if (traj.n != A.n() || traj.m != A.m())
    throw_shape("trajectory does not belong to algebroid '" + A.name() + "'");
  const int jet_order = 2 * traj.order - 1;
  for (const auto& [label, fn] : observables) {
    if (!fn) throw_invalid("null observable '" + label + "'");
    if (fn->m != 0 && (fn->n != traj.n || fn->m != traj.m))
      throw_shape("observable '" + label + "' lives on a different jet space");
    if (fn->order > jet_order)
      throw_config("observable '" + label + "' needs jet order " +
                   std::to_string(fn->order) + " but the trajectory carries order " +
                   std::to_string(jet_order));
  }
  std::vector<DriftRow> rows(observables.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const JetVals P = traj.state_jet(i);
    EvalContext ctx(A, P);
    for (std::size_t o = 0; o < observables.size(); ++o) {
      const double v = ctx.eval(observables[o].second).as_double();
      if (i == 0) {
        rows[o].label = observables[o].first;
        rows[o].initial = v;
      }
      rows[o].max_drift = std::max(rows[o].max_drift, std::abs(v - rows[o].initial));
    }
  }
  return rows;
}

double discrete_action_gradient(const Lagrangian& L, const Trajectory& traj,
                                const SectionAlongCurve& sigma, double h_fd) {
  const LieAlgebroid& A = L.algebroid();
  const int n = A.n(), m = A.m(), k = L.order();
  if (traj.n != n || traj.m != m || traj.order != k)
    throw_shape("trajectory does not match the Lagrangian's jet space");
  if (sigma.m() != m) throw_invalid("variation has the wrong number of components");
  if (h_fd < 0) throw_invalid("negative differencing step");
  const std::size_t N = traj.size();
  if (N < 3) throw_invalid("need at least three samples to difference the top level");
  for (std::size_t i = 1; i < N; ++i)
    if (!(traj.t[i] > traj.t[i - 1])) throw_invalid("time grid is not increasing");

  // boundary condition: sigma and its first k-1 derivatives vanish at the ends
  for (const double te : {traj.t.front(), traj.t.back()}) {
    const std::vector<Scalar> s = sigma.taylor(te, std::max(k - 1, 1));
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < k; ++j)
        if (std::abs(s[std::size_t(a)].coeff(j).as_double()) > 1e-8)
          throw_domain("variation does not vanish to order " + std::to_string(k - 1) +
                       " at t = " + std::to_string(te));
  }

  std::size_t stride = 1;
  if (h_fd > 0 && traj.step > 0)
    stride = std::max<std::size_t>(1, std::size_t(std::llround(h_fd / traj.step)));
  stride = std::min(stride, (N - 1) / 2);

  const std::vector<FnPtr>& el = el_functions(L);
  const int top = 2 * k;
  std::vector<double> pairing(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    // three difference nodes around i, clamped at the ends
    std::size_t i0 = (i >= stride) ? i - stride : 0;
    std::size_t i2 = std::min(i0 + 2 * stride, N - 1);
    i0 = i2 - 2 * stride;
    const std::size_t i1 = i0 + stride;
    if (int(traj.states[i].size()) != traj.state_size())
      throw_shape("trajectory row " + std::to_string(i) + " has the wrong length");
    JetVals P(n, m, top);
    for (int s = 0; s < traj.state_size(); ++s)
      P.at(s) = Scalar(traj.states[i][std::size_t(s)]);
    const int top_base = jet_y_slot(n, m, top - 1, 0);
    for (int a = 0; a < m; ++a)
      P.y(top, a) = Scalar(lagrange3_deriv(
          traj.t[i0], traj.t[i1], traj.t[i2], traj.states[i0][std::size_t(top_base + a)],
          traj.states[i1][std::size_t(top_base + a)],
          traj.states[i2][std::size_t(top_base + a)], traj.t[i]));
    const std::vector<double> sv = sigma.values(traj.t[i]);
    EvalContext ctx(A, P);
    for (int a = 0; a < m; ++a)
      pairing[i] += ctx.eval(el[std::size_t(a)]).as_double() * sv[std::size_t(a)];
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < N; ++i)
    acc += (traj.t[i] - traj.t[i - 1]) * (pairing[i] + pairing[i - 1]) / 2;
  return acc;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t";
  for (const std::string& name : traj.column_names()) os << "," << name;
  os << "\n";
  char buf[40];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.t[i]);
    os << buf;
    for (double v : traj.states[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
}

std::string trajectory_json_string(const Trajectory& traj, int indent) {
  nlohmann::ordered_json j;
  j["label"] = traj.label;
  j["method"] = traj.method;
  j["step"] = traj.step;
  j["n"] = traj.n;
  j["m"] = traj.m;
  j["lagrangian_order"] = traj.order;
  j["columns"] = traj.column_names();
  j["t"] = traj.t;
  j["states"] = traj.states;
  return j.dump(indent);
}

} // namespace liejet
