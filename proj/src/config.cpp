#include "liejet/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "liejet/error.hpp"

namespace liejet {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw_config(where + ": " + what);
}

const ordered_json& expect_object(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  return j;
}

int get_int(const ordered_json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad(where, "missing \"" + key + "\"");
  if (!j[key].is_number_integer()) bad(where + "." + key, "expected an integer");
  return j[key].get<int>();
}

double get_double(const ordered_json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad(where, "missing \"" + key + "\"");
  if (!j[key].is_number()) bad(where + "." + key, "expected a number");
  return j[key].get<double>();
}

std::string get_string(const ordered_json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad(where, "missing \"" + key + "\"");
  if (!j[key].is_string()) bad(where + "." + key, "expected a string");
  return j[key].get<std::string>();
}

/// Expression field: a string in the expression grammar or a bare number.
Expr get_expr(const ordered_json& j, const std::string& where) {
  if (j.is_number()) return expr_number(j.get<double>());
  if (!j.is_string()) bad(where, "expected an expression string");
  try {
    return parse_expr(j.get<std::string>());
  } catch (const Error& e) {
    throw Error(Error::Kind::parse, where + ": " + e.what(), e.offset());
  }
}

std::vector<double> get_number_array(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) bad(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

AlgebroidPtr parse_algebroid(const ordered_json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "so3") return make_lie_algebra(3, so3_constants(), "so3");
    if (s == "heisenberg") return make_lie_algebra(3, heisenberg_constants(), "heisenberg");
    if (s.rfind("tangent(", 0) == 0 && s.back() == ')') {
      const std::string inner = s.substr(8, s.size() - 9);
      char* end = nullptr;
      const long n = std::strtol(inner.c_str(), &end, 10);
      if (end && *end == '\0' && n >= 1) return make_tangent(static_cast<int>(n));
    }
    bad(where, "unknown algebroid shorthand \"" + s + "\" (use \"tangent(n)\", \"so3\", "
               "\"heisenberg\" or an inline object)");
  }
  expect_object(j, where);
  const int n = get_int(j, "n", where);
  const int m = get_int(j, "m", where);
  if (n < 0) bad(where + ".n", "must be >= 0");
  if (m < 1) bad(where + ".m", "must be >= 1");
  const std::string name = j.contains("name") ? get_string(j, "name", where) : "algebroid";

  std::vector<std::vector<Expr>> rho(static_cast<std::size_t>(n));
  if (n > 0) {
    if (!j.contains("rho") || !j["rho"].is_array() || j["rho"].size() != std::size_t(n))
      bad(where + ".rho", "expected " + std::to_string(n) + " rows");
    for (int i = 0; i < n; ++i) {
      const auto& row = j["rho"][std::size_t(i)];
      if (!row.is_array() || row.size() != std::size_t(m))
        bad(where + ".rho", "row " + std::to_string(i + 1) + " must have " + std::to_string(m) +
                                " entries");
      for (int a = 0; a < m; ++a)
        rho[std::size_t(i)].push_back(get_expr(
            row[std::size_t(a)],
            where + ".rho[" + std::to_string(i + 1) + "][" + std::to_string(a + 1) + "]"));
    }
  }

  std::vector<CEntry> entries;
  if (j.contains("c")) {
    if (!j["c"].is_array()) bad(where + ".c", "expected an array of [gamma, alpha, beta, expr]");
    for (const auto& t : j["c"]) {
      if (!t.is_array() || t.size() != 4)
        bad(where + ".c", "each entry must be [gamma, alpha, beta, expr]");
      int idx[3];
      for (int p = 0; p < 3; ++p) {
        if (!t[std::size_t(p)].is_number_integer()) bad(where + ".c", "indices must be integers");
        idx[p] = t[std::size_t(p)].get<int>();
        if (idx[p] < 1 || idx[p] > m)
          bad(where + ".c", "index " + std::to_string(idx[p]) + " out of range 1.." +
                                std::to_string(m));
      }
      entries.push_back(
          CEntry{idx[0] - 1, idx[1] - 1, idx[2] - 1, get_expr(t[3], where + ".c expr")});
    }
  }
  return std::make_shared<const LieAlgebroid>(name, n, m, std::move(rho), entries);
}

Lagrangian parse_lagrangian(const ordered_json& j, const AlgebroidPtr& A, std::string label,
                            const std::string& where) {
  expect_object(j, where);
  const int k = get_int(j, "k", where);
  if (k < 1) bad(where + ".k", "must be >= 1");
  if (j.contains("label")) label = get_string(j, "label", where);
  return Lagrangian(A, k, get_expr(j.contains("expr") ? j["expr"] : ordered_json(), where + ".expr"),
                    label);
}

std::vector<std::string> expr_strings(const std::vector<Expr>& v) {
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(pretty_print(e));
  return out;
}

ordered_json algebroid_json(const LieAlgebroid& A) {
  ordered_json j;
  j["name"] = A.name();
  j["n"] = A.n();
  j["m"] = A.m();
  ordered_json rho = ordered_json::array();
  for (int i = 0; i < A.n(); ++i) {
    ordered_json row = ordered_json::array();
    for (int a = 0; a < A.m(); ++a) row.push_back(pretty_print(A.rho_expr(i, a)));
    rho.push_back(std::move(row));
  }
  j["rho"] = std::move(rho);
  ordered_json c = ordered_json::array();
  for (int g = 0; g < A.m(); ++g)
    for (int a = 0; a < A.m(); ++a)
      for (int b = a + 1; b < A.m(); ++b)
        if (A.c_expr(g, a, b)) c.push_back({g + 1, a + 1, b + 1, pretty_print(A.c_expr(g, a, b))});
  if (!c.empty()) j["c"] = std::move(c);
  return j;
}

ordered_json lagrangian_json(const Lagrangian& L) {
  ordered_json j;
  j["k"] = L.order();
  j["expr"] = pretty_print(L.expr());
  if (!L.label().empty()) j["label"] = L.label();
  return j;
}

} // namespace

ConfigDocument parse_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Error::Kind::parse, std::string("malformed JSON: ") + e.what(), e.byte);
  }
  expect_object(j, "config");

  ConfigDocument doc;
  if (j.contains("label")) doc.label = get_string(j, "label", "config");
  if (!j.contains("algebroid")) bad("config", "missing \"algebroid\"");
  doc.algebroid = parse_algebroid(j["algebroid"], "algebroid");
  const int n = doc.algebroid->n(), m = doc.algebroid->m();

  if (j.contains("lagrangian"))
    doc.lagrangian = parse_lagrangian(j["lagrangian"], doc.algebroid, doc.label, "lagrangian");

  if (j.contains("morphism")) {
    const auto& jm = expect_object(j["morphism"], "morphism");
    if (!jm.contains("target")) bad("morphism", "missing \"target\"");
    AlgebroidPtr target = parse_algebroid(jm["target"], "morphism.target");
    std::vector<Expr> phi;
    if (jm.contains("phi")) {
      if (!jm["phi"].is_array()) bad("morphism.phi", "expected an array");
      for (std::size_t i = 0; i < jm["phi"].size(); ++i)
        phi.push_back(get_expr(jm["phi"][i], "morphism.phi[" + std::to_string(i + 1) + "]"));
    }
    if (!jm.contains("Phi") || !jm["Phi"].is_array()) bad("morphism", "missing \"Phi\" rows");
    std::vector<std::vector<Expr>> Phi;
    for (std::size_t r = 0; r < jm["Phi"].size(); ++r) {
      const auto& row = jm["Phi"][r];
      if (!row.is_array()) bad("morphism.Phi", "rows must be arrays");
      std::vector<Expr> out;
      for (std::size_t cidx = 0; cidx < row.size(); ++cidx)
        out.push_back(get_expr(row[cidx], "morphism.Phi[" + std::to_string(r + 1) + "][" +
                                              std::to_string(cidx + 1) + "]"));
      Phi.push_back(std::move(out));
    }
    MorphismSpec spec{Morphism(doc.algebroid, target, std::move(phi), std::move(Phi),
                               doc.label.empty() ? "morphism" : doc.label),
                      std::nullopt};
    if (jm.contains("lagrangian"))
      spec.target_lagrangian =
          parse_lagrangian(jm["lagrangian"], target, doc.label, "morphism.lagrangian");
    doc.morphism = std::move(spec);
  }

  if (j.contains("initial")) {
    const auto& ji = expect_object(j["initial"], "initial");
    int k = 0;
    if (doc.lagrangian)
      k = doc.lagrangian->order();
    else if (doc.morphism && doc.morphism->target_lagrangian)
      k = doc.morphism->target_lagrangian->order();
    else
      bad("initial", "needs a lagrangian (top-level or morphism.lagrangian) to fix the jet order");
    std::vector<double> x;
    if (ji.contains("x")) x = get_number_array(ji["x"], "initial.x");
    if (static_cast<int>(x.size()) != n)
      bad("initial.x", "expected " + std::to_string(n) + " entries");
    const int levels = 2 * k - 1;
    if (!ji.contains("y") || !ji["y"].is_array() ||
        ji["y"].size() != static_cast<std::size_t>(levels))
      bad("initial.y", "expected " + std::to_string(levels) + " levels (y_1..y_" +
                           std::to_string(levels) + ")");
    doc.initial = std::move(x);
    for (int r = 0; r < levels; ++r) {
      const std::vector<double> level =
          get_number_array(ji["y"][std::size_t(r)], "initial.y[" + std::to_string(r + 1) + "]");
      if (static_cast<int>(level.size()) != m)
        bad("initial.y", "level " + std::to_string(r + 1) + " must have " + std::to_string(m) +
                             " entries");
      doc.initial.insert(doc.initial.end(), level.begin(), level.end());
    }
  }

  if (j.contains("run")) {
    const auto& jr = expect_object(j["run"], "run");
    RunSpec run;
    run.t0 = get_double(jr, "t0", "run");
    run.t1 = get_double(jr, "t1", "run");
    run.h = get_double(jr, "h", "run");
    if (!(run.h > 0.0)) bad("run.h", "must be > 0");
    if (!(run.t1 > run.t0)) bad("run", "t1 must exceed t0");
    doc.run = run;
  }

  if (j.contains("observables")) {
    if (!j["observables"].is_array()) bad("observables", "expected an array");
    int i = 0;
    for (const auto& jo : j["observables"]) {
      ++i;
      const std::string where = "observables[" + std::to_string(i) + "]";
      expect_object(jo, where);
      Observable obs;
      obs.label = jo.contains("label") ? get_string(jo, "label", where) : "obs" + std::to_string(i);
      obs.expr = get_expr(jo.contains("expr") ? jo["expr"] : ordered_json(), where + ".expr");
      if (jo.contains("tol")) {
        obs.tol = get_double(jo, "tol", where);
        if (!(obs.tol > 0.0)) bad(where + ".tol", "must be > 0");
      }
      doc.observables.push_back(std::move(obs));
    }
  }

  if (j.contains("noether")) {
    const auto& jn = expect_object(j["noether"], "noether");
    NoetherSpec spec;
    if (!jn.contains("eta") || !jn["eta"].is_array() ||
        jn["eta"].size() != static_cast<std::size_t>(m))
      bad("noether.eta", "expected " + std::to_string(m) + " section components");
    for (std::size_t a = 0; a < jn["eta"].size(); ++a)
      spec.eta.push_back(get_expr(jn["eta"][a], "noether.eta[" + std::to_string(a + 1) + "]"));
    if (jn.contains("F")) spec.F = get_expr(jn["F"], "noether.F");
    if (jn.contains("tol")) {
      spec.tol = get_double(jn, "tol", "noether");
      if (!(spec.tol > 0.0)) bad("noether.tol", "must be > 0");
    }
    doc.noether = std::move(spec);
  }

  return doc;
}

ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_config("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_json_string(const ConfigDocument& doc, int indent) {
  ordered_json j;
  if (!doc.label.empty()) j["label"] = doc.label;
  j["algebroid"] = algebroid_json(*doc.algebroid);
  if (doc.lagrangian) j["lagrangian"] = lagrangian_json(*doc.lagrangian);
  if (!doc.initial.empty()) {
    const int n = doc.algebroid->n(), m = doc.algebroid->m();
    ordered_json ji;
    ji["x"] = std::vector<double>(doc.initial.begin(), doc.initial.begin() + n);
    ordered_json levels = ordered_json::array();
    for (std::size_t base = std::size_t(n); base + std::size_t(m) <= doc.initial.size();
         base += std::size_t(m))
      levels.push_back(std::vector<double>(doc.initial.begin() + long(base),
                                           doc.initial.begin() + long(base + std::size_t(m))));
    ji["y"] = std::move(levels);
    j["initial"] = std::move(ji);
  }
  if (doc.run) {
    j["run"] = {{"t0", doc.run->t0}, {"t1", doc.run->t1}, {"h", doc.run->h}};
  }
  if (!doc.observables.empty()) {
    ordered_json arr = ordered_json::array();
    for (const auto& obs : doc.observables)
      arr.push_back({{"label", obs.label}, {"expr", pretty_print(obs.expr)}, {"tol", obs.tol}});
    j["observables"] = std::move(arr);
  }
  if (doc.morphism) {
    ordered_json jm;
    jm["target"] = algebroid_json(doc.morphism->map.target());
    const int np = doc.morphism->map.target().n();
    const int mp = doc.morphism->map.target().m();
    const int m = doc.algebroid->m();
    std::vector<Expr> phi;
    for (int ip = 0; ip < np; ++ip) phi.push_back(doc.morphism->map.base_expr(ip));
    jm["phi"] = expr_strings(phi);
    ordered_json rows = ordered_json::array();
    for (int ap = 0; ap < mp; ++ap) {
      std::vector<Expr> row;
      for (int a = 0; a < m; ++a) row.push_back(doc.morphism->map.fiber_expr(ap, a));
      rows.push_back(expr_strings(row));
    }
    jm["Phi"] = std::move(rows);
    if (doc.morphism->target_lagrangian)
      jm["lagrangian"] = lagrangian_json(*doc.morphism->target_lagrangian);
    j["morphism"] = std::move(jm);
  }
  if (doc.noether) {
    ordered_json jn;
    jn["eta"] = expr_strings(doc.noether->eta);
    if (doc.noether->F) jn["F"] = pretty_print(doc.noether->F);
    jn["tol"] = doc.noether->tol;
    j["noether"] = std::move(jn);
  }
  return j.dump(indent) + "\n";
}

} // namespace liejet
