#include "liejet.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>
#include <utility>

#include "json.hpp"

#include "liejet/config.hpp"
#include "liejet/error.hpp"
#include "liejet/runner.hpp"
#include "liejet/scenarios.hpp"

using namespace liejet;

struct lj_system {
  ConfigDocument doc;
  RunOptions opt;
};

namespace {

thread_local std::string g_error;
thread_local std::size_t g_offset = static_cast<std::size_t>(-1);

void clear_error() {
  g_error.clear();
  g_offset = static_cast<std::size_t>(-1);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lj_status classify(const Error& e) {
  g_error = e.what();
  g_offset = e.offset();
  switch (e.kind()) {
    case Error::Kind::parse:
    case Error::Kind::config:
    case Error::Kind::shape:
      return LJ_CONFIG_ERROR;
    case Error::Kind::invalid:
      return LJ_INVALID_ARGUMENT;
    case Error::Kind::domain:
    case Error::Kind::regularity:
      return LJ_RUNTIME_ERROR;
  }
  return LJ_RUNTIME_ERROR;
}

template <typename F>
lj_status guarded(F&& body) {
  clear_error();
  try {
    return body();
  } catch (const Error& e) {
    return classify(e);
  } catch (const std::exception& e) {
    g_error = e.what();
    return LJ_RUNTIME_ERROR;
  }
}

lj_status bad_argument(const char* what) {
  clear_error();
  g_error = what;
  return LJ_INVALID_ARGUMENT;
}

lj_status finish(const RunReport& R, char** report_json) {
  *report_json = dup_string(R.json());
  if (R.passed) return LJ_OK;
  if (!R.errors.empty()) g_error = R.errors.front();
  return LJ_CHECK_FAILED;
}

std::string render_trajectory(const Trajectory& traj, lj_format format) {
  if (format == LJ_FORMAT_CSV) {
    std::ostringstream os;
    write_trajectory_csv(traj, os);
    return os.str();
  }
  std::string s = trajectory_json_string(traj);
  if (s.empty() || s.back() != '\n') s += '\n';
  return s;
}

bool valid_format(lj_format format) {
  return format == LJ_FORMAT_CSV || format == LJ_FORMAT_JSON;
}

Verdict verdict_from(const nlohmann::json& j) {
  Verdict v;
  v.label = j.at("label").get<std::string>();
  v.value = j.at("value").get<double>();
  v.tol = j.at("tol").get<double>();
  v.passed = j.at("passed").get<bool>();
  return v;
}

RunReport report_from(const nlohmann::json& j) {
  RunReport R;
  R.command = j.at("command").get<std::string>();
  R.label = j.at("label").get<std::string>();
  if (j.contains("structure"))
    for (const auto& row : j.at("structure")) R.structure.push_back(verdict_from(row));
  if (j.contains("regularity")) {
    const auto& r = j.at("regularity");
    RegularityInfo info;
    info.assembly_rcond = r.at("assembly_rcond").get<double>();
    if (r.contains("initial_rcond")) info.initial_rcond = r.at("initial_rcond").get<double>();
    info.floor = r.at("floor").get<double>();
    info.passed = r.at("passed").get<bool>();
    R.regularity = info;
  }
  if (j.contains("conservation"))
    for (const auto& row : j.at("conservation")) R.conservation.push_back(verdict_from(row));
  if (j.contains("el_residual")) R.el_residual = verdict_from(j.at("el_residual"));
  if (j.contains("checks"))
    for (const auto& row : j.at("checks")) R.checks.push_back(verdict_from(row));
  if (j.contains("errors"))
    for (const auto& e : j.at("errors")) R.errors.push_back(e.get<std::string>());
  R.passed = j.at("passed").get<bool>();
  return R;
}

} // namespace

extern "C" {

const char* lj_version(void) { return "0.1.0"; }

const char* lj_last_error(void) { return g_error.c_str(); }

size_t lj_last_error_offset(void) { return g_offset; }

void lj_string_free(char* s) { std::free(s); }

lj_status lj_system_create(const char* config_json, lj_system** out) {
  if (!config_json || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    auto sys = std::make_unique<lj_system>();
    sys->doc = parse_config(config_json);
    *out = sys.release();
    return LJ_OK;
  });
}

lj_status lj_system_load(const char* path, lj_system** out) {
  if (!path || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    auto sys = std::make_unique<lj_system>();
    sys->doc = load_config(path);
    *out = sys.release();
    return LJ_OK;
  });
}

void lj_system_free(lj_system* sys) { delete sys; }

lj_status lj_system_config(const lj_system* sys, char** config_json) {
  if (!sys || !config_json) return bad_argument("null argument");
  return guarded([&] {
    *config_json = dup_string(config_json_string(sys->doc));
    return LJ_OK;
  });
}

lj_status lj_system_set_tol(lj_system* sys, double tol) {
  if (!sys) return bad_argument("null system");
  if (!(tol > 0)) return bad_argument("tolerance must be positive");
  clear_error();
  sys->opt.tol = tol;
  return LJ_OK;
}

lj_status lj_system_set_seed(lj_system* sys, uint64_t seed) {
  if (!sys) return bad_argument("null system");
  clear_error();
  sys->opt.seed = seed;
  return LJ_OK;
}

lj_status lj_system_set_samples(lj_system* sys, int samples) {
  if (!sys) return bad_argument("null system");
  if (samples < 1) return bad_argument("sample count must be at least 1");
  clear_error();
  sys->opt.samples = samples;
  return LJ_OK;
}

lj_status lj_run_check(lj_system* sys, char** report_json) {
  if (!sys || !report_json) return bad_argument("null argument");
  return guarded([&] { return finish(run_check(sys->doc, sys->opt), report_json); });
}

lj_status lj_run_simulate(lj_system* sys, lj_format format, char** report_json,
                          char** trajectory_text) {
  if (!sys || !report_json) return bad_argument("null argument");
  if (!valid_format(format)) return bad_argument("unknown trajectory format");
  return guarded([&] {
    Trajectory traj;
    const RunReport R =
        run_simulate(sys->doc, sys->opt, trajectory_text ? &traj : nullptr);
    if (trajectory_text)
      *trajectory_text =
          traj.size() > 0 ? dup_string(render_trajectory(traj, format)) : nullptr;
    return finish(R, report_json);
  });
}

lj_status lj_run_reduce(lj_system* sys, lj_format format, char** report_json,
                        char** trajectory_text) {
  if (!sys || !report_json) return bad_argument("null argument");
  if (!valid_format(format)) return bad_argument("unknown trajectory format");
  return guarded([&] {
    Trajectory pushed;
    const RunReport R =
        run_reduce(sys->doc, sys->opt, trajectory_text ? &pushed : nullptr);
    if (trajectory_text)
      *trajectory_text =
          pushed.size() > 0 ? dup_string(render_trajectory(pushed, format)) : nullptr;
    return finish(R, report_json);
  });
}

lj_status lj_run_operators(double tol, uint64_t seed, int samples, char** report_json) {
  if (!report_json) return bad_argument("null argument");
  if (!(tol > 0)) return bad_argument("tolerance must be positive");
  if (samples < 1) return bad_argument("sample count must be at least 1");
  return guarded([&] {
    RunOptions opt;
    opt.tol = tol;
    opt.seed = seed;
    opt.samples = samples;
    return finish(run_operator_suite(opt), report_json);
  });
}

lj_status lj_run_scenarios(const char* name, char** report_json) {
  if (!report_json) return bad_argument("null argument");
  return guarded([&] {
    return finish(run_scenario_suite(name ? name : ""), report_json);
  });
}

lj_status lj_scenario_names(char** names_json) {
  if (!names_json) return bad_argument("null argument");
  return guarded([&] {
    const nlohmann::json j = scenario_names();
    *names_json = dup_string(j.dump() + "\n");
    return LJ_OK;
  });
}

lj_status lj_scenario_config(const char* name, char** config_json) {
  if (!name || !config_json) return bad_argument("null argument");
  return guarded([&] {
    *config_json = dup_string(config_json_string(scenario(name).config));
    return LJ_OK;
  });
}

lj_status lj_report_text(const char* report_json, char** text) {
  if (!report_json || !text) return bad_argument("null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(report_json);
      *text = dup_string(report_from(j).text());
    } catch (const nlohmann::json::exception& e) {
      g_error = std::string("not a run report: ") + e.what();
      return LJ_CONFIG_ERROR;
    }
    return LJ_OK;
  });
}

} // extern "C"
