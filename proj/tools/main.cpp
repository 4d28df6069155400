// Command-line front end. Everything goes through the C API in liejet.h;
// this translation unit never touches the C++ core directly.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liejet.h"

namespace {

/// Owns one string returned by the library.
struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { lj_string_free(p); }
  OwnedString() = default;
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;
};

struct OwnedSystem {
  lj_system* p = nullptr;
  ~OwnedSystem() { lj_system_free(p); }
};

int exit_code(lj_status st) {
  switch (st) {
    case LJ_OK:
      return 0;
    case LJ_CHECK_FAILED:
    case LJ_RUNTIME_ERROR:
      return 1;  // the run happened and failed
    case LJ_CONFIG_ERROR:
    case LJ_INVALID_ARGUMENT:
      return 2;  // bad input
  }
  return 2;
}

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) return false;
  os << (text ? text : "");
  os.flush();
  return static_cast<bool>(os);
}

void print_library_error() {
  std::cerr << "error: " << lj_last_error() << "\n";
}

/// Prints the human report, optionally writes the JSON report, maps the
/// status to an exit code.
int deliver(lj_status st, const char* report_json, const std::string& report_path) {
  if (report_json) {
    OwnedString text;
    if (lj_report_text(report_json, &text.p) == LJ_OK && text.p) std::cout << text.p;
    if (!report_path.empty() && !write_file(report_path, report_json))
      return usage_error("cannot write '" + report_path + "'");
  }
  if (st != LJ_OK && st != LJ_CHECK_FAILED) print_library_error();
  return exit_code(st);
}

struct CommonOptions {
  std::string config_path;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  int samples = 100;
  std::string report_path;
};

void add_sampling_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--tol", o.tol, "structure/identity tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "sampling seed")->capture_default_str();
  cmd->add_option("--samples", o.samples, "sample count per randomized check")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

int open_system(const CommonOptions& o, OwnedSystem& sys) {
  const lj_status st = lj_system_load(o.config_path.c_str(), &sys.p);
  if (st != LJ_OK) {
    print_library_error();
    return exit_code(st);
  }
  lj_system_set_tol(sys.p, o.tol);
  lj_system_set_seed(sys.p, o.seed);
  lj_system_set_samples(sys.p, o.samples);
  return -1;  // keep going
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"higher-order variational dynamics on Lie algebroids"};
  app.set_version_flag("--version", lj_version());
  app.require_subcommand(1);

  CommonOptions check_opt, sim_opt, red_opt, op_opt;
  std::string sim_out, red_out, check_out, op_out, scen_out;
  std::string sim_format = "csv", red_format = "csv";
  std::string scenario_name, emit_dir;
  bool list_only = false;

  CLI::App* check = app.add_subcommand(
      "check", "verify structure identities, morphism conditions and regularity");
  check->add_option("config", check_opt.config_path, "JSON system description")
      ->required();
  add_sampling_flags(check, check_opt);
  check->add_option("--out", check_out, "write the JSON report here");
  check->add_option("--report", check_opt.report_path, "alias of --out")
      ->excludes("--out");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "integrate the configured system and report invariants");
  simulate->add_option("config", sim_opt.config_path, "JSON system description")
      ->required();
  add_sampling_flags(simulate, sim_opt);
  simulate->add_option("--out", sim_out, "write the trajectory here");
  simulate->add_option("--format", sim_format, "trajectory format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  simulate->add_option("--report", sim_opt.report_path, "write the JSON report here");

  CLI::App* reduce = app.add_subcommand(
      "reduce", "compare the system with its reduction along the configured morphism");
  reduce->add_option("config", red_opt.config_path, "JSON system description")
      ->required();
  add_sampling_flags(reduce, red_opt);
  reduce->add_option("--out", red_out, "write the pushed (reduced-side) trajectory here");
  reduce->add_option("--format", red_format, "trajectory format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  reduce->add_option("--report", red_opt.report_path, "write the JSON report here");

  CLI::App* scenarios = app.add_subcommand(
      "scenarios", "run the bundled scenarios against their reference checks");
  scenarios->add_option("name", scenario_name, "run a single scenario");
  scenarios->add_flag("--list", list_only, "print the scenario names and exit");
  scenarios->add_option("--emit", emit_dir, "write each scenario's config file here");
  scenarios->add_option("--out", scen_out, "write the JSON report here");

  CLI::App* operators = app.add_subcommand(
      "operators", "run the operator identity suite on the catalog algebroids");
  add_sampling_flags(operators, op_opt);
  operators->add_option("--out", op_out, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (check->parsed()) {
    OwnedSystem sys;
    if (int rc = open_system(check_opt, sys); rc >= 0) return rc;
    OwnedString report;
    const lj_status st = lj_run_check(sys.p, &report.p);
    const std::string path = check_out.empty() ? check_opt.report_path : check_out;
    return deliver(st, report.p, path);
  }

  if (simulate->parsed()) {
    OwnedSystem sys;
    if (int rc = open_system(sim_opt, sys); rc >= 0) return rc;
    OwnedString report, traj;
    const lj_format format = sim_format == "json" ? LJ_FORMAT_JSON : LJ_FORMAT_CSV;
    const lj_status st =
        lj_run_simulate(sys.p, format, &report.p, sim_out.empty() ? nullptr : &traj.p);
    if (!sim_out.empty() && traj.p && !write_file(sim_out, traj.p))
      return usage_error("cannot write '" + sim_out + "'");
    return deliver(st, report.p, sim_opt.report_path);
  }

  if (reduce->parsed()) {
    OwnedSystem sys;
    if (int rc = open_system(red_opt, sys); rc >= 0) return rc;
    OwnedString report, traj;
    const lj_format format = red_format == "json" ? LJ_FORMAT_JSON : LJ_FORMAT_CSV;
    const lj_status st =
        lj_run_reduce(sys.p, format, &report.p, red_out.empty() ? nullptr : &traj.p);
    if (!red_out.empty() && traj.p && !write_file(red_out, traj.p))
      return usage_error("cannot write '" + red_out + "'");
    return deliver(st, report.p, red_opt.report_path);
  }

  if (scenarios->parsed()) {
    if (list_only) {
      OwnedString names;
      if (lj_scenario_names(&names.p) != LJ_OK) {
        print_library_error();
        return 1;
      }
      std::cout << names.p;
      return 0;
    }
    if (!emit_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(emit_dir, ec);
      std::vector<std::string> names;
      if (scenario_name.empty()) {
        // names arrive as a JSON array of plain identifiers
        OwnedString names_json;
        if (lj_scenario_names(&names_json.p) != LJ_OK) {
          print_library_error();
          return 1;
        }
        std::string raw = names_json.p;
        std::string cur;
        for (char c : raw) {
          if (c == '"') {
            if (!cur.empty()) names.push_back(cur);
            cur.clear();
          } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            cur.push_back(c);
          }
        }
      } else {
        names.push_back(scenario_name);
      }
      for (const std::string& name : names) {
        OwnedString cfg;
        const lj_status st = lj_scenario_config(name.c_str(), &cfg.p);
        if (st != LJ_OK) {
          print_library_error();
          return exit_code(st);
        }
        const std::string path = emit_dir + "/" + name + ".json";
        if (!write_file(path, cfg.p)) return usage_error("cannot write '" + path + "'");
        std::cout << "wrote " << path << "\n";
      }
      return 0;
    }
    OwnedString report;
    const lj_status st =
        lj_run_scenarios(scenario_name.empty() ? nullptr : scenario_name.c_str(), &report.p);
    return deliver(st, report.p, scen_out);
  }

  if (operators->parsed()) {
    OwnedString report;
    const lj_status st =
        lj_run_operators(op_opt.tol, op_opt.seed, op_opt.samples, &report.p);
    return deliver(st, report.p, op_out);
  }

  return usage_error("no subcommand given");
}
