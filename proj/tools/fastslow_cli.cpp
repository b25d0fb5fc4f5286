// fastslow: stability analysis and simulation of a linear ODE coupled with
// fast transport PDEs.
//
//   fastslow analyze|simulate|sweep <scenario> [options]
//   fastslow reproduce example1|section5 [options]
//
// Exit codes: 0 success, 2 parse/validation error, 3 solver error,
// 4 inconclusive verdict under --strict-certification.

#include "fastslow/fastslow.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace fastslow;

constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInconclusive = 4;

Scenario load_scenario(const std::string& arg) {
  std::ifstream in(arg, std::ios::binary);
  if (!in) {
    if (arg == "section5") return parse_scenario(kBenchmarkScenario);
    throw Error(ErrorKind::ParseError, "cannot read scenario file '" + arg + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "--eps: '" + item + "' is not a positive number");
    }
  }
  if (out.empty()) throw Error(ErrorKind::ParseError, "--eps: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability analysis and simulation of an ODE coupled with fast transport PDEs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("fastslow ") + kVersion);

  std::string target;
  std::string solver_text;
  std::string out_dir;
  std::string eps_text;
  std::optional<double> alpha, im_max, T, dt, upwind_dt;
  std::optional<int> K;
  bool euler_z = false, strict = false, json = false;

  auto add_common = [&](CLI::App* sub, const char* what) {
    sub->add_option("target", target, what)->required();
    sub->add_option("--solver", solver_text, "characteristics, upwind or both")
        ->check(CLI::IsMember({"characteristics", "upwind", "both"}));
    sub->add_option("--out", out_dir, "output directory for CSV files and the report");
    sub->add_option("--eps", eps_text, "comma-separated eps values");
    sub->add_option("--alpha", alpha, "stability margin");
    sub->add_option("--im-max", im_max, "|Im s| extent of boundary-layer search windows");
    sub->add_option("--T", T, "final time");
    sub->add_option("--dt", dt, "characteristics time step");
    sub->add_option("--K", K, "grid size");
    sub->add_option("--upwind-dt", upwind_dt, "force the upwind time step");
    sub->add_flag("--euler-z", euler_z, "explicit Euler for z in the characteristics solver");
    sub->add_flag("--strict-certification", strict, "exit 4 when any verdict is inconclusive");
    sub->add_flag("--json", json, "print the report as JSON");
  };
  auto* analyze = app.add_subcommand("analyze", "spectral verdicts, rho2 and the eps search");
  auto* simulate = app.add_subcommand("simulate", "time-domain runs written as CSV");
  auto* sweep = app.add_subcommand("sweep", "verdicts and fitted decay rates over the eps list");
  auto* reproduce = app.add_subcommand("reproduce", "built-in experiments: example1 or section5");
  add_common(analyze, "scenario file");
  add_common(simulate, "scenario file");
  add_common(sweep, "scenario file");
  add_common(reproduce, "example1 or section5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    CommandOptions opts;
    if (!solver_text.empty()) opts.solver = solver_from_string(solver_text);
    if (!out_dir.empty()) opts.out = out_dir;
    if (!eps_text.empty()) opts.eps = parse_eps_list(eps_text);
    opts.alpha = alpha;
    opts.im_max = im_max;
    opts.T = T;
    opts.dt = dt;
    opts.upwind_dt = upwind_dt;
    opts.K = K;
    opts.euler_z = euler_z;

    Report rep;
    if (analyze->parsed()) {
      opts.write_files = false;
      rep = cmd_analyze(load_scenario(target), opts);
    } else if (simulate->parsed()) {
      rep = cmd_simulate(load_scenario(target), opts);
    } else if (sweep->parsed()) {
      rep = cmd_sweep(load_scenario(target), opts);
    } else {
      rep = cmd_reproduce(target, opts);
    }

    const std::string text = render_text(rep);
    const std::string js = report_json(rep).dump(2) + "\n";
    if (!out_dir.empty()) {
      write_file_atomic(std::filesystem::path(out_dir) / "report.txt", text);
      write_file_atomic(std::filesystem::path(out_dir) / "report.json", js);
    }
    std::cout << (json ? js : text);
    if (strict && rep.any_inconclusive()) {
      std::cerr << "inconclusive verdict under --strict-certification\n";
      return kExitInconclusive;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (e.cause() != e.kind()) std::cerr << " (" << to_string(e.cause()) << ")";
    std::cerr << "\n";
    const bool input = e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError;
    return input ? kExitParse : kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
