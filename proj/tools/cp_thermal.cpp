// cp_thermal: thermal Casimir-Polder potentials for planar and cylindrical
// geometries, plus numerical checks of the Keldysh equilibrium reduction.
//
// Exit codes: 0 success, 1 a verification check failed, 2 invalid input or
// I/O failure, 3 one or more samples failed to converge (output still written).

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cpthermal/io.hpp"
#include "cpthermal/keldysh.hpp"
#include "cpthermal/potential.hpp"

namespace {

using namespace cpthermal;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitConvergence = 3;

struct Options {
  std::string config;
  std::string output;
  std::string format;
  unsigned threads = 0;
  bool verbose = false;
};

unsigned resolve_threads(unsigned flag) {
  if (flag > 0)
    return flag;
  if (const char *env = std::getenv("CP_THERMAL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0)
        return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
    throw ConfigError(std::string("CP_THERMAL_THREADS must be a positive "
                                  "integer, got '") + env + "'");
  }
  return 1;
}

const char *geometry_name(const Geometry &g) {
  switch (g.index()) {
  case 0:
    return "half_space";
  case 1:
    return "cavity";
  default:
    return "cylinder";
  }
}

int run_scenario(const std::string &sub, const Options &o) {
  ScenarioConfig cfg = load_config(o.config);
  const std::string expected = sub == "halfspace" ? "half_space" : sub;
  if (expected != geometry_name(cfg.geometry))
    throw ConfigError("subcommand '" + sub + "' does not match geometry type '" +
                      geometry_name(cfg.geometry) + "' in " + o.config);
  if (!o.output.empty())
    cfg.output_path = o.output;
  if (!o.format.empty())
    cfg.format = parse_format(o.format);

  EngineOptions eo;
  eo.threads = resolve_threads(o.threads);
  const auto scan = cfg.scan.positions();
  if (o.verbose)
    std::cerr << "cp_thermal: " << sub << ", " << scan.size() << " samples, "
              << eo.threads << " thread(s), T = " << cfg.thermal.temperature
              << " K\n";

  const auto t0 = std::chrono::steady_clock::now();
  const PotentialCurve curve =
      total_potential_curve(cfg.molecule, cfg.geometry, cfg.thermal, scan, eo);
  if (o.verbose)
    std::cerr << "cp_thermal: done in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                     .count()
              << " s\n";

  if (cfg.output_path.empty() || cfg.output_path == "-") {
    if (cfg.format == OutputFormat::csv)
      write_curve_csv(std::cout, curve);
    else
      std::cout << curve_to_json(curve).dump(2) << '\n';
  } else {
    emit_curve(curve, cfg.format, cfg.output_path);
    if (o.verbose)
      std::cerr << "cp_thermal: wrote " << cfg.output_path << '\n';
  }

  int failed = 0;
  for (std::size_t i = 0; i < curve.status.size(); ++i) {
    if (curve.status[i] == SampleStatus::ok)
      continue;
    if (curve.status[i] == SampleStatus::convergence_error)
      ++failed;
    if (o.verbose || curve.status[i] == SampleStatus::convergence_error)
      std::cerr << "cp_thermal: sample " << i << " (" << 1e6 * curve.positions[i]
                << " um): " << to_string(curve.status[i])
                << (curve.messages[i].empty() ? "" : ": " + curve.messages[i])
                << '\n';
  }
  if (failed > 0) {
    std::cerr << "cp_thermal: " << failed << " sample(s) did not converge\n";
    return kExitConvergence;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- verify

json check(const std::string &name, double err, double tol) {
  return {{"name", name}, {"max_error", err}, {"tolerance", tol},
          {"passed", err <= tol}};
}

json run_checks() {
  json checks = json::array();

  double worst = 0.0;
  for (double Om : {5e12, 3e13, 2e14})
    for (double T : {10.0, 300.0, 1000.0}) {
      const ScalarModelGreen G{{{Om, 0.05 * Om, 1.0}}};
      const ScalarModelGreen a{{{1.3 * Om, 0.02 * Om, 2.0}}};
      worst = std::max(worst, contour_rotation_check(G, a, T).rel_err);
    }
  checks.push_back(check("contour_rotation", worst, 1e-6));

  {
    const ScalarModelGreen G{{{1e13, 1e12, 1.0}}}, a{{{2e13, 1e12, 1.0}}};
    const double sum = contour_rotation_check(G, a, 0.05).rhs;
    const double integral = imaginary_axis_integral(G, a);
    checks.push_back(
        check("zero_temperature_limit", std::abs(sum - integral) / std::abs(integral), 1e-8));
  }
  {
    const ScalarModelGreen G{{{1e13, 1e12, 1.0}}}, a{{{1e16, 1e9, 1.0}}};
    const auto r = contour_rotation_check(G, a, 300.0);
    checks.push_back(
        check("bose_suppression", std::abs(r.correction) / std::abs(r.lhs + r.correction), 1e-10));
  }

  {
    auto s = random_keldysh_system(7);
    const CMatrix zero = CMatrix::Zero(s.dimension(), s.dimension());
    const auto free = DiscreteKeldyshSystem::make(s.G0, zero, zero, zero, s.N_E, 0.0);
    const auto r = born_series_fixpoint(free, 5);
    const CMatrix rho0 = -free.N_E * (free.G0 - free.G0.adjoint());
    checks.push_back(check("free_field", (r.rho - rho0).cwiseAbs().maxCoeff(), 0.0));
  }

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double born = 0.0, split = 0.0;
  for (int k = 0; k < 50; ++k) {
    RandomSystemOptions o;
    o.spectral_radius = 0.8 * (0.25 + 0.75 * unit(rng));
    o.N_E = 3.0 * unit(rng);
    o.N_S = 3.0 * unit(rng);
    const auto s = random_keldysh_system(1000 + k, o);
    born = std::max(born, born_series_fixpoint_check(s, 200));
    split = std::max(split, s.retarded_split_residual() /
                                std::max(1.0, s.PiR.cwiseAbs().maxCoeff()));
  }
  checks.push_back(check("born_series_closed_form", born, 1e-10));
  checks.push_back(check("retarded_advanced_split", split, 1e-14));

  double fdt = 0.0;
  for (int k = 0; k < 10; ++k) {
    RandomSystemOptions o;
    o.N_E = o.N_S = 0.1 + 3.0 * unit(rng);
    const auto s = random_keldysh_system(2000 + k, o);
    fdt = std::max(fdt, fdt_residual(s, born_series_fixpoint(s, 200).rho));
  }
  checks.push_back(check("equilibrium_fdt", fdt, 1e-10));

  double db = 0.0, db_eq = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double w = std::pow(10.0, 11.0 + 3.0 * unit(rng));
    const double te = 1.0 + 999.0 * unit(rng);
    const double ts = 1.0 + 999.0 * unit(rng);
    const double ref = photon_number(w, te) - photon_number(w, ts);
    const double f = detailed_balance_factor(w, te, ts);
    const double scale = std::max(photon_number(w, te), photon_number(w, ts));
    if (scale > 0.0)
      db = std::max(db, std::abs(f - ref) / scale);
    db_eq = std::max(db_eq, std::abs(detailed_balance_factor(w, te, te)));
  }
  checks.push_back(check("detailed_balance", db, 1e-12));
  checks.push_back(check("detailed_balance_equilibrium", db_eq, 0.0));

  double pf = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double w = std::pow(10.0, 11.0 + 3.0 * unit(rng));
    const double T = 1.0 + 999.0 * unit(rng);
    pf = std::max(pf, pfdt_consistency(10.0 * unit(rng) + 1e-3, w, T).rel_err);
  }
  checks.push_back(check("polarization_fdt_ratio", pf, 1e-14));
  return checks;
}

int run_verify(const Options &o) {
  const auto t0 = std::chrono::steady_clock::now();
  json report;
  report["checks"] = run_checks();
  bool ok = true;
  for (const auto &c : report["checks"])
    ok = ok && c["passed"].get<bool>();
  report["passed"] = ok;
  report["seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string text = report.dump(2) + "\n";
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(o.output, std::ios::binary);
    if (!out || !(out << text))
      throw IoError("cannot write verification report to '" + o.output + "'");
  }
  if (o.verbose)
    for (const auto &c : report["checks"])
      std::cerr << (c["passed"].get<bool>() ? "PASS " : "FAIL ")
                << c["name"].get<std::string>() << " error "
                << c["max_error"].get<double>() << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Thermal Casimir-Polder potentials and Keldysh consistency checks"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App *sub, bool needs_config) {
    auto *c = sub->add_option("--config", o.config, "scenario INI file");
    if (needs_config)
      c->required()->check(CLI::ExistingFile);
    sub->add_option("--output", o.output, "output path ('-' for stdout)");
    sub->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", o.threads, "worker threads (default: "
                                            "CP_THERMAL_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", o.verbose, "progress and per-sample diagnostics");
  };
  for (const char *name : {"halfspace", "cavity", "cylinder"})
    add_common(app.add_subcommand(name, std::string("scan a ") + name + " scenario"),
               true);
  add_common(app.add_subcommand("verify", "run the Keldysh consistency checks"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitInvalid;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "verify")
      return run_verify(o);
    return run_scenario(sub, o);
  } catch (const ConfigError &e) {
    std::cerr << "cp_thermal: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DomainError &e) {
    std::cerr << "cp_thermal: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const IoError &e) {
    std::cerr << "cp_thermal: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConvergenceError &e) {
    std::cerr << "cp_thermal: " << e.what() << '\n';
    return kExitConvergence;
  }
}
