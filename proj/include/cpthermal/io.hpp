#pragma once

// Scenario configuration (INI), molecule files and curve output (CSV/JSON).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "cpthermal/constants.hpp"
#include "cpthermal/errors.hpp"
#include "cpthermal/materials.hpp"
#include "cpthermal/molecule.hpp"
#include "cpthermal/potential.hpp"

namespace cpthermal {

// ---------------------------------------------------------------- molecule

/// Parses whitespace- or comma-separated records `omega_rad_per_s dipole_debye`.
/// '#' starts a comment; blank lines are ignored.
inline MoleculeSpec parse_molecule(std::istream &in, const std::string &name) {
  MoleculeSpec m;
  m.name = name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos)
      line.erase(h);
    for (char &ch : line)
      if (ch == ',' || ch == '\t' || ch == '\r')
        ch = ' ';
    std::istringstream ls(line);
    double omega = 0.0, debye = 0.0;
    if (!(ls >> omega)) {
      if (line.find_first_not_of(' ') == std::string::npos)
        continue;
      throw ConfigError(name + ":" + std::to_string(lineno) + ": expected a number");
    }
    std::string extra;
    if (!(ls >> debye) || (ls >> extra))
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": expected 'omega_rad_per_s dipole_debye'");
    const double d = convert(debye, Unit::debye, Unit::coulomb_meter);
    m.transitions.push_back({omega, d * d});
  }
  try {
    m.validate();
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
  return m;
}

inline MoleculeSpec load_molecule_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open molecule file '" + path.string() + "'");
  return parse_molecule(in, path.string());
}

// ------------------------------------------------------------------ config

enum class ScanSpacing { linear, log };
enum class OutputFormat { csv, json };

struct ScanSpec {
  double start = 0.0; // m
  double stop = 0.0;  // m
  int count = 0;
  ScanSpacing spacing = ScanSpacing::linear;

  std::vector<double> positions() const {
    if (count < 2)
      throw ConfigError("scan: count must be at least 2");
    if (!(start > 0.0) || !(stop > start))
      throw ConfigError("scan: need 0 < start < stop");
    std::vector<double> p(count);
    for (int i = 0; i < count; ++i) {
      const double f = double(i) / (count - 1);
      p[i] = spacing == ScanSpacing::linear
                 ? start + f * (stop - start)
                 : start * std::pow(stop / start, f);
    }
    p.front() = start;
    p.back() = stop;
    return p;
  }
};

struct ScenarioConfig {
  Geometry geometry;
  MoleculeSpec molecule;
  std::string molecule_path;
  ThermalContext thermal;
  ScanSpec scan;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;

  /// Throws ConfigError if any scan position lies outside the geometry.
  void validate() const {
    try {
      geometry::validate(geometry);
      molecule.validate();
      if (!(thermal.temperature > 0.0))
        throw DomainError("temperature must be positive");
      if (thermal.matsubara_cutoff < 0)
        throw DomainError("matsubara_cutoff must be non-negative");
      for (double p : scan.positions())
        geometry::validate_position(geometry, p);
    } catch (const DomainError &e) {
      throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
  }
};

inline OutputFormat parse_format(const std::string &s) {
  if (s == "csv")
    return OutputFormat::csv;
  if (s == "json")
    return OutputFormat::json;
  throw ConfigError("unknown output format '" + s + "' (csv|json)");
}

namespace detail {

using boost::property_tree::ptree;

template <class T>
T get_required(const ptree &pt, const std::string &key) {
  const auto v = pt.get_optional<std::string>(key);
  if (!v)
    throw ConfigError("missing key '" + key + "'");
  try {
    return boost::lexical_cast<T>(*v);
  } catch (const boost::bad_lexical_cast &) {
    throw ConfigError("bad value for '" + key + "': '" + *v + "'");
  }
}

template <class T>
std::optional<T> get_opt(const ptree &pt, const std::string &key) {
  if (!pt.get_optional<std::string>(key))
    return std::nullopt;
  return get_required<T>(pt, key);
}

// Frequency given either in eV (`<key>_ev`) or rad/s (`<key>_rad_per_s`).
inline std::optional<double> get_frequency(const ptree &pt, const std::string &key) {
  if (auto ev = get_opt<double>(pt, key + "_ev"))
    return ev_to_rad_per_s(*ev);
  return get_opt<double>(pt, key + "_rad_per_s");
}

inline PermittivityModel parse_material(const ptree &pt) {
  const std::string kind = pt.get<std::string>("material.kind", "gold");
  if (kind == "gold")
    return PermittivityModel::gold();
  if (kind == "perfect_conductor")
    return PermittivityModel::perfect_conductor();
  if (kind == "drude") {
    const auto wp = get_frequency(pt, "material.plasma_frequency");
    const auto g = get_frequency(pt, "material.relaxation_rate");
    if (!wp || !g)
      throw ConfigError("drude material needs plasma_frequency_{ev|rad_per_s} "
                        "and relaxation_rate_{ev|rad_per_s}");
    if (!(*wp > 0.0) || !(*g >= 0.0))
      throw ConfigError("drude material: need plasma frequency > 0 and "
                        "relaxation rate >= 0");
    return PermittivityModel::drude(*wp, *g);
  }
  if (kind == "constant") {
    const double re = get_required<double>(pt, "material.eps_real");
    const double im = pt.get<double>("material.eps_imag", 0.0);
    if (im < 0.0)
      throw ConfigError("constant material: eps_imag must be non-negative");
    return PermittivityModel::constant({re, im});
  }
  throw ConfigError("unknown material kind '" + kind +
                    "' (gold|drude|perfect_conductor|constant)");
}

inline Geometry parse_geometry(const ptree &pt, const PermittivityModel &mat) {
  const std::string type = get_required<std::string>(pt, "geometry.type");
  if (type == "half_space")
    return HalfSpaceGeometry{mat};
  if (type == "cavity")
    return CavityGeometry{mat, 1e-6 * get_required<double>(pt, "geometry.width_um")};
  if (type == "cylinder")
    return CylinderGeometry{mat, 1e-6 * get_required<double>(pt, "geometry.radius_um"),
                            pt.get<int>("geometry.n_max", 0)};
  throw ConfigError("unknown geometry type '" + type +
                    "' (half_space|cavity|cylinder)");
}

} // namespace detail

/// Reads an INI scenario. A relative molecule path resolves against the config
/// file's directory; the output path is taken as given.
inline ScenarioConfig load_config(const std::filesystem::path &path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error &e) {
    if (!std::filesystem::exists(path))
      throw IoError("cannot open config '" + path.string() + "'");
    throw ConfigError("config '" + path.string() + "': " + e.message() +
                      " (line " + std::to_string(e.line()) + ")");
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string &p) {
    const std::filesystem::path q(p);
    return (q.is_absolute() || base.empty() ? q : base / q).string();
  };

  ScenarioConfig c;
  try {
    const auto mat = detail::parse_material(tree);
    c.geometry = detail::parse_geometry(tree, mat);
    c.molecule_path = resolve(detail::get_required<std::string>(tree, "molecule.file"));
    c.thermal.temperature = detail::get_required<double>(tree, "thermal.temperature_K");
    c.thermal.matsubara_cutoff = tree.get<int>("thermal.matsubara_cutoff", 0);
    c.scan.start = 1e-6 * detail::get_required<double>(tree, "scan.start_um");
    c.scan.stop = 1e-6 * detail::get_required<double>(tree, "scan.stop_um");
    c.scan.count = detail::get_required<int>(tree, "scan.count");
    const std::string sp = tree.get<std::string>("scan.spacing", "linear");
    if (sp == "linear")
      c.scan.spacing = ScanSpacing::linear;
    else if (sp == "log")
      c.scan.spacing = ScanSpacing::log;
    else
      throw ConfigError("unknown scan spacing '" + sp + "' (linear|log)");
    if (auto out = tree.get_optional<std::string>("output.path"))
      c.output_path = *out;
    c.format = parse_format(tree.get<std::string>("output.format", "csv"));
  } catch (const pt::ptree_error &e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  } catch (const ConfigError &e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  c.molecule = load_molecule_file(c.molecule_path);
  c.validate();
  return c;
}

// ------------------------------------------------------------------ output

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline SampleStatus parse_status(const std::string &s) {
  for (auto st : {SampleStatus::ok, SampleStatus::resonance_warning,
                  SampleStatus::coarse_grid, SampleStatus::convergence_error})
    if (s == to_string(st))
      return st;
  throw IoError("unknown sample status '" + s + "'");
}

} // namespace detail

/// CSV with a unit-bearing header and one row per sample; positions in um.
inline void write_curve_csv(std::ostream &out, const PotentialCurve &c) {
  using detail::fmt_double;
  if (c.planar)
    out << "z_um,U_nonres_J,U_res_prop_J,U_res_evan_J,U_res_J,U_total_J,F_N,status\n";
  else
    out << "rho_um,U_nonres_J,U_res_J,U_total_J,F_N,status\n";
  for (std::size_t i = 0; i < c.positions.size(); ++i) {
    out << fmt_double(1e6 * c.positions[i]) << ',' << fmt_double(c.U_nonresonant[i]);
    if (c.planar)
      out << ',' << fmt_double(c.U_resonant_propagating[i]) << ','
          << fmt_double(c.U_resonant_evanescent[i]);
    out << ',' << fmt_double(c.U_resonant_total[i]) << ',' << fmt_double(c.U_total[i])
        << ',' << fmt_double(c.F[i]) << ',' << to_string(c.status[i]) << '\n';
  }
}

/// JSON in SI units; NaN is stored as null.
inline nlohmann::json curve_to_json(const PotentialCurve &c) {
  auto arr = [](const std::vector<double> &v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v)
      a.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
    return a;
  };
  nlohmann::json j;
  j["geometry"] = c.planar ? "planar" : "cylinder";
  j["position_unit"] = "m";
  j["positions"] = arr(c.positions);
  j["U_nonresonant_J"] = arr(c.U_nonresonant);
  if (c.planar) {
    j["U_resonant_propagating_J"] = arr(c.U_resonant_propagating);
    j["U_resonant_evanescent_J"] = arr(c.U_resonant_evanescent);
  }
  j["U_resonant_J"] = arr(c.U_resonant_total);
  j["U_total_J"] = arr(c.U_total);
  j["F_N"] = arr(c.F);
  nlohmann::json st = nlohmann::json::array();
  for (auto s : c.status)
    st.push_back(to_string(s));
  j["status"] = st;
  j["messages"] = c.messages;
  return j;
}

inline PotentialCurve curve_from_json(const nlohmann::json &j) {
  auto arr = [&](const char *key) {
    std::vector<double> v;
    for (const auto &x : j.at(key))
      v.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN()
                              : x.get<double>());
    return v;
  };
  PotentialCurve c;
  try {
    c.planar = j.at("geometry").get<std::string>() == "planar";
    c.positions = arr("positions");
    c.U_nonresonant = arr("U_nonresonant_J");
    if (c.planar) {
      c.U_resonant_propagating = arr("U_resonant_propagating_J");
      c.U_resonant_evanescent = arr("U_resonant_evanescent_J");
    }
    c.U_resonant_total = arr("U_resonant_J");
    c.U_total = arr("U_total_J");
    c.F = arr("F_N");
    for (const auto &s : j.at("status"))
      c.status.push_back(detail::parse_status(s.get<std::string>()));
    c.messages = j.at("messages").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw IoError(std::string("malformed curve JSON: ") + e.what());
  }
  return c;
}

/// Writes the curve to `path`; LF line endings, fixed column order.
inline void emit_curve(const PotentialCurve &c, OutputFormat format,
                       const std::filesystem::path &path) {
  if (path.empty())
    throw IoError("cannot write curve: empty output path ''");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  if (format == OutputFormat::csv)
    write_curve_csv(out, c);
  else
    out << curve_to_json(c).dump(2) << '\n';
  out.flush();
  if (!out)
    throw IoError("write failed for '" + path.string() + "'");
}

} // namespace cpthermal
