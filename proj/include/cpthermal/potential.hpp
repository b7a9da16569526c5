#pragma once

// Thermal Casimir-Polder potential of a ground-state molecule,
//
//   U = mu0 kT sum'_m xi_m^2 alpha(i xi_m) Tr G^(1)(i xi_m)
//     + (mu0/3) sum_k |d_0k|^2 w_k^2 N(w_k, T) Re Tr G^(1)(w_k),
//
// for a planar half-space, a planar cavity or a cylindrical cavity, and the
// force F = -dU/ds along the scan coordinate s.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cpthermal/constants.hpp"
#include "cpthermal/cylinder.hpp"
#include "cpthermal/errors.hpp"
#include "cpthermal/materials.hpp"
#include "cpthermal/molecule.hpp"
#include "cpthermal/planar.hpp"

namespace cpthermal {

struct HalfSpaceGeometry {
  PermittivityModel material = PermittivityModel::gold();
};

struct CavityGeometry {
  PermittivityModel material = PermittivityModel::gold();
  double width = 0.0; // m
};

struct CylinderGeometry {
  PermittivityModel material = PermittivityModel::gold();
  double radius = 0.0; // m
  int n_max = 0;       // 0: adaptive azimuthal truncation
};

using Geometry = std::variant<HalfSpaceGeometry, CavityGeometry, CylinderGeometry>;

/// Backend adapters. The position is z for planar geometries and rho for the
/// cylinder.
namespace geometry {

inline PlanarConfig planar_config(const HalfSpaceGeometry &g, double z) {
  PlanarConfig c;
  c.material = g.material;
  c.z = z;
  return c;
}

inline PlanarConfig planar_config(const CavityGeometry &g, double z) {
  PlanarConfig c;
  c.geometry = PlanarKind::cavity;
  c.width = g.width;
  c.material = g.material;
  c.z = z;
  return c;
}

inline CylinderConfig cylinder_config(const CylinderGeometry &g, double rho) {
  CylinderConfig c;
  c.radius = g.radius;
  c.material = g.material;
  c.phi = rho / g.radius;
  c.n_max = g.n_max;
  return c;
}

inline bool is_planar(const Geometry &g) {
  return !std::holds_alternative<CylinderGeometry>(g);
}

inline const PermittivityModel &material(const Geometry &g) {
  return std::visit([](const auto &x) -> const PermittivityModel & {
    return x.material;
  }, g);
}

inline void validate(const Geometry &g) {
  if (const auto *c = std::get_if<CavityGeometry>(&g); c && !(c->width > 0.0))
    throw DomainError("cavity: width must be positive");
  if (const auto *c = std::get_if<CylinderGeometry>(&g); c && !(c->radius > 0.0))
    throw DomainError("cylinder: radius must be positive");
}

inline void validate_position(const Geometry &g, double pos) {
  validate(g);
  std::visit([pos](const auto &x) {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, CylinderGeometry>)
      cylinder_config(x, pos).validate();
    else
      planar_config(x, pos).validate();
  }, g);
  if (std::holds_alternative<CylinderGeometry>(g) && pos < 0.0)
    throw DomainError("cylinder: rho must be non-negative");
}

/// Distance to the nearest wall; sets the decay of the Matsubara terms.
inline double wall_distance(const Geometry &g, double pos) {
  return std::visit([pos](const auto &x) -> double {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, HalfSpaceGeometry>)
      return pos;
    else if constexpr (std::is_same_v<T, CavityGeometry>)
      return std::min(pos, x.width - pos);
    else
      return x.radius - pos;
  }, g);
}

/// Real-frequency trace; the split is meaningful for planar backends only.
inline GreenTraceSplit real_trace(const Geometry &g, double omega, double pos) {
  return std::visit([&](const auto &x) -> GreenTraceSplit {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, HalfSpaceGeometry>)
      return halfspace_trace(planar_config(x, pos), omega);
    else if constexpr (std::is_same_v<T, CavityGeometry>)
      return cavity_trace(planar_config(x, pos), omega);
    else {
      GreenTraceSplit s;
      s.propagating = cylinder_trace(cylinder_config(x, pos), omega);
      return s;
    }
  }, g);
}

/// xi^2 Tr G^(1)(i xi), xi >= 0.
inline double scaled_trace_imag(const Geometry &g, double xi, double pos) {
  return std::visit([&](const auto &x) -> double {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, HalfSpaceGeometry>)
      return halfspace_scaled_trace_imag(planar_config(x, pos), xi);
    else if constexpr (std::is_same_v<T, CavityGeometry>)
      return cavity_scaled_trace_imag(planar_config(x, pos), xi);
    else
      return cylinder_scaled_trace_imag(cylinder_config(x, pos), xi);
  }, g);
}

} // namespace geometry

namespace detail {

// exp(-2 xi d / c) below e^-80: the term is zero in double precision
// relative to the leading ones.
inline constexpr double kMatsubaraDecay = 80.0;
inline constexpr double kMatsubaraRelTol = 1e-8;
inline constexpr int kMatsubaraMax = 1 << 22;

inline int initial_matsubara_cutoff(const MoleculeSpec &mol,
                                    const ThermalContext &th, double d) {
  const double w = std::max(mol.max_frequency(), K::c / d);
  const double m = 10.0 * K::hbar * w / (2.0 * K::pi * K::k_B * th.temperature);
  return static_cast<int>(std::clamp(std::ceil(m), 1.0, 1e6));
}

} // namespace detail

struct NonresonantResult {
  double value = 0.0;
  int cutoff = 0; // last Matsubara index included
};

/// mu0 kT sum'_{m=0}^{M} alpha(i xi_m) [xi_m^2 Tr G^(1)(i xi_m)], with M
/// doubled until the sum changes by less than 1e-8 relative. A positive
/// thermal.matsubara_cutoff fixes M instead.
inline NonresonantResult nonresonant_potential_detail(const MoleculeSpec &mol,
                                                      const Geometry &geo,
                                                      const ThermalContext &th,
                                                      double pos) {
  mol.validate();
  geometry::validate_position(geo, pos);
  if (!(th.temperature > 0.0))
    throw DomainError("nonresonant_potential: temperature must be positive");
  if (geometry::material(geo).is_vacuum())
    return {0.0, 0};
  const double d = geometry::wall_distance(geo, pos);

  std::vector<double> terms;
  auto term = [&](int m) -> double {
    const double xi = matsubara_frequency(m, th.temperature);
    if (2.0 * xi * d / K::c > detail::kMatsubaraDecay)
      return 0.0;
    const double w = m == 0 ? 0.5 : 1.0;
    return w * alpha_imag_axis(mol, xi) * geometry::scaled_trace_imag(geo, xi, pos);
  };
  auto extend = [&](int M) {
    for (int m = static_cast<int>(terms.size()); m <= M; ++m)
      terms.push_back(term(m));
  };
  // summed from the top so that the total does not depend on when doubling
  // stopped
  auto partial = [&](int M) {
    double s = 0.0;
    for (int m = M; m >= 0; --m)
      s += terms[m];
    return s;
  };
  const double pref = K::mu_0 * K::k_B * th.temperature;

  if (th.matsubara_cutoff > 0) {
    extend(th.matsubara_cutoff);
    return {pref * partial(th.matsubara_cutoff), th.matsubara_cutoff};
  }
  int M = detail::initial_matsubara_cutoff(mol, th, d);
  extend(M);
  double prev = partial(M);
  for (;;) {
    const int M2 = 2 * M;
    if (M2 > detail::kMatsubaraMax)
      throw ConvergenceError("nonresonant_potential: Matsubara sum did not "
                             "converge",
                             pref * prev, 0.0);
    // once the decay cut is passed every new term is exactly zero
    const double xi_next = matsubara_frequency(M + 1, th.temperature);
    if (2.0 * xi_next * d / K::c > detail::kMatsubaraDecay)
      return {pref * prev, M};
    extend(M2);
    const double cur = partial(M2);
    if (std::abs(cur - prev) <= detail::kMatsubaraRelTol * std::abs(cur)) {
      return {pref * cur, M2};
    }
    prev = cur;
    M = M2;
  }
}

inline double nonresonant_potential(const MoleculeSpec &mol, const Geometry &geo,
                                    const ThermalContext &th, double pos) {
  return nonresonant_potential_detail(mol, geo, th, pos).value;
}

struct ResonantPotential {
  double total = 0.0;
  std::optional<double> propagating; // planar backends
  std::optional<double> evanescent;
  bool resonance_warning = false;
};

/// (mu0/3) sum_k |d_0k|^2 w_k^2 N(w_k, T) Re Tr G^(1)(w_k).
inline ResonantPotential resonant_potential(const MoleculeSpec &mol,
                                            const Geometry &geo,
                                            const ThermalContext &th,
                                            double pos) {
  mol.validate();
  geometry::validate_position(geo, pos);
  if (!(th.temperature > 0.0))
    throw DomainError("resonant_potential: temperature must be positive");
  ResonantPotential out;
  const bool planar = geometry::is_planar(geo);
  if (planar) {
    out.propagating = 0.0;
    out.evanescent = 0.0;
  }
  if (geometry::material(geo).is_vacuum())
    return out;
  for (const auto &tr : mol.transitions) {
    const double n = photon_number(tr.omega, th.temperature);
    if (n == 0.0)
      continue;
    const double w = K::mu_0 / 3.0 * tr.dipole_sq * tr.omega * tr.omega * n;
    const auto s = geometry::real_trace(geo, tr.omega, pos);
    out.resonance_warning = out.resonance_warning || s.resonance_warning;
    if (planar) {
      *out.propagating += w * s.propagating.real();
      *out.evanescent += w * s.evanescent.real();
    }
    out.total += w * s.total().real();
  }
  return out;
}

/// F = -dU/ds from sampled U, with polynomial-exact weights on any grid:
/// five-point stencils inside, three-point at the ends.
struct ForceResult {
  std::vector<double> force;
  std::vector<bool> coarse; // Richardson estimate above 1% of local |F|
};

namespace detail {

// Weights of the first derivative at x0 for nodes x: derivatives of the
// Lagrange basis polynomials.
inline std::vector<double> derivative_weights(double x0,
                                              const std::vector<double> &x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k)
        continue;
      double term = 1.0 / (x[k] - x[j]);
      for (std::size_t m = 0; m < n; ++m)
        if (m != k && m != j)
          term *= (x0 - x[m]) / (x[k] - x[m]);
      w[k] += term;
    }
  }
  return w;
}

inline double stencil_derivative(const std::vector<double> &s,
                                 const std::vector<double> &u, std::size_t at,
                                 std::size_t lo, std::size_t count) {
  std::vector<double> xs(s.begin() + lo, s.begin() + lo + count);
  const auto w = derivative_weights(s[at], xs);
  double d = 0.0;
  for (std::size_t k = 0; k < count; ++k)
    d += w[k] * u[lo + k];
  return d;
}

inline bool geometric_grid(const std::vector<double> &p) {
  if (p.size() < 3 || !(p.front() > 0.0))
    return false;
  const double r = p[1] / p[0];
  if (std::abs(r - 1.0) < 1e-12)
    return false;
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (std::abs(p[i + 1] / p[i] - r) > 1e-9 * r)
      return false;
  return true;
}

} // namespace detail

inline ForceResult force_from_potential(const std::vector<double> &pos,
                                        const std::vector<double> &u) {
  const std::size_t n = pos.size();
  if (n != u.size())
    throw DomainError("force_from_potential: size mismatch");
  if (n < 5)
    throw DomainError("force_from_potential: need at least 5 samples");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(pos[i + 1] > pos[i]))
      throw DomainError("force_from_potential: grid must increase strictly");

  // Geometric grids are differenced in ln(s): dU/ds = (dU/d ln s) / s.
  const bool logarithmic = detail::geometric_grid(pos);
  std::vector<double> s(pos);
  if (logarithmic)
    for (auto &v : s)
      v = std::log(v);

  ForceResult out;
  out.force.resize(n);
  out.coarse.assign(n, false);
  std::vector<double> low(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d4, d2;
    if (i >= 2 && i + 2 < n) {
      d4 = detail::stencil_derivative(s, u, i, i - 2, 5);
      d2 = detail::stencil_derivative(s, u, i, i - 1, 3);
    } else {
      const std::size_t lo = i == 0 ? 0 : (i + 1 == n ? n - 3 : i - 1);
      d4 = detail::stencil_derivative(s, u, i, lo, 3);
      // one order lower on the same side for the error estimate
      const std::size_t lo2 = i + 1 == n ? n - 2 : (i == 0 ? 0 : i - 1);
      d2 = detail::stencil_derivative(s, u, i, lo2, 2);
    }
    const double scale = logarithmic ? 1.0 / pos[i] : 1.0;
    out.force[i] = -d4 * scale;
    low[i] = -d2 * scale;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double local = 0.0;
    for (std::size_t j = (i >= 2 ? i - 2 : 0); j < std::min(n, i + 3); ++j)
      local = std::max(local, std::abs(out.force[j]));
    if (std::isfinite(out.force[i]) &&
        std::abs(out.force[i] - low[i]) > 0.01 * local)
      out.coarse[i] = true;
  }
  return out;
}

enum class SampleStatus { ok, resonance_warning, coarse_grid, convergence_error };

inline const char *to_string(SampleStatus s) {
  switch (s) {
  case SampleStatus::ok:
    return "ok";
  case SampleStatus::resonance_warning:
    return "resonance_warning";
  case SampleStatus::coarse_grid:
    return "coarse_grid";
  case SampleStatus::convergence_error:
    return "convergence_error";
  }
  return "unknown";
}

struct PotentialCurve {
  bool planar = true;
  std::vector<double> positions;              // m
  std::vector<double> U_nonresonant;          // J
  std::vector<double> U_resonant_propagating; // J, planar only
  std::vector<double> U_resonant_evanescent;  // J, planar only
  std::vector<double> U_resonant_total;       // J
  std::vector<double> U_total;                // J
  std::vector<double> F;                      // N
  std::vector<SampleStatus> status;
  std::vector<std::string> messages; // per sample, empty when ok
};

struct EngineOptions {
  unsigned threads = 1;
};

/// Evaluates all components on the scan grid; samples run in parallel and a
/// failing sample is reported in its status instead of aborting the curve.
inline PotentialCurve total_potential_curve(const MoleculeSpec &mol,
                                            const Geometry &geo,
                                            const ThermalContext &th,
                                            const std::vector<double> &scan,
                                            const EngineOptions &opt = {}) {
  mol.validate();
  if (scan.size() < 2)
    throw DomainError("total_potential_curve: need at least 2 positions");
  for (std::size_t i = 0; i + 1 < scan.size(); ++i)
    if (!(scan[i + 1] > scan[i]))
      throw DomainError("total_potential_curve: scan grid must increase "
                        "strictly");
  for (double p : scan)
    geometry::validate_position(geo, p);

  const std::size_t n = scan.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  PotentialCurve c;
  c.planar = geometry::is_planar(geo);
  c.positions = scan;
  c.U_nonresonant.assign(n, nan);
  c.U_resonant_total.assign(n, nan);
  if (c.planar) {
    c.U_resonant_propagating.assign(n, nan);
    c.U_resonant_evanescent.assign(n, nan);
  }
  c.U_total.assign(n, nan);
  c.F.assign(n, nan);
  c.status.assign(n, SampleStatus::ok);
  c.messages.assign(n, "");

  auto run = [&](std::size_t i) {
    try {
      const double unr = nonresonant_potential(mol, geo, th, scan[i]);
      const auto ures = resonant_potential(mol, geo, th, scan[i]);
      c.U_nonresonant[i] = unr;
      c.U_resonant_total[i] = ures.total;
      if (c.planar) {
        c.U_resonant_propagating[i] = *ures.propagating;
        c.U_resonant_evanescent[i] = *ures.evanescent;
      }
      c.U_total[i] = unr + ures.total;
      if (ures.resonance_warning) {
        c.status[i] = SampleStatus::resonance_warning;
        c.messages[i] = "near a cavity resonance";
      }
    } catch (const ConvergenceError &e) {
      c.status[i] = SampleStatus::convergence_error;
      c.messages[i] = e.what();
    }
  };

  const unsigned threads =
      std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i)
      run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;)
          run(i);
      });
  }

  if (n >= 5) {
    const auto f = force_from_potential(scan, c.U_total);
    for (std::size_t i = 0; i < n; ++i) {
      c.F[i] = f.force[i];
      if (f.coarse[i] && c.status[i] == SampleStatus::ok) {
        c.status[i] = SampleStatus::coarse_grid;
        c.messages[i] = "force: Richardson estimate above 1% of local |F|";
      }
    }
  }
  return c;
}

} // namespace cpthermal
