#pragma once

#include <cmath>
#include <complex>

#include "cpthermal/constants.hpp"
#include "cpthermal/errors.hpp"
#include "cpthermal/special_functions.hpp"

namespace cpthermal {

enum class MaterialKind { drude, perfect_conductor, constant };

/// Permittivity model of a homogeneous, non-magnetic body.
struct PermittivityModel {
  MaterialKind kind = MaterialKind::drude;
  double plasma_frequency = 0.0; // rad/s
  double relaxation_rate = 0.0;  // rad/s
  cplx value{1.0, 0.0};          // constant model

  static PermittivityModel drude(double omega_p, double gamma) {
    return {MaterialKind::drude, omega_p, gamma, {}};
  }
  static PermittivityModel perfect_conductor() {
    return {MaterialKind::perfect_conductor, 0.0, 0.0, {}};
  }
  static PermittivityModel constant(cplx eps) {
    return {MaterialKind::constant, 0.0, 0.0, eps};
  }
  /// Gold: hbar omega_p = 9.0 eV, hbar gamma = 35 meV.
  static PermittivityModel gold() {
    return drude(ev_to_rad_per_s(9.0), ev_to_rad_per_s(0.035));
  }

  bool is_vacuum() const {
    return kind == MaterialKind::constant && value == cplx(1.0, 0.0);
  }
};

/// eps on one frequency axis; `infinite` marks the perfect-conductor limit.
template <class T> struct PermittivityValue {
  bool infinite = false;
  T value{};
};

inline PermittivityValue<cplx> eps_real_axis(const PermittivityModel &m,
                                             double omega) {
  if (!(omega > 0.0))
    throw DomainError("eps_real_axis: frequency must be positive");
  switch (m.kind) {
  case MaterialKind::perfect_conductor:
    return {true, {}};
  case MaterialKind::constant:
    return {false, m.value};
  case MaterialKind::drude: {
    const double wp2 = m.plasma_frequency * m.plasma_frequency;
    return {false, 1.0 - wp2 / cplx(omega * omega, m.relaxation_rate * omega)};
  }
  }
  return {};
}

/// eps(i xi); at xi = 0 the Drude value diverges and is reported as infinite.
inline PermittivityValue<double> eps_imag_axis(const PermittivityModel &m,
                                               double xi) {
  if (xi < 0.0)
    throw DomainError("eps_imag_axis: negative imaginary frequency");
  switch (m.kind) {
  case MaterialKind::perfect_conductor:
    return {true, 0.0};
  case MaterialKind::constant:
    if (m.value.imag() != 0.0)
      throw DomainError("eps_imag_axis: constant permittivity must be real");
    return {false, m.value.real()};
  case MaterialKind::drude:
    if (xi == 0.0)
      return {true, 0.0};
    return {false, 1.0 + m.plasma_frequency * m.plasma_frequency /
                             (xi * xi + m.relaxation_rate * xi)};
  }
  return {};
}

/// Static (xi -> 0) limit relevant to the zeroth Matsubara term. Drude and
/// perfect conductors behave as ideal metals there; a constant dielectric
/// keeps its value.
inline PermittivityValue<double> eps_static_limit(const PermittivityModel &m) {
  if (m.kind == MaterialKind::constant)
    return eps_imag_axis(m, 0.0);
  return {true, 0.0};
}

} // namespace cpthermal
