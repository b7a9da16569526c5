#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

#include "cpthermal/errors.hpp"

namespace cpthermal {

/// CODATA 2018 values, SI. Every module reads constants from here.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;      // J s
  static constexpr double k_B = 1.380649e-23;          // J/K
  static constexpr double c = 299792458.0;             // m/s
  static constexpr double mu_0 = 1.25663706212e-6;     // N/A^2
  static constexpr double epsilon_0 = 8.8541878128e-12; // F/m
  static constexpr double e = 1.602176634e-19;         // C
  static constexpr double pi = std::numbers::pi;
};

using K = PhysicalConstants;

enum class Unit {
  meter,
  micrometer,
  joule,
  electronvolt,
  coulomb_meter,
  debye,
  kelvin,
  rad_per_second,
  hertz,
};

namespace detail {

enum class Dimension { length, energy, dipole, temperature, frequency };

struct UnitInfo {
  Dimension dim;
  double to_si;
};

constexpr UnitInfo unit_info(Unit u) {
  switch (u) {
  case Unit::meter:
    return {Dimension::length, 1.0};
  case Unit::micrometer:
    return {Dimension::length, 1e-6};
  case Unit::joule:
    return {Dimension::energy, 1.0};
  case Unit::electronvolt:
    return {Dimension::energy, K::e};
  case Unit::coulomb_meter:
    return {Dimension::dipole, 1.0};
  case Unit::debye:
    // 1 D = 1e-21 C m^2/s divided by c
    return {Dimension::dipole, 1e-21 / K::c};
  case Unit::kelvin:
    return {Dimension::temperature, 1.0};
  case Unit::rad_per_second:
    return {Dimension::frequency, 1.0};
  case Unit::hertz:
    return {Dimension::frequency, 2.0 * K::pi};
  }
  return {Dimension::length, 1.0};
}

} // namespace detail

/// Linear conversion between dimensionally compatible units.
inline double convert(double value, Unit from, Unit to) {
  const auto a = detail::unit_info(from);
  const auto b = detail::unit_info(to);
  if (a.dim != b.dim)
    throw DomainError("convert: incompatible unit dimensions");
  if (from == to)
    return value;
  return value * (a.to_si / b.to_si);
}

/// Energy in eV expressed as an angular frequency E/hbar.
inline double ev_to_rad_per_s(double ev) { return ev * K::e / K::hbar; }

} // namespace cpthermal
