#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cpthermal/constants.hpp"
#include "cpthermal/errors.hpp"

namespace cpthermal {

struct Transition {
  double omega = 0.0;       // rad/s
  double dipole_sq = 0.0;   // |d_0k|^2 in (C m)^2
};

/// Ground-state particle: transition frequencies and dipole matrix elements.
struct MoleculeSpec {
  std::string name;
  std::vector<Transition> transitions;

  void validate() const {
    if (transitions.empty())
      throw DomainError("molecule '" + name + "': no transitions");
    for (const auto &t : transitions)
      if (!(t.omega > 0.0) || !(t.dipole_sq > 0.0))
        throw DomainError("molecule '" + name +
                          "': transition frequency and dipole must be positive");
  }

  double max_frequency() const {
    double w = 0.0;
    for (const auto &t : transitions)
      w = std::max(w, t.omega);
    return w;
  }
};

struct ThermalContext {
  double temperature = 300.0; // K
  int matsubara_cutoff = 0;   // 0 selects the adaptive cutoff
};

/// Bose-Einstein photon number [exp(hbar w / k_B T) - 1]^-1.
inline double photon_number(double omega, double temperature) {
  if (!(omega > 0.0))
    throw DomainError("photon_number: frequency must be positive");
  if (!(temperature > 0.0))
    throw DomainError("photon_number: temperature must be positive");
  const double x = K::hbar * omega / (K::k_B * temperature);
  if (x > 700.0)
    return 0.0;
  return 1.0 / std::expm1(x);
}

/// xi_m = 2 pi m k_B T / hbar
inline double matsubara_frequency(int m, double temperature) {
  if (m < 0)
    throw DomainError("matsubara_frequency: negative index");
  return 2.0 * K::pi * m * K::k_B * temperature / K::hbar;
}

/// Isotropic polarizability on the imaginary axis,
/// alpha(i xi) = (2 / 3 hbar) sum_k |d_0k|^2 w_k / (w_k^2 + xi^2).
inline double alpha_imag_axis(const MoleculeSpec &spec, double xi) {
  double sum = 0.0;
  for (const auto &t : spec.transitions)
    sum += t.dipole_sq * t.omega / (t.omega * t.omega + xi * xi);
  return 2.0 * sum / (3.0 * K::hbar);
}

/// Principal-value real part of alpha(omega) on the real axis. The delta
/// contributions at omega = w_k belong to the resonant potential term.
inline double alpha_real_axis_principal(const MoleculeSpec &spec,
                                        double omega) {
  if (omega < 0.0)
    throw DomainError("alpha_real_axis_principal: negative frequency");
  double sum = 0.0;
  for (const auto &t : spec.transitions) {
    if (std::abs(omega - t.omega) < 1e-12 * t.omega)
      throw DomainError("alpha_real_axis_principal: frequency coincides with "
                        "a transition");
    sum += t.dipole_sq * t.omega / (t.omega * t.omega - omega * omega);
  }
  return 2.0 * sum / (3.0 * K::hbar);
}

} // namespace cpthermal
