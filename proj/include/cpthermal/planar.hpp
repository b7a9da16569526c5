#pragma once

// Scattering Green-tensor traces Tr G^(1)(r, r, w) for a half-space and a
// symmetric planar cavity. The transverse-momentum integral is split at
// q = w/c into a propagating part (q < w/c) and an evanescent part.
//
// Convention: r_s -> -1, r_p -> +1 for a perfect mirror. With this choice the
// single-wall trace reads
//
//   Tr G^(1) = (i/4pi) int_0^inf q dq / beta [r_s + r_p - 2 beta^2 c^2/w^2 r_p]
//              exp(2 i beta z),   beta = sqrt(w^2/c^2 - q^2), Im beta >= 0.
//
// Propagating part: substitute beta = k u, u in [0, 1].
// Evanescent part:  beta = i kappa, q dq / beta = -i dkappa.

#include <cmath>
#include <complex>
#include <vector>

#include "cpthermal/constants.hpp"
#include "cpthermal/errors.hpp"
#include "cpthermal/materials.hpp"
#include "cpthermal/numerics.hpp"

namespace cpthermal {

enum class PlanarKind { half_space, cavity };
enum class FrequencyAxis { real, imaginary };

struct PlanarConfig {
  PlanarKind geometry = PlanarKind::half_space;
  double width = 0.0; // cavity width a, m
  PermittivityModel material = PermittivityModel::gold();
  double z = 0.0; // distance from the near wall, m

  void validate() const {
    if (!(z > 0.0))
      throw DomainError("planar: position must satisfy z > 0");
    if (geometry == PlanarKind::cavity && !(z < width))
      throw DomainError("planar cavity: position must satisfy 0 < z < a");
  }
};

struct GreenTraceSplit {
  cplx propagating{};
  cplx evanescent{};
  bool resonance_warning = false;

  cplx total() const { return propagating + evanescent; }
};

struct FresnelPair {
  cplx r_s{};
  cplx r_p{};
};

namespace detail {

inline FresnelPair fresnel_from_beta(const PermittivityValue<cplx> &eps,
                                     cplx beta, cplx beta1) {
  if (eps.infinite)
    return {-1.0, 1.0};
  const cplx e = eps.value;
  return {(beta - beta1) / (beta + beta1),
          (e * beta - beta1) / (e * beta + beta1)};
}

inline cplx upper_sqrt(cplx v) {
  cplx s = std::sqrt(v);
  return s.imag() < 0.0 ? -s : s;
}

} // namespace detail

/// Fresnel coefficients at transverse momentum q. On the imaginary axis the
/// first argument is xi and the coefficients are real.
inline FresnelPair fresnel(const PermittivityModel &model, double frequency,
                           double q, FrequencyAxis axis) {
  if (q < 0.0)
    throw DomainError("fresnel: negative transverse momentum");
  if (axis == FrequencyAxis::real) {
    const auto eps = eps_real_axis(model, frequency);
    const double k = frequency / K::c;
    const cplx beta = detail::upper_sqrt(cplx(k * k - q * q, 0.0));
    if (eps.infinite)
      return {-1.0, 1.0};
    const cplx beta1 = detail::upper_sqrt(eps.value * (k * k) - q * q);
    return detail::fresnel_from_beta(eps, beta, beta1);
  }
  if (frequency < 0.0)
    throw DomainError("fresnel: negative imaginary frequency");
  const auto eps = frequency == 0.0 ? eps_static_limit(model)
                                    : eps_imag_axis(model, frequency);
  if (eps.infinite)
    return {-1.0, 1.0};
  const double kk = frequency / K::c;
  const double kappa = std::sqrt(kk * kk + q * q);
  const double kappa1 = std::sqrt(eps.value * kk * kk + q * q);
  if (kappa + kappa1 == 0.0) // xi = q = 0
    return {0.0, (eps.value - 1.0) / (eps.value + 1.0)};
  return {(kappa - kappa1) / (kappa + kappa1),
          (eps.value * kappa - kappa1) / (eps.value * kappa + kappa1)};
}

namespace detail {

// Real-axis integrand in q for signed frequency; beta continued from the
// upper half plane so that beta(-w) = -conj(beta(w)).
inline cplx trace_q_integrand(cplx eps, double omega, double q, double z) {
  const double k = omega / K::c;
  cplx beta = std::sqrt(cplx(k * k - q * q, 0.0));
  if (q < std::abs(k) && omega < 0.0)
    beta = -beta;
  cplx beta1 = std::sqrt(cplx(eps * (k * k)) - q * q);
  if (beta1.imag() < 0.0 || (beta1.imag() == 0.0 && omega < 0.0))
    beta1 = -beta1;
  const auto r = fresnel_from_beta({false, eps}, beta, beta1);
  const cplx bracket = r.r_s + r.r_p - 2.0 * beta * beta / (k * k) * r.r_p;
  return cplx(0.0, 1.0 / (4.0 * K::pi)) * q / beta * bracket *
         std::exp(cplx(0.0, 2.0) * beta * z);
}

// Coefficients of one polarization inside a symmetric cavity, given the
// single-wall reflection r, phase factors and trace weight tau.
inline cplx cavity_bracket(cplx r, cplx tau, cplx e_z, cplx e_az, cplx e_a,
                           bool &warn, bool real_axis) {
  const cplx r2e = r * r * e_a;
  const cplx d = 1.0 - r2e;
  if (real_axis && std::abs(d) < 1e-8)
    warn = true;
  return (2.0 * r2e + r * tau * (e_z + e_az)) / d;
}

struct PlanarRealSetup {
  PermittivityValue<cplx> eps;
  double k;
  double inv_sqrt_eps; // scale of the p-wave structure near grazing
};

inline PlanarRealSetup planar_real_setup(const PermittivityModel &m,
                                         double omega) {
  const auto eps = eps_real_axis(m, omega);
  const double k = omega / K::c;
  const double s = eps.infinite ? 0.0 : 1.0 / std::sqrt(std::abs(eps.value));
  return {eps, k, s};
}

// Reflection coefficients on the propagating branch, beta = k u.
inline FresnelPair fresnel_u(const PlanarRealSetup &s, double u) {
  if (s.eps.infinite)
    return {-1.0, 1.0};
  const cplx beta = s.k * u;
  const cplx beta1 = s.k * upper_sqrt(s.eps.value - 1.0 + u * u);
  return fresnel_from_beta(s.eps, beta, beta1);
}

// Reflection coefficients on the evanescent branch, beta = i kappa.
inline FresnelPair fresnel_kappa(const PlanarRealSetup &s, double kappa) {
  if (s.eps.infinite)
    return {-1.0, 1.0};
  const cplx beta{0.0, kappa};
  const cplx beta1 =
      upper_sqrt((s.eps.value - 1.0) * (s.k * s.k) - kappa * kappa);
  return fresnel_from_beta(s.eps, beta, beta1);
}

inline std::vector<double> propagating_breaks(const PlanarRealSetup &s,
                                              double longest_path) {
  std::vector<double> pts;
  // one panel per period of exp(2 i k u L)
  const double period = K::pi / (s.k * longest_path);
  for (double u = period; u < 1.0; u += period)
    pts.push_back(u);
  for (double f : {1.0, 4.0, 16.0, 64.0})
    if (s.inv_sqrt_eps > 0.0)
      pts.push_back(f * s.inv_sqrt_eps);
  return make_breaks(std::move(pts), 0.0, 1.0);
}

inline std::vector<double> evanescent_breaks(double z, double kappa_max) {
  std::vector<double> pts;
  for (double f : {0.25, 1.0, 3.0, 8.0, 16.0})
    pts.push_back(f / z);
  return make_breaks(std::move(pts), 0.0, kappa_max);
}

inline constexpr double kDecayCutoff = 30.0; // exp(-2 kappa z) < e^-60

inline QuadOptions planar_quad(const char *what) {
  QuadOptions o;
  o.rel_tol = 1e-11;
  o.what = what;
  return o;
}

} // namespace detail

/// Real-frequency half-space trace with propagating/evanescent split.
inline GreenTraceSplit halfspace_trace(const PlanarConfig &cfg, double omega) {
  cfg.validate();
  if (cfg.material.is_vacuum())
    return {};
  const auto s = detail::planar_real_setup(cfg.material, omega);
  const double z = cfg.z;
  const cplx ik = cplx(0.0, 1.0) * s.k;

  auto prop = [&](double u) {
    const auto r = detail::fresnel_u(s, u);
    const cplx bracket = r.r_s + r.r_p - 2.0 * u * u * r.r_p;
    return bracket * std::exp(2.0 * ik * z * u);
  };
  auto evan = [&](double kappa) {
    const auto r = detail::fresnel_kappa(s, kappa);
    const cplx bracket =
        r.r_s + r.r_p + 2.0 * kappa * kappa / (s.k * s.k) * r.r_p;
    return bracket * std::exp(-2.0 * kappa * z);
  };

  const auto pb = detail::propagating_breaks(s, z);
  const auto eb = detail::evanescent_breaks(z, detail::kDecayCutoff / z);
  const auto p = integrate_panels(prop, std::span<const double>(pb),
                                  detail::planar_quad("halfspace propagating"));
  const auto e = integrate_panels(evan, std::span<const double>(eb),
                                  detail::planar_quad("halfspace evanescent"));
  GreenTraceSplit out;
  out.propagating = ik / (4.0 * K::pi) * p.value;
  out.evanescent = e.value / (4.0 * K::pi);
  return out;
}

/// xi^2 Tr G^(1)(r, r, i xi), finite as xi -> 0 and evaluated there through
/// the static reflection limit.
inline double halfspace_scaled_trace_imag(const PlanarConfig &cfg, double xi) {
  cfg.validate();
  if (xi < 0.0)
    throw DomainError("halfspace_trace_imag: negative imaginary frequency");
  if (cfg.material.is_vacuum())
    return 0.0;
  const double z = cfg.z;
  const double c2 = K::c * K::c;
  if (xi == 0.0) {
    const double rp0 = fresnel(cfg.material, 0.0, 0.0, FrequencyAxis::imaginary).r_p.real();
    return -c2 * rp0 / (8.0 * K::pi * z * z * z);
  }
  const double kk = xi / K::c;
  // kappa = kk + s; the common factor exp(-2 kk z) is pulled out.
  auto f = [&](double sdist) {
    const double kappa = kk + sdist;
    const double q = std::sqrt(sdist * (sdist + 2.0 * kk));
    const auto r = fresnel(cfg.material, xi, q, FrequencyAxis::imaginary);
    const double rs = r.r_s.real(), rp = r.r_p.real();
    return (xi * xi * (rs + rp) - 2.0 * kappa * kappa * c2 * rp) *
           std::exp(-2.0 * sdist * z);
  };
  const auto b = detail::evanescent_breaks(z, detail::kDecayCutoff / z);
  const auto res = integrate_panels(f, std::span<const double>(b),
                                    detail::planar_quad("halfspace imaginary axis"));
  return res.value * std::exp(-2.0 * kk * z) / (4.0 * K::pi);
}

/// Tr G^(1)(r, r, i xi) for xi > 0; real.
inline double halfspace_trace_imag(const PlanarConfig &cfg, double xi) {
  if (!(xi > 0.0))
    throw DomainError("halfspace_trace_imag: needs xi > 0; use the scaled form "
                      "at xi = 0");
  return halfspace_scaled_trace_imag(cfg, xi) / (xi * xi);
}

/// Real-frequency trace inside a cavity of two identical walls at 0 and a.
inline GreenTraceSplit cavity_trace(const PlanarConfig &cfg, double omega) {
  cfg.validate();
  if (cfg.material.is_vacuum())
    return {};
  const auto s = detail::planar_real_setup(cfg.material, omega);
  const double z = cfg.z, a = cfg.width;
  const cplx ik = cplx(0.0, 1.0) * s.k;
  bool warn = false;

  auto prop = [&](double u) {
    const auto r = detail::fresnel_u(s, u);
    const cplx e_z = std::exp(2.0 * ik * u * z);
    const cplx e_az = std::exp(2.0 * ik * u * (a - z));
    const cplx e_a = std::exp(2.0 * ik * u * a);
    return detail::cavity_bracket(r.r_s, 1.0, e_z, e_az, e_a, warn, true) +
           detail::cavity_bracket(r.r_p, 1.0 - 2.0 * u * u, e_z, e_az, e_a,
                                  warn, true);
  };
  auto evan = [&](double kappa) {
    const auto r = detail::fresnel_kappa(s, kappa);
    const double e_z = std::exp(-2.0 * kappa * z);
    const double e_az = std::exp(-2.0 * kappa * (a - z));
    const double e_a = std::exp(-2.0 * kappa * a);
    const double tau_p = 1.0 + 2.0 * kappa * kappa / (s.k * s.k);
    return detail::cavity_bracket(r.r_s, 1.0, e_z, e_az, e_a, warn, true) +
           detail::cavity_bracket(r.r_p, tau_p, e_z, e_az, e_a, warn, true);
  };

  auto pb = detail::propagating_breaks(s, a);
  // Fabry-Perot modes 2 k u a = 2 pi n
  for (double u = K::pi / (s.k * a); u < 1.0; u += K::pi / (s.k * a)) {
    pb.push_back(u * (1.0 - 1e-4));
    pb.push_back(u * (1.0 + 1e-4));
  }
  pb = make_breaks(std::move(pb), 0.0, 1.0);
  const double zmin = std::min(z, a - z);
  const auto eb = detail::evanescent_breaks(zmin, detail::kDecayCutoff / zmin);
  auto opt = detail::planar_quad("cavity propagating");
  opt.max_depth = 24;
  const auto p = integrate_panels(prop, std::span<const double>(pb), opt);
  const auto e = integrate_panels(evan, std::span<const double>(eb),
                                  detail::planar_quad("cavity evanescent"));
  GreenTraceSplit out;
  out.propagating = ik / (4.0 * K::pi) * p.value;
  out.evanescent = e.value / (4.0 * K::pi);
  out.resonance_warning = warn;
  return out;
}

/// xi^2 Tr G^(1)(r, r, i xi) inside the cavity, xi >= 0.
inline double cavity_scaled_trace_imag(const PlanarConfig &cfg, double xi) {
  cfg.validate();
  if (xi < 0.0)
    throw DomainError("cavity_trace_imag: negative imaginary frequency");
  if (cfg.material.is_vacuum())
    return 0.0;
  const double z = cfg.z, a = cfg.width;
  const double c2 = K::c * K::c;
  const double kk = xi / K::c;
  const double zmin = std::min(z, a - z);
  bool warn = false;
  auto f = [&](double sdist) {
    const double kappa = kk + sdist;
    const double q = std::sqrt(sdist * (sdist + 2.0 * kk));
    const auto r = fresnel(cfg.material, xi, q, FrequencyAxis::imaginary);
    // exp(-2 kk zmin) is factored out of every exponential
    const double e_z = std::exp(-2.0 * kappa * z + 2.0 * kk * zmin);
    const double e_az = std::exp(-2.0 * kappa * (a - z) + 2.0 * kk * zmin);
    const double e_a = std::exp(-2.0 * kappa * a);
    // xi^2 times each polarization bracket; the double-reflection term of
    // the scaled trace carries xi^2 e_a, which is rescaled consistently.
    const double rs = r.r_s.real(), rp = r.r_p.real();
    const double ds = 1.0 - rs * rs * e_a, dp = 1.0 - rp * rp * e_a;
    const double dbl = 2.0 * xi * xi * (rs * rs / ds + rp * rp / dp) * e_a *
                       std::exp(2.0 * kk * zmin);
    const double sgl = (xi * xi * rs / ds +
                        (xi * xi - 2.0 * kappa * kappa * c2) * rp / dp) *
                       (e_z + e_az);
    return dbl + sgl;
  };
  std::vector<double> pts;
  for (double fct : {0.25, 1.0, 3.0, 8.0, 16.0})
    pts.push_back(fct / zmin);
  pts.push_back(0.25 / a);
  pts.push_back(1.0 / a);
  const auto b = make_breaks(std::move(pts), 0.0, detail::kDecayCutoff / zmin);
  const auto res = integrate_panels(f, std::span<const double>(b),
                                    detail::planar_quad("cavity imaginary axis"));
  (void)warn;
  return res.value * std::exp(-2.0 * kk * zmin) / (4.0 * K::pi);
}

inline double cavity_trace_imag(const PlanarConfig &cfg, double xi) {
  if (!(xi > 0.0))
    throw DomainError("cavity_trace_imag: needs xi > 0");
  return cavity_scaled_trace_imag(cfg, xi) / (xi * xi);
}

} // namespace cpthermal
