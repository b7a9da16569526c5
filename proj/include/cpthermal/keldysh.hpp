#pragma once

// Finite-dimensional checks of the Keldysh equilibrium reduction: contour
// rotation of the real-frequency potential integral onto Matsubara sums,
// Born-series solution of the photon density-matrix equation, detailed
// balance and local polarization operators. Matrices stand in for
// space-time kernels, so only the algebraic structure is exercised.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpthermal/constants.hpp"
#include "cpthermal/errors.hpp"
#include "cpthermal/molecule.hpp"
#include "cpthermal/numerics.hpp"

namespace cpthermal {

struct ScalarPole {
  double Omega = 0.0;  // rad/s
  double Gamma = 0.0;  // rad/s
  double weight = 1.0;
};

/// G(w) = sum_j w_j / (Omega_j^2 - w^2 - i Gamma_j w)
struct ScalarModelGreen {
  std::vector<ScalarPole> poles;

  void validate() const {
    if (poles.empty())
      throw DomainError("ScalarModelGreen: no poles");
    for (const auto &p : poles)
      if (!(p.Omega > 0.0) || !(p.Gamma > 0.0))
        throw DomainError("ScalarModelGreen: poles need Omega > 0 and Gamma > 0");
  }

  std::complex<double> operator()(std::complex<double> w) const {
    std::complex<double> s = 0.0;
    const std::complex<double> i(0.0, 1.0);
    for (const auto &p : poles)
      // factored so that Omega - w is exact next to a narrow line
      s += p.weight / ((p.Omega - w) * (p.Omega + w) - i * p.Gamma * w);
    return s;
  }

  double imag_axis(double xi) const {
    double s = 0.0;
    for (const auto &p : poles)
      s += p.weight / (p.Omega * p.Omega + xi * xi + p.Gamma * xi);
    return s;
  }

  double max_scale() const {
    double m = 0.0;
    for (const auto &p : poles)
      m = std::max({m, p.Omega, p.Gamma});
    return m;
  }
};

struct ContourRotationResult {
  double lhs = 0.0;        // real-frequency integral, first term
  double rhs = 0.0;        // Matsubara sum
  double correction = 0.0; // resonant term, common to both sides
  double rel_err = 0.0;
  int matsubara_terms = 0;
};

namespace detail {

inline double coth_half(double omega, double temperature) {
  const double x = K::hbar * omega / (2.0 * K::k_B * temperature);
  return x > 40.0 ? 1.0 : 1.0 / std::tanh(x);
}

// Real-axis breakpoints around every resonance.
inline std::vector<double> pole_breaks(const ScalarModelGreen &a,
                                       const ScalarModelGreen &b, double top) {
  std::vector<double> pts;
  for (const auto *m : {&a, &b})
    for (const auto &p : m->poles) {
      // geometric offsets in units of Gamma keep each panel's Lorentzian
      // tail smooth, however narrow the line
      pts.push_back(p.Omega);
      for (double k = 1.0; k * p.Gamma < p.Omega; k *= 6.0) {
        pts.push_back(p.Omega - k * p.Gamma);
        pts.push_back(p.Omega + k * p.Gamma);
      }
    }
  return make_breaks(std::move(pts), 0.0, top);
}

// Integral of f over [0, inf): panels up to `top`, then doubling panels until
// their contribution is negligible.
template <class F>
double integrate_with_tail(F &&f, const std::vector<double> &breaks,
                           const char *what) {
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.max_depth = 20;
  opt.what = what;
  double total = integrate_panels(f, std::span<const double>(breaks), opt).value;
  double lo = breaks.back();
  for (int k = 0; k < 80; ++k) {
    const double part = integrate_panels(f, {lo, 2.0 * lo}, opt).value;
    total += part;
    lo *= 2.0;
    if (std::abs(part) <= 1e-14 * std::abs(total))
      return total;
  }
  throw ConvergenceError(std::string(what) + ": tail did not converge", total, 0.0);
}

} // namespace detail

/// Compares -(hbar mu0 / 2 pi) int w^2 [2N+1] Im[alpha G] dw with the
/// Matsubara sum mu0 k_B T sum' xi^2 alpha(i xi) G(i xi). The resonant term
/// (hbar mu0 / pi) int w^2 N Im alpha Re G dw is evaluated once and reported
/// alongside; it enters both sides identically.
inline ContourRotationResult contour_rotation_check(const ScalarModelGreen &model,
                                                    const ScalarModelGreen &alpha,
                                                    double temperature) {
  model.validate();
  alpha.validate();
  if (!(temperature > 0.0))
    throw DomainError("contour_rotation_check: temperature must be positive");

  const double scale = std::max(model.max_scale(), alpha.max_scale());
  const double thermal = K::k_B * temperature / K::hbar;
  const auto breaks =
      detail::pole_breaks(model, alpha, 50.0 * std::max(scale, thermal));

  ContourRotationResult r;
  auto real_integrand = [&](double w) {
    const auto ag = alpha(w) * model(w);
    return w * w * detail::coth_half(w, temperature) * ag.imag();
  };
  r.lhs = -K::hbar * K::mu_0 / (2.0 * K::pi) *
          detail::integrate_with_tail(real_integrand, breaks, "contour lhs");

  auto resonant_integrand = [&](double w) {
    const double x = K::hbar * w / (K::k_B * temperature);
    if (x > 700.0)
      return 0.0;
    return w * w / std::expm1(x) * alpha(w).imag() * model(w).real();
  };
  r.correction = K::hbar * K::mu_0 / K::pi *
                 detail::integrate_with_tail(resonant_integrand, breaks,
                                             "resonant correction");

  // Terms decay like 1/m^2: sum well past the poles, then add the
  // midpoint-rule tail integral from M + 1/2.
  const double xi1 = matsubara_frequency(1, temperature);
  const double m_max = std::max(1000.0, std::ceil(1000.0 * scale / xi1));
  if (m_max > 5e7)
    throw DomainError("contour_rotation_check: temperature too low for the "
                      "Matsubara sum");
  const int M = static_cast<int>(m_max);
  auto term = [&](double m) {
    const double xi = m * xi1;
    return xi * xi * alpha.imag_axis(xi) * model.imag_axis(xi);
  };
  double sum = 0.0;
  for (int m = M; m >= 1; --m)
    sum += term(m);
  const double m0 = M + 0.5;
  auto tail = [&](double u) { return term(m0 / u) * m0 / (u * u); };
  QuadOptions topt;
  topt.rel_tol = 1e-12;
  topt.what = "Matsubara tail";
  sum += integrate_panels(tail, {0.0, 0.5, 1.0}, topt).value;
  // the m = 0 term vanishes (xi^2 factor)
  r.rhs = K::mu_0 * K::k_B * temperature * sum;
  r.matsubara_terms = M;
  r.rel_err = std::abs(r.lhs - r.rhs) / std::max(std::abs(r.lhs), std::abs(r.rhs));
  return r;
}

/// (hbar mu0 / 2 pi) int_0^inf xi^2 alpha(i xi) G(i xi) d xi, the zero-
/// temperature limit of the Matsubara sum.
inline double imaginary_axis_integral(const ScalarModelGreen &model,
                                      const ScalarModelGreen &alpha) {
  model.validate();
  alpha.validate();
  const double scale = std::max(model.max_scale(), alpha.max_scale());
  auto f = [&](double xi) {
    return xi * xi * alpha.imag_axis(xi) * model.imag_axis(xi);
  };
  std::vector<double> pts;
  for (double k : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0})
    pts.push_back(k * scale);
  const auto breaks = make_breaks(pts, 0.0, 100.0 * scale);
  return K::hbar * K::mu_0 / (2.0 * K::pi) *
         detail::integrate_with_tail(f, breaks, "imaginary-axis integral");
}

// ---------------------------------------------------------------------------

using CMatrix = Eigen::MatrixXcd;

/// Dimensionless discrete analogue of the photon density-matrix equation.
/// PiR = H + (Pi12 - Pi21)/2 with H Hermitian and PiA = PiR^dagger, so that
/// PiR - PiA = Pi12 - Pi21 for anti-Hermitian Pi12, Pi21.
struct DiscreteKeldyshSystem {
  CMatrix G0, Pi12, Pi21, PiR, PiA;
  double N_E = 0.0, N_S = 0.0;

  int dimension() const { return static_cast<int>(G0.rows()); }

  static DiscreteKeldyshSystem make(CMatrix G0, CMatrix Pi12, CMatrix Pi21,
                                    const CMatrix &H, double N_E, double N_S) {
    DiscreteKeldyshSystem s;
    s.PiR = H + 0.5 * (Pi12 - Pi21);
    s.PiA = s.PiR.adjoint();
    s.G0 = std::move(G0);
    s.Pi12 = std::move(Pi12);
    s.Pi21 = std::move(Pi21);
    s.N_E = N_E;
    s.N_S = N_S;
    return s;
  }

  double spectral_radius() const {
    const CMatrix K = G0 * PiR;
    Eigen::ComplexEigenSolver<CMatrix> es(K, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  /// Largest violation of PiR - PiA = Pi12 - Pi21.
  double retarded_split_residual() const {
    return ((PiR - PiA) - (Pi12 - Pi21)).cwiseAbs().maxCoeff();
  }
};

struct RandomSystemOptions {
  int dimension = 4;
  double spectral_radius = 0.5;
  double N_E = 1.0;
  double N_S = 2.0;
};

/// Random system with local-FDT polarization operators Pi12 = -i N_S X,
/// Pi21 = -i (N_S + 1) X (X positive semidefinite), rescaled to the requested
/// spectral radius of G0 PiR.
inline DiscreteKeldyshSystem random_keldysh_system(std::uint64_t seed,
                                                   const RandomSystemOptions &o = {}) {
  if (o.dimension < 1 || !(o.spectral_radius > 0.0) || o.N_E < 0.0 || o.N_S < 0.0)
    throw DomainError("random_keldysh_system: invalid options");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int n = o.dimension;
  auto rand_matrix = [&] {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m(i, j) = {nd(rng), nd(rng)};
    return m;
  };
  const std::complex<double> I(0.0, 1.0);
  const CMatrix G0 = rand_matrix();
  const CMatrix A = rand_matrix();
  const CMatrix X = A * A.adjoint() / double(n);
  const CMatrix B = rand_matrix();
  const CMatrix H = 0.5 * (B + B.adjoint()) / double(n);

  auto build = [&](double s) {
    return DiscreteKeldyshSystem::make(G0, -I * o.N_S * s * X,
                                       -I * (o.N_S + 1.0) * s * X, s * H, o.N_E,
                                       o.N_S);
  };
  const double rho1 = build(1.0).spectral_radius();
  if (!(rho1 > 0.0))
    throw DomainError("random_keldysh_system: degenerate draw");
  return build(o.spectral_radius / rho1);
}

/// rho = -[2i N_E Im G + G (N_E Pi21 - (N_E + 1) Pi12) G^dagger],
/// G = (1 - G0 PiR)^-1 G0, Im M = (M - M^dagger) / 2i.
inline CMatrix keldysh_closed_form(const DiscreteKeldyshSystem &s) {
  const int n = s.dimension();
  const CMatrix G =
      (CMatrix::Identity(n, n) - s.G0 * s.PiR).partialPivLu().solve(s.G0);
  return -s.N_E * (G - G.adjoint()) -
         G * (s.N_E * s.Pi21 - (s.N_E + 1.0) * s.Pi12) * G.adjoint();
}

struct BornSeriesResult {
  CMatrix rho;        // iterated fixed point
  CMatrix closed;     // closed form
  double rel_err = 0.0;
  double spectral_radius = 0.0;
};

/// Iterates G <- G0 + G0 PiR G and
/// rho <- rho0 + rho0 PiA G^dagger + G0 PiR rho + G0 Pi12 G^dagger
/// from rho0 = -2i N_E Im G0, then compares with the closed form.
/// The Pi12 source enters with the sign that makes the fixed point reduce to
/// the equilibrium form -2i N Im G when Pi12 / Pi21 = N / (N + 1).
inline BornSeriesResult born_series_fixpoint(const DiscreteKeldyshSystem &s,
                                             int iterations) {
  if (iterations < 1)
    throw DomainError("born_series_fixpoint: iterations must be positive");
  BornSeriesResult r;
  r.spectral_radius = s.spectral_radius();
  if (!(r.spectral_radius < 1.0))
    throw ConvergenceError("born_series_fixpoint: Born series diverges "
                           "(spectral radius >= 1)",
                           r.spectral_radius, 0.0);
  const CMatrix rho0 = -s.N_E * (s.G0 - s.G0.adjoint());
  const CMatrix K = s.G0 * s.PiR;
  CMatrix G = s.G0;
  CMatrix rho = rho0;
  for (int k = 0; k < iterations; ++k) {
    const CMatrix Gd = G.adjoint();
    rho = rho0 + rho0 * s.PiA * Gd + K * rho + s.G0 * s.Pi12 * Gd;
    G = s.G0 + K * G;
  }
  r.rho = rho;
  r.closed = keldysh_closed_form(s);
  const double scale = r.closed.cwiseAbs().maxCoeff();
  r.rel_err = (r.rho - r.closed).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
  return r;
}

inline double born_series_fixpoint_check(const DiscreteKeldyshSystem &s,
                                         int iterations) {
  return born_series_fixpoint(s, iterations).rel_err;
}

/// Max-norm distance of rho from -2i N_E Im G, relative to |rho|.
inline double fdt_residual(const DiscreteKeldyshSystem &s, const CMatrix &rho) {
  const int n = s.dimension();
  const CMatrix G =
      (CMatrix::Identity(n, n) - s.G0 * s.PiR).partialPivLu().solve(s.G0);
  const CMatrix fdt = -s.N_E * (G - G.adjoint());
  const double scale = fdt.cwiseAbs().maxCoeff();
  return (rho - fdt).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

// ---------------------------------------------------------------------------

namespace detail {

inline DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return two_sum(s.hi, s.lo);
}

inline DD dd_mul(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return two_sum(p.hi, p.lo);
}

inline DD dd_neg(DD a) { return {-a.hi, -a.lo}; }

} // namespace detail

/// N(w, T_E) [N(w, T_S) + 1] - [N(w, T_E) + 1] N(w, T_S), evaluated in
/// double-double so the cancellation of the N_E N_S products is exact.
inline double detailed_balance_factor(double omega, double T_E, double T_S) {
  using namespace detail;
  const DD ne{photon_number(omega, T_E), 0.0};
  const DD ns{photon_number(omega, T_S), 0.0};
  const DD one{1.0, 0.0};
  const DD a = dd_mul(ne, dd_add(ns, one));
  const DD b = dd_mul(dd_add(ne, one), ns);
  const DD d = dd_add(a, dd_neg(b));
  return d.hi + d.lo;
}

struct PfdtPair {
  std::complex<double> Pi12, Pi21;
  double ratio = 0.0;    // Pi12 / Pi21, 0 when both vanish
  double expected = 0.0; // N / (N + 1)
  double rel_err = 0.0;
};

/// Local polarization operators of a medium at temperature T_S (per-site
/// scalars): Pi12 = -(i hbar eps0 / 2 pi) w^2 N Im eps, Pi21 likewise with N+1.
inline PfdtPair pfdt_consistency(double eps_im, double omega, double T_S) {
  if (!(omega > 0.0))
    throw DomainError("pfdt_consistency: frequency must be positive");
  if (!(eps_im >= 0.0))
    throw DomainError("pfdt_consistency: Im eps must be non-negative");
  const double N = photon_number(omega, T_S);
  const std::complex<double> pref(0.0, -K::hbar * K::epsilon_0 / (2.0 * K::pi) *
                                           omega * omega * eps_im);
  PfdtPair p;
  p.Pi12 = pref * N;
  p.Pi21 = pref * (N + 1.0);
  p.expected = N / (N + 1.0);
  if (std::abs(p.Pi21) > 0.0) {
    p.ratio = (p.Pi12 / p.Pi21).real();
    p.rel_err = p.expected > 0.0 ? std::abs(p.ratio - p.expected) / p.expected
                                 : std::abs(p.ratio);
  }
  return p;
}

} // namespace cpthermal
