#pragma once

// Scattering Green-tensor trace on a point inside a cylindrical vacuum cavity
// of radius R cut into an unbounded medium of permittivity eps.
//
//   Tr G^(1) = (i k / 2 pi) int_0^inf dt sum'_n { (r_MM + t^2 r_NN) P_n
//              + r_NN (x^2/g^2) Q_n + (r_MN + r_NM) 2 n t J_n J_n'(phi x)/(phi x) }
//
//   P_n = n^2/(phi x)^2 J_n^2(phi x) + J_n'^2(phi x)
//       = (J_{n-1}^2(phi x) + J_{n+1}^2(phi x)) / 2
//   Q_n = J_n^2(phi x)
//
// with g = kR, t = h/k, x = g sqrt(1 - t^2), x1 = g sqrt(eps - t^2),
// r_{MM,NN} = -(H_n(x)/J_n(x)) (A + B_{M,N}) / (A + B_D) and the
// cross-polarised coefficient
//
//   r_MN = r_NM = 2 i n t g^2 x1^2 (x1^2 - x^2) / (pi J_n(x)^2 (A + B_D)).
//
// The cross term vanishes for a perfect conductor and at n = 0. For finite
// eps it cancels a (1 - t^2)^-2 growth of the diagonal terms near t = 1; at
// small x that cancellation is done algebraically (stable_bracket).
// All Bessel data enter in scaled form, multiplied through by J_n(x) so that
// no ratio is singular at a zero of J_n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cpthermal/constants.hpp"
#include "cpthermal/errors.hpp"
#include "cpthermal/materials.hpp"
#include "cpthermal/numerics.hpp"
#include "cpthermal/planar.hpp"
#include "cpthermal/special_functions.hpp"

namespace cpthermal {

struct CylinderConfig {
  double radius = 0.0; // m
  PermittivityModel material = PermittivityModel::gold();
  double phi = 0.0;    // rho / R
  int n_max = 0;       // 0 selects per-node adaptive truncation

  void validate() const {
    if (!(radius > 0.0))
      throw DomainError("cylinder: radius must be positive");
    if (!(phi >= 0.0 && phi < 1.0))
      throw DomainError("cylinder: need 0 <= phi < 1");
    if (n_max < 0)
      throw DomainError("cylinder: negative azimuthal cutoff");
  }
};

/// Dimensionless kinematics of one (g, t) sample.
struct CylinderKernelState {
  cplx g{};
  cplx t{};
  cplx x{};  // g sqrt(1 - t^2)
  cplx x1{}; // g sqrt(eps - t^2)
  int n = 0;

  static CylinderKernelState make(int n, cplx g, cplx t, cplx eps) {
    auto up = [](cplx v) {
      cplx s = std::sqrt(v);
      return s.imag() < 0.0 ? -s : s;
    };
    return {g, t, g * up(1.0 - t * t), g * up(eps - t * t), n};
  }
};

struct CylinderReflection {
  cplx r_M{};
  cplx r_N{};
};

namespace detail {

// A = n^2 [x^6 - (2x1^2 + g^2) x^4 + (2g^2 + x1^2) x1^2 x^2 - g^2 x1^4]
//   = -n^2 g^2 t^2 (x1^2 - x^2)^2, used in the factored form.
inline cplx cylinder_a(int n, cplx gt2, cplx x, cplx x1) {
  const cplx d = x1 * x1 - x * x;
  return -static_cast<double>(n) * n * gt2 * d * d;
}

// Reflection pair in scaled form: true r = value * exp(log_scale).
struct ScaledReflection {
  cplx r_M;
  cplx r_N;
  double log_scale;
};

inline ScaledReflection scaled_reflection(int n, const ScaledPair &jx,
                                          const ScaledPair &hx, cplx th1,
                                          cplx x, cplx x1, cplx g2, cplx gt2,
                                          const PermittivityValue<cplx> &eps) {
  const double ls = hx.log_scale - jx.log_scale;
  const cplx J = jx.value, dJ = jx.deriv, H = hx.value, dH = hx.deriv;
  if (eps.infinite)
    return {-dH / dJ, -H / J, ls};
  const cplx e = eps.value;
  const cplx h1 = th1;
  const cplx h2 = dH / H;
  const cplx A = cylinder_a(n, gt2, x, x1);
  const cplx x2 = x * x, x12 = x1 * x1, xx1 = x * x1;
  const cplx pre = g2 * x12 * x2;
  const cplx eh12x2 = e * h1 * h1 * x2;
  const cplx num_m =
      A * J + pre * (eh12x2 * J - (h1 * dJ + e * h1 * h2 * J) * xx1 + h2 * dJ * x12);
  const cplx num_n =
      A * J + pre * (eh12x2 * J - (e * h1 * dJ + h1 * h2 * J) * xx1 + h2 * dJ * x12);
  const cplx den = A * J * J + pre * (eh12x2 * J * J -
                                      (e + 1.0) * h1 * J * dJ * xx1 +
                                      dJ * dJ * x12);
  return {-H * num_m / den, -H * num_n / den, ls};
}

// Zeroth Matsubara term: only r_N survives, in its static limit.
inline cplx static_reflection_n(const ScaledPair &jx, const ScaledPair &hx,
                                const PermittivityValue<double> &eps0) {
  if (eps0.infinite)
    return -hx.value / jx.value;
  const double e = eps0.value;
  const cplx h = hx.deriv / hx.value;
  return -hx.value * (e - 1.0) * h / (e * h * jx.value - jx.deriv);
}

// Cross-polarised reflection r_MN = r_NM divided by t, scaled like
// exp(-2 log_scale(J_n(x))).
inline cplx scaled_cross_reflection(int n, const ScaledPair &jx, cplx th1,
                                    cplx x, cplx x1, cplx g2, cplx gt2,
                                    const PermittivityValue<cplx> &eps) {
  if (eps.infinite || n == 0)
    return {};
  const cplx e = eps.value;
  const cplx J = jx.value, dJ = jx.deriv, h1 = th1;
  const cplx x2 = x * x, x12 = x1 * x1;
  const cplx den = cylinder_a(n, gt2, x, x1) * J * J +
                   g2 * x12 * x2 *
                       (e * h1 * h1 * x2 * J * J -
                        (e + 1.0) * h1 * J * dJ * x * x1 + dJ * dJ * x12);
  return cplx(0.0, 2.0 * n / std::numbers::pi) * g2 * x12 * (x12 - x2) / den;
}

// Per-order integrand with the small-x cancellation between the diagonal and
// cross-polarised terms carried out analytically. Returns the bracket T with
//   I_n = (2i / (pi J_n(x)^2)) T.
// a = J_{n+1}(x)/(x J_n(x)), b = H_{n-1}(x)/(x H_n(x)); E, F, Q are
// J_{n-1}^2, J_{n+1}^2, J_n^2 at phi x (common scale).
struct SmallArgTerms {
  cplx a, b, E, F, Q;
};

inline cplx stable_bracket(int n, cplx x, cplx x1, cplx g2, cplx t2,
                           cplx th1, const PermittivityValue<cplx> &eps,
                           const SmallArgTerms &v) {
  const double nd = n;
  const cplx x2 = x * x;
  const cplx Wd = 2.0 * nd - x2 * (v.a + v.b);
  const cplx Jt = nd / x2 - v.a;
  if (eps.infinite) {
    const cplx ne = (v.b - v.a - nd / g2) / nd;
    return x2 * v.E * ne / (2.0 * Wd) +
           0.5 * v.F * ((1.0 + t2) / Wd - 1.0 / nd) + x2 / g2 * v.Q / Wd;
  }
  const cplx ix12 = 1.0 / (x1 * x1);
  const cplx s = th1 / x1;
  const cplx e = eps.value * s;
  const cplx es = e + s;
  const double n2 = nd * nd;
  const cplx dx0 = nd * es + 2.0 * nd * v.a - 2.0 * n2 * ix12 - n2 / g2;
  const cplx dx2 = -es * v.a - e * s - v.a * v.a + n2 * ix12 * ix12 +
                   2.0 * n2 * ix12 / g2;
  const cplx Dx = dx0 + x2 * dx2 - n2 * x2 * x2 * ix12 * ix12 / g2;
  const cplx cE = nd / g2 - (1.0 + t2) * v.a + 2.0 * nd * t2 * ix12 - e - t2 * s;
  const cplx cE2 = (v.a + s) / g2 - 2.0 * nd * ix12 / g2;
  const cplx ne = 2.0 * dx2 - 2.0 * n2 * x2 * ix12 * ix12 / g2 - Dx / g2 +
                  2.0 * nd * cE2 - (v.a + v.b) * cE;
  const cplx C = 1.0 / x2 - ix12;
  const cplx cF = Jt * (1.0 + t2) + 2.0 * nd * t2 * C - e - t2 * s;
  return x2 * v.E * ne / (2.0 * Wd * Dx) +
         0.5 * v.F * ((1.0 + t2) / Wd + cF / Dx) +
         x2 / g2 * v.Q * (1.0 / Wd + (Jt - s) / Dx);
}

enum class ReflectionMode { full, static_limit };

struct ModeSumRequest {
  double phi = 0.0;
  cplx x{};
  cplx x1{};
  cplx g2{};
  cplx gt2{};
  PermittivityValue<cplx> eps{};
  PermittivityValue<double> eps0{};
  ReflectionMode mode = ReflectionMode::full;
  int n_lo = 0;
  int n_hi = -1; // < 0: adaptive upper end
};

inline int initial_order_bound(double phi, cplx x) {
  if (phi == 0.0)
    return 2;
  const double geometric = 20.0 / -std::log(phi);
  return static_cast<int>(std::abs(x) * phi + 25.0 + std::min(geometric, 2e5));
}

// Below this |x|/(n+1) the rearranged bracket replaces the direct sum of
// diagonal and cross-polarised terms.
inline constexpr double kSmallArgRatio = 0.5;

// Sum over n in [n_lo, n_hi] (half weight at n = 0) of
//   full:   (r_MM + t^2 r_NN) P_n + r_NN (x^2/g^2) Q_n + t^2 rho_X (E - F)
//   static: r_N^(0) (Q_n - P_n)
inline cplx mode_sums(const ModeSumRequest &rq) {
  const bool adaptive = rq.n_hi < 0;
  int nmax = adaptive ? std::max(rq.n_lo + 8, initial_order_bound(rq.phi, rq.x))
                      : rq.n_hi;
  if (rq.phi == 0.0)
    nmax = std::min(nmax, std::max(rq.n_lo, 1));
  const cplx t2 = rq.g2 == cplx{} ? cplx{} : rq.gt2 / rq.g2;
  const double absx = std::abs(rq.x);
  for (int attempt = 0;; ++attempt) {
    const auto jx = bessel_j_sequence(nmax + 1, rq.x);
    const auto hx = hankel1_sequence(nmax, rq.x);
    const auto jy = bessel_j_sequence(nmax + 1, rq.phi * rq.x);
    std::vector<cplx> th1;
    if (rq.mode == ReflectionMode::full && !rq.eps.infinite)
      th1 = hankel1_log_derivative(nmax, rq.x1);

    cplx sum{};
    double abs_total = 0.0;
    double tail = 0.0;
    for (int n = rq.n_lo; n <= nmax; ++n) {
      const double ly = jy[n].log_scale;
      auto rel = [&](int k) {
        return jy[k].value * std::exp(jy[k].log_scale - ly);
      };
      const cplx below = n == 0 ? -rel(1) : rel(n - 1);
      const cplx above = rel(n + 1);
      const cplx E = below * below, F = above * above;
      const cplx P = 0.5 * (E + F);
      const cplx Q = jy[n].value * jy[n].value;
      const double w = n == 0 ? 0.5 : 1.0;
      const cplx h1 = th1.empty() ? cplx{} : th1[n];

      cplx term;
      double lr = 0.0;
      if (rq.mode == ReflectionMode::static_limit) {
        term = static_reflection_n(jx[n], hx[n], rq.eps0) * (Q - P);
        lr = hx[n].log_scale - jx[n].log_scale;
      } else if (n > 0 && absx < kSmallArgRatio * (n + 1)) {
        SmallArgTerms v;
        v.a = jx[n + 1].value * std::exp(jx[n + 1].log_scale - jx[n].log_scale) /
              (jx[n].value * rq.x);
        v.b = hx[n - 1].value * std::exp(hx[n - 1].log_scale - hx[n].log_scale) /
              (hx[n].value * rq.x);
        v.E = E;
        v.F = F;
        v.Q = Q;
        const cplx J = jx[n].value;
        term = cplx(0.0, 2.0 / std::numbers::pi) / (J * J) *
               stable_bracket(n, rq.x, rq.x1, rq.g2, t2, h1, rq.eps, v);
        lr = -2.0 * jx[n].log_scale;
      } else {
        const auto r = scaled_reflection(n, jx[n], hx[n], h1, rq.x, rq.x1,
                                         rq.g2, rq.gt2, rq.eps);
        const cplx rx = scaled_cross_reflection(n, jx[n], h1, rq.x, rq.x1,
                                                rq.g2, rq.gt2, rq.eps);
        // bring the cross term onto the diagonal scale
        const double shift = -2.0 * jx[n].log_scale - r.log_scale;
        term = (r.r_M + t2 * r.r_N) * P + r.r_N * (rq.x * rq.x / rq.g2) * Q +
               t2 * rx * std::exp(shift) * (E - F);
        lr = r.log_scale;
      }
      const cplx tn = w * term * std::exp(lr + 2.0 * ly);
      sum += tn;
      const double mag = std::abs(tn);
      abs_total += mag;
      if (n > nmax - 4)
        tail = std::max(tail, mag);
    }
    if (!adaptive || rq.phi == 0.0 || tail <= 1e-16 * abs_total ||
        !std::isfinite(abs_total))
      return sum;
    if (attempt > 8 || nmax > 400000)
      throw ConvergenceError("cylinder: azimuthal sum did not converge",
                             abs_total, tail);
    nmax *= 2;
  }
}

// Positions in (0, xmax) of the zeros of J_n and J_n' for n in [0, nmax],
// located by sign changes on a uniform grid (one Miller sweep per node).
inline std::vector<double> mode_arguments(int nmax, double xmax) {
  std::vector<double> out;
  if (nmax < 0 || xmax <= 0.0)
    return out;
  const double dx = 0.1;
  std::vector<double> pj(nmax + 1), pd(nmax + 1);
  double xprev = 0.0;
  bool first = true;
  for (double x = dx; x < xmax; x += dx) {
    const auto seq = bessel_j_sequence(nmax, cplx(x, 0.0));
    for (int n = 0; n <= nmax; ++n) {
      const double j = seq[n].raw_value().real();
      const double d = seq[n].raw_deriv().real();
      if (!first) {
        if (j * pj[n] < 0.0)
          out.push_back(xprev + dx * pj[n] / (pj[n] - j));
        if (d * pd[n] < 0.0)
          out.push_back(xprev + dx * pd[n] / (pd[n] - d));
      }
      pj[n] = j;
      pd[n] = d;
    }
    first = false;
    xprev = x;
  }
  return out;
}

inline QuadOptions cylinder_quad(const char *what) {
  QuadOptions o;
  o.rel_tol = 1e-9;
  o.max_depth = 20;
  o.what = what;
  return o;
}

} // namespace detail

/// r_M and r_N for one order. Inputs with eps = 1 carry no interface.
inline CylinderReflection cylinder_reflection(int n,
                                              const CylinderKernelState &st,
                                              const PermittivityValue<cplx> &eps) {
  if (!eps.infinite && eps.value == cplx(1.0, 0.0))
    throw DomainError("cylinder_reflection: eps = 1 has no interface");
  const auto jx = bessel_j_sequence(n, st.x);
  const auto hx = hankel1_sequence(n, st.x);
  cplx th1{};
  if (!eps.infinite)
    th1 = hankel1_log_derivative(n, st.x1)[n];
  const cplx g2 = st.g * st.g;
  const auto r = detail::scaled_reflection(n, jx[n], hx[n], th1, st.x, st.x1,
                                           g2, g2 * st.t * st.t, eps);
  const double f = std::exp(r.log_scale);
  if (!std::isfinite(f) || (std::abs(r.r_M) == 0.0 && std::abs(r.r_N) == 0.0))
    throw DomainError("cylinder_reflection: mode pole or overflow");
  return {r.r_M * f, r.r_N * f};
}

/// Real-frequency cylinder trace.
inline cplx cylinder_trace(const CylinderConfig &cfg, double omega) {
  cfg.validate();
  if (!(omega > 0.0))
    throw DomainError("cylinder_trace: frequency must be positive");
  if (cfg.material.is_vacuum())
    return {};
  const auto eps = eps_real_axis(cfg.material, omega);
  const double k = omega / K::c;
  const double g = k * cfg.radius;
  const double phi = cfg.phi;
  const double one_minus_phi = 1.0 - phi;
  const cplx ev = eps.infinite ? cplx{} : eps.value;

  // Orders that can resonate on the propagating branch have n <= g.
  const int n_split = static_cast<int>(std::floor(g));
  const int fixed_hi = cfg.n_max > 0 ? cfg.n_max : -1;

  auto sample = [&](double t, cplx x, int n_lo, int n_hi) {
    detail::ModeSumRequest rq;
    rq.phi = phi;
    rq.x = x;
    rq.x1 = eps.infinite ? cplx{} : g * detail::upper_sqrt(ev - t * t);
    rq.g2 = g * g;
    rq.gt2 = g * g * t * t;
    rq.eps = eps;
    rq.n_lo = n_lo;
    rq.n_hi = n_hi;
    return detail::mode_sums(rq);
  };

  // t = cos(theta) on [0, 1], x = g sin(theta), dt = sin(theta) dtheta
  auto prop_low = [&](double th) {
    const double t = std::cos(th);
    return std::sin(th) * sample(t, cplx(g * std::sin(th), 0.0), 0,
                                 fixed_hi > 0 ? std::min(fixed_hi, n_split)
                                              : n_split);
  };
  auto prop_high = [&](double th) {
    const double t = std::cos(th);
    return std::sin(th) *
           sample(t, cplx(g * std::sin(th), 0.0), n_split + 1, fixed_hi);
  };
  // t = cosh(sigma) on [1, inf), x = i g sinh(sigma), dt = sinh(sigma) dsigma
  auto evan = [&](double sg) {
    const double t = std::cosh(sg);
    return std::sinh(sg) * sample(t, cplx(0.0, g * std::sinh(sg)), 0, fixed_hi);
  };

  std::vector<double> low_breaks;
  if (n_split >= 0) {
    const int nb = fixed_hi > 0 ? std::min(fixed_hi, n_split) : n_split;
    for (double xm : detail::mode_arguments(nb, g))
      low_breaks.push_back(std::asin(std::min(1.0, xm / g)));
  }
  const double half_pi = 0.5 * K::pi;
  low_breaks = make_breaks(std::move(low_breaks), 0.0, half_pi);
  const auto pl = integrate_panels(prop_low, std::span<const double>(low_breaks),
                                   detail::cylinder_quad("cylinder propagating"));
  cplx prop = pl.value;
  if (fixed_hi < 0 || fixed_hi > n_split) {
    std::vector<double> hb;
    for (double f : {0.05, 0.2, 0.5})
      hb.push_back(f * half_pi);
    hb = make_breaks(std::move(hb), 0.0, half_pi);
    prop += integrate_panels(prop_high, std::span<const double>(hb),
                             detail::cylinder_quad("cylinder propagating"))
                .value;
  }

  const double d = one_minus_phi; // wall distance in units of R
  const double xtop = 25.0 / d + 10.0;
  std::vector<double> eb;
  for (double f : {0.05, 0.25, 1.0, 3.0, 8.0})
    eb.push_back(std::asinh(f / (d * g)));
  if (!eps.infinite && ev.real() > 1.0)
    eb.push_back(std::acosh(std::sqrt(ev.real())));
  eb = make_breaks(std::move(eb), 0.0, std::asinh(xtop / g));
  const auto pe = integrate_panels(evan, std::span<const double>(eb),
                                   detail::cylinder_quad("cylinder evanescent"));
  return cplx(0.0, k / (2.0 * K::pi)) * (prop + pe.value);
}

/// xi^2 Tr G^(1)(i xi) inside the cylinder for xi >= 0, integrated over
/// t~ = h R. The xi = 0 term keeps only r_N in its static limit.
inline double cylinder_scaled_trace_imag(const CylinderConfig &cfg, double xi,
                                         double *imag_residue = nullptr) {
  cfg.validate();
  if (xi < 0.0)
    throw DomainError("cylinder_trace_imag: negative imaginary frequency");
  if (cfg.material.is_vacuum())
    return 0.0;
  const double R = cfg.radius;
  const double phi = cfg.phi;
  const double d = 1.0 - phi;
  const double c2R2 = K::c * K::c / (R * R);
  const double s = xi * R / K::c;
  const int fixed_hi = cfg.n_max > 0 ? cfg.n_max : -1;

  detail::ModeSumRequest base;
  base.phi = phi;
  base.n_hi = fixed_hi;
  double eps_val = 0.0;
  bool eps_inf = false;
  if (xi == 0.0) {
    base.mode = detail::ReflectionMode::static_limit;
    base.eps0 = eps_static_limit(cfg.material);
  } else {
    const auto e = eps_imag_axis(cfg.material, xi);
    eps_inf = e.infinite;
    eps_val = e.value;
    base.eps = {e.infinite, cplx(e.value, 0.0)};
  }

  // exp(-2 d s) is the leading decay of every term; factored out.
  const double lead = 2.0 * d * s;
  // beyond this the whole term is below the double range (and exp(lead)
  // would overflow against underflowed mode sums)
  if (lead > 700.0) {
    if (imag_residue)
      *imag_residue = 0.0;
    return 0.0;
  }
  auto f = [&](double tt) {
    const double X = std::hypot(s, tt);
    auto rq = base;
    rq.x = cplx(0.0, X);
    rq.g2 = -s * s;
    rq.gt2 = tt * tt;
    if (xi > 0.0 && !eps_inf)
      rq.x1 = cplx(0.0, std::sqrt(eps_val * s * s + tt * tt));
    const cplx m = detail::mode_sums(rq);
    const cplx v = xi == 0.0 ? c2R2 * tt * tt * m : xi * xi * m;
    return v * std::exp(lead);
  };

  std::vector<double> pts;
  for (double fct : {0.05, 0.25, 1.0, 3.0, 8.0})
    pts.push_back(fct / d);
  if (s > 0.0)
    for (double fct : {0.25, 1.0, 3.0, 8.0})
      pts.push_back(fct * std::sqrt(s / d));
  // exp(-2 d (X - s)) < e^-50 beyond the cut
  const double xcut = s + 25.0 / d + 10.0;
  const double tmax = std::sqrt(xcut * xcut - s * s);
  const auto b = make_breaks(std::move(pts), 0.0, tmax);
  const auto res = integrate_panels(f, std::span<const double>(b),
                                    detail::cylinder_quad("cylinder imaginary axis"));
  const cplx v = cplx(0.0, 1.0 / (2.0 * K::pi * R)) * res.value *
                 std::exp(-lead);
  if (imag_residue)
    *imag_residue = v.imag();
  return v.real();
}

inline double cylinder_trace_imag(const CylinderConfig &cfg, double xi) {
  if (!(xi > 0.0))
    throw DomainError("cylinder_trace_imag: needs xi > 0");
  return cylinder_scaled_trace_imag(cfg, xi) / (xi * xi);
}

/// R_ni(w) = c j_ni / w, with j'_ni when prime is set.
inline double resonant_radius(int n, int i, double omega, bool prime) {
  if (!(omega > 0.0))
    throw DomainError("resonant_radius: frequency must be positive");
  return K::c * bessel_zero(n, i, prime) / omega;
}

} // namespace cpthermal
