#pragma once

// Integer-order Bessel J_n and Hankel H_n^(1) for complex argument.
//
// Values are carried in extended-exponent form (mantissa times exp(log_scale))
// so that sequences stay representable when |Im z| is large or n >> |z|. The
// geometry kernels only ever combine these into bounded products and ratios.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "cpthermal/errors.hpp"

namespace cpthermal {

using cplx = std::complex<double>;

/// f(z) and f'(z) sharing one exponent: true value = value * exp(log_scale).
struct ScaledPair {
  cplx value{};
  cplx deriv{};
  double log_scale = 0.0;

  cplx raw_value() const { return value * std::exp(log_scale); }
  cplx raw_deriv() const { return deriv * std::exp(log_scale); }
  /// f'/f, independent of the scale.
  cplx log_derivative() const { return deriv / value; }
};

/// |Im z| beyond which raw (unscaled) evaluations are refused.
inline constexpr double kRawOverflowGuard = 600.0;

namespace detail {

inline constexpr double kRescaleBig = 1e200;
inline const double kLogRescaleBig = std::log(kRescaleBig);

// Moves the magnitude of value into log_scale so products of several pairs
// stay in range.
inline void normalize(ScaledPair &p) {
  double m = std::abs(p.value);
  if (!(m > 0.0) || !std::isfinite(m))
    m = std::abs(p.deriv);
  if (!(m > 0.0) || !std::isfinite(m))
    return;
  p.value /= m;
  p.deriv /= m;
  p.log_scale += std::log(m);
}

inline int miller_start(int nmax, double absz) {
  const double base = std::max(static_cast<double>(nmax), absz);
  return static_cast<int>(base + 20.0 + 10.0 * std::cbrt(absz)) + 2;
}

// K_0(w) and K_1(w) times exp(w), Re w >= 0.
struct ScaledK01 {
  cplx k0;
  cplx k1;
};

// Power series, |w| <= 2.
inline ScaledK01 k01_series(cplx w) {
  constexpr double euler_gamma = std::numbers::egamma;
  const cplx q = 0.25 * w * w;
  const cplx lg = std::log(0.5 * w);

  cplx i0{1.0}, i1sum{1.0}, k0sum{0.0};
  cplx k1sum{-euler_gamma + (1.0 - euler_gamma)}; // psi(1) + psi(2) at k = 0
  cplx term0{1.0}; // (q^k)/(k!)^2
  cplx term1{1.0}; // (q^k)/(k!(k+1)!)
  double harmonic = 0.0;
  for (int k = 1; k < 200; ++k) {
    term0 *= q / static_cast<double>(k * k);
    term1 *= q / static_cast<double>(k * (k + 1));
    harmonic += 1.0 / k;
    const double psi_k1 = -euler_gamma + harmonic;
    const double psi_k2 = psi_k1 + 1.0 / (k + 1);
    i0 += term0;
    i1sum += term1;
    k0sum += term0 * harmonic;
    k1sum += term1 * (psi_k1 + psi_k2);
    if (std::abs(term0) < 1e-18 * std::abs(i0) &&
        std::abs(term1) < 1e-18 * std::abs(i1sum))
      break;
  }
  const cplx i1 = 0.5 * w * i1sum;
  const cplx k0 = -(lg + euler_gamma) * i0 + k0sum;
  const cplx k1 = 1.0 / w + lg * i1 - 0.25 * w * k1sum;
  const cplx ew = std::exp(w);
  return {k0 * ew, k1 * ew};
}

// Steed's continued fraction (Temme's CF2) for order 0, |w| > 2, Re w >= 0.
inline ScaledK01 k01_cf2(cplx w) {
  constexpr double pi = std::numbers::pi;
  const double a1 = 0.25;
  cplx b = 2.0 * (1.0 + w);
  cplx d = 1.0 / b;
  cplx h = d, delh = d;
  cplx q1{0.0}, q2{1.0};
  cplx q{a1}, c{a1};
  double a = -a1;
  cplx s = 1.0 + q * delh;
  int i = 1;
  for (; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s))
      break;
  }
  if (i == 100000)
    throw ConvergenceError("k01_cf2: continued fraction", std::abs(s), 0.0);
  h = a1 * h;
  const cplx k0 = std::sqrt(pi / (2.0 * w)) / s;
  const cplx k1 = k0 * (w + 0.5 - h) / w;
  return {k0, k1};
}

inline ScaledK01 scaled_k01(cplx w) {
  return std::abs(w) <= 2.0 ? k01_series(w) : k01_cf2(w);
}

} // namespace detail

/// J_n(z) and J_n'(z) for n = 0..nmax by normalized backward recurrence.
inline std::vector<ScaledPair> bessel_j_sequence(int nmax, cplx z) {
  if (nmax < 0)
    throw DomainError("bessel_j_sequence: negative order");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("bessel_j_sequence: non-finite argument");

  std::vector<ScaledPair> out(static_cast<std::size_t>(nmax) + 1);
  const double absz = std::abs(z);
  if (absz == 0.0) {
    out[0].value = 1.0;
    if (nmax >= 1)
      out[1].deriv = 0.5;
    return out;
  }

  const int top = detail::miller_start(nmax + 1, absz);
  std::vector<cplx> mant(static_cast<std::size_t>(top) + 2);
  std::vector<double> lscale(mant.size(), 0.0);
  const cplx two_over_z = 2.0 / z;

  double offset = 0.0;
  cplx fnext{0.0};
  cplx f{1e-300};
  mant[top] = f;
  lscale[top] = offset;
  for (int k = top; k >= 1; --k) {
    cplx fprev = static_cast<double>(k) * two_over_z * f - fnext;
    if (std::abs(fprev) > detail::kRescaleBig) {
      fprev /= detail::kRescaleBig;
      f /= detail::kRescaleBig;
      offset += detail::kLogRescaleBig;
    }
    fnext = f;
    f = fprev;
    mant[k - 1] = f;
    lscale[k - 1] = offset;
  }

  // exp(-iz) = J_0 + 2 sum (-i)^k J_k for Im z >= 0; mirror for Im z < 0.
  const bool upper = z.imag() >= 0.0;
  const cplx unit = upper ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
  const double ref = lscale[0];
  cplx phase{1.0};
  cplx sum{0.0};
  for (int k = 0; k <= top; ++k) {
    const double rel = lscale[k] - ref;
    if (rel > -700.0)
      sum += (k == 0 ? 1.0 : 2.0) * phase * mant[k] * std::exp(rel);
    phase *= unit;
  }
  const cplx target_phase = upper ? std::polar(1.0, -z.real())
                                  : std::polar(1.0, z.real());
  const cplx norm = target_phase / sum;
  // keep |norm| in the exponent: mantissas near the start value are ~1e-300
  const cplx unit_norm = norm / std::abs(norm);
  const double norm_log = std::abs(z.imag()) - ref + std::log(std::abs(norm));

  for (int n = 0; n <= nmax; ++n) {
    const double m = std::abs(mant[n]);
    auto &p = out[n];
    if (!(m > 0.0)) {
      p.log_scale = lscale[n] + norm_log;
      continue;
    }
    auto rel = [&](int k) {
      return mant[k] / m * std::exp(lscale[k] - lscale[n]) * unit_norm;
    };
    p.log_scale = lscale[n] + norm_log + std::log(m);
    p.value = rel(n);
    if (n == 0)
      p.deriv = -rel(1);
    else
      p.deriv = 0.5 * (rel(n - 1) - rel(n + 1));
    detail::normalize(p);
  }
  return out;
}

/// H_n^(1)(z) and its derivative for n = 0..nmax; requires Im z >= 0, z != 0.
inline std::vector<ScaledPair> hankel1_sequence(int nmax, cplx z) {
  constexpr double pi = std::numbers::pi;
  if (nmax < 0)
    throw DomainError("hankel1_sequence: negative order");
  if (std::abs(z) == 0.0)
    throw DomainError("hankel1_sequence: singular at z = 0");
  if (z.imag() < 0.0)
    throw DomainError("hankel1_sequence: requires Im z >= 0");

  const cplx w{z.imag(), -z.real()}; // -iz
  const auto k = detail::scaled_k01(w);
  // H_n = (2/pi) i^{-(n+1)} K_n(-iz); scaled by exp(-iz) = exp(w).
  const cplx phase = std::polar(1.0, z.real());
  cplx h0 = (2.0 / pi) * cplx(0.0, -1.0) * k.k0 * phase;
  cplx h1 = -(2.0 / pi) * k.k1 * phase;
  double offset = -z.imag();

  std::vector<cplx> mant(static_cast<std::size_t>(nmax) + 2);
  std::vector<double> lscale(mant.size());
  mant[0] = h0;
  lscale[0] = offset;
  mant[1] = h1;
  lscale[1] = offset;
  const cplx two_over_z = 2.0 / z;
  for (int n = 1; n <= nmax; ++n) {
    cplx h2 = static_cast<double>(n) * two_over_z * h1 - h0;
    if (std::abs(h2) > detail::kRescaleBig) {
      h2 /= detail::kRescaleBig;
      h1 /= detail::kRescaleBig;
      offset += detail::kLogRescaleBig;
    }
    h0 = h1;
    h1 = h2;
    mant[n + 1] = h1;
    lscale[n + 1] = offset;
  }

  std::vector<ScaledPair> out(static_cast<std::size_t>(nmax) + 1);
  for (int n = 0; n <= nmax; ++n) {
    const double ls = lscale[n];
    auto &p = out[n];
    p.log_scale = ls;
    p.value = mant[n];
    const cplx next = mant[n + 1] * std::exp(lscale[n + 1] - ls);
    if (n == 0) {
      p.deriv = -next;
    } else {
      const cplx prev = mant[n - 1] * std::exp(lscale[n - 1] - ls);
      p.deriv = prev - static_cast<double>(n) / z * mant[n];
    }
    detail::normalize(p);
  }
  return out;
}

/// H_n^(1)'(z)/H_n^(1)(z) for n = 0..nmax by forward ratio recurrence.
/// Valid for any |z|; only the ratio is formed, never the raw value.
inline std::vector<cplx> hankel1_log_derivative(int nmax, cplx z) {
  if (std::abs(z) == 0.0)
    throw DomainError("hankel1_log_derivative: singular at z = 0");
  if (z.imag() < 0.0)
    throw DomainError("hankel1_log_derivative: requires Im z >= 0");
  const cplx w{z.imag(), -z.real()};
  const auto k = detail::scaled_k01(w);
  // H_1/H_0 = -i K_1/K_0
  cplx ratio = cplx(0.0, -1.0) * k.k1 / k.k0;
  std::vector<cplx> out(static_cast<std::size_t>(nmax) + 1);
  out[0] = -ratio;
  for (int n = 1; n <= nmax; ++n) {
    out[n] = 1.0 / ratio - static_cast<double>(n) / z;
    ratio = 2.0 * n / z - 1.0 / ratio;
  }
  return out;
}

/// Raw J_n(z); refuses |Im z| above the overflow guard.
inline cplx bessel_j(int n, cplx z) {
  if (std::abs(z.imag()) > kRawOverflowGuard)
    throw OverflowDomainError("bessel_j: |Im z| above overflow guard; use "
                              "bessel_j_sequence");
  return bessel_j_sequence(n, z)[n].raw_value();
}

inline cplx bessel_j_prime(int n, cplx z) {
  if (std::abs(z.imag()) > kRawOverflowGuard)
    throw OverflowDomainError("bessel_j_prime: |Im z| above overflow guard");
  return bessel_j_sequence(n, z)[n].raw_deriv();
}

inline cplx hankel1(int n, cplx z) {
  if (std::abs(z.imag()) > kRawOverflowGuard)
    throw OverflowDomainError("hankel1: |Im z| above overflow guard");
  return hankel1_sequence(n, z)[n].raw_value();
}

inline cplx hankel1_prime(int n, cplx z) {
  if (std::abs(z.imag()) > kRawOverflowGuard)
    throw OverflowDomainError("hankel1_prime: |Im z| above overflow guard");
  return hankel1_sequence(n, z)[n].raw_deriv();
}

/// Y_n(z) = (H_n^(1) - J_n)/i, Im z >= 0.
inline cplx bessel_y(int n, cplx z) {
  return (hankel1(n, z) - bessel_j(n, z)) / cplx(0.0, 1.0);
}

inline cplx bessel_y_prime(int n, cplx z) {
  return (hankel1_prime(n, z) - bessel_j_prime(n, z)) / cplx(0.0, 1.0);
}

/// Everything a kernel needs about one order at one argument.
struct BesselEval {
  int order = 0;
  cplx argument{};
  cplx J{};
  cplx Jp{};
  cplx H1{};
  cplx H1p{};
};

inline BesselEval bessel_eval(int n, cplx z) {
  return {n, z, bessel_j(n, z), bessel_j_prime(n, z), hankel1(n, z),
          hankel1_prime(n, z)};
}

/// i-th positive zero of J_n (prime = false) or J_n' (prime = true).
inline double bessel_zero(int n, int i, bool prime) {
  if (n < 0 || i < 1)
    throw DomainError("bessel_zero: need n >= 0 and i >= 1");
  auto f = [n, prime](double x) {
    const auto seq = bessel_j_sequence(n, cplx(x, 0.0));
    return prime ? seq[n].raw_deriv().real() : seq[n].raw_value().real();
  };
  // Zeros of J_n and J_n' are separated by more than 1 on the positive axis.
  const double step = 0.25;
  double a = prime ? std::max(step, n - 1.0) : std::max(step, n * 1.0);
  if (prime && n > 0)
    a = std::max(step, 0.9 * n);
  double fa = f(a);
  int found = 0;
  for (;;) {
    const double b = a + step;
    const double fb = f(b);
    if (fa == 0.0) {
      if (++found == i)
        return a;
    } else if (fa * fb < 0.0) {
      if (++found == i) {
        boost::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(50);
        const auto r =
            boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
        return 0.5 * (r.first + r.second);
      }
    }
    a = b;
    fa = fb;
  }
}

} // namespace cpthermal
