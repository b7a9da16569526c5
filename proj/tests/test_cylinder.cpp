#include <gtest/gtest.h>

#include "cpthermal/cylinder.hpp"
#include "cpthermal/molecule.hpp"
#include "cpthermal/planar.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cpthermal;
using testutil::rel;

namespace {

constexpr double kOmega10 = 2.79e12;
const double kLambda = 2.0 * K::pi * K::c / kOmega10;

CylinderConfig cyl(const PermittivityModel &m, double R, double phi) {
  CylinderConfig c;
  c.material = m;
  c.radius = R;
  c.phi = phi;
  return c;
}

double pc_deviation(int n, double g, double t, cplx eps) {
  const auto st = CylinderKernelState::make(n, g, t, eps);
  const auto r = cylinder_reflection(n, st, {false, eps});
  const auto b = bessel_eval(n, st.x);
  const cplx m = -b.H1p / b.Jp, nn = -b.H1 / b.J;
  return std::max(rel(r.r_M, m), rel(r.r_N, nn));
}

} // namespace

TEST(CylinderKernel, StateInvariants) {
  const cplx eps(-6.6e4, 1.2e4);
  for (double g : {0.3, 5.75, 40.0})
    for (double t : {0.0, 0.4, 0.99, 1.7, 6.0}) {
      const auto st = CylinderKernelState::make(2, g, t, eps);
      EXPECT_LT(rel(st.x * st.x + g * g * t * t, cplx(g * g)), 1e-12);
      EXPECT_LT(rel(st.x1 * st.x1 + g * g * t * t, eps * g * g), 1e-12);
      EXPECT_GE(st.x.imag(), 0.0);
      EXPECT_GE(st.x1.imag(), 0.0);
    }
}

TEST(CylinderKernel, ZeroOrderHasNoMixingTerm) {
  EXPECT_EQ(detail::cylinder_a(0, cplx(9.0), cplx(2.0, 0.1), cplx(30.0, 4.0)), cplx(0.0));
  EXPECT_NE(detail::cylinder_a(1, cplx(9.0), cplx(2.0, 0.1), cplx(30.0, 4.0)), cplx(0.0));
}

TEST(CylinderKernel, ReflectionMatchesBoundaryMatching) {
  double worst = 0.0;
  for (cplx e : {cplx(4.0, 0.5), cplx(12.0, 3.0), cplx(-30.0, 5.0), cplx(1.02, 0.01),
                 cplx(-6.6e4, 1.2e4)})
    for (double g : {0.5, 3.0, 10.0})
      for (int n = 0; n <= 5; ++n)
        for (double t : {0.1, 0.5, 0.9, 1.5, 3.0}) {
          const auto st = CylinderKernelState::make(n, g, t, e);
          const auto r = cylinder_reflection(n, st, {false, e});
          const auto o = oracle::cylinder_matching(n, g, t, e);
          worst = std::max({worst, rel(r.r_M, o.r_M), rel(r.r_N, o.r_N)});
        }
  EXPECT_LT(worst, 1e-10);
}

TEST(CylinderKernel, PerfectConductorLimitApproachedAsInverseRootEps) {
  // The distance to the ideal-metal coefficients is a surface-impedance
  // effect of order 1/(g sqrt|eps|); it shrinks tenfold per factor 100 in eps.
  for (double g : {1.0, 5.75, 10.0})
    for (int n = 0; n <= 5; ++n)
      for (double t : {0.1, 0.5, 0.9, 1.5}) {
        const double d10 = pc_deviation(n, g, t, cplx(1e10, 1e10));
        const double d12 = pc_deviation(n, g, t, cplx(1e12, 1e12));
        EXPECT_LT(d12, 1e-3) << "n=" << n << " g=" << g << " t=" << t;
        EXPECT_NEAR(d10 / d12, 10.0, 0.5) << "n=" << n << " g=" << g << " t=" << t;
      }
}

TEST(CylinderKernel, VacuumPreconditionAndInfiniteEps) {
  const auto st = CylinderKernelState::make(1, 3.0, 0.5, cplx(1.0));
  EXPECT_THROW(cylinder_reflection(1, st, {false, cplx(1.0)}), DomainError);
  const auto r = cylinder_reflection(1, st, {true, cplx{}});
  const auto b = bessel_eval(1, st.x);
  EXPECT_LT(rel(r.r_M, -b.H1p / b.Jp), 1e-12);
  EXPECT_LT(rel(r.r_N, -b.H1 / b.J), 1e-12);
}

TEST(Cylinder, StaticTermMatchesFixedGridOracle) {
  const auto gold = PermittivityModel::gold();
  const double R = 618e-6;
  EXPECT_LT(rel(cylinder_scaled_trace_imag(cyl(gold, R, 0.5), 0.0),
                oracle::cylinder_static_term(R, 0.5, 2000)),
            1e-6);
}

TEST(Cylinder, StaticTermApproachesPlaneAtLargeRadius) {
  const auto pc = PermittivityModel::perfect_conductor();
  const double d = 5e-6;
  const double R = 2.0 * d / 0.001; // d / R = 1e-3
  const double got = cylinder_scaled_trace_imag(cyl(pc, R, 1.0 - d / R), 0.0);
  EXPECT_LT(rel(got, -K::c * K::c / (8.0 * K::pi * d * d * d)), 0.01);
}

TEST(Cylinder, ImaginaryAxisIsReal) {
  const auto gold = PermittivityModel::gold();
  {
    double res = 1.0;
    const double v = cylinder_scaled_trace_imag(cyl(gold, 20e-6, 0.5), 3e13, &res);
    EXPECT_LE(std::abs(res), 1e-10 * std::abs(v));
    EXPECT_LT(v, 0.0);
  }
  // at R = 618 um only m = 1 survives exp(-2 xi d / c) in double range
  for (int m : {1, 2, 20}) {
    double res = 1.0;
    const double v =
        cylinder_scaled_trace_imag(cyl(gold, 618e-6, 0.5), matsubara_frequency(m, 300.0), &res);
    EXPECT_LE(std::abs(res), 1e-10 * std::abs(v));
    EXPECT_LE(v, 0.0);
  }
}

TEST(Cylinder, WeakContrastVanishesLinearly) {
  double prev_i = 0.0;
  cplx prev_r{};
  for (double de : {1e-2, 1e-4, 1e-6}) {
    const auto c = cyl(PermittivityModel::constant(1.0 + de), 618e-6, 0.5);
    const double vi = cylinder_scaled_trace_imag(c, 2e12);
    const cplx vr = cylinder_trace(c, kOmega10);
    if (prev_i != 0.0) {
      EXPECT_NEAR(prev_i / vi, 100.0, 2.0);
      EXPECT_NEAR(std::abs(prev_r / vr), 100.0, 2.0);
    }
    prev_i = vi;
    prev_r = vr;
  }
  EXPECT_LT(std::abs(prev_i), 1e-3 * std::abs(cylinder_scaled_trace_imag(
                                       cyl(PermittivityModel::gold(), 618e-6, 0.5), 2e12)));
}

TEST(Cylinder, VacuumAndDomain) {
  const auto vac = PermittivityModel::constant(1.0);
  EXPECT_EQ(std::abs(cylinder_trace(cyl(vac, 1e-4, 0.3), 1e13)), 0.0);
  EXPECT_EQ(cylinder_scaled_trace_imag(cyl(vac, 1e-4, 0.3), 1e13), 0.0);
  const auto gold = PermittivityModel::gold();
  EXPECT_THROW(cylinder_trace(cyl(gold, 1e-4, 1.0), 1e13), DomainError);
  EXPECT_THROW(cylinder_trace(cyl(gold, 0.0, 0.3), 1e13), DomainError);
  EXPECT_THROW(cylinder_trace(cyl(gold, 1e-4, 0.3), 0.0), DomainError);
  EXPECT_THROW(cylinder_scaled_trace_imag(cyl(gold, 1e-4, 0.3), -1.0), DomainError);
  EXPECT_THROW(cylinder_trace_imag(cyl(gold, 1e-4, 0.3), 0.0), DomainError);
}

TEST(Cylinder, RealAxisMatchesFixedGridSimpson) {
  // Gold at w10, R = 618 um, phi = 0.5: integrate the same mode sums on
  // fixed grids and extrapolate.
  const auto gold = PermittivityModel::gold();
  const auto c = cyl(gold, 618e-6, 0.5);
  const auto eps = eps_real_axis(gold, kOmega10);
  const double k = kOmega10 / K::c, g = k * c.radius;
  auto sample = [&](double t, cplx x) {
    detail::ModeSumRequest rq;
    rq.phi = c.phi;
    rq.x = x;
    rq.x1 = g * oracle::sqrt_up(eps.value - t * t);
    rq.g2 = g * g;
    rq.gt2 = g * g * t * t;
    rq.eps = eps;
    rq.n_hi = 60;
    return detail::mode_sums(rq);
  };
  // the integrand is finite at x = 0 but not evaluable there
  auto prop = [&](double th) {
    th = std::max(th, 1e-9);
    return std::sin(th) * sample(std::cos(th), cplx(g * std::sin(th), 0.0));
  };
  auto evan = [&](double s) {
    s = std::max(s, 1e-9);
    return std::sinh(s) * sample(std::cosh(s), cplx(0.0, g * std::sinh(s)));
  };
  const double smax = std::asinh((25.0 / (1.0 - c.phi) + 10.0) / g);
  // waveguide resonances of the near-ideal wall are narrow in theta; the
  // evanescent part converges as h^2 from the t = 1 endpoint
  const cplx pre(0.0, k / (2.0 * K::pi));
  const cplx ev = pre * oracle::simpson<cplx>(evan, 0.0, smax, 32000);
  const cplx coarse = pre * oracle::simpson<cplx>(prop, 0.0, K::pi / 2, 64000) + ev;
  const cplx fine = pre * oracle::simpson<cplx>(prop, 0.0, K::pi / 2, 128000) + ev;
  const cplx ref = fine + (fine - coarse) / 15.0;
  EXPECT_LT(rel(fine, ref), 1e-6);
  EXPECT_LT(rel(cylinder_trace(c, kOmega10), ref), 1e-6);
}

TEST(Cylinder, LargeRadiusRecoversHalfSpace) {
  const double R = 20.0 * kLambda;
  const double d = 0.1 * kLambda;
  const double phi = 1.0 - d / R;
  PlanarConfig hs;
  hs.z = d;

  hs.material = PermittivityModel::perfect_conductor();
  for (int m : {1, 5}) {
    const double xi = matsubara_frequency(m, 300.0);
    EXPECT_LT(rel(cylinder_scaled_trace_imag(cyl(hs.material, R, phi), xi),
                  halfspace_scaled_trace_imag(hs, xi)),
              0.05)
        << "m=" << m;
  }
  // lossless walls put waveguide poles on the real axis; use gold there
  hs.material = PermittivityModel::gold();
  EXPECT_LT(rel(cylinder_trace(cyl(hs.material, R, phi), kOmega10),
                halfspace_trace(hs, kOmega10).total()),
            0.05);
}

TEST(ResonantRadius, Values) {
  const double r11 = resonant_radius(1, 1, kOmega10, false);
  EXPECT_LT(rel(1.5 * r11, 618e-6), 0.01);
  EXPECT_LT(rel(resonant_radius(1, 1, 2.0 * kOmega10, false), 0.5 * r11), 1e-14);
  EXPECT_LT(rel(resonant_radius(1, 1, kOmega10, true), K::c * 1.841183781 / kOmega10),
            1e-9);
  EXPECT_THROW(resonant_radius(1, 1, 0.0, false), DomainError);
}
