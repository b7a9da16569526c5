// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cpthermal/cylinder.hpp"
#include "cpthermal/keldysh.hpp"
#include "cpthermal/potential.hpp"
#include "oracles.hpp"

using namespace cpthermal;

namespace {

constexpr double kOmega10 = 2.79e12;
const double kLambda = 2.0 * K::pi * K::c / kOmega10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

double rel(cplx a, cplx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

MoleculeSpec lih() {
  MoleculeSpec m;
  m.name = "LiH";
  const double d = convert(5.88, Unit::debye, Unit::coulomb_meter);
  m.transitions.push_back({kOmega10, d * d});
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Local minima of u on the interior of the grid, in grid order.
std::vector<std::size_t> local_minima(const std::vector<double> &u) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    if (u[i] < u[i - 1] && u[i] <= u[i + 1])
      out.push_back(i);
  return out;
}

// ------------------------------------------------------------- criteria

Outcome contour_rotation() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double Om : {5e12, 3e13, 2e14})
    for (double T : {10.0, 300.0, 1000.0}) {
      const ScalarModelGreen G{{{Om, 0.05 * Om, 1.0}}};
      const ScalarModelGreen a{{{1.3 * Om, 0.026 * Om, 2.0}}};
      worst = std::max(worst, contour_rotation_check(G, a, T).rel_err);
    }
  const double t = seconds_since(t0);
  return {worst < 1e-6 && t < 10.0,
          fmt("max rel err %.2e over 3x3 grid (tol 1e-6), %.2f s (limit 10 s)", worst, t)};
}

Outcome born_series() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, max_sr = 0.0;
  for (int k = 0; k < 50; ++k) {
    RandomSystemOptions o;
    o.spectral_radius = 0.8 * (0.25 + 0.75 * u(rng));
    o.N_E = 3.0 * u(rng);
    o.N_S = 3.0 * u(rng);
    const auto r = born_series_fixpoint(random_keldysh_system(1000 + k, o), 300);
    worst = std::max(worst, r.rel_err);
    max_sr = std::max(max_sr, r.spectral_radius);
  }
  const double t = seconds_since(t0);
  return {worst < 1e-10 && t < 5.0,
          fmt("max-norm rel err %.2e on 50 systems, spectral radius <= %.3f (tol 1e-10), "
              "%.2f s (limit 5 s)",
              worst, max_sr, t)};
}

Outcome equilibrium_fdt() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    RandomSystemOptions o;
    o.N_E = o.N_S = 0.05 + 15.0 * u(rng);
    const auto s = random_keldysh_system(2000 + k, o);
    worst = std::max(worst, fdt_residual(s, born_series_fixpoint(s, 300).rho));
  }
  return {worst < 1e-10, fmt("max residual %.2e on 10 systems (tol 1e-10)", worst)};
}

Outcome detailed_balance() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, eq = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double w = std::pow(10.0, 11.0 + 3.0 * u(rng));
    const double te = 1.0 + 999.0 * u(rng), ts = 1.0 + 999.0 * u(rng);
    const double ne = photon_number(w, te), ns = photon_number(w, ts);
    const double scale = std::max(ne, ns);
    if (scale > 0.0)
      worst = std::max(worst, std::abs(detailed_balance_factor(w, te, ts) - (ne - ns)) / scale);
    eq = std::max(eq, std::abs(detailed_balance_factor(w, te, te)));
  }
  return {worst <= 1e-12 && eq == 0.0,
          fmt("max |f - (N_E - N_S)| / max(N) = %.2e over 100 samples (tol 1e-12); "
              "equal-temperature max %.1e",
              worst, eq)};
}

Outcome pc_cylinder_limits() {
  // kinematics of the 618 um cylinder at w10
  const double g = kOmega10 * 618e-6 / K::c;
  const cplx eps(1e8, 1e8);
  double worst = 0.0, worst12 = 0.0;
  int n_worst = 0;
  double t_worst = 0.0;
  for (int n = 0; n <= 5; ++n)
    for (double t : {0.1, 0.5, 0.9, 1.5}) {
      auto dev = [&](cplx e) {
        const auto st = CylinderKernelState::make(n, g, t, e);
        const auto r = cylinder_reflection(n, st, {false, e});
        const auto b = bessel_eval(n, st.x);
        return std::max(rel(r.r_M, -b.H1p / b.Jp), rel(r.r_N, -b.H1 / b.J));
      };
      const double d = dev(eps);
      if (d > worst) {
        worst = d;
        n_worst = n;
        t_worst = t;
      }
      worst12 = std::max(worst12, dev(cplx(1e12, 1e12)));
    }
  return {worst < 1e-3,
          fmt("g = %.3f, |eps| = 1e8: max rel deviation %.2e at n=%d t=%.1f (tol 1e-3); "
              "at |eps| = 1e12: %.2e",
              g, worst, n_worst, t_worst, worst12)};
}

Outcome resonance_radius() {
  const double r = 1.5 * resonant_radius(1, 1, kOmega10, false);
  return {rel(r, 618e-6) < 0.01, fmt("1.5 R_11 = %.2f um vs 618 um (%.2f%%, tol 1%%)", 1e6 * r,
                                     100.0 * rel(r, 618e-6))};
}

Outcome near_zone_cancellation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> z;
  for (int i = 0; i < 50; ++i)
    z.push_back(kLambda * 1e-4 * std::pow(100.0, i / 49.0));
  const auto c = total_potential_curve(lih(), HalfSpaceGeometry{PermittivityModel::gold()},
                                       {300.0, 0}, z);
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    worst = std::max(worst, std::abs(c.U_resonant_evanescent[i] + c.U_nonresonant[i]) /
                                std::abs(c.U_nonresonant[i]));
  const double t = seconds_since(t0);
  return {worst < 0.1 && t < 60.0,
          fmt("max |U_evan + U_nr| / |U_nr| = %.4f for z in [1e-4, 1e-2] lambda (tol 0.1), "
              "50 points in %.1f s (limit 60 s)",
              worst, t)};
}

Outcome retarded_oscillation() {
  const Geometry g = HalfSpaceGeometry{PermittivityModel::gold()};
  const auto mol = lih();
  std::vector<double> z, u;
  for (double s = 2.0 * kLambda; s <= 6.0 * kLambda + 1e-12; s += kLambda / 200.0) {
    z.push_back(s);
    u.push_back(*resonant_potential(mol, g, {300.0, 0}, s).propagating);
  }
  std::vector<double> up, down, all;
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    if ((u[i] < 0.0) != (u[i + 1] < 0.0)) {
      const double zc = z[i] + (z[i + 1] - z[i]) * u[i] / (u[i] - u[i + 1]);
      all.push_back(zc);
      (u[i] < 0.0 ? up : down).push_back(zc);
    }
  auto mean_spacing = [](const std::vector<double> &v) {
    return v.size() < 2 ? 0.0 : (v.back() - v.front()) / double(v.size() - 1);
  };
  const double target = K::pi * K::c / kOmega10;
  const double period = 0.5 * (mean_spacing(up) + mean_spacing(down));
  return {up.size() >= 2 && down.size() >= 2 && rel(period, target) < 0.05,
          fmt("%zu crossings; same-direction spacing %.2f um vs pi c / w10 = %.2f um "
              "(%.2f%%, tol 5%%); adjacent spacing %.2f um",
              all.size(), 1e6 * period, 1e6 * target, 100.0 * rel(period, target),
              1e6 * mean_spacing(all))};
}

Outcome cavity_enhancement() {
  const auto gold = PermittivityModel::gold();
  const double a = kLambda;
  // one oscillation period (lambda / 2) centred on the cavity midplane
  std::vector<double> z;
  for (int i = 0; i <= 40; ++i)
    z.push_back(a / 2.0 - kLambda / 4.0 + i * kLambda / 80.0);
  const auto cav = total_potential_curve(lih(), CavityGeometry{gold, a}, {300.0, 0}, z);
  const auto hs = total_potential_curve(lih(), HalfSpaceGeometry{gold}, {300.0, 0}, z);
  auto swing = [](const std::vector<double> &u) {
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    return 0.5 * (*hi - *lo);
  };
  const double ac = swing(cav.U_total), ah = swing(hs.U_total);
  const double uc = std::abs(cav.U_total[20]), uh = std::abs(hs.U_total[20]);
  return {ac > ah, fmt("amplitude over one period at the centre: cavity %.3e J, half-space "
                       "%.3e J, factor %.2f; |U(a/2)| factor %.2f",
                       ac, ah, ac / ah, uc / uh)};
}

Outcome cylinder_plane_benchmark() {
  const auto gold = PermittivityModel::gold();
  const double R = 20.0 * kLambda;
  const auto mol = lih();
  const Geometry cyl = CylinderGeometry{gold, R, 0};
  const Geometry hs = HalfSpaceGeometry{gold};
  double worst = 0.0;
  std::ostringstream pts;
  for (double f : {0.05, 0.1, 0.15, 0.2}) {
    const double d = f * kLambda;
    const double uc =
        nonresonant_potential(mol, cyl, {}, R - d) + resonant_potential(mol, cyl, {}, R - d).total;
    const double uh = nonresonant_potential(mol, hs, {}, d) + resonant_potential(mol, hs, {}, d).total;
    worst = std::max(worst, rel(uc, uh));
    pts << fmt(" %.2f:%.2f%%", f, 100.0 * rel(uc, uh));
  }
  return {worst < 0.05, fmt("R = 20 lambda, max deviation %.2f%% (tol 5%%); d/lambda:dev%s",
                            100.0 * worst, pts.str().c_str())};
}

Outcome fig2_shape() {
  const double R = 618e-6;
  std::vector<double> rho;
  for (int i = 0; i < 150; ++i)
    rho.push_back(2e-6 + i * (610e-6 - 2e-6) / 149.0);
  const auto c = total_potential_curve(lih(), CylinderGeometry{PermittivityModel::gold(), R, 0},
                                       {300.0, 0}, rho);
  // U is even through the axis, so a first sample within one step of rho = 0
  // that lies below its neighbour brackets the minimum on the axis
  auto mins = local_minima(c.U_total);
  if (rho[0] < rho[1] - rho[0] && c.U_total[0] < c.U_total[1])
    mins.insert(mins.begin(), 0);
  if (mins.size() < 2)
    return {false, fmt("only %zu interior minima found", mins.size())};
  const std::size_t wall = mins.back(), inner = mins[mins.size() - 2];
  return {c.U_total[wall] > c.U_total[inner],
          fmt("minima at rho = %.1f um (U = %.3e J) and %.1f um (U = %.3e J); innermost "
              "shallower: %s",
              1e6 * rho[wall], c.U_total[wall], 1e6 * rho[inner], c.U_total[inner],
              c.U_total[wall] > c.U_total[inner] ? "yes" : "no")};
}

Outcome oracle_equivalence() {
  const auto gold = PermittivityModel::gold();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_imag = 0.0, worst_real = 0.0;
  for (int k = 0; k < 20; ++k) {
    PlanarConfig c;
    c.material = gold;
    c.z = kLambda * std::pow(10.0, -3.0 + 4.0 * u(rng));
    const double xi = kOmega10 * std::pow(10.0, -1.0 + 3.0 * u(rng));
    worst_imag = std::max(worst_imag, rel(halfspace_scaled_trace_imag(c, xi),
                                          oracle::halfspace_scaled_imag(gold, xi, c.z)));
    const double w = kOmega10 * std::pow(10.0, -0.7 + 1.4 * u(rng));
    const auto got = halfspace_trace(c, w);
    const auto ref = oracle::halfspace_real(gold, w, c.z);
    worst_real = std::max({worst_real, rel(got.propagating, ref.propagating),
                           rel(got.evanescent, ref.evanescent)});
  }
  double worst_m = 0.0;
  const Geometry g = HalfSpaceGeometry{gold};
  for (double f : {1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
    const double z = f * kLambda;
    const auto r = nonresonant_potential_detail(lih(), g, {300.0, 0}, z);
    const double doubled = nonresonant_potential(lih(), g, {300.0, 2 * r.cutoff}, z);
    worst_m = std::max(worst_m, rel(doubled, r.value));
  }
  return {worst_imag < 1e-6 && worst_real < 1e-6 && worst_m < 1e-8,
          fmt("20 samples: imaginary axis %.2e, real axis %.2e (tol 1e-6); Matsubara "
              "doubling %.2e (tol 1e-8)",
              worst_imag, worst_real, worst_m)};
}

} // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"contour rotation identity", contour_rotation},
      {"Born series closed form", born_series},
      {"equilibrium FDT recovery", equilibrium_fdt},
      {"detailed-balance factor", detailed_balance},
      {"perfect-conductor cylinder limits", pc_cylinder_limits},
      {"resonance radius", resonance_radius},
      {"near-zone cancellation", near_zone_cancellation},
      {"retarded-zone oscillation", retarded_oscillation},
      {"cavity enhancement", cavity_enhancement},
      {"cylinder-to-plane benchmark", cylinder_plane_benchmark},
      {"cylinder potential shape at R = 618 um", fig2_shape},
      {"quadrature and Matsubara oracles", oracle_equivalence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
