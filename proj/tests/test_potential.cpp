#include <gtest/gtest.h>

#include "cpthermal/potential.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cpthermal;
using testutil::rel;

namespace {

constexpr double kOmega10 = 2.79e12;
const double kLambda = 2.0 * K::pi * K::c / kOmega10;

MoleculeSpec lih() {
  MoleculeSpec m;
  m.name = "LiH";
  const double d = convert(5.88, Unit::debye, Unit::coulomb_meter);
  m.transitions.push_back({kOmega10, d * d});
  return m;
}

Geometry half(const PermittivityModel &m) { return HalfSpaceGeometry{m}; }

} // namespace

TEST(Nonresonant, VacuumIsZero) {
  const auto g = half(PermittivityModel::constant(1.0));
  EXPECT_EQ(nonresonant_potential(lih(), g, {}, 1e-6), 0.0);
  EXPECT_EQ(resonant_potential(lih(), g, {}, 1e-6).total, 0.0);
}

TEST(Nonresonant, PerfectConductorAttractsAndGrowsInward) {
  const auto g = half(PermittivityModel::perfect_conductor());
  double prev = 0.0;
  for (double z = 1e-5; z > 1e-7; z /= 2.0) {
    const double u = nonresonant_potential(lih(), g, {}, z);
    EXPECT_LT(u, 0.0);
    EXPECT_GT(std::abs(u), std::abs(prev));
    prev = u;
  }
}

TEST(Nonresonant, GoldMatchesBruteForceSum) {
  const auto gold = PermittivityModel::gold();
  const auto mol = lih();
  const ThermalContext th{300.0, 0};
  for (double z : {1e-6, 500e-6}) {
    double sum = 0.0;
    for (int m = 10000; m >= 0; --m) {
      const double xi = matsubara_frequency(m, th.temperature);
      if (2.0 * xi * z / K::c > 100.0)
        continue;
      sum += (m == 0 ? 0.5 : 1.0) * alpha_imag_axis(mol, xi) *
             oracle::halfspace_scaled_imag(gold, xi, z, 200000);
    }
    const double ref = K::mu_0 * K::k_B * th.temperature * sum;
    EXPECT_LT(rel(nonresonant_potential(mol, half(gold), th, z), ref), 1e-6) << z;
  }
}

TEST(Nonresonant, MatsubaraTruncationStableUnderDoubling) {
  const auto g = half(PermittivityModel::gold());
  for (double z : {1e-7, 1e-5, 1e-3}) {
    const auto r = nonresonant_potential_detail(lih(), g, {}, z);
    ThermalContext doubled{300.0, 2 * r.cutoff};
    EXPECT_LT(rel(nonresonant_potential(lih(), g, doubled, z), r.value), 1e-8) << z;
  }
}

TEST(Nonresonant, FixedCutoffIsHonoured) {
  const auto g = half(PermittivityModel::gold());
  const auto r = nonresonant_potential_detail(lih(), g, {300.0, 3}, 1e-7);
  EXPECT_EQ(r.cutoff, 3);
}

TEST(Resonant, LinearInPhotonNumber) {
  const auto g = half(PermittivityModel::gold());
  const double z = 0.3 * kLambda;
  const auto mol = lih();
  const double ref = resonant_potential(mol, g, {300.0, 0}, z).total /
                     photon_number(kOmega10, 300.0);
  for (double T : {30.0, 77.0, 1000.0})
    EXPECT_LT(rel(resonant_potential(mol, g, {T, 0}, z).total / photon_number(kOmega10, T),
                  ref),
              1e-12);
  EXPECT_LT(std::abs(resonant_potential(mol, g, {0.5, 0}, z).total), 1e-15 * std::abs(ref));
}

TEST(Resonant, TwoEqualTransitionsDouble) {
  auto two = lih();
  two.transitions.push_back(two.transitions.front());
  const auto g = half(PermittivityModel::gold());
  const double z = 0.3 * kLambda;
  EXPECT_LT(rel(resonant_potential(two, g, {}, z).total,
                2.0 * resonant_potential(lih(), g, {}, z).total),
            1e-14);
}

TEST(Resonant, NearZoneCancelsNonresonant) {
  const auto g = half(PermittivityModel::gold());
  const double z = 0.005 * kLambda;
  const double unr = nonresonant_potential(lih(), g, {}, z);
  const auto ures = resonant_potential(lih(), g, {}, z);
  EXPECT_LT(std::abs(*ures.evanescent + unr), 0.1 * std::abs(unr));
}

TEST(Curve, ComponentsAddUp) {
  const auto g = half(PermittivityModel::gold());
  std::vector<double> scan;
  for (int i = 0; i < 6; ++i)
    scan.push_back(kLambda * (0.01 + 0.4 * i));
  const auto c = total_potential_curve(lih(), g, {}, scan);
  ASSERT_TRUE(c.planar);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    // the grid is far too sparse for the force; only convergence matters here
    EXPECT_NE(c.status[i], SampleStatus::convergence_error) << c.messages[i];
    const double p = c.U_resonant_propagating[i], e = c.U_resonant_evanescent[i];
    EXPECT_LE(std::abs(c.U_resonant_total[i] - (p + e)),
              1e-12 * std::max(std::abs(p), std::abs(e)));
    EXPECT_LE(std::abs(c.U_total[i] - (c.U_nonresonant[i] + c.U_resonant_total[i])),
              1e-12 * std::max(std::abs(c.U_nonresonant[i]), std::abs(c.U_resonant_total[i])));
    EXPECT_TRUE(std::isfinite(c.F[i]));
  }

  EngineOptions two;
  two.threads = 2;
  const auto c2 = total_potential_curve(lih(), g, {}, scan, two);
  EXPECT_EQ(c2.U_total, c.U_total);
}

TEST(Curve, VacuumIsAllZero) {
  const auto c = total_potential_curve(lih(), half(PermittivityModel::constant(1.0)), {},
                                       {1e-6, 2e-6, 3e-6, 4e-6, 5e-6});
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(c.U_total[i], 0.0);
    EXPECT_EQ(c.U_resonant_propagating[i], 0.0);
    EXPECT_EQ(c.F[i], 0.0);
  }
}

TEST(Curve, CylinderHasNoSplit) {
  const Geometry g = CylinderGeometry{PermittivityModel::gold(), 20e-6, 0};
  const auto c = total_potential_curve(lih(), g, {}, {2e-6, 8e-6});
  EXPECT_FALSE(c.planar);
  EXPECT_TRUE(c.U_resonant_propagating.empty());
  for (double u : c.U_total)
    EXPECT_TRUE(std::isfinite(u));
  // fewer than five samples: no force
  EXPECT_TRUE(std::isnan(c.F[0]));
}

TEST(Curve, RejectsBadScans) {
  const auto g = half(PermittivityModel::gold());
  EXPECT_THROW(total_potential_curve(lih(), g, {}, {2e-6, 1e-6}), DomainError);
  EXPECT_THROW(total_potential_curve(lih(), g, {}, {1e-6}), DomainError);
  EXPECT_THROW(total_potential_curve(lih(), g, {}, {-1e-6, 1e-6}), DomainError);
  const Geometry cav = CavityGeometry{PermittivityModel::gold(), 1e-5};
  EXPECT_THROW(total_potential_curve(lih(), cav, {}, {2e-6, 1e-5}), DomainError);
  EXPECT_THROW(nonresonant_potential(lih(), g, {0.0, 0}, 1e-6), DomainError);
}

TEST(Force, ConstantAndLinear) {
  std::vector<double> z, c, l;
  for (int i = 0; i < 12; ++i) {
    z.push_back(1e-6 * (1.0 + 0.7 * i));
    c.push_back(-3.2e-25);
    l.push_back(4.5e-20 * z.back());
  }
  const auto fc = force_from_potential(z, c);
  const auto fl = force_from_potential(z, l);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_LE(std::abs(fc.force[i]), 1e-14 * 3.2e-25 / 0.7e-6);
    EXPECT_LT(rel(fl.force[i], -4.5e-20), 1e-12);
  }
}

TEST(Force, SineAtFortySamplesPerPeriod) {
  const double k = 2.0 * K::pi / kLambda;
  const double period = K::pi / k; // of sin(2 k z)
  std::vector<double> z, u;
  for (int i = 0; i <= 120; ++i) {
    z.push_back(kLambda + i * period / 40.0);
    u.push_back(std::sin(2.0 * k * z.back()));
  }
  const auto f = force_from_potential(z, u);
  double amp = 2.0 * k;
  for (std::size_t i = 2; i + 2 < z.size(); ++i) {
    EXPECT_LT(std::abs(f.force[i] + amp * std::cos(2.0 * k * z[i])), 1e-3 * amp) << i;
    EXPECT_FALSE(f.coarse[i]);
  }
  // second-order ends
  EXPECT_LT(std::abs(f.force[0] + amp * std::cos(2.0 * k * z[0])), 1e-2 * amp);
}

TEST(Force, GeometricGridAndCoarseFlag) {
  std::vector<double> z, u;
  for (int i = 0; i < 30; ++i) {
    z.push_back(1e-7 * std::pow(1.1, i));
    u.push_back(-1.0 / (z.back() * z.back() * z.back()));
  }
  const auto f = force_from_potential(z, u);
  for (std::size_t i = 2; i + 2 < z.size(); ++i)
    EXPECT_LT(rel(f.force[i], -3.0 / std::pow(z[i], 4)), 1e-3) << i;

  std::vector<double> zc, uc;
  for (int i = 0; i < 12; ++i) {
    zc.push_back(i * 1.0);
    uc.push_back(std::sin(2.5 * i));
  }
  const auto fcoarse = force_from_potential(zc, uc);
  EXPECT_TRUE(std::any_of(fcoarse.coarse.begin(), fcoarse.coarse.end(), [](bool b) { return b; }));

  EXPECT_THROW(force_from_potential({1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(force_from_potential({1.0, 2.0, 2.0, 4.0, 5.0}, {0, 0, 0, 0, 0}), DomainError);
}
