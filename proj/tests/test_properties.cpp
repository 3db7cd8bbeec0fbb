// Properties that tie several modules together: spectra of quotients and
// covers, products, scaling of the functional, and reproducibility.
#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "hspec/sweep.hpp"

using namespace hspec;

namespace {

constexpr double pi = std::numbers::pi;

RVector vec(std::initializer_list<double> v) {
  RVector x(Eigen::Index(v.size()));
  int i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

// Functions on SO(3) lift to SU(2), so the cover has the smaller gap.
TEST(Property, CoverHasSmallerFirstEigenvalue) {
  const auto su2 = build_space_model("su2"), so3 = build_space_model("so3");
  SpectralEngine a(su2), b(so3);
  const auto info = commutant(su2);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const RMatrix phi = random_invariant_matrix(su2, info, rng, 2.0);
    EXPECT_LE(a.lambda1(diagonal_decomposition(su2, phi)).value,
              b.lambda1(diagonal_decomposition(so3, phi)).value * (1 + 1e-12));
  }
}

// Basic functions of the Hopf fibration are eigenfunctions upstairs for every
// fibre length, so lambda1 of the total space never exceeds that of S^2.
TEST(Property, SubmersionBoundsTotalSpaceGap) {
  const auto su2 = build_space_model("su2");
  SpectralEngine e(su2);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 40; ++i) {
    const double fibre = std::pow(4.0, u(rng)), base = std::pow(4.0, u(rng));
    const double l = e.lambda1(family_metric(su2, vec({base, base, fibre}))).value;
    EXPECT_LE(l, 8.0 / base * (1 + 1e-12));
  }
}

TEST(Property, ProductSpectrumIsMinimumOfFactors) {
  const auto prod = build_space_model("su2*torus", {1});
  ASSERT_EQ(prod.n(), 4);
  const auto su2 = build_space_model("su2");
  SpectralEngine e(prod), e2(su2);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    const double a = std::pow(4.0, u(rng)), b = std::pow(4.0, u(rng)), c = std::pow(4.0, u(rng)),
                 t = std::pow(4.0, u(rng));
    RMatrix phi = RMatrix::Zero(4, 4);
    phi.diagonal() << a, b, c, t;
    const double l = e.lambda1(diagonal_decomposition(prod, phi)).value;
    const double ls = e2.lambda1(family_metric(su2, vec({a, b, c}))).value;
    EXPECT_NEAR(l, std::min(ls, 1.0 / t), 1e-10 * l);
  }
}

// Riemannian submersions shorten distances: diam(S^3, Berger) >= diam(S^2).
TEST(Property, GraphDiameterDominatesQuotient) {
  const auto su2 = build_space_model("su2");
  RMatrix e3 = RMatrix::Zero(3, 1);
  e3(2, 0) = 1.0;
  const double q = quotient_diameter(su2, e3).value;
  for (double fibre : {1.0, 0.25, 0.0625}) {
    const double d = graph_diameter_fixed(su2, family_metric(su2, vec({1, 1, fibre})).phi, 15000, 12, 6).value;
    EXPECT_GE(d, q * 0.98) << fibre;
  }
}

TEST(Property, LiBoundOnRandomSu2Metrics) {
  const auto su2 = build_space_model("su2");
  SweepOptions o;
  o.diam.n_start = o.diam.n_max = 12000;
  o.diam.seed = 9;
  FunctionalEvaluator ev(su2, o);
  std::mt19937_64 rng(24);
  for (int i = 0; i < 8; ++i) {
    const auto r = ev.evaluate(random_family_coords(su2, rng, 2.0));
    EXPECT_GE(r.F, li_constant * 0.97) << r.x.transpose();
    EXPECT_TRUE(r.all_checks_pass()) << r.x.transpose();
  }
}

TEST(Property, GraphEstimateIsReproducibleAcrossThreadCounts) {
  const auto su2 = build_space_model("su2");
  const RMatrix phi = family_metric(su2, vec({1, 2, 3})).phi;
  const double a = graph_diameter_fixed(su2, phi, 6000, 12, 31, 1).value;
  const double b = graph_diameter_fixed(su2, phi, 6000, 12, 31, 1).value;
  const double c = graph_diameter_fixed(su2, phi, 6000, 12, 31, 3).value;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, graph_diameter_fixed(su2, phi, 6000, 12, 32, 1).value);
}

TEST(Property, SpectrumListingAgreesWithLambda1) {
  std::mt19937_64 rng(25);
  for (const char* name : {"su2", "so3", "su3_mod_t2"}) {
    const auto s = build_space_model(name);
    SpectralEngine e(s);
    for (int i = 0; i < 5; ++i) {
      const auto g = family_metric(s, random_family_coords(s, rng, 1.0));
      const double l = e.lambda1(g).value;
      const auto sp = e.full_spectrum(g, 2.0 * l / (g.sigma_last() * g.sigma_last()));
      ASSERT_GE(sp.entries.size(), 2u) << name;
      EXPECT_EQ(sp.entries[0].value, 0.0);
      EXPECT_NEAR(sp.entries[1].value, l, 1e-10 * l) << name;
      for (size_t k = 1; k < sp.entries.size(); ++k) EXPECT_GT(sp.entries[k].value, sp.entries[k - 1].value);
    }
  }
}

// Weyl symmetry of the flag manifold: lambda1 is invariant under every
// permutation of the three family coordinates.
TEST(Property, FlagManifoldPermutationInvariance) {
  const auto s = build_space_model("su3_mod_t2");
  SpectralEngine e(s);
  std::mt19937_64 rng(26);
  for (int i = 0; i < 10; ++i) {
    RVector x = random_family_coords(s, rng, 1.5);
    const double l = e.lambda1(family_metric(s, x)).value;
    std::vector<int> p{0, 1, 2};
    while (std::next_permutation(p.begin(), p.end())) {
      RVector y(3);
      for (int k = 0; k < 3; ++k) y(k) = x(p[size_t(k)]);
      EXPECT_NEAR(e.lambda1(family_metric(s, y)).value, l, 1e-10 * l);
    }
  }
}

TEST(Property, RoundSphereFunctionalIsDimensionTimesPiSquared) {
  const auto su2 = build_space_model("su2");
  SweepOptions o;
  FunctionalEvaluator ev(su2, o);
  for (double c : {0.5, 1.0, 3.0}) EXPECT_NEAR(ev.evaluate(vec({c, c, c})).F, 3.0 * pi * pi, 1e-9);
  const auto s2 = build_space_model("su2_mod_u1");
  FunctionalEvaluator e2(s2, o);
  // S^2 of radius 1/2 in these units: lambda1 = 8, diameter pi/2.
  EXPECT_NEAR(e2.lambda1_identity() * std::pow(pi / 2, 2), 2.0 * pi * pi, 1e-9);
}
