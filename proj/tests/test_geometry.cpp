#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "hspec/diameter.hpp"

using namespace hspec;

namespace {

constexpr double pi = std::numbers::pi;

RVector vec(std::initializer_list<double> v) {
  RVector x(Eigen::Index(v.size()));
  int i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

DiameterOptions quick(long n = 20000, std::uint64_t seed = 1) {
  DiameterOptions o;
  o.n_start = n;
  o.n_max = n;
  o.seed = seed;
  return o;
}

RMatrix axis(int n, int i) {
  RMatrix b = RMatrix::Zero(n, 1);
  b(i, 0) = 1.0;
  return b;
}

// Brute-force covering radius of the lattice 2 pi Z^2 in the metric G by
// maximising, over a fine grid of the fundamental cell, the distance to the
// nearest lattice point.
double brute_circumradius(const RMatrix& G) {
  double best = 0.0;
  const int steps = 400;
  for (int a = 0; a < steps; ++a)
    for (int b = 0; b < steps; ++b) {
      const double u = 2 * pi * a / steps, v = 2 * pi * b / steps;
      double dmin = 1e300;
      for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) {
          RVector d(2);
          d << u - 2 * pi * i, v - 2 * pi * j;
          dmin = std::min(dmin, std::sqrt(d.dot(G * d)));
        }
      best = std::max(best, dmin);
    }
  return best;
}

}  // namespace

TEST(Geometry, ClosedForms) {
  const auto t1 = build_space_model("torus", {1});
  EXPECT_NEAR(*closed_form_diameter(t1, RMatrix::Constant(1, 1, 4.0)), 2 * pi, 1e-12);
  const auto su2 = build_space_model("su2");
  EXPECT_NEAR(*closed_form_diameter(su2, RMatrix::Identity(3, 3)), pi, 1e-12);
  EXPECT_NEAR(*closed_form_diameter(su2, 4.0 * RMatrix::Identity(3, 3)), 2 * pi, 1e-12);
  const auto so3 = build_space_model("so3");
  EXPECT_NEAR(*closed_form_diameter(so3, RMatrix::Identity(3, 3)), pi / 2, 1e-12);
  EXPECT_FALSE(closed_form_diameter(su2, family_metric(su2, vec({1, 2, 3})).phi).has_value());
}

TEST(Geometry, VoronoiAgainstBruteForce) {
  const auto t2 = build_space_model("torus", {2});
  RMatrix d = RMatrix::Zero(2, 2);
  d.diagonal() << 1, 4;
  EXPECT_NEAR(*closed_form_diameter(t2, d), pi * std::sqrt(5.0), 1e-10);
  RMatrix g(2, 2);
  g << 2.0, 0.7, 0.7, 1.0;
  const double cf = *closed_form_diameter(t2, g);
  EXPECT_NEAR(cf, brute_circumradius(g), 0.02);
}

TEST(Geometry, HaarSampling) {
  const auto su2 = build_space_model("su2");
  const auto a = haar_sample(su2, 4, 7), b = haar_sample(su2, 4, 7);
  EXPECT_EQ(a, b);
  for (int i = 0; i < 4; ++i) {
    double n2 = 0;
    for (int k = 0; k < 4; ++k) n2 += a[size_t(4 * i + k)] * a[size_t(4 * i + k)];
    EXPECT_NEAR(n2, 1.0, 1e-12);
  }
  const long N = 40000;
  const auto big = haar_sample(su2, N, 3);
  for (int k = 0; k < 4; ++k) {
    double m = 0;
    for (long i = 0; i < N; ++i) m += big[size_t(4 * i + k)];
    EXPECT_LT(std::abs(m / N), 5.0 / std::sqrt(double(N)));
  }
  const auto t2 = build_space_model("torus", {2});
  for (double v : haar_sample(t2, 1000, 5)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 2 * pi);
  }
}

TEST(Geometry, GraphRoundSphere) {
  const auto su2 = build_space_model("su2");
  const auto e = graph_diameter_fixed(su2, RMatrix::Identity(3, 3), 50000, 12, 1);
  EXPECT_NEAR(e.value, pi, 0.03 * pi);
  EXPECT_EQ(e.method, diameter_method::graph);
  EXPECT_FALSE(e.coarse);
}

TEST(Geometry, GraphFlatTorus) {
  const auto t2 = build_space_model("torus", {2});
  RMatrix d = RMatrix::Zero(2, 2);
  d.diagonal() << 1, 4;
  const auto e = graph_diameter(t2, d, quick(20000));
  EXPECT_NEAR(e.value, *closed_form_diameter(t2, d), 0.01 * e.value);
}

TEST(Geometry, GraphSphereQuotients) {
  const auto s2 = build_space_model("su2_mod_u1");
  EXPECT_NEAR(graph_diameter_fixed(s2, RMatrix::Identity(2, 2), 20000, 12, 1).value, pi / 2, 0.03 * pi / 2);
  const auto so3 = build_space_model("so3");
  EXPECT_NEAR(graph_diameter_fixed(so3, RMatrix::Identity(3, 3), 30000, 12, 1).value, pi / 2, 0.03 * pi / 2);
}

TEST(Geometry, GraphMonotoneAlongBergerRay) {
  const auto su2 = build_space_model("su2");
  double prev = 1e300;
  for (double t : {1.0, 0.5, 0.25}) {
    const double d = graph_diameter_fixed(su2, family_metric(su2, vec({t, 1, 1})).phi, 20000, 12, 2).value;
    EXPECT_LE(d, prev * 1.02);
    prev = d;
  }
}

TEST(Geometry, DiameterHomothety) {
  const auto su2 = build_space_model("su2");
  const RMatrix phi = family_metric(su2, vec({1, 2, 3})).phi;
  const double d = graph_diameter_fixed(su2, phi, 20000, 12, 3).value;
  for (double c : {0.25, 4.0})
    EXPECT_NEAR(graph_diameter_fixed(su2, c * phi, 20000, 12, 3).value / d, std::sqrt(c), 0.03 * std::sqrt(c));
}

TEST(Geometry, DisconnectedGraphIsReported) {
  const auto t1 = build_space_model("torus", {1});
  CosetGeometry geo(t1, RMatrix::Identity(1, 1));
  std::vector<double> pts{0.0, 0.1, 3.0, 3.1};
  try {
    detail::graph_max_distance(geo, pts, 4, 1, 1, 1);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::disconnected_graph);
  }
}

TEST(Geometry, Quotients) {
  const auto su2 = build_space_model("su2");
  const auto e3 = axis(3, 2);
  EXPECT_NEAR(quotient_diameter(su2, e3, std::nullopt, quick()).value, pi / 2, 1e-12);
  EXPECT_EQ(quotient_diameter(su2, RMatrix::Identity(3, 3)).value, 0.0);
  const auto t2 = build_space_model("torus", {2});
  EXPECT_NEAR(quotient_diameter(t2, axis(2, 1)).value, pi, 1e-12);
  RMatrix line(2, 1);
  line << 1.0, std::sqrt(2.0);
  try {
    quotient_model(t2, line);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::not_a_subgroup);
  }
  RMatrix two = RMatrix::Zero(3, 2);
  two(0, 0) = two(1, 1) = 1.0;
  EXPECT_THROW(quotient_model(su2, two), error);
}

TEST(Geometry, ClosedSubgroupsOfSu3) {
  const auto su3 = build_space_model("su3");
  RMatrix cartan = RMatrix::Zero(8, 2);
  cartan(2, 0) = cartan(7, 1) = 1.0;
  EXPECT_TRUE(generates_closed_subgroup(su3, cartan));
  EXPECT_TRUE(generates_closed_subgroup(su3, cartan.col(0)));
  RMatrix irr = cartan.col(0) + std::sqrt(2.0) * cartan.col(1);
  EXPECT_FALSE(generates_closed_subgroup(su3, irr));
}

TEST(Geometry, PenaltySubRiemannian) {
  const auto su2 = build_space_model("su2");
  const std::vector<double> eps{1.0, 0.5, 0.25, 0.125};
  const auto full = penalty_sub_diameter(su2, RMatrix::Identity(3, 3), RMatrix::Identity(3, 3), eps, quick());
  for (double v : full.sequence) EXPECT_NEAR(v, pi, 1e-12);
  RMatrix H = RMatrix::Zero(3, 2);
  H(0, 0) = H(1, 1) = 1.0;
  const auto hz = penalty_sub_diameter(su2, H, RMatrix::Identity(2, 2), eps, quick(20000));
  EXPECT_EQ(hz.direction, "from_below");
  EXPECT_TRUE(std::isfinite(hz.value));
  EXPECT_TRUE(hz.monotone);
  EXPECT_LT(hz.limit, 2 * pi);
  EXPECT_GT(hz.limit, pi * 0.97);

  const auto t2 = build_space_model("torus", {2});
  const auto div = penalty_sub_diameter(t2, axis(2, 0), RMatrix::Identity(1, 1), eps, quick(2000));
  EXPECT_TRUE(std::isinf(div.value));
}

TEST(Geometry, PenaltySingular) {
  const std::vector<double> eps{1.0, 0.5, 0.25, 0.125};
  const auto t2 = build_space_model("torus", {2});
  const auto r = penalty_singular_diameter(t2, axis(2, 1), eps, quick(2000));
  EXPECT_EQ(r.estimate.direction, "from_above");
  EXPECT_NEAR(r.estimate.limit, pi, 0.02 * pi);
  ASSERT_TRUE(r.quotient_bound.has_value());
  EXPECT_NEAR(*r.quotient_bound, pi, 1e-12);
  const auto full = penalty_singular_diameter(t2, RMatrix::Identity(2, 2), eps, quick(2000));
  for (double v : full.estimate.sequence) EXPECT_NEAR(v, std::sqrt(2.0) * pi, 1e-12);

  const auto su2 = build_space_model("su2");
  RMatrix C = RMatrix::Zero(3, 2);
  C(0, 0) = C(1, 1) = 1.0;  // degenerate direction E3: the Hopf quotient
  const auto h = penalty_singular_diameter(su2, C, eps, quick(20000));
  ASSERT_TRUE(h.quotient_bound.has_value());
  EXPECT_NEAR(*h.quotient_bound, pi / 2, 1e-12);
  EXPECT_TRUE(h.estimate.monotone);
  EXPECT_NEAR(h.estimate.limit, pi / 2, 0.05 * pi / 2);
}

TEST(Geometry, PenaltyRejectsBadSequences) {
  const auto t2 = build_space_model("torus", {2});
  for (const auto& eps : std::vector<std::vector<double>>{{1.0}, {1.0, 1.0}, {1.0, -0.5}}) {
    try {
      penalty_singular_diameter(t2, axis(2, 1), eps, quick(100));
      FAIL();
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::invalid_config);
    }
  }
}

TEST(GeometryProperty, LoewnerPairsOnTorusAreMonotone) {
  const auto t2 = build_space_model("torus", {2});
  const auto info = commutant(t2);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const RMatrix psi = random_invariant_matrix(t2, info, rng, 1.0);
    const RMatrix phi = psi + random_invariant_matrix(t2, info, rng, 1.0);
    EXPECT_GE(*closed_form_diameter(t2, phi), *closed_form_diameter(t2, psi) * (1 - 1e-12));
  }
}
