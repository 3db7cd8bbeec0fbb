// Reference values frozen from tests/oracle/oracle.py (numpy, explicit spin
// matrices, symmetric powers of C^3, lattice circumcentres). The script does
// not touch the C++ code; see tests/oracle/frozen.json for the raw output.
#include <gtest/gtest.h>

#include <numbers>

#include "hspec/diameter.hpp"
#include "hspec/spectrum.hpp"

using namespace hspec;

namespace {

RMatrix su2_case(const std::string& key) {
  RMatrix m = RMatrix::Zero(3, 3);
  if (key == "diag_1_2_3") m.diagonal() << 1, 2, 3;
  if (key == "diag_0.5_1_4") m.diagonal() << 0.5, 1, 4;
  if (key == "diag_1_1_0.1") m.diagonal() << 1, 1, 0.1;
  if (key == "diag_1_1_10") m.diagonal() << 1, 1, 10;
  if (key == "full") m << 2.0, 0.3, -0.2, 0.3, 1.0, 0.1, -0.2, 0.1, 0.7;
  return m;
}

RMatrix torus_case(const std::string& key) {
  RMatrix m(2, 2);
  if (key == "diag_1_4") m << 1, 0, 0, 4;
  if (key == "skew") m << 2.0, 0.7, 0.7, 1.0;
  if (key == "hex") m << 1.0, 0.5, 0.5, 1.0;
  if (key == "thin") m << 9.0, 2.0, 2.0, 0.8;
  return m;
}

struct Ref {
  const char* key;
  double value;
};

}  // namespace

TEST(Oracle, Su2Lambda1) {
  const Ref refs[] = {{"diag_0.5_1_4", 3.25},
                      {"diag_1_1_0.1", 8.000000000000002},
                      {"diag_1_1_10", 2.1},
                      {"diag_1_2_3", 1.8333333333333333},
                      {"full", 3.1304347826086953}};
  const auto s = build_space_model("su2");
  SpectralEngine e(s);
  for (const auto& r : refs) {
    const auto l = e.lambda1(diagonal_decomposition(s, su2_case(r.key)));
    EXPECT_NEAR(l.value, r.value, 1e-9 * r.value) << r.key;
    EXPECT_TRUE(l.certificate.sound) << r.key;
  }
}

TEST(Oracle, So3Lambda1) {
  const Ref refs[] = {{"diag_0.5_1_4", 5.000000000000002},
                      {"diag_1_1_0.1", 8.000000000000002},
                      {"diag_1_1_10", 4.400000000000001},
                      {"diag_1_2_3", 3.333333333333334},
                      {"full", 5.948895069500142}};
  const auto s = build_space_model("so3");
  SpectralEngine e(s);
  for (const auto& r : refs)
    EXPECT_NEAR(e.lambda1(diagonal_decomposition(s, su2_case(r.key))).value, r.value, 1e-9 * r.value) << r.key;
}

TEST(Oracle, FlagManifoldLambda1) {
  struct FlagRef {
    double x[3];
    double value;
  };
  const FlagRef refs[] = {{{1, 1, 1}, 12.0},
                          {{1, 2, 3}, 4.929632483024007},
                          {{0.25, 1, 1}, 12.0},
                          {{1, 1, 4}, 5.999999999999999},
                          {{0.5, 2, 8}, 3.6261364575662403}};
  const auto s = build_space_model("su3_mod_t2");
  SpectralEngine e(s);
  for (const auto& r : refs) {
    RVector x(3);
    x << r.x[0], r.x[1], r.x[2];
    const auto l = e.lambda1(family_metric(s, x));
    EXPECT_NEAR(l.value, r.value, 1e-9 * r.value) << x.transpose();
    EXPECT_TRUE(l.certificate.sound);
    // The Weyl group permutes the three root blocks.
    RVector y(3);
    y << r.x[2], r.x[0], r.x[1];
    EXPECT_NEAR(e.lambda1(family_metric(s, y)).value, r.value, 1e-9 * r.value);
  }
}

TEST(Oracle, FlatTorusLambda1AndDiameter) {
  struct TorusRef {
    const char* key;
    double lambda1, diameter;
  };
  const TorusRef refs[] = {{"diag_1_4", 0.25, 7.024814731040727},
                           {"hex", 1.3333333333333333, 3.6275987284684352},
                           {"skew", 0.662251655629139, 4.573370522501255},
                           {"thin", 0.25, 6.597344572538566}};
  const auto s = build_space_model("torus", {2});
  SpectralEngine e(s);
  for (const auto& r : refs) {
    const RMatrix G = torus_case(r.key);
    EXPECT_NEAR(e.lambda1(diagonal_decomposition(s, G)).value, r.lambda1, 1e-12) << r.key;
    EXPECT_NEAR(*closed_form_diameter(s, G), r.diameter, 1e-9 * r.diameter) << r.key;
  }
}

TEST(Oracle, FlatTorusGraphAgainstVoronoi) {
  const auto s = build_space_model("torus", {2});
  const auto e = graph_diameter_fixed(s, torus_case("skew"), 20000, 12, 4);
  EXPECT_NEAR(e.value, 4.573370522501255, 0.01 * 4.573370522501255);
}

TEST(Oracle, ThreeTorusLambda1) {
  const auto s = build_space_model("torus", {3});
  RMatrix G(3, 3);
  G << 1.0, 0.2, 0.0, 0.2, 2.0, 0.3, 0.0, 0.3, 0.5;
  EXPECT_NEAR(SpectralEngine(s).lambda1(diagonal_decomposition(s, G)).value, 0.5617977528089888, 1e-12);
}
