#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "occpred/core.hpp"

namespace occpred {
namespace {

TEST(WrapAngle, Examples) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(-1.5 * kPi), 0.5 * kPi, 1e-12);
}

TEST(WrapAngle, RangeIsHalfOpen) {
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(kPi), kPi, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    const double k = (a - w) / (2.0 * kPi);
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(WrapAngle, RejectsNonFinite) {
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Vec2, RejectsNonFinite) {
  EXPECT_THROW(Vec2(std::nan(""), 0.0), std::invalid_argument);
  EXPECT_THROW(Vec2(0.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Cov2, RejectsAsymmetricAndIndefinite) {
  EXPECT_THROW(Cov2(1.0, 0.5, 0.4, 1.0), std::invalid_argument);
  EXPECT_THROW(Cov2(1.0, 2.0, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Cov2(-1.0, 0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_NO_THROW(Cov2(1.0, 1.0, 1.0, 1.0));  // singular but PSD
}

TEST(RotateCov, IdentityAtZero) {
  const Cov2 c{0.3, 0.15, 0.15, 0.3};
  const Cov2 r = rotate_cov(c, 0.0);
  EXPECT_DOUBLE_EQ(r.xx, c.xx);
  EXPECT_DOUBLE_EQ(r.xy, c.xy);
  EXPECT_DOUBLE_EQ(r.yy, c.yy);
}

TEST(RotateCov, QuarterTurnSwapsAxes) {
  const Cov2 r = rotate_cov(Cov2::diagonal(2.0, 5.0), kPi / 2.0);
  EXPECT_NEAR(r.xx, 5.0, 1e-12);
  EXPECT_NEAR(r.yy, 2.0, 1e-12);
  EXPECT_NEAR(r.xy, 0.0, 1e-12);
  EXPECT_NEAR(r.yx, 0.0, 1e-12);
}

// Independent evaluation of R C R^T in long double, written as explicit sums.
Cov2 rotate_oracle(const Cov2& c, double theta) {
  const long double ct = std::cos(static_cast<long double>(theta));
  const long double st = std::sin(static_cast<long double>(theta));
  const long double R[2][2] = {{ct, -st}, {st, ct}};
  const long double C[2][2] = {{c.xx, c.xy}, {c.yx, c.yy}};
  long double out[2][2] = {};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out[i][j] += R[i][k] * C[k][l] * R[j][l];
  Cov2 r;
  r.xx = static_cast<double>(out[0][0]);
  r.xy = static_cast<double>(out[0][1]);
  r.yx = static_cast<double>(out[1][0]);
  r.yy = static_cast<double>(out[1][1]);
  return r;
}

TEST(RotateCov, MatchesElementwiseProductForPatch) {
  const Cov2 c{0.3, 0.15, 0.15, 0.3};
  const Cov2 r = rotate_cov(c, kPi / 4.0);
  const Cov2 o = rotate_oracle(c, kPi / 4.0);
  EXPECT_NEAR(r.xx, o.xx, 1e-12);
  EXPECT_NEAR(r.xy, o.xy, 1e-12);
  EXPECT_NEAR(r.yx, o.yx, 1e-12);
  EXPECT_NEAR(r.yy, o.yy, 1e-12);
  // Eigenvalues 0.45 and 0.15 along the diagonals end up on the axes.
  EXPECT_NEAR(r.xx, 0.15, 1e-12);
  EXPECT_NEAR(r.yy, 0.45, 1e-12);
}

TEST(RotateCov, RandomPropertiesHold) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> mag(0.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double l1 = mag(rng), l2 = mag(rng), phi = ang(rng);
    const double c = std::cos(phi), s = std::sin(phi);
    const double xx = l1 * c * c + l2 * s * s;
    const double yy = l1 * s * s + l2 * c * c;
    const double xy = (l1 - l2) * c * s;
    const Cov2 C{xx, xy, xy, yy};
    const double theta = ang(rng);
    const Cov2 r = rotate_cov(C, theta);
    ASSERT_NEAR(r.trace(), C.trace(), 1e-9);
    ASSERT_NEAR(r.determinant(), C.determinant(), 1e-9);
    ASSERT_TRUE(is_symmetric_psd(r.xx, r.xy, r.yx, r.yy));
    const Cov2 back = rotate_cov(r, -theta);
    ASSERT_NEAR(back.xx, C.xx, 1e-9);
    ASSERT_NEAR(back.xy, C.xy, 1e-9);
    ASSERT_NEAR(back.yy, C.yy, 1e-9);
  }
}

TEST(RotateCov, RejectsInvalidInput) {
  Cov2 bad;
  bad.xx = 1.0;
  bad.xy = 3.0;
  bad.yx = 3.0;
  bad.yy = 1.0;
  EXPECT_THROW(rotate_cov(bad, 0.3), std::invalid_argument);
}

TEST(PipelineConfig, DefaultsValidate) { EXPECT_NO_THROW(PipelineConfig{}.validate()); }

TEST(PipelineConfig, NamesOffendingField) {
  PipelineConfig c;
  c.n_sectors = 2;
  try {
    c.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("n_sectors"), std::string::npos);
  }
  c = {};
  c.cost_floor = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ObstacleKind, StringRoundTrip) {
  for (auto k : {ObstacleKind::Front, ObstacleKind::SideLeft, ObstacleKind::SideRight, ObstacleKind::Fused}) {
    EXPECT_EQ(obstacle_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(obstacle_kind_from_string("rear"), std::invalid_argument);
}

}  // namespace
}  // namespace occpred
