#include <random>

#include <gtest/gtest.h>

#include "../support/random.hpp"
#include "signkit/core/rotation.hpp"

using namespace signkit;
using signkit::testing::quat_distance;
using signkit::testing::random_quat;

TEST(QuatToAxisAngle, IdentityHasZeroAngleAndXAxis) {
  const AxisAngle aa = quat_to_axis_angle(Quat::Identity());
  EXPECT_EQ(aa.angle, 0.0);
  EXPECT_EQ(aa.axis, Vec3::UnitX());
}

TEST(QuatToAxisAngle, QuarterTurnAboutX) {
  const Quat q(std::cos(kPi / 4), std::sin(kPi / 4), 0, 0);
  const AxisAngle aa = quat_to_axis_angle(q);
  EXPECT_NEAR(aa.angle, kPi / 2, 1e-15);
  EXPECT_NEAR((aa.axis - Vec3::UnitX()).norm(), 0.0, 1e-15);
}

TEST(QuatToAxisAngle, NegatedQuaternionGivesSameRotation) {
  const Quat q(-0.3, 0.5, -0.1, 0.8);
  const AxisAngle a = quat_to_axis_angle(q.normalized());
  const AxisAngle b = quat_to_axis_angle(Quat(-q.coeffs()).normalized());
  EXPECT_NEAR(a.angle, b.angle, 1e-15);
  EXPECT_NEAR((a.axis - b.axis).norm(), 0.0, 1e-15);
}

TEST(QuatToAxisAngle, RoundTripTenThousandRandomRotations) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Quat q = random_quat(rng);
    const AxisAngle aa = quat_to_axis_angle(q);
    ASSERT_GE(aa.angle, 0.0);
    ASSERT_LE(aa.angle, kPi);
    ASSERT_NEAR(aa.axis.norm(), 1.0, 1e-9);
    worst = std::max(worst, quat_distance(axis_angle_to_quat(aa), q));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(QuatToAxisAngle, TinyRotationsKeepPrecision) {
  const Quat q = axis_angle_to_quat({Vec3(0, 0.6, 0.8), 1e-10});
  const AxisAngle aa = quat_to_axis_angle(q);
  EXPECT_NEAR(aa.angle, 1e-10, 1e-24);
  EXPECT_NEAR((aa.axis - Vec3(0, 0.6, 0.8)).norm(), 0.0, 1e-9);
}

TEST(LogMap, InvertsExpMapBeyondPiOnContinuousBranch) {
  const Vec3 m = 3.5 * Vec3(0, 0, 1);
  const Quat q = exp_map(m);
  EXPECT_LT(q.w(), 0.0);
  EXPECT_NEAR((log_map(q) - m).norm(), 0.0, 1e-12);
}

TEST(Rpy, RoundTrip) {
  const Rpy e{0.1, -0.2, 2.5};
  const Rpy r = to_rpy(from_rpy(e));
  EXPECT_NEAR(r.roll, e.roll, 1e-12);
  EXPECT_NEAR(r.pitch, e.pitch, 1e-12);
  EXPECT_NEAR(r.yaw, e.yaw, 1e-12);
}

TEST(GeodesicAngle, MatchesRotationAngleOfDifference) {
  const Quat a = rotation_about(Vec3::UnitZ(), 0.3);
  const Quat b = rotation_about(Vec3::UnitZ(), 1.0);
  EXPECT_NEAR(geodesic_angle(a, b), 0.7, 1e-12);
  EXPECT_NEAR(geodesic_angle(a, Quat(-b.coeffs())), 0.7, 1e-12);
}
