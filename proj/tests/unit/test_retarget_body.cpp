#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "../support/random.hpp"
#include "signkit/core/h1x55.hpp"
#include "signkit/core/smplx_skeleton.hpp"
#include "signkit/retarget/body.hpp"

using namespace signkit;
using namespace signkit::retarget;
using signkit::testing::random_quat;
using signkit::testing::random_unit;
using signkit::testing::uniform;

namespace {

MotionClip tpose_clip(const SourceSkeleton& s, int frames) {
  MotionClip c;
  c.skeleton = s;
  for (int k = 0; k < frames; ++k)
    c.frames.push_back({Vec3(0, 0, 1), Quat::Identity(), std::vector<Quat>(s.size(), Quat::Identity())});
  return c;
}

// Independent axis-angle through rotation matrices.
Vec3 rotation_vector_oracle(const Quat& q_local, const Quat& offset) {
  const Mat3 r = offset.toRotationMatrix().transpose() * q_local.toRotationMatrix() *
                 offset.toRotationMatrix();
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

// Smooth random clip: each joint follows a slow sinusoidal rotation vector.
MotionClip smooth_clip(const SourceSkeleton& s, int frames, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> axis0(s.size()), axis1(s.size());
  std::vector<double> w(s.size()), phase(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    axis0[j] = random_unit(rng);
    axis1[j] = random_unit(rng);
    w[j] = uniform(rng, 0.5, 2.0);
    phase[j] = uniform(rng, 0, 2 * kPi);
  }
  MotionClip c;
  c.fps = 30;
  c.skeleton = s;
  for (int k = 0; k < frames; ++k) {
    const double t = k / c.fps;
    MotionFrame f;
    f.root_translation = Vec3(0.01 * k, 0, 1);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const Vec3 v = amplitude * (std::sin(w[j] * t + phase[j]) * axis0[j] +
                                  std::cos(0.7 * w[j] * t) * axis1[j]) / std::sqrt(2.0);
      Quat q = exp_map(v);
      if (rng() % 2) q.coeffs() *= -1.0;  // arbitrary representative
      f.joints.push_back(q);
    }
    c.frames.push_back(std::move(f));
  }
  return c;
}

}  // namespace

TEST(Calibrate, IdenticalSkeletonsGiveIdentityOffsets) {
  const RobotModel robot = h1x55::make_model();
  const auto [skel, table] = mirror_robot_skeleton(robot);
  const TPoseCalibration cal = calibrate(skel, robot, table);
  ASSERT_EQ(cal.joints.size(), table.size());
  for (const auto& jc : cal.joints)
    EXPECT_LT(geodesic_angle(jc.offset, Quat::Identity()), 1e-12) << jc.robot_joint;
}

TEST(Calibrate, ArmsDownSourceGivesQuarterTurnShoulderOffset) {
  const RobotModel robot = h1x55::make_model();
  auto [skel, table] = mirror_robot_skeleton(robot);
  // Hang both arms: elbow and wrist offsets point down instead of sideways.
  for (const char* j : {"left_elbow", "right_elbow", "left_wrist", "right_wrist"}) {
    auto& joint = skel.joints[skel.index(j)];
    joint.offset = Vec3(0, 0, -joint.offset.norm());
  }
  const TPoseCalibration cal = calibrate(skel, robot, table);
  for (const auto& jc : cal.joints) {
    if (jc.robot_joint != "left_shoulder" && jc.robot_joint != "right_shoulder") continue;
    const AxisAngle aa = quat_to_axis_angle(jc.offset);
    EXPECT_NEAR(aa.angle, kPi / 2, 1e-12);
    EXPECT_NEAR(std::abs(aa.axis.x()), 1.0, 1e-12);
    // the offset carries the robot arm direction onto the source arm direction
    const Vec3 robot_arm(0, jc.robot_joint == "left_shoulder" ? 1.0 : -1.0, 0);
    EXPECT_NEAR((jc.offset * robot_arm - Vec3(0, 0, -1)).norm(), 0.0, 1e-12);
  }
  const RetargetResult r = retarget_clip(tpose_clip(skel, 3), cal, robot);
  for (const auto& f : r.trajectory.frames) EXPECT_LT(f.q.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Calibrate, MissingElbowMappingIsAnError) {
  const RobotModel robot = h1x55::make_model();
  MappingTable table = default_body_mapping();
  std::erase_if(table, [](const MappingEntry& e) { return e.robot_group == "left_elbow"; });
  try {
    calibrate(smplx::make_skeleton(), robot, table);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("unmapped group: elbow"), std::string::npos) << e.what();
  }
}

TEST(Calibrate, InconsistentAxisDefinitions) {
  const RobotModel robot = h1x55::make_model();
  MappingTable table = default_body_mapping();
  for (auto& e : table)
    if (e.robot_group == "left_shoulder") e.axis_order = "xyz";  // chain is pitch(y), roll(x), yaw(z)
  EXPECT_THROW(calibrate(smplx::make_skeleton(), robot, table), std::invalid_argument);
  table = default_body_mapping();
  for (auto& e : table)
    if (e.robot_group == "left_knee") e.kind = MappingKind::ThreeD;
  EXPECT_THROW(calibrate(smplx::make_skeleton(), robot, table), std::invalid_argument);
}

TEST(Map3d, Examples) {
  EXPECT_EQ(map_3d_joint(Quat::Identity(), Quat::Identity()), Vec3::Zero());
  const Vec3 m = map_3d_joint(axis_angle_to_quat({Vec3::UnitZ(), kPi / 3}), Quat::Identity(), "xyz");
  EXPECT_NEAR((m - Vec3(0, 0, kPi / 3)).norm(), 0.0, 1e-15);
  const Vec3 r = map_3d_joint(axis_angle_to_quat({Vec3::UnitZ(), kPi / 3}), Quat::Identity(), "zxy");
  EXPECT_NEAR((r - Vec3(kPi / 3, 0, 0)).norm(), 0.0, 1e-15);
  const Vec3 c = map_3d_joint(axis_angle_to_quat({Vec3::UnitZ(), 2.0}), Quat::Identity(), "xyz",
                              Vec3::Constant(-1), Vec3::Constant(1));
  EXPECT_EQ(c.z(), 1.0);
}

TEST(Map3d, ExpMapRoundTripForSmallRotations) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const Quat q = axis_angle_to_quat({random_unit(rng), uniform(rng, 0, 0.5)});
    const Quat off = random_quat(rng);
    const Vec3 m = map_3d_joint(q, off, "xyz");
    const Quat back = off * exp_map(m) * off.conjugate();
    EXPECT_LT(signkit::testing::quat_distance(back, q), 1e-6);
  }
}

TEST(Map3d, MatchesMatrixOracle) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 2000; ++i) {
    const Quat q = canonical(random_quat(rng));
    const Quat off = random_quat(rng);
    EXPECT_LT((map_3d_joint(q, off, "xyz") - rotation_vector_oracle(q, off)).norm(), 1e-8);
  }
}

TEST(Map1d, Examples) {
  const Vec3 n = Vec3(1, 2, -2).normalized();
  EXPECT_NEAR(map_1d_joint(axis_angle_to_quat({n, 1.2}), Quat::Identity(), n), 1.2, 1e-15);
  EXPECT_NEAR(map_1d_joint(axis_angle_to_quat({n.unitOrthogonal(), 0.9}), Quat::Identity(), n),
              0.0, 1e-15);
  // axis at 60 degrees to n
  const Vec3 a = std::cos(kPi / 3) * n + std::sin(kPi / 3) * n.unitOrthogonal();
  EXPECT_NEAR(map_1d_joint(axis_angle_to_quat({a, 1.0}), Quat::Identity(), n), 0.5, 1e-12);
  EXPECT_EQ(map_1d_joint(axis_angle_to_quat({n, 1.2}), Quat::Identity(), n, -1.0, 1.0), 1.0);
}

TEST(RetargetClip, TPoseGivesZeros) {
  const RobotModel robot = h1x55::make_model();
  const SourceSkeleton s = smplx::make_skeleton();
  const TPoseCalibration cal = calibrate(s, robot, default_body_mapping());
  const auto t0 = std::chrono::steady_clock::now();
  const RetargetResult r = retarget_clip(tpose_clip(s, 10), cal, robot);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
  ASSERT_EQ(r.trajectory.size(), 10u);
  for (const auto& f : r.trajectory.frames) {
    EXPECT_LT(f.q.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(f.keypoints.rows(), 14);
    EXPECT_EQ(f.joint_velocities.rows(), 55);
  }
  EXPECT_EQ(r.clamped, 0u);
}

TEST(RetargetClip, ElbowSwingIsIsolated) {
  const RobotModel robot = h1x55::make_model();
  const SourceSkeleton s = smplx::make_skeleton();
  const TPoseCalibration cal = calibrate(s, robot, default_body_mapping());
  MotionClip c = tpose_clip(s, 2);
  const int le = robot.dof_index("left_elbow");
  c.frames[1].joints[s.index("left_elbow")] = axis_angle_to_quat({robot.dofs[le].axis, kPi / 2});
  const RetargetResult r = retarget_clip(c, cal, robot);
  EXPECT_LT(r.trajectory.frames[0].q.cwiseAbs().maxCoeff(), 1e-12);
  VecX expect = VecX::Zero(55);
  expect[le] = kPi / 2;
  EXPECT_LT((r.trajectory.frames[1].q - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RetargetClip, SkeletonMismatch) {
  const RobotModel robot = h1x55::make_model();
  const SourceSkeleton s = smplx::make_skeleton();
  const TPoseCalibration cal = calibrate(s, robot, default_body_mapping());
  SourceSkeleton other = s;
  other.joints.pop_back();
  EXPECT_THROW(retarget_clip(tpose_clip(other, 2), cal, robot), std::invalid_argument);
}

TEST(RetargetClip, EqualsPerJointComposition) {
  const RobotModel robot = h1x55::make_model();
  const SourceSkeleton s = smplx::make_skeleton();
  const MappingTable table = default_body_mapping();
  const TPoseCalibration cal = calibrate(s, robot, table);
  const MotionClip clip = smooth_clip(s, 60, 1.2, 5);
  const RetargetResult r = retarget_clip(clip, cal, robot);
  std::vector<Quat> prev(s.size());
  for (std::size_t k = 0; k < clip.frames.size(); ++k) {
    VecX expect = VecX::Zero(55);
    for (std::size_t j = 0; j < s.size(); ++j) {
      Quat q = clip.frames[k].joints[j];
      if (k == 0 ? q.w() < 0 : q.coeffs().dot(prev[j].coeffs()) < 0) q.coeffs() *= -1.0;
      prev[j] = q;
    }
    for (const auto& jc : cal.joints) {
      const Quat& q = prev[jc.source_joint];
      if (jc.kind == MappingKind::OneD) {
        const Dof& d = robot.dofs[jc.dofs[0]];
        expect[jc.dofs[0]] = std::clamp(map_1d_joint(q, jc.offset, d.axis), d.q_min, d.q_max);
      } else {
        const Vec3 m = map_3d_joint(q, jc.offset, jc.axis_order);
        for (int i = 0; i < 3; ++i) {
          const Dof& d = robot.dofs[jc.dofs[i]];
          // DoF axis sign relative to the axis letter
          const double sgn = d.axis[axis_letter(jc.axis_order[i])];
          expect[jc.dofs[i]] = std::clamp(sgn * m[i], d.q_min, d.q_max);
        }
      }
    }
    EXPECT_LT((r.trajectory.frames[k].q - expect).cwiseAbs().maxCoeff(), 1e-12) << k;
  }
}

TEST(RetargetClip, LimitSafetyAndClampReport) {
  const RobotModel robot = h1x55::make_model();
  const SourceSkeleton s = smplx::make_skeleton();
  const TPoseCalibration cal = calibrate(s, robot, default_body_mapping());
  const RetargetResult r = retarget_clip(smooth_clip(s, 90, 2.5, 9), cal, robot);
  for (const auto& f : r.trajectory.frames)
    for (int i = 0; i < 55; ++i) {
      EXPECT_GE(f.q[i], robot.dofs[i].q_min);
      EXPECT_LE(f.q[i], robot.dofs[i].q_max);
    }
  EXPECT_GT(r.clamped, 0u);
  EXPECT_GT(r.clamp_fraction(), 0.0);
  EXPECT_LE(r.clamp_fraction(), 1.0);
}

TEST(RetargetClip, ContinuityOnSmoothClips) {
  const RobotModel robot = h1x55::make_model();
  const SourceSkeleton s = smplx::make_skeleton();
  const TPoseCalibration cal = calibrate(s, robot, default_body_mapping());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MotionClip clip = smooth_clip(s, 120, 1.5, seed);
    const RetargetResult r = retarget_clip(clip, cal, robot);
    for (std::size_t k = 1; k < clip.frames.size(); ++k) {
      double eps = 0;
      for (const auto& jc : cal.joints)
        eps = std::max(eps, geodesic_angle(clip.frames[k].joints[jc.source_joint],
                                           clip.frames[k - 1].joints[jc.source_joint]));
      const double dq = (r.trajectory.frames[k].q - r.trajectory.frames[k - 1].q).cwiseAbs().maxCoeff();
      EXPECT_LE(dq, 2.0 * eps + 1e-12) << "seed " << seed << " frame " << k;
    }
  }
}

TEST(MappingTable, JsonRoundTrip) {
  const MappingTable t = default_body_mapping();
  EXPECT_EQ(to_json(mapping_from_json(to_json(t))), to_json(t));
  EXPECT_THROW(mapping_from_json(nlohmann::json::parse(
                   R"([{"source_joint":"a","robot_group":"b","kind":"2d"}])")),
               std::invalid_argument);
}
