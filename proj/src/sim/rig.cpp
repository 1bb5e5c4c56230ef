#include "lhmp/sim/rig.hpp"

#include <cmath>

namespace lhmp::sim {

Mat3 Mat3::rot_x(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {1, 0, 0, 0, c, -s, 0, s, c};
  return r;
}

Mat3 Mat3::rot_y(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
  return r;
}

Mat3 Mat3::rot_z(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

namespace {

// Joint indices, SMPL ordering.
enum Joint : int {
  Pelvis = 0, LHip = 1, RHip = 2, Spine1 = 3, LKnee = 4, RKnee = 5,
  Spine2 = 6, LAnkle = 7, RAnkle = 8, Spine3 = 9, LFoot = 10, RFoot = 11,
  Neck = 12, LCollar = 13, RCollar = 14, Head = 15, LShoulder = 16,
  RShoulder = 17, LElbow = 18, RElbow = 19, LWrist = 20, RWrist = 21,
  LHand = 22, RHand = 23,
};

HumanoidRig build_default_rig() {
  HumanoidRig rig;
  rig.parent = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8,
                9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};

  auto J = [&rig](int j, double x, double y, double z) {
    rig.rest_joints[j] = Vec3{x, y, z};
  };
  J(Pelvis, 0.00, 0.00, 0.95);
  J(LHip, 0.09, 0.00, 0.91);
  J(RHip, -0.09, 0.00, 0.91);
  J(Spine1, 0.00, 0.00, 1.08);
  J(LKnee, 0.10, 0.00, 0.50);
  J(RKnee, -0.10, 0.00, 0.50);
  J(Spine2, 0.00, 0.00, 1.20);
  J(LAnkle, 0.11, 0.00, 0.09);
  J(RAnkle, -0.11, 0.00, 0.09);
  J(Spine3, 0.00, 0.00, 1.32);
  J(LFoot, 0.11, -0.14, 0.02);
  J(RFoot, -0.11, -0.14, 0.02);
  J(Neck, 0.00, 0.00, 1.45);
  J(LCollar, 0.07, 0.00, 1.40);
  J(RCollar, -0.07, 0.00, 1.40);
  J(Head, 0.00, 0.00, 1.62);
  J(LShoulder, 0.18, 0.00, 1.40);
  J(RShoulder, -0.18, 0.00, 1.40);
  J(LElbow, 0.44, 0.00, 1.40);
  J(RElbow, -0.44, 0.00, 1.40);
  J(LWrist, 0.68, 0.00, 1.40);
  J(RWrist, -0.68, 0.00, 1.40);
  J(LHand, 0.77, 0.00, 1.40);
  J(RHand, -0.77, 0.00, 1.40);

  auto B = [&rig](int child_joint, double radius, BodyPart part) {
    rig.bone_radius[child_joint - 1] = radius;
    rig.bone_part[child_joint - 1] = static_cast<std::uint8_t>(part);
  };
  B(LHip, 0.09, BodyPart::LowerBody);
  B(RHip, 0.09, BodyPart::LowerBody);
  B(Spine1, 0.12, BodyPart::UpperBody);
  B(LKnee, 0.07, BodyPart::UpperLeftLeg);
  B(RKnee, 0.07, BodyPart::UpperRightLeg);
  B(Spine2, 0.13, BodyPart::UpperBody);
  B(LAnkle, 0.05, BodyPart::LowerLeftLeg);
  B(RAnkle, 0.05, BodyPart::LowerRightLeg);
  B(Spine3, 0.13, BodyPart::UpperBody);
  B(LFoot, 0.04, BodyPart::LowerLeftLeg);
  B(RFoot, 0.04, BodyPart::LowerRightLeg);
  B(Neck, 0.06, BodyPart::UpperBody);
  B(LCollar, 0.06, BodyPart::UpperBody);
  B(RCollar, 0.06, BodyPart::UpperBody);
  B(Head, 0.10, BodyPart::Head);
  B(LShoulder, 0.05, BodyPart::LeftArm);
  B(RShoulder, 0.05, BodyPart::RightArm);
  B(LElbow, 0.045, BodyPart::LeftArm);
  B(RElbow, 0.045, BodyPart::RightArm);
  B(LWrist, 0.04, BodyPart::LeftArm);
  B(RWrist, 0.04, BodyPart::RightArm);
  B(LHand, 0.035, BodyPart::LeftArm);
  B(RHand, 0.035, BodyPart::RightArm);
  return rig;
}

}  // namespace

const HumanoidRig& default_rig() {
  static const HumanoidRig rig = build_default_rig();
  return rig;
}

Pose pose_from_angles(const HumanoidRig& rig, const PoseAngles& angles) {
  Pose out;
  std::array<Mat3, kNumJoints> orient;
  out[0] = rig.rest_joints[0] + angles.root_offset;
  orient[0] = angles.local[0];
  for (int j = 1; j < kNumJoints; ++j) {
    int p = rig.parent[j];
    Vec3 offset = rig.rest_joints[j] - rig.rest_joints[p];
    out[j] = out[p] + orient[p] * offset;
    orient[j] = orient[p] * angles.local[j];
  }
  return out;
}

}  // namespace lhmp::sim
