#include "emogait/gaze.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

#include "emogait/error.hpp"

namespace emogait {
namespace {

constexpr double kTiny = 1e-12;

Eigen::Vector3d horizontal(const Eigen::Vector3d& v) { return {v.x(), 0.0, v.z()}; }

double clamp_flag(double value, double lo, double hi, bool& clamped) {
  const double out = std::clamp(value, lo, hi);
  if (out != value) clamped = true;
  return out;
}

}  // namespace

double signed_rotation_angle(const Eigen::Vector3d& facing, const Eigen::Vector3d& to_target) {
  const Eigen::Vector3d f = horizontal(facing);
  const Eigen::Vector3d d = horizontal(to_target);
  if (f.squaredNorm() < kTiny * kTiny || d.squaredNorm() < kTiny * kTiny) return 0.0;
  // y component of f x d; positive when the target lies to the facing's left.
  const double cross_y = f.z() * d.x() - f.x() * d.z();
  return std::atan2(cross_y, f.x() * d.x() + f.z() * d.z());
}

GazeAngles gaze_target(Emotion e_des, const GazeContext& ctx, const GazeAngles& gait_neutral,
                       const GazeConfig& cfg, GazeFlags* flags) {
  GazeFlags local;
  GazeAngles out;

  const Eigen::Vector3d to_user = ctx.user - ctx.agent_head;
  const double dx = ctx.agent_head.x() - ctx.user.x();
  const double dz = ctx.agent_head.z() - ctx.user.z();
  const double horizontal_dist = std::sqrt(dx * dx + dz * dz);

  switch (e_des) {
    case Emotion::Happy:
      if (horizontal_dist == 0.0) {
        local.degenerate = true;  // user overhead or coincident: no gaze target
      } else {
        out.flex = cfg.theta_happy;
        out.rot = signed_rotation_angle(ctx.facing, to_user);
      }
      break;
    case Emotion::Angry:
      if (horizontal_dist == 0.0) {
        local.degenerate = true;
      } else {
        const double ratio = (ctx.agent_head.y() - ctx.user.y()) / horizontal_dist;
        out.flex = std::asin(std::clamp(ratio, -1.0, 1.0));
        out.rot = signed_rotation_angle(ctx.facing, to_user);
      }
      break;
    case Emotion::Sad:
      out.flex = cfg.theta_sad;
      out.rot = 0.0;
      break;
    case Emotion::Neutral:
      out = gait_neutral;
      break;
  }

  out.flex = clamp_flag(out.flex, -cfg.max_ext, cfg.max_flex, local.clamped);
  out.rot = clamp_flag(out.rot, -cfg.max_rot, cfg.max_rot, local.clamped);
  if (flags) *flags = local;
  return out;
}

GazeAngles smooth_gaze(const GazeAngles& current, const GazeAngles& target, double dt,
                       const GazeConfig& cfg) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Data, "smooth_gaze: dt must be positive");
  const double budget = cfg.rate * dt;
  auto approach = [budget](double from, double to) {
    const double gap = to - from;
    if (std::abs(gap) <= budget) return to;
    return from + std::copysign(budget, gap);
  };
  return {approach(current.flex, target.flex), approach(current.rot, target.rot)};
}

Pose apply_gaze(const Pose& pose, const GazeAngles& angles, bool* degenerate) {
  if (degenerate) *degenerate = false;
  const Eigen::Vector3d neck = pose.position(JointId::Neck);
  const Eigen::Vector3d head = pose.position(JointId::Head);
  const Eigen::Vector3d segment = head - neck;

  Eigen::Vector3d lateral =
      horizontal(pose.position(JointId::LShoulder) - pose.position(JointId::RShoulder));
  if (segment.squaredNorm() < kTiny * kTiny || lateral.squaredNorm() < kTiny * kTiny) {
    if (degenerate) *degenerate = true;
    return pose;
  }
  lateral.normalize();

  const Eigen::AngleAxisd yaw(angles.rot, Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd pitch(angles.flex, yaw * lateral);
  Pose out = pose;
  out.set_position(JointId::Head, neck + pitch * (yaw * segment));
  return out;
}

GazeAngles neutral_gaze(const WalkCycle& cycle) {
  const auto& frames = cycle.gait.frames;

  Eigen::Vector3d travel = horizontal(frames.back().position(JointId::Root) -
                                      frames.front().position(JointId::Root));
  if (travel.squaredNorm() < kTiny * kTiny) travel = Eigen::Vector3d::UnitX();
  travel.normalize();

  double flex_sum = 0.0;
  double rot_sum = 0.0;
  int counted = 0;
  for (const Pose& pose : frames) {
    const Eigen::Vector3d segment = pose.position(JointId::Head) - pose.position(JointId::Neck);
    if (segment.squaredNorm() < kTiny * kTiny) continue;
    // Pitch of the segment away from vertical, positive leaning forward.
    flex_sum += std::atan2(segment.dot(travel), segment.y());
    rot_sum += signed_rotation_angle(travel, segment);
    ++counted;
  }
  if (counted == 0) return {};
  return {flex_sum / counted, rot_sum / counted};
}

}  // namespace emogait
