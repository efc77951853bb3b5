#pragma once

#include <Eigen/Core>

#include "emogait/gea.hpp"
#include "emogait/skeleton.hpp"

namespace emogait {

constexpr double degrees_to_radians(double degrees) { return degrees * EIGEN_PI / 180.0; }
constexpr double radians_to_degrees(double radians) { return radians * 180.0 / EIGEN_PI; }

// Neck angles, radians. flex > 0 looks down (flexion), flex < 0 looks up
// (extension); rot > 0 turns left.
struct GazeAngles {
  double flex = 0.0;
  double rot = 0.0;
};

struct GazeConfig {
  double theta_happy = degrees_to_radians(-5.0);
  double theta_sad = degrees_to_radians(10.0);
  double max_rot = degrees_to_radians(70.0);
  double max_flex = degrees_to_radians(45.0);
  double max_ext = degrees_to_radians(45.0);
  double rate = degrees_to_radians(90.0);  // rad/s smoothing limit
};

struct GazeContext {
  Eigen::Vector3d agent_head = Eigen::Vector3d::Zero();  // head-base position p_i
  Eigen::Vector3d user = Eigen::Vector3d::Zero();        // observer position p_u
  Eigen::Vector3d facing = Eigen::Vector3d::UnitX();     // non-zero facing direction f
};

struct GazeFlags {
  bool degenerate = false;  // coincident positions or zero-length segments
  bool clamped = false;     // raw angle exceeded a configured limit
};

// Horizontal signed angle from `facing` to `to_target` about +y; positive is
// to the facing direction's left. Zero when either projection vanishes.
double signed_rotation_angle(const Eigen::Vector3d& facing, const Eigen::Vector3d& to_target);

// Emotion-conditioned neck angles. Happy: fixed extension, rotation tracking
// the user. Angry: flexion from the height/horizontal-distance arcsine (its
// argument clamped into [-1, 1]), rotation tracking the user. Sad: fixed
// flexion, no rotation. Neutral: the gait's own angles. Outputs clamp to the
// configured limits.
GazeAngles gaze_target(Emotion e_des, const GazeContext& ctx, const GazeAngles& gait_neutral,
                       const GazeConfig& cfg, GazeFlags* flags = nullptr);

// Moves each angle toward the target by at most rate * dt, never overshooting.
GazeAngles smooth_gaze(const GazeAngles& current, const GazeAngles& target, double dt,
                       const GazeConfig& cfg);

// Rewrites the head position by rotating the neck->head segment: first by rot
// about the vertical axis through the neck, then by flex about the neck's
// lateral (shoulder) axis. Degenerate segments return the pose unchanged.
Pose apply_gaze(const Pose& pose, const GazeAngles& angles, bool* degenerate = nullptr);

// A gait's own neck attitude: mean per-frame angles of the neck->head segment
// measured against the cycle's travel direction. Feeds the Neutral branch.
GazeAngles neutral_gaze(const WalkCycle& cycle);

}  // namespace emogait
