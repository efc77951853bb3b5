// Independent reference computations for the test suites. These deliberately
// avoid the library's code paths: plain loops, component arithmetic, Heron's
// formula, acos instead of atan2, and a separate labeling pass.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emogait/gea.hpp"
#include "emogait/skeleton.hpp"

namespace oracles {

inline double dist3(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Triangle area by Heron's formula (numerically different route from the
// cross-product form used in the library).
inline double heron_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                         const Eigen::Vector3d& c) {
  const double ab = dist3(a, b), bc = dist3(b, c), ca = dist3(c, a);
  const double s = 0.5 * (ab + bc + ca);
  const double under = s * (s - ab) * (s - bc) * (s - ca);
  return under > 0.0 ? std::sqrt(under) : 0.0;
}

inline double acos_angle(const Eigen::Vector3d& apex, const Eigen::Vector3d& p,
                         const Eigen::Vector3d& q) {
  const Eigen::Vector3d u = p - apex, v = q - apex;
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0));
}

inline double acos_angle_dir(const Eigen::Vector3d& dir, const Eigen::Vector3d& apex,
                             const Eigen::Vector3d& q) {
  const Eigen::Vector3d v = q - apex;
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  return std::acos(std::clamp(dir.dot(v) / (dir.norm() * nv), -1.0, 1.0));
}

// The 13 posture features of a set of frames, brute force.
inline std::array<double, 13> posture(const std::vector<emogait::Pose>& frames) {
  using emogait::JointId;
  std::array<double, 13> sum{};
  for (const emogait::Pose& pose : frames) {
    double lo[3], hi[3];
    for (int axis = 0; axis < 3; ++axis) {
      lo[axis] = hi[axis] = pose.positions(axis, 0);
      for (int j = 1; j < emogait::kJointCount; ++j) {
        lo[axis] = std::min(lo[axis], pose.positions(axis, j));
        hi[axis] = std::max(hi[axis], pose.positions(axis, j));
      }
    }
    sum[0] += (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);

    const auto at = [&](JointId j) { return pose.position(j); };
    sum[1] += heron_area(at(JointId::LHand), at(JointId::RHand), at(JointId::Neck));
    sum[2] += heron_area(at(JointId::LFoot), at(JointId::RFoot), at(JointId::Root));
    sum[3] += dist3(at(JointId::LHand), at(JointId::Root));
    sum[4] += dist3(at(JointId::RHand), at(JointId::Root));
    sum[5] += dist3(at(JointId::LFoot), at(JointId::Root));
    sum[6] += dist3(at(JointId::RFoot), at(JointId::Root));
    sum[7] += acos_angle(at(JointId::Neck), at(JointId::LShoulder), at(JointId::RShoulder));
    sum[8] += acos_angle(at(JointId::LShoulder), at(JointId::Neck), at(JointId::RShoulder));
    sum[9] += acos_angle(at(JointId::RShoulder), at(JointId::Neck), at(JointId::LShoulder));
    sum[10] += acos_angle_dir({0.0, 1.0, 0.0}, at(JointId::Neck), at(JointId::Spine));
    sum[11] += acos_angle(at(JointId::Neck), at(JointId::Head), at(JointId::Spine));
  }
  std::array<double, 13> out{};
  for (int i = 0; i < 12; ++i) out[i] = sum[i] / static_cast<double>(frames.size());

  double stride = 0.0;
  for (const emogait::Pose& pose : frames) {
    stride = std::max(stride,
                      dist3(pose.position(JointId::LFoot), pose.position(JointId::RFoot)));
  }
  out[12] = stride;
  return out;
}

// The 16 movement features: forward differences per tracked joint.
inline std::array<double, 16> movement(const std::vector<emogait::Pose>& frames, double fps) {
  const int n = static_cast<int>(frames.size());
  std::array<double, 16> out{};
  int k = 0;
  for (emogait::JointId joint : emogait::kMovementJoints) {
    const int col = static_cast<int>(joint);
    std::vector<std::array<double, 3>> p(n);
    for (int t = 0; t < n; ++t) {
      p[t] = {frames[t].positions(0, col), frames[t].positions(1, col),
              frames[t].positions(2, col)};
    }
    auto diff = [&](const std::vector<std::array<double, 3>>& in) {
      std::vector<std::array<double, 3>> d(in.size() - 1);
      for (std::size_t t = 0; t + 1 < in.size(); ++t) {
        for (int axis = 0; axis < 3; ++axis) d[t][axis] = (in[t + 1][axis] - in[t][axis]) * fps;
      }
      return d;
    };
    auto mean_norm = [](const std::vector<std::array<double, 3>>& values) {
      double total = 0.0;
      for (const auto& v : values) {
        total += std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      }
      return total / static_cast<double>(values.size());
    };
    const auto vel = diff(p);
    const auto acc = diff(vel);
    const auto jerk = diff(acc);
    out[k++] = mean_norm(vel);
    out[k++] = mean_norm(acc);
    out[k++] = mean_norm(jerk);
  }
  out[15] = n / fps;
  return out;
}

// Two-pass gait labeling oracle: first means, then thresholded argmax.
struct GeaOracle {
  std::map<std::string, std::array<double, 4>> means;
  std::map<std::string, std::optional<emogait::Emotion>> labels;  // nullopt = discarded
};

inline GeaOracle label_corpus(const std::vector<emogait::RatingRecord>& ratings, double theta) {
  GeaOracle out;
  std::map<std::string, std::pair<std::array<double, 4>, int>> sums;
  for (const auto& r : ratings) {
    auto& [sum, count] = sums[r.gait_id];
    for (int e = 0; e < 4; ++e) sum[e] += r.responses[e];
    count++;
  }
  for (const auto& [gait_id, entry] : sums) {
    std::array<double, 4> mean{};
    for (int e = 0; e < 4; ++e) mean[e] = entry.first[e] / entry.second;
    out.means[gait_id] = mean;

    int best = -1;
    for (int e = 0; e < 4; ++e) {
      if (mean[e] > theta && (best < 0 || mean[e] > mean[best])) best = e;
    }
    out.labels[gait_id] =
        best < 0 ? std::nullopt : std::optional<emogait::Emotion>(static_cast<emogait::Emotion>(best));
  }
  return out;
}

// Direct evaluation of the emotion gaze formulas on scalar components.
struct GazeOracle {
  double flex = 0.0;
  double rot = 0.0;
};

inline double oracle_signed_rot(double fx, double fz, double dx, double dz) {
  return std::atan2(fz * dx - fx * dz, fx * dx + fz * dz);
}

inline GazeOracle gaze_formulas(emogait::Emotion e, const std::array<double, 3>& p_i,
                                const std::array<double, 3>& p_u, const std::array<double, 3>& f,
                                double theta_happy, double theta_sad, const GazeOracle& neutral) {
  GazeOracle out;
  const double dx = p_u[0] - p_i[0];
  const double dz = p_u[2] - p_i[2];
  switch (e) {
    case emogait::Emotion::Happy:
      out.flex = theta_happy;
      out.rot = oracle_signed_rot(f[0], f[2], dx, dz);
      break;
    case emogait::Emotion::Angry: {
      const double horizontal =
          std::sqrt((p_i[0] - p_u[0]) * (p_i[0] - p_u[0]) + (p_i[2] - p_u[2]) * (p_i[2] - p_u[2]));
      out.flex = std::asin(std::clamp((p_i[1] - p_u[1]) / horizontal, -1.0, 1.0));
      out.rot = oracle_signed_rot(f[0], f[2], dx, dz);
      break;
    }
    case emogait::Emotion::Sad:
      out.flex = theta_sad;
      out.rot = 0.0;
      break;
    case emogait::Emotion::Neutral:
      out = neutral;
      break;
  }
  return out;
}

}  // namespace oracles
