#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emogait/skeleton.hpp"

namespace emogait {

inline constexpr int kPostureFeatureCount = 13;
inline constexpr int kMovementFeatureCount = 16;
inline constexpr int kFeatureCount = kPostureFeatureCount + kMovementFeatureCount;  // 29

using FeatureVec = Eigen::Matrix<double, kFeatureCount, 1>;

// The five joints whose derivative magnitudes are tracked.
inline constexpr std::array<JointId, 5> kMovementJoints = {
    JointId::LHand, JointId::RHand, JointId::LFoot, JointId::RFoot, JointId::Head};

// Per-frame posture geometry averaged over the cycle, then stride appended.
struct PostureFeatures {
  double bounding_volume = 0.0;        // axis-aligned box of all joints, m^3
  double area_hands_neck = 0.0;        // triangle LHand/RHand/Neck, m^2
  double area_feet_root = 0.0;         // triangle LFoot/RFoot/Root, m^2
  Eigen::Vector4d root_distances =     // LHand, RHand, LFoot, RFoot to Root, m
      Eigen::Vector4d::Zero();
  Eigen::Matrix<double, 5, 1> angles = // radians, see feature_names()
      Eigen::Matrix<double, 5, 1>::Zero();
  double stride_length = 0.0;          // m
  bool degenerate_angles = false;      // some angle had a zero-length segment

  Eigen::Matrix<double, kPostureFeatureCount, 1> flatten() const;
};

struct MovementFeatures {
  // Rows: speed, acceleration magnitude, jerk magnitude (m/s, m/s^2, m/s^3).
  // Columns follow kMovementJoints.
  Eigen::Matrix<double, 3, 5> derivatives = Eigen::Matrix<double, 3, 5>::Zero();
  double cycle_time = 0.0;  // s

  Eigen::Matrix<double, kMovementFeatureCount, 1> flatten() const;
};

struct GaitFeatureVector {
  PostureFeatures posture;
  MovementFeatures movement;
  bool whole_gait_fallback = false;  // no walk cycle found; whole gait used

  // Posture block first, then movement block. Order is frozen by a golden
  // test and by feature_names().
  FeatureVec flatten() const;
};

const std::array<std::string, kFeatureCount>& feature_names();

double stride_length(const WalkCycle& cycle);
PostureFeatures posture_features(const WalkCycle& cycle);
// Requires at least 4 frames in the cycle (jerk needs 4 samples).
MovementFeatures movement_features(const WalkCycle& cycle);
GaitFeatureVector extract_features(const Gait& gait);

struct NormalizationBounds {
  FeatureVec min = FeatureVec::Zero();
  FeatureVec max = FeatureVec::Zero();
};

NormalizationBounds fit_normalization(const std::vector<FeatureVec>& corpus);
// Affine per feature: min -> -1, max -> +1; collapsed bounds map to 0;
// out-of-range inputs clamp to [-1, 1].
FeatureVec normalize(const FeatureVec& v, const NormalizationBounds& b);
// Inverse affine of normalize for in-range values.
FeatureVec denormalize(const FeatureVec& v, const NormalizationBounds& b);

// CSV table of named features: header `gait_id,<29 names>[,label]`.
struct FeatureRow {
  std::string gait_id;
  FeatureVec features = FeatureVec::Zero();
  std::optional<std::string> label;
};

std::string write_features_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_features_csv(const std::string& text,
                                           const std::string& origin = "<string>");
std::vector<FeatureRow> load_features_csv(const std::filesystem::path& path);
void save_features_csv(const std::vector<FeatureRow>& rows, const std::filesystem::path& path);

}  // namespace emogait
