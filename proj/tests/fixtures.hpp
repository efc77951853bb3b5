// Synthetic gaits, rating corpora, and feature sets shared by the unit tests
// and the acceptance suite. Everything here is deterministic.
#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "emogait/features.hpp"
#include "emogait/gea.hpp"
#include "emogait/skeleton.hpp"

namespace fixtures {

// Snap to 9 significant decimal digits (the canonical file precision).
inline double snap9(double value) {
  char buffer[40];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value,
                                 std::chars_format::general, 9);
  double out = 0.0;
  std::from_chars(buffer, ptr, out);
  return out;
}

// Snap to a dyadic grid so that grid-aligned translations stay exact in
// double arithmetic.
inline double snap_dyadic(double value, int bits = 20) {
  const double scale = static_cast<double>(1 << bits);
  return std::round(value * scale) / scale;
}

struct SineWalkOptions {
  double fps = 60.0;
  int frames = 120;
  int period = 60;        // frames per full cycle
  int first_strike = 10;  // frame of the first left-foot strike
  double speed = 1.2;     // m/s forward along +x
  double step_height = 0.15;
  double step_reach = 0.3;
  double arm_swing = 0.25;
  double head_lean = 0.0;  // forward head offset (slouch)
  double hip_height = 0.95;
  enum class Snap { None, Digits9, Dyadic } snap = Snap::None;
};

// A 16-joint walk along +x with left-foot strikes exactly at
// first_strike + k * period (foot height has its cosine minimum there).
inline emogait::Gait make_sine_walk(const std::string& id, const SineWalkOptions& opt = {}) {
  using emogait::JointId;
  emogait::Gait gait;
  gait.id = id;
  gait.fps = opt.fps;

  auto snap = [&](double v) {
    switch (opt.snap) {
      case SineWalkOptions::Snap::Digits9: return snap9(v);
      case SineWalkOptions::Snap::Dyadic: return snap_dyadic(v);
      default: return v;
    }
  };

  for (int t = 0; t < opt.frames; ++t) {
    const double phase = 2.0 * EIGEN_PI * (t - opt.first_strike) / opt.period;
    const double forward = opt.speed * t / opt.fps;

    emogait::Pose pose;
    auto set = [&](JointId j, double x, double y, double z) {
      pose.set_position(j, {snap(x), snap(y), snap(z)});
    };

    const double root_y = opt.hip_height + 0.02 * std::cos(2.0 * phase);
    set(JointId::Root, forward, root_y, 0.0);
    set(JointId::Spine, forward + 0.02, root_y + 0.25, 0.0);
    set(JointId::Neck, forward + 0.03, root_y + 0.5, 0.0);
    set(JointId::Head, forward + 0.03 + opt.head_lean, root_y + 0.72, 0.0);

    // Left side sits at -z when walking along +x with y up.
    set(JointId::LShoulder, forward + 0.03, root_y + 0.47, -0.22);
    set(JointId::RShoulder, forward + 0.03, root_y + 0.47, 0.22);
    const double arm_l = -opt.arm_swing * std::cos(phase);
    const double arm_r = +opt.arm_swing * std::cos(phase);
    set(JointId::LElbow, forward + 0.5 * arm_l, root_y + 0.2, -0.24);
    set(JointId::RElbow, forward + 0.5 * arm_r, root_y + 0.2, 0.24);
    set(JointId::LHand, forward + arm_l, root_y - 0.05, -0.25);
    set(JointId::RHand, forward + arm_r, root_y - 0.05, 0.25);

    const double foot_l_x = forward + opt.step_reach * std::cos(phase);
    const double foot_r_x = forward - opt.step_reach * std::cos(phase);
    const double foot_l_y = 0.5 * opt.step_height * (1.0 - std::cos(phase));
    const double foot_r_y = 0.5 * opt.step_height * (1.0 + std::cos(phase));
    set(JointId::LHip, forward, root_y - 0.1, -0.1);
    set(JointId::RHip, forward, root_y - 0.1, 0.1);
    set(JointId::LKnee, forward + 0.5 * (foot_l_x - forward), 0.5 * (root_y - 0.1 + foot_l_y) + 0.04,
        -0.1);
    set(JointId::RKnee, forward + 0.5 * (foot_r_x - forward), 0.5 * (root_y - 0.1 + foot_r_y) + 0.04,
        0.1);
    set(JointId::LFoot, foot_l_x, foot_l_y, -0.1);
    set(JointId::RFoot, foot_r_x, foot_r_y, 0.1);

    gait.frames.push_back(pose);
  }
  return gait;
}

// Four identical frames with hand-placed joints; every posture feature has a
// pencil-and-paper value and every movement feature is zero.
inline emogait::Gait make_tpose_gait(const std::string& id = "tpose", int frames = 4,
                                 double fps = 60.0) {
  using emogait::JointId;
  emogait::Pose pose;
  pose.set_position(JointId::Root, {0.0, 1.0, 0.0});
  pose.set_position(JointId::Spine, {0.0, 1.25, 0.0});
  pose.set_position(JointId::Neck, {0.0, 1.5, 0.0});
  pose.set_position(JointId::Head, {0.0, 1.75, 0.0});
  pose.set_position(JointId::LShoulder, {0.0, 1.5, -0.25});
  pose.set_position(JointId::RShoulder, {0.0, 1.5, 0.25});
  pose.set_position(JointId::LElbow, {0.0, 1.5, -0.5});
  pose.set_position(JointId::RElbow, {0.0, 1.5, 0.5});
  pose.set_position(JointId::LHand, {0.5, 1.5, -0.75});
  pose.set_position(JointId::RHand, {0.5, 1.5, 0.75});
  pose.set_position(JointId::LHip, {0.0, 1.0, -0.125});
  pose.set_position(JointId::RHip, {0.0, 1.0, 0.125});
  pose.set_position(JointId::LKnee, {0.0, 0.5, -0.125});
  pose.set_position(JointId::RKnee, {0.0, 0.5, 0.125});
  pose.set_position(JointId::LFoot, {0.0, 0.0, -0.125});
  pose.set_position(JointId::RFoot, {0.0, 0.0, 0.125});

  emogait::Gait gait;
  gait.id = id;
  gait.fps = fps;
  gait.frames.assign(frames, pose);
  return gait;
}

// Every joint follows base + direction * (a t + b t^2 + c t^3) in frame time;
// derivatives against a finite-difference oracle are then straightforward.
struct PolynomialMotion {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  double a = 0.0, b = 0.0, c = 0.0;
};

inline emogait::Gait make_polynomial_gait(const std::string& id, int frames, double fps,
                                      const PolynomialMotion& root_motion,
                                      const PolynomialMotion& hand_motion) {
  using emogait::JointId;
  emogait::Gait gait;
  gait.id = id;
  gait.fps = fps;
  for (int t = 0; t < frames; ++t) {
    const double s = static_cast<double>(t);
    const auto offset = [&](const PolynomialMotion& m) -> Eigen::Vector3d {
      return m.direction * (m.a * s + m.b * s * s + m.c * s * s * s);
    };
    emogait::Pose pose;
    const Eigen::Vector3d root = Eigen::Vector3d(0.0, 1.0, 0.0) + offset(root_motion);
    for (int j = 0; j < emogait::kJointCount; ++j) {
      pose.positions.col(j) = root + Eigen::Vector3d(0.0, 0.01 * j, 0.02 * j);
    }
    pose.set_position(JointId::Neck, root + Eigen::Vector3d(0.0, 0.5, 0.0));
    pose.set_position(JointId::Head, root + Eigen::Vector3d(0.0, 0.75, 0.0));
    pose.set_position(JointId::LHand, root + Eigen::Vector3d(0.3, 0.2, -0.3) + offset(hand_motion));
    gait.frames.push_back(pose);
  }
  return gait;
}

// A straight-line gait whose root displacement is exact, for speed formulas.
inline emogait::Gait make_straight_gait(const std::string& id, int frames, double fps,
                                    const Eigen::Vector3d& total_displacement) {
  using emogait::JointId;
  emogait::Gait gait;
  gait.id = id;
  gait.fps = fps;
  for (int t = 0; t < frames; ++t) {
    const Eigen::Vector3d root =
        Eigen::Vector3d(0.0, 0.95, 0.0) + total_displacement * (t / static_cast<double>(frames - 1));
    emogait::Pose pose;
    for (int j = 0; j < emogait::kJointCount; ++j) {
      pose.positions.col(j) = root + Eigen::Vector3d(0.0, 0.01 * j, 0.015 * j);
    }
    pose.set_position(JointId::Neck, root + Eigen::Vector3d(0.0, 0.5, 0.0));
    pose.set_position(JointId::Head, root + Eigen::Vector3d(0.0, 0.72, 0.0));
    pose.set_position(JointId::LShoulder, root + Eigen::Vector3d(0.0, 0.47, -0.2));
    pose.set_position(JointId::RShoulder, root + Eigen::Vector3d(0.0, 0.47, 0.2));
    gait.frames.push_back(pose);
  }
  return gait;
}

// 20 gaits x 10 participants covering clear labels, near-threshold cases,
// exact ties, and fully inexpressive (discarded) gaits.
inline std::vector<emogait::RatingRecord> make_rating_corpus() {
  std::vector<emogait::RatingRecord> records;
  for (int g = 0; g < 20; ++g) {
    char gait_id[8];
    std::snprintf(gait_id, sizeof gait_id, "g%02d", g + 1);
    for (int p = 0; p < 10; ++p) {
      char participant[8];
      std::snprintf(participant, sizeof participant, "p%02d", p + 1);
      emogait::RatingRecord record;
      record.gait_id = gait_id;
      record.participant_id = participant;
      for (int e = 0; e < emogait::kEmotionCount; ++e) {
        int value;
        if (g < 16) {
          // Dominant emotion rotates; strength varies with the gait index.
          const int dominant = g % 4;
          if (e == dominant) {
            value = 4 + ((g + p) % 2);  // mean 4.5-ish, above any threshold
          } else if (e == (dominant + 1) % 4 && g >= 8) {
            value = 4;  // a strong runner-up, still below the dominant mean
          } else {
            value = 1 + ((g + p + e) % 3);
          }
        } else if (g < 18) {
          value = 1 + ((g + p + e) % 3);  // everything at or below 3: discarded
        } else {
          // Exact tie between Happy and Sad above threshold.
          value = (e == 0 || e == 2) ? 4 : 2;
        }
        record.responses[e] = value;
      }
      records.push_back(std::move(record));
    }
  }
  return records;
}

struct LabeledFeatures {
  Eigen::MatrixXd features;  // rows are samples
  std::vector<emogait::Emotion> labels;
};

// Four tight, well-separated clusters in feature space, n per class.
inline LabeledFeatures make_separable_corpus(int per_class = 10, std::uint64_t seed = 42) {
  std::mt19937_64 rng(seed);
  auto noise = [&rng]() {
    return (static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max()) - 0.5) * 0.5;
  };
  LabeledFeatures out;
  out.features.resize(4 * per_class, emogait::kFeatureCount);
  out.features.setZero();
  int row = 0;
  for (emogait::Emotion e : emogait::all_emotions()) {
    const int cls = static_cast<int>(e);
    for (int i = 0; i < per_class; ++i, ++row) {
      for (int d = 0; d < emogait::kFeatureCount; ++d) out.features(row, d) = noise();
      out.features(row, cls) += 6.0;       // one-hot style center
      out.features(row, 4 + cls) -= 6.0;   // and a mirrored companion axis
      out.labels.push_back(e);
    }
  }
  return out;
}

// XOR layout in the first two dimensions, lifted to 29-d: linearly
// inseparable, trivially separable for an RBF kernel.
inline LabeledFeatures make_xor_corpus(int per_corner = 10, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  auto noise = [&rng]() {
    return (static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max()) - 0.5) * 0.1;
  };
  LabeledFeatures out;
  out.features.resize(4 * per_corner, emogait::kFeatureCount);
  out.features.setZero();
  int row = 0;
  for (int sx : {-1, 1}) {
    for (int sz : {-1, 1}) {
      const emogait::Emotion label = sx * sz > 0 ? emogait::Emotion::Happy : emogait::Emotion::Sad;
      for (int i = 0; i < per_corner; ++i, ++row) {
        out.features(row, 0) = sx + noise();
        out.features(row, 1) = sz + noise();
        out.labels.push_back(label);
      }
    }
  }
  return out;
}

inline std::vector<emogait::Emotion> shuffled_labels(const std::vector<emogait::Emotion>& labels,
                                                 std::uint64_t seed) {
  std::vector<emogait::Emotion> out = labels;
  std::mt19937_64 rng(seed);
  for (std::size_t i = out.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(rng()) * i) >> 64);
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

// --- BVH builders -----------------------------------------------------------

inline const char* humanoid_joint_map_text() {
  return "Hips Root\n"
         "Chest Spine\n"
         "NeckJ Neck\n"
         "HeadJ Head\n"
         "LeftShoulder LShoulder\n"
         "LeftElbow LElbow\n"
         "LeftWrist LHand\n"
         "RightShoulder RShoulder\n"
         "RightElbow RElbow\n"
         "RightWrist RHand\n"
         "LeftHip LHip\n"
         "LeftKnee LKnee\n"
         "LeftAnkle LFoot\n"
         "RightHip RHip\n"
         "RightKnee RKnee\n"
         "RightAnkle RFoot\n";
}

// 16-joint humanoid hierarchy; per-frame channel values supplied by rows of
// 51 numbers (6 root + 3 x 15 joints, hierarchy order).
inline std::string humanoid_bvh_text(const std::vector<std::vector<double>>& frames,
                                     double frame_time = 0.025) {
  std::string text =
      "HIERARCHY\n"
      "ROOT Hips\n"
      "{\n"
      "  OFFSET 0 90 0\n"
      "  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation\n"
      "  JOINT Chest\n"
      "  {\n"
      "    OFFSET 0 25 0\n"
      "    CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "    JOINT NeckJ\n"
      "    {\n"
      "      OFFSET 0 25 0\n"
      "      CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "      JOINT HeadJ\n"
      "      {\n"
      "        OFFSET 0 20 0\n"
      "        CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "        End Site\n"
      "        {\n"
      "          OFFSET 0 10 0\n"
      "        }\n"
      "      }\n"
      "      JOINT LeftShoulder\n"
      "      {\n"
      "        OFFSET 0 -3 -20\n"
      "        CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "        JOINT LeftElbow\n"
      "        {\n"
      "          OFFSET 0 -28 -2\n"
      "          CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "          JOINT LeftWrist\n"
      "          {\n"
      "            OFFSET 0 -26 0\n"
      "            CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "            End Site\n"
      "            {\n"
      "              OFFSET 0 -8 0\n"
      "            }\n"
      "          }\n"
      "        }\n"
      "      }\n"
      "      JOINT RightShoulder\n"
      "      {\n"
      "        OFFSET 0 -3 20\n"
      "        CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "        JOINT RightElbow\n"
      "        {\n"
      "          OFFSET 0 -28 2\n"
      "          CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "          JOINT RightWrist\n"
      "          {\n"
      "            OFFSET 0 -26 0\n"
      "            CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "            End Site\n"
      "            {\n"
      "              OFFSET 0 -8 0\n"
      "            }\n"
      "          }\n"
      "        }\n"
      "      }\n"
      "    }\n"
      "  }\n"
      "  JOINT LeftHip\n"
      "  {\n"
      "    OFFSET 0 -5 -10\n"
      "    CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "    JOINT LeftKnee\n"
      "    {\n"
      "      OFFSET 0 -42 0\n"
      "      CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "      JOINT LeftAnkle\n"
      "      {\n"
      "        OFFSET 0 -40 0\n"
      "        CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "        End Site\n"
      "        {\n"
      "          OFFSET 0 -5 12\n"
      "        }\n"
      "      }\n"
      "    }\n"
      "  }\n"
      "  JOINT RightHip\n"
      "  {\n"
      "    OFFSET 0 -5 10\n"
      "    CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "    JOINT RightKnee\n"
      "    {\n"
      "      OFFSET 0 -42 0\n"
      "      CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "      JOINT RightAnkle\n"
      "      {\n"
      "        OFFSET 0 -40 0\n"
      "        CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "        End Site\n"
      "        {\n"
      "          OFFSET 0 -5 12\n"
      "        }\n"
      "      }\n"
      "    }\n"
      "  }\n"
      "}\n"
      "MOTION\n";
  text += "Frames: " + std::to_string(frames.size()) + "\n";
  char buffer[40];
  auto [tp, tec] = std::to_chars(buffer, buffer + sizeof buffer, frame_time);
  text += "Frame Time: " + std::string(buffer, tp) + "\n";
  for (const auto& frame : frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      auto [p, ec] = std::to_chars(buffer, buffer + sizeof buffer, frame[i]);
      if (i) text += ' ';
      text.append(buffer, p);
    }
    text += '\n';
  }
  return text;
}

inline constexpr int kHumanoidChannels = 51;

}  // namespace fixtures
