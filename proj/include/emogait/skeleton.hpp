#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emogait {

inline constexpr int kJointCount = 16;

// Canonical skeleton. Indices are stable and fix the column order of every
// pose matrix and serialized gait file.
enum class JointId : int {
  Root = 0,
  Spine,
  Neck,
  Head,
  LShoulder,
  LElbow,
  LHand,
  RShoulder,
  RElbow,
  RHand,
  LHip,
  LKnee,
  LFoot,
  RHip,
  RKnee,
  RFoot,
};

std::string_view joint_name(JointId id);
std::optional<JointId> joint_from_name(std::string_view name);

// 3 x 16 matrix of world-space joint positions, meters, y up.
using JointMatrix = Eigen::Matrix<double, 3, kJointCount>;

struct Pose {
  JointMatrix positions = JointMatrix::Zero();

  Eigen::Vector3d position(JointId id) const {
    return positions.col(static_cast<int>(id));
  }
  void set_position(JointId id, const Eigen::Vector3d& p) {
    positions.col(static_cast<int>(id)) = p;
  }
};

bool operator==(const Pose& a, const Pose& b);

struct Gait {
  std::string id;
  double fps = 0.0;
  std::vector<Pose> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  double duration() const { return frame_count() / fps; }
};

bool operator==(const Gait& a, const Gait& b);

// One walk cycle: the frames of a source gait between two consecutive
// left-foot strikes, both ends inclusive.
struct WalkCycle {
  Gait gait;
  int start_frame = 0;
  int end_frame = 0;

  int frame_count() const { return gait.frame_count(); }
};

// Throws Error(Schema) when an invariant is violated: fewer than 2 frames,
// non-positive fps, non-finite coordinates, or a per-frame root jump >= 1 m.
void validate_gait(const Gait& gait);

Gait translate(const Gait& gait, const Eigen::Vector3d& offset);

// Native gait format (JSON text): {"id", "fps", "joints", "frames"}.
// Serialization is canonical: joints listed in JointId order, doubles in
// shortest round-trip decimal form, so serialize(load(f)) == f for files
// this library wrote, and load(serialize(g)) == g for every valid gait.
Gait parse_gait(const std::string& text, const std::string& origin = "<string>");
Gait load_gait(const std::filesystem::path& path);
std::string serialize_gait(const Gait& gait);
void save_gait(const Gait& gait, const std::filesystem::path& path);

// Frames where the given foot strikes the ground: local height minimum over
// a +/-3 frame window, within 2 cm of the gait-wide minimum height for that
// foot. Runs of adjacent qualifying frames collapse to their first frame.
std::vector<int> detect_foot_strikes(const Gait& gait, JointId foot);

// Frames between the first two detected left-foot strikes, inclusive.
// Throws Error(Cycle) when fewer than two strikes are found.
WalkCycle extract_walk_cycle(const Gait& gait);

// All *.json gaits in a directory, keyed by gait id.
std::map<std::string, Gait> load_gait_directory(const std::filesystem::path& dir);

}  // namespace emogait
