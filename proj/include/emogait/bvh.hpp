#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "emogait/skeleton.hpp"

namespace emogait {

// Mocap joint name -> canonical joint. Loaded from a two-column text table.
using JointMap = std::map<std::string, JointId>;

JointMap parse_joint_map(const std::string& text, const std::string& origin = "<string>");
JointMap load_joint_map(const std::filesystem::path& path);

// Imports a BVH file (HIERARCHY/MOTION subset: OFFSET, CHANNELS with 3 or 6
// entries, Euler rotations composed per channel in declared order, intrinsic).
// World positions come from forward kinematics; fps = 1 / FrameTime.
// `scale` converts file units to meters (default: centimeters).
// Position channels are accepted on the root only.
Gait import_bvh_text(const std::string& text, const JointMap& joint_map,
                     const std::string& gait_id, double scale = 0.01);
Gait import_bvh(const std::filesystem::path& path, const JointMap& joint_map,
                double scale = 0.01);

}  // namespace emogait
