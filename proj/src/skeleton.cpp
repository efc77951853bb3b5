#include "emogait/skeleton.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emogait/error.hpp"

namespace emogait {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "Root",      "Spine",     "Neck",   "Head",      "LShoulder", "LElbow",
    "LHand",     "RShoulder", "RElbow", "RHand",     "LHip",      "LKnee",
    "LFoot",     "RHip",      "RKnee",  "RFoot",
};

int line_of_offset(const std::string& text, std::size_t byte) {
  return 1 + static_cast<int>(
                 std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

std::string_view joint_name(JointId id) {
  return kJointNames[static_cast<int>(id)];
}

std::optional<JointId> joint_from_name(std::string_view name) {
  for (int i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

bool operator==(const Pose& a, const Pose& b) {
  return (a.positions.array() == b.positions.array()).all();
}

bool operator==(const Gait& a, const Gait& b) {
  return a.id == b.id && a.fps == b.fps && a.frames == b.frames;
}

void validate_gait(const Gait& gait) {
  if (gait.frame_count() < 2) {
    throw Error(ErrorKind::Schema,
                "gait '" + gait.id + "': needs at least 2 frames, has " +
                    std::to_string(gait.frame_count()));
  }
  if (!(gait.fps > 0.0) || !std::isfinite(gait.fps)) {
    throw Error(ErrorKind::Schema, "gait '" + gait.id + "': fps must be positive and finite");
  }
  for (int t = 0; t < gait.frame_count(); ++t) {
    if (!gait.frames[t].positions.allFinite()) {
      throw Error(ErrorKind::Schema, "gait '" + gait.id + "': non-finite coordinate in frame " +
                                         std::to_string(t));
    }
  }
  for (int t = 1; t < gait.frame_count(); ++t) {
    const Eigen::Vector3d step = gait.frames[t].position(JointId::Root) -
                                 gait.frames[t - 1].position(JointId::Root);
    if (step.norm() >= 1.0) {
      throw Error(ErrorKind::Schema, "gait '" + gait.id + "': root jumps " +
                                         std::to_string(step.norm()) + " m into frame " +
                                         std::to_string(t));
    }
  }
}

Gait translate(const Gait& gait, const Eigen::Vector3d& offset) {
  Gait out = gait;
  for (Pose& pose : out.frames) {
    pose.positions.colwise() += offset;
  }
  return out;
}

Gait parse_gait(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": line " + std::to_string(line_of_offset(text, e.byte)) +
                                      ": " + e.what());
  }

  auto require = [&](const char* field) -> const json& {
    if (!doc.contains(field)) {
      throw Error(ErrorKind::Schema, origin + ": missing field '" + field + "'");
    }
    return doc.at(field);
  };

  Gait gait;
  const json& id = require("id");
  if (!id.is_string()) throw Error(ErrorKind::Schema, origin + ": field 'id' must be a string");
  gait.id = id.get<std::string>();

  const json& fps = require("fps");
  if (!fps.is_number()) throw Error(ErrorKind::Schema, origin + ": field 'fps' must be a number");
  gait.fps = fps.get<double>();

  const json& joints = require("joints");
  if (!joints.is_array() || joints.size() != kJointCount) {
    throw Error(ErrorKind::Schema, origin + ": field 'joints' must list exactly " +
                                       std::to_string(kJointCount) + " joint names");
  }
  // Column order in the file; may be any permutation of the canonical set.
  std::array<int, kJointCount> column_of;  // canonical index -> file column
  column_of.fill(-1);
  for (int c = 0; c < kJointCount; ++c) {
    const json& name = joints.at(c);
    if (!name.is_string()) throw Error(ErrorKind::Schema, origin + ": joint names must be strings");
    const auto id_opt = joint_from_name(name.get<std::string>());
    if (!id_opt) {
      throw Error(ErrorKind::Schema,
                  origin + ": unknown joint name '" + name.get<std::string>() + "'");
    }
    int canonical = static_cast<int>(*id_opt);
    if (column_of[canonical] != -1) {
      throw Error(ErrorKind::Schema,
                  origin + ": duplicate joint name '" + name.get<std::string>() + "'");
    }
    column_of[canonical] = c;
  }

  const json& frames = require("frames");
  if (!frames.is_array()) throw Error(ErrorKind::Schema, origin + ": field 'frames' must be an array");
  gait.frames.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& frame = frames.at(t);
    if (!frame.is_array() || frame.size() != kJointCount) {
      throw Error(ErrorKind::Schema, origin + ": frame " + std::to_string(t) + " has " +
                                         std::to_string(frame.is_array() ? frame.size() : 0) +
                                         " joints, expected " + std::to_string(kJointCount));
    }
    Pose pose;
    for (int j = 0; j < kJointCount; ++j) {
      const json& triple = frame.at(column_of[j]);
      if (!triple.is_array() || triple.size() != 3 || !triple.at(0).is_number() ||
          !triple.at(1).is_number() || !triple.at(2).is_number()) {
        throw Error(ErrorKind::Schema, origin + ": frame " + std::to_string(t) +
                                           ": joint positions must be [x,y,z] numbers");
      }
      pose.positions.col(j) = Eigen::Vector3d(triple.at(0).get<double>(),
                                              triple.at(1).get<double>(),
                                              triple.at(2).get<double>());
    }
    gait.frames.push_back(pose);
  }

  validate_gait(gait);
  return gait;
}

Gait load_gait(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open gait file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_gait(buffer.str(), path.string());
}

std::string serialize_gait(const Gait& gait) {
  validate_gait(gait);
  json doc;
  doc["id"] = gait.id;
  doc["fps"] = gait.fps;
  json joints = json::array();
  for (int j = 0; j < kJointCount; ++j) joints.push_back(joint_name(static_cast<JointId>(j)));
  doc["joints"] = std::move(joints);
  json frames = json::array();
  for (const Pose& pose : gait.frames) {
    json frame = json::array();
    for (int j = 0; j < kJointCount; ++j) {
      frame.push_back(json::array({pose.positions(0, j), pose.positions(1, j), pose.positions(2, j)}));
    }
    frames.push_back(std::move(frame));
  }
  doc["frames"] = std::move(frames);
  return doc.dump();
}

void save_gait(const Gait& gait, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write gait file: " + path.string());
  out << serialize_gait(gait);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<int> detect_foot_strikes(const Gait& gait, JointId foot) {
  const int n = gait.frame_count();
  const int col = static_cast<int>(foot);
  std::vector<double> height(n);
  for (int t = 0; t < n; ++t) height[t] = gait.frames[t].positions(1, col);
  const double floor = *std::min_element(height.begin(), height.end());

  constexpr int kWindow = 3;
  constexpr double kFloorBand = 0.02;  // m

  std::vector<int> strikes;
  int run_end = -2;  // last frame of the current qualifying run
  for (int t = 0; t < n; ++t) {
    // Comparisons are written as differences so that a uniform translation of
    // the gait leaves detection decisions bit-identical.
    if (height[t] - floor > kFloorBand) continue;
    bool is_min = true;
    bool strictly_below_one = false;
    for (int k = std::max(0, t - kWindow); k <= std::min(n - 1, t + kWindow); ++k) {
      if (k == t) continue;
      if (height[t] > height[k]) {
        is_min = false;
        break;
      }
      if (height[t] < height[k]) strictly_below_one = true;
    }
    if (!is_min || !strictly_below_one) continue;
    if (run_end != t - 1) strikes.push_back(t);  // plateau runs collapse to their first frame
    run_end = t;
  }
  return strikes;
}

WalkCycle extract_walk_cycle(const Gait& gait) {
  const std::vector<int> strikes = detect_foot_strikes(gait, JointId::LFoot);
  if (strikes.size() < 2) {
    throw Error(ErrorKind::Cycle, "gait '" + gait.id + "': found " +
                                      std::to_string(strikes.size()) +
                                      " left-foot strikes, need at least 2");
  }
  WalkCycle cycle;
  cycle.start_frame = strikes[0];
  cycle.end_frame = strikes[1];
  cycle.gait.id = gait.id;
  cycle.gait.fps = gait.fps;
  cycle.gait.frames.assign(gait.frames.begin() + cycle.start_frame,
                           gait.frames.begin() + cycle.end_frame + 1);
  return cycle;
}

std::map<std::string, Gait> load_gait_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::map<std::string, Gait> gaits;
  for (const auto& path : paths) {
    Gait gait = load_gait(path);
    if (gaits.count(gait.id)) {
      throw Error(ErrorKind::Data, "duplicate gait id '" + gait.id + "' in " + dir.string());
    }
    gaits.emplace(gait.id, std::move(gait));
  }
  return gaits;
}

}  // namespace emogait
