#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emogait/gaze.hpp"
#include "emogait/gea.hpp"
#include "emogait/navigation.hpp"
#include "emogait/skeleton.hpp"

namespace emogait {

struct AgentSpec {
  std::string id;
  Emotion desired_emotion = Emotion::Neutral;
  Eigen::Vector2d start = Eigen::Vector2d::Zero();  // ground plane (x, z)
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  std::optional<std::string> gait_override;  // fixed gait id, skips selection
};

// Piecewise-linear scripted observer; a single waypoint is a static position.
struct UserPath {
  std::vector<std::pair<double, Eigen::Vector3d>> waypoints = {{0.0, {0.0, 1.7, 0.0}}};

  Eigen::Vector3d at(double time) const;
};

struct NavDefaults {
  double radius = 0.3;
  double max_speed = 1.8;
  double time_horizon = 2.0;
};

struct SimConfig {
  double dt = 1.0 / 60.0;
  double duration = 10.0;
  std::uint64_t seed = 0;
  UserPath user;
  GazeConfig gaze;
  NavDefaults navigation;
};

struct Scenario {
  SimConfig config;
  std::vector<AgentSpec> agents;
};

// Scenario file: JSON with agents, user path, dt/duration/seed, gaze constants
// (degrees) and navigation defaults.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

// Uniform choice from the emotion's bucket; deterministic under the rng state.
// Throws Error(Data) when the bucket is empty.
std::string select_gait(const GaitEmotionAssociation& gea, Emotion e_des, std::mt19937_64& rng);

// Plays the cycle frame nearest to `phase`, rotated about the vertical axis
// from the gait's own travel heading to `heading`, root placed at root_xz
// with the recorded height kept.
Pose retarget_pose(const WalkCycle& cycle, double phase, const Eigen::Vector2d& root_xz,
                   double heading);

// Heading (radians) of a gait's horizontal travel direction. The convention
// throughout: heading h faces (cos h, 0, -sin h), so +h turns left.
double intrinsic_heading(const Gait& gait);
Eigen::Vector3d heading_direction(double heading);

struct AgentFrame {
  std::string id;
  Emotion emotion = Emotion::Neutral;
  Pose pose;                                            // world space, gaze applied
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();   // ground plane, m/s
  double heading = 0.0;                                 // radians
  GazeAngles gaze;
};

struct FrameRecord {
  double time = 0.0;
  std::vector<AgentFrame> agents;
};

using FrameSink = std::function<void(const FrameRecord&)>;

// Runs the full loop: navigation step, speed-scaled gait phase advance,
// heading from velocity, smoothed emotion gaze, pose emission. Deterministic
// for a fixed scenario, gait set, and seed.
void simulate(const Scenario& scenario, const GaitEmotionAssociation& gea,
              const std::map<std::string, Gait>& gaits, const FrameSink& sink);
std::vector<FrameRecord> simulate_collect(const Scenario& scenario,
                                          const GaitEmotionAssociation& gea,
                                          const std::map<std::string, Gait>& gaits);

enum class ExportFormat { JsonLines, Csv };

// Streaming writer: JSON Lines carry full frames; CSV carries root
// trajectories (time, agent, root x/z, heading, emotion).
class FrameExporter {
 public:
  FrameExporter(const std::filesystem::path& path, ExportFormat format);
  void write(const FrameRecord& record);
  void close();

 private:
  std::string buffer_;
  std::filesystem::path path_;
  ExportFormat format_;
  bool closed_ = false;
};

void export_frames(const std::vector<FrameRecord>& records, const std::filesystem::path& path,
                   ExportFormat format);
// Reads a JSON Lines export back; inverse of the JsonLines writer.
std::vector<FrameRecord> import_frames(const std::filesystem::path& path);

bool operator==(const AgentFrame& a, const AgentFrame& b);
bool operator==(const FrameRecord& a, const FrameRecord& b);

}  // namespace emogait
