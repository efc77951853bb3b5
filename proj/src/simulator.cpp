#include "emogait/simulator.hpp"

#include <Eigen/Geometry>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emogait/error.hpp"
#include "emogait/random.hpp"

namespace emogait {
namespace {

using json = nlohmann::ordered_json;

constexpr double kTiny = 1e-12;

Eigen::Vector2d parse_vec2(const json& node) {
  if (!node.is_array() || node.size() != 2) {
    throw Error(ErrorKind::Schema, "expected [x, z] pair, got " + node.dump());
  }
  return {node.at(0).get<double>(), node.at(1).get<double>()};
}

Eigen::Vector3d parse_vec3(const json& node) {
  if (!node.is_array() || node.size() != 3) {
    throw Error(ErrorKind::Schema, "expected [x, y, z] triple, got " + node.dump());
  }
  return {node.at(0).get<double>(), node.at(1).get<double>(), node.at(2).get<double>()};
}

void append_double(std::string& out, double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  out.append(buffer, ptr);
}

struct RunningAgent {
  AgentSpec spec;
  NavAgent nav;
  WalkCycle cycle;
  double natural_speed = 0.0;   // Eq.-style gait speed, m/s
  double cycle_seconds = 0.0;   // gt
  double gait_heading = 0.0;
  GazeAngles neutral;
  double phase = 0.0;
  double heading = 0.0;
  GazeAngles gaze;
  bool arrived = false;
};

}  // namespace

Eigen::Vector3d UserPath::at(double time) const {
  if (waypoints.empty()) return Eigen::Vector3d::Zero();
  if (time <= waypoints.front().first) return waypoints.front().second;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (time <= waypoints[i].first) {
      const auto& [t0, p0] = waypoints[i - 1];
      const auto& [t1, p1] = waypoints[i];
      const double span = t1 - t0;
      if (span <= 0.0) return p1;
      const double s = (time - t0) / span;
      return p0 + s * (p1 - p0);
    }
  }
  return waypoints.back().second;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": " + e.what());
  }

  Scenario scenario;
  try {
    SimConfig& cfg = scenario.config;
    cfg.dt = doc.value("dt", cfg.dt);
    cfg.duration = doc.value("duration", cfg.duration);
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (!(cfg.dt > 0.0)) throw Error(ErrorKind::Schema, origin + ": dt must be positive");
    if (!(cfg.duration > 0.0)) {
      throw Error(ErrorKind::Schema, origin + ": duration must be positive");
    }

    if (doc.contains("user")) {
      const json& user = doc.at("user");
      cfg.user.waypoints.clear();
      if (user.contains("position")) {
        cfg.user.waypoints.emplace_back(0.0, parse_vec3(user.at("position")));
      } else if (user.contains("path")) {
        for (const json& wp : user.at("path")) {
          cfg.user.waypoints.emplace_back(wp.at("t").get<double>(), parse_vec3(wp.at("position")));
        }
        if (cfg.user.waypoints.empty()) {
          throw Error(ErrorKind::Schema, origin + ": user.path must not be empty");
        }
        if (!std::is_sorted(cfg.user.waypoints.begin(), cfg.user.waypoints.end(),
                            [](const auto& a, const auto& b) { return a.first < b.first; })) {
          throw Error(ErrorKind::Schema, origin + ": user.path times must be ascending");
        }
      } else {
        throw Error(ErrorKind::Schema, origin + ": user needs 'position' or 'path'");
      }
    }

    if (doc.contains("gaze")) {
      const json& g = doc.at("gaze");
      GazeConfig& gz = cfg.gaze;
      gz.theta_happy = degrees_to_radians(g.value("theta_happy_deg", -5.0));
      gz.theta_sad = degrees_to_radians(g.value("theta_sad_deg", 10.0));
      gz.max_rot = degrees_to_radians(g.value("max_rot_deg", 70.0));
      gz.max_flex = degrees_to_radians(g.value("max_flex_deg", 45.0));
      gz.max_ext = degrees_to_radians(g.value("max_ext_deg", 45.0));
      gz.rate = degrees_to_radians(g.value("rate_deg_per_s", 90.0));
    }

    if (doc.contains("navigation")) {
      const json& nav = doc.at("navigation");
      cfg.navigation.radius = nav.value("radius", cfg.navigation.radius);
      cfg.navigation.max_speed = nav.value("max_speed", cfg.navigation.max_speed);
      cfg.navigation.time_horizon = nav.value("t_max", cfg.navigation.time_horizon);
    }

    if (!doc.contains("agents") || !doc.at("agents").is_array() || doc.at("agents").empty()) {
      throw Error(ErrorKind::Schema, origin + ": scenario needs a non-empty 'agents' array");
    }
    for (const json& a : doc.at("agents")) {
      AgentSpec spec;
      spec.id = a.at("id").get<std::string>();
      const std::string emotion = a.at("emotion").get<std::string>();
      const auto e = emotion_from_name(emotion);
      if (!e) throw Error(ErrorKind::Schema, origin + ": unknown emotion '" + emotion + "'");
      spec.desired_emotion = *e;
      spec.start = parse_vec2(a.at("start"));
      spec.goal = parse_vec2(a.at("goal"));
      if (a.contains("gait")) spec.gait_override = a.at("gait").get<std::string>();
      scenario.agents.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, origin + ": " + e.what());
  }

  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    for (std::size_t j = i + 1; j < scenario.agents.size(); ++j) {
      if (scenario.agents[i].id == scenario.agents[j].id) {
        throw Error(ErrorKind::Schema,
                    origin + ": duplicate agent id '" + scenario.agents[i].id + "'");
      }
    }
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

std::string select_gait(const GaitEmotionAssociation& gea, Emotion e_des, std::mt19937_64& rng) {
  const std::vector<std::string> bucket = gea_lookup(gea, e_des);
  if (bucket.empty()) {
    throw Error(ErrorKind::Data, "no gaits labeled '" + std::string(emotion_name(e_des)) + "'");
  }
  return bucket[bounded_draw(rng, bucket.size())];
}

double intrinsic_heading(const Gait& gait) {
  const Eigen::Vector3d d =
      gait.frames.back().position(JointId::Root) - gait.frames.front().position(JointId::Root);
  if (d.x() * d.x() + d.z() * d.z() < kTiny * kTiny) {
    // Stationary gait: derive facing from the shoulder axis of the first frame.
    const Eigen::Vector3d lateral = gait.frames.front().position(JointId::LShoulder) -
                                    gait.frames.front().position(JointId::RShoulder);
    const Eigen::Vector3d forward(-lateral.z(), 0.0, lateral.x());  // left x up
    if (forward.squaredNorm() < kTiny * kTiny) return 0.0;
    return std::atan2(-forward.z(), forward.x());
  }
  return std::atan2(-d.z(), d.x());
}

Eigen::Vector3d heading_direction(double heading) {
  return {std::cos(heading), 0.0, -std::sin(heading)};
}

Pose retarget_pose(const WalkCycle& cycle, double phase, const Eigen::Vector2d& root_xz,
                   double heading) {
  const int n = cycle.frame_count();
  const int index = static_cast<int>(std::lround(phase * n)) % n;
  const Pose& source = cycle.gait.frames[index];

  const Eigen::Vector3d root = source.position(JointId::Root);
  const Eigen::Vector3d ground_root(root.x(), 0.0, root.z());
  const double turn = heading - intrinsic_heading(cycle.gait);
  const Eigen::Matrix3d rotation =
      Eigen::AngleAxisd(turn, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Vector3d target(root_xz.x(), 0.0, root_xz.y());

  Pose out;
  out.positions = rotation * (source.positions.colwise() - ground_root);
  out.positions.colwise() += target;
  return out;
}

namespace {

RunningAgent init_agent(const AgentSpec& spec, const GaitEmotionAssociation& gea,
                        const std::map<std::string, Gait>& gaits, const SimConfig& cfg,
                        std::mt19937_64& rng) {
  std::string gait_id;
  if (spec.gait_override) {
    gait_id = *spec.gait_override;
  } else {
    gait_id = select_gait(gea, spec.desired_emotion, rng);
  }
  const auto it = gaits.find(gait_id);
  if (it == gaits.end()) {
    throw Error(ErrorKind::Data,
                "agent '" + spec.id + "': gait '" + gait_id + "' is not loaded");
  }
  const Gait& gait = it->second;
  validate_gait(gait);

  RunningAgent agent;
  agent.spec = spec;
  try {
    agent.cycle = extract_walk_cycle(gait);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Cycle) throw;
    agent.cycle.gait = gait;
    agent.cycle.start_frame = 0;
    agent.cycle.end_frame = gait.frame_count() - 1;
  }
  agent.natural_speed = preferred_speed(gait);
  agent.cycle_seconds = agent.cycle.frame_count() / gait.fps;
  agent.gait_heading = intrinsic_heading(gait);
  agent.neutral = neutral_gaze(agent.cycle);

  agent.nav.position = spec.start;
  agent.nav.radius = cfg.navigation.radius;
  agent.nav.time_horizon = cfg.navigation.time_horizon;
  // The gait's own speed must always be reachable.
  agent.nav.max_speed = std::max(cfg.navigation.max_speed, agent.natural_speed);

  const Eigen::Vector2d to_goal = spec.goal - spec.start;
  agent.heading =
      to_goal.squaredNorm() > kTiny * kTiny ? std::atan2(-to_goal.y(), to_goal.x())
                                            : agent.gait_heading;
  return agent;
}

}  // namespace

void simulate(const Scenario& scenario, const GaitEmotionAssociation& gea,
              const std::map<std::string, Gait>& gaits, const FrameSink& sink) {
  const SimConfig& cfg = scenario.config;
  std::mt19937_64 rng(cfg.seed);

  std::vector<RunningAgent> agents;
  agents.reserve(scenario.agents.size());
  for (const AgentSpec& spec : scenario.agents) {
    agents.push_back(init_agent(spec, gea, gaits, cfg, rng));
  }

  NavWorld world;
  world.dt = cfg.dt;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].nav.id = static_cast<int>(i);
    world.agents.push_back(agents[i].nav);
  }

  const int frame_total = static_cast<int>(std::ceil(cfg.duration / cfg.dt - 1e-9));
  for (int frame = 0; frame < frame_total; ++frame) {
    const double time = (frame + 1) * cfg.dt;

    for (std::size_t i = 0; i < agents.size(); ++i) {
      RunningAgent& agent = agents[i];
      NavAgent& nav = world.agents[i];
      const Eigen::Vector2d to_goal = agent.spec.goal - nav.position;
      // Re-evaluated every frame: an agent nudged out of its goal zone walks
      // back in.
      agent.arrived = to_goal.norm() <= 2.0 * nav.radius;
      nav.preferred_velocity =
          agent.arrived || to_goal.squaredNorm() < kTiny * kTiny
              ? Eigen::Vector2d::Zero()
              : Eigen::Vector2d(to_goal.normalized() * agent.natural_speed);
    }

    world = step(world, cfg.dt);

    FrameRecord record;
    record.time = time;
    record.agents.reserve(agents.size());
    const Eigen::Vector3d user = cfg.user.at(time);

    for (std::size_t i = 0; i < agents.size(); ++i) {
      RunningAgent& agent = agents[i];
      const NavAgent& nav = world.agents[i];
      const double speed = nav.velocity.norm();

      if (!agent.arrived) {
        const double rate = agent.natural_speed > kTiny ? speed / agent.natural_speed : 1.0;
        agent.phase += rate * (cfg.dt / agent.cycle_seconds);
        agent.phase -= std::floor(agent.phase);
      }
      if (speed > kTiny) {
        agent.heading = std::atan2(-nav.velocity.y(), nav.velocity.x());
      }

      Pose pose = retarget_pose(agent.cycle, agent.phase, nav.position, agent.heading);

      GazeContext ctx;
      ctx.agent_head = pose.position(JointId::Neck);
      ctx.user = user;
      ctx.facing = heading_direction(agent.heading);
      const GazeAngles target =
          gaze_target(agent.spec.desired_emotion, ctx, agent.neutral, cfg.gaze);
      agent.gaze = smooth_gaze(agent.gaze, target, cfg.dt, cfg.gaze);
      pose = apply_gaze(pose, agent.gaze);

      AgentFrame out;
      out.id = agent.spec.id;
      out.emotion = agent.spec.desired_emotion;
      out.pose = pose;
      out.velocity = nav.velocity;
      out.heading = agent.heading;
      out.gaze = agent.gaze;
      record.agents.push_back(std::move(out));
    }
    sink(record);
  }
}

std::vector<FrameRecord> simulate_collect(const Scenario& scenario,
                                          const GaitEmotionAssociation& gea,
                                          const std::map<std::string, Gait>& gaits) {
  std::vector<FrameRecord> records;
  simulate(scenario, gea, gaits, [&](const FrameRecord& r) { records.push_back(r); });
  return records;
}

FrameExporter::FrameExporter(const std::filesystem::path& path, ExportFormat format)
    : path_(path), format_(format) {
  if (format_ == ExportFormat::Csv) {
    buffer_ = "time,agent,root_x,root_z,heading,emotion\n";
  }
}

void FrameExporter::write(const FrameRecord& record) {
  if (format_ == ExportFormat::Csv) {
    for (const AgentFrame& agent : record.agents) {
      append_double(buffer_, record.time);
      buffer_ += ',';
      buffer_ += agent.id;
      buffer_ += ',';
      append_double(buffer_, agent.pose.position(JointId::Root).x());
      buffer_ += ',';
      append_double(buffer_, agent.pose.position(JointId::Root).z());
      buffer_ += ',';
      append_double(buffer_, agent.heading);
      buffer_ += ',';
      buffer_ += emotion_name(agent.emotion);
      buffer_ += '\n';
    }
    return;
  }

  json line;
  line["t"] = record.time;
  json agents = json::array();
  for (const AgentFrame& agent : record.agents) {
    json a;
    a["id"] = agent.id;
    a["emotion"] = emotion_name(agent.emotion);
    a["vel"] = {agent.velocity.x(), agent.velocity.y()};
    a["heading"] = agent.heading;
    a["gaze"] = {{"flex", agent.gaze.flex}, {"rot", agent.gaze.rot}};
    json pose = json::array();
    for (int j = 0; j < kJointCount; ++j) {
      pose.push_back(json::array({agent.pose.positions(0, j), agent.pose.positions(1, j),
                                  agent.pose.positions(2, j)}));
    }
    a["pose"] = std::move(pose);
    agents.push_back(std::move(a));
  }
  line["agents"] = std::move(agents);
  buffer_ += line.dump();
  buffer_ += '\n';
}

void FrameExporter::close() {
  if (closed_) return;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write frame export: " + path_.string());
  out << buffer_;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path_.string());
  closed_ = true;
}

void export_frames(const std::vector<FrameRecord>& records, const std::filesystem::path& path,
                   ExportFormat format) {
  FrameExporter exporter(path, format);
  for (const FrameRecord& record : records) exporter.write(record);
  exporter.close();
}

std::vector<FrameRecord> import_frames(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open frame export: " + path.string());
  std::vector<FrameRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse,
                  path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    FrameRecord record;
    try {
      record.time = doc.at("t").get<double>();
      for (const json& a : doc.at("agents")) {
        AgentFrame agent;
        agent.id = a.at("id").get<std::string>();
        const auto e = emotion_from_name(a.at("emotion").get<std::string>());
        if (!e) throw Error(ErrorKind::Schema, path.string() + ": unknown emotion");
        agent.emotion = *e;
        agent.velocity = {a.at("vel").at(0).get<double>(), a.at("vel").at(1).get<double>()};
        agent.heading = a.at("heading").get<double>();
        agent.gaze.flex = a.at("gaze").at("flex").get<double>();
        agent.gaze.rot = a.at("gaze").at("rot").get<double>();
        const json& pose = a.at("pose");
        if (pose.size() != kJointCount) {
          throw Error(ErrorKind::Schema, path.string() + ": pose needs 16 joints");
        }
        for (int j = 0; j < kJointCount; ++j) {
          agent.pose.positions.col(j) =
              Eigen::Vector3d(pose.at(j).at(0).get<double>(), pose.at(j).at(1).get<double>(),
                              pose.at(j).at(2).get<double>());
        }
        record.agents.push_back(std::move(agent));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Schema,
                  path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(record));
  }
  return records;
}

bool operator==(const AgentFrame& a, const AgentFrame& b) {
  return a.id == b.id && a.emotion == b.emotion && a.pose == b.pose &&
         a.velocity == b.velocity && a.heading == b.heading && a.gaze.flex == b.gaze.flex &&
         a.gaze.rot == b.gaze.rot;
}

bool operator==(const FrameRecord& a, const FrameRecord& b) {
  return a.time == b.time && a.agents == b.agents;
}

}  // namespace emogait
