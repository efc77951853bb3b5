#include "emogait/features.hpp"

#include <Eigen/Geometry>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emogait/error.hpp"

namespace emogait {
namespace {

// Angle at `apex` subtended by a and b, in [0, pi]. Zero-length segments
// count as degenerate and yield 0.
double subtended_angle(const Eigen::Vector3d& apex, const Eigen::Vector3d& a,
                       const Eigen::Vector3d& b, bool& degenerate) {
  const Eigen::Vector3d u = a - apex;
  const Eigen::Vector3d v = b - apex;
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

// Angle between a fixed direction and a segment endpoint-apex, degenerate-safe.
double direction_angle(const Eigen::Vector3d& dir, const Eigen::Vector3d& apex,
                       const Eigen::Vector3d& b, bool& degenerate) {
  const Eigen::Vector3d v = b - apex;
  if (v.norm() == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return std::atan2(dir.cross(v).norm(), dir.dot(v));
}

// Shortest decimal that parses back to the same double.
void append_double(std::string& out, double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  out.append(buffer, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Eigen::Matrix<double, kPostureFeatureCount, 1> PostureFeatures::flatten() const {
  Eigen::Matrix<double, kPostureFeatureCount, 1> out;
  out << bounding_volume, area_hands_neck, area_feet_root, root_distances, angles, stride_length;
  return out;
}

Eigen::Matrix<double, kMovementFeatureCount, 1> MovementFeatures::flatten() const {
  Eigen::Matrix<double, kMovementFeatureCount, 1> out;
  int k = 0;
  for (int j = 0; j < 5; ++j) {
    out[k++] = derivatives(0, j);
    out[k++] = derivatives(1, j);
    out[k++] = derivatives(2, j);
  }
  out[k] = cycle_time;
  return out;
}

FeatureVec GaitFeatureVector::flatten() const {
  FeatureVec out;
  out << posture.flatten(), movement.flatten();
  return out;
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> n;
    int k = 0;
    n[k++] = "bbox_volume";
    n[k++] = "area_hands_neck";
    n[k++] = "area_feet_root";
    for (const char* joint : {"lhand", "rhand", "lfoot", "rfoot"}) {
      n[k++] = std::string("dist_") + joint + "_root";
    }
    n[k++] = "angle_shoulders_at_neck";
    n[k++] = "angle_at_lshoulder";
    n[k++] = "angle_at_rshoulder";
    n[k++] = "angle_vertical_spine_at_neck";
    n[k++] = "angle_head_spine_at_neck";
    n[k++] = "stride_length";
    for (const char* joint : {"lhand", "rhand", "lfoot", "rfoot", "head"}) {
      n[k++] = std::string("speed_") + joint;
      n[k++] = std::string("accel_") + joint;
      n[k++] = std::string("jerk_") + joint;
    }
    n[k++] = "cycle_time";
    return n;
  }();
  return names;
}

double stride_length(const WalkCycle& cycle) {
  double best = 0.0;
  for (const Pose& pose : cycle.gait.frames) {
    const double d = (pose.position(JointId::LFoot) - pose.position(JointId::RFoot)).norm();
    best = std::max(best, d);
  }
  return best;
}

PostureFeatures posture_features(const WalkCycle& cycle) {
  const auto& frames = cycle.gait.frames;
  const double n = static_cast<double>(frames.size());
  PostureFeatures out;

  for (const Pose& pose : frames) {
    const Eigen::Vector3d lo = pose.positions.rowwise().minCoeff();
    const Eigen::Vector3d hi = pose.positions.rowwise().maxCoeff();
    const Eigen::Vector3d extent = hi - lo;
    out.bounding_volume += extent.x() * extent.y() * extent.z();

    const Eigen::Vector3d neck = pose.position(JointId::Neck);
    const Eigen::Vector3d root = pose.position(JointId::Root);
    const Eigen::Vector3d lhand = pose.position(JointId::LHand);
    const Eigen::Vector3d rhand = pose.position(JointId::RHand);
    const Eigen::Vector3d lfoot = pose.position(JointId::LFoot);
    const Eigen::Vector3d rfoot = pose.position(JointId::RFoot);

    out.area_hands_neck += 0.5 * (lhand - neck).cross(rhand - neck).norm();
    out.area_feet_root += 0.5 * (lfoot - root).cross(rfoot - root).norm();

    out.root_distances[0] += (lhand - root).norm();
    out.root_distances[1] += (rhand - root).norm();
    out.root_distances[2] += (lfoot - root).norm();
    out.root_distances[3] += (rfoot - root).norm();

    const Eigen::Vector3d lshoulder = pose.position(JointId::LShoulder);
    const Eigen::Vector3d rshoulder = pose.position(JointId::RShoulder);
    const Eigen::Vector3d spine = pose.position(JointId::Spine);
    const Eigen::Vector3d head = pose.position(JointId::Head);

    bool& flag = out.degenerate_angles;
    out.angles[0] += subtended_angle(neck, lshoulder, rshoulder, flag);
    out.angles[1] += subtended_angle(lshoulder, neck, rshoulder, flag);
    out.angles[2] += subtended_angle(rshoulder, neck, lshoulder, flag);
    out.angles[3] += direction_angle(Eigen::Vector3d::UnitY(), neck, spine, flag);
    out.angles[4] += subtended_angle(neck, head, spine, flag);
  }

  out.bounding_volume /= n;
  out.area_hands_neck /= n;
  out.area_feet_root /= n;
  out.root_distances /= n;
  out.angles /= n;
  out.stride_length = stride_length(cycle);
  return out;
}

MovementFeatures movement_features(const WalkCycle& cycle) {
  const auto& frames = cycle.gait.frames;
  const int n = static_cast<int>(frames.size());
  if (n < 4) {
    throw Error(ErrorKind::Data, "gait '" + cycle.gait.id + "': cycle has " + std::to_string(n) +
                                     " frames, movement features need at least 4");
  }
  const double fps = cycle.gait.fps;
  MovementFeatures out;
  out.cycle_time = n / fps;

  for (int j = 0; j < 5; ++j) {
    const int col = static_cast<int>(kMovementJoints[j]);
    // Forward differences scaled to per-second units; each derivative order
    // loses one trailing frame.
    std::vector<Eigen::Vector3d> vel(n - 1), acc(std::max(0, n - 2)), jrk(std::max(0, n - 3));
    for (int t = 0; t + 1 < n; ++t) {
      vel[t] = (frames[t + 1].positions.col(col) - frames[t].positions.col(col)) * fps;
    }
    for (int t = 0; t + 2 < n; ++t) acc[t] = (vel[t + 1] - vel[t]) * fps;
    for (int t = 0; t + 3 < n; ++t) jrk[t] = (acc[t + 1] - acc[t]) * fps;

    auto mean_norm = [](const std::vector<Eigen::Vector3d>& values) {
      double sum = 0.0;
      for (const auto& v : values) sum += v.norm();
      return sum / static_cast<double>(values.size());
    };
    out.derivatives(0, j) = mean_norm(vel);
    out.derivatives(1, j) = mean_norm(acc);
    out.derivatives(2, j) = mean_norm(jrk);
  }
  return out;
}

GaitFeatureVector extract_features(const Gait& gait) {
  GaitFeatureVector out;
  WalkCycle cycle;
  try {
    cycle = extract_walk_cycle(gait);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Cycle) throw;
    cycle.gait = gait;
    cycle.start_frame = 0;
    cycle.end_frame = gait.frame_count() - 1;
    out.whole_gait_fallback = true;
  }
  out.posture = posture_features(cycle);
  out.movement = movement_features(cycle);
  return out;
}

NormalizationBounds fit_normalization(const std::vector<FeatureVec>& corpus) {
  if (corpus.empty()) {
    throw Error(ErrorKind::Data, "cannot fit normalization bounds on an empty corpus");
  }
  NormalizationBounds b;
  b.min = corpus.front();
  b.max = corpus.front();
  for (const FeatureVec& v : corpus) {
    b.min = b.min.cwiseMin(v);
    b.max = b.max.cwiseMax(v);
  }
  return b;
}

FeatureVec normalize(const FeatureVec& v, const NormalizationBounds& b) {
  FeatureVec out;
  for (int i = 0; i < kFeatureCount; ++i) {
    const double span = b.max[i] - b.min[i];
    if (span == 0.0) {
      out[i] = 0.0;
      continue;
    }
    out[i] = std::clamp(-1.0 + 2.0 * (v[i] - b.min[i]) / span, -1.0, 1.0);
  }
  return out;
}

FeatureVec denormalize(const FeatureVec& v, const NormalizationBounds& b) {
  FeatureVec out;
  for (int i = 0; i < kFeatureCount; ++i) {
    const double span = b.max[i] - b.min[i];
    out[i] = b.min[i] + (v[i] + 1.0) * 0.5 * span;
  }
  return out;
}

std::string write_features_csv(const std::vector<FeatureRow>& rows) {
  const bool labeled = !rows.empty() && rows.front().label.has_value();
  std::string out = "gait_id";
  for (const std::string& name : feature_names()) {
    out += ',';
    out += name;
  }
  if (labeled) out += ",label";
  out += '\n';
  for (const FeatureRow& row : rows) {
    out += row.gait_id;
    for (int i = 0; i < kFeatureCount; ++i) {
      out += ',';
      append_double(out, row.features[i]);
    }
    if (labeled) {
      out += ',';
      out += row.label.value_or("");
    }
    out += '\n';
  }
  return out;
}

std::vector<FeatureRow> parse_features_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Parse, origin + ": empty features file");
  }
  const auto header = split_csv_line(line);
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t expected = 1 + kFeatureCount + (labeled ? 1 : 0);
  if (header.size() != expected || header[0] != "gait_id") {
    throw Error(ErrorKind::Schema, origin + ": unexpected features header");
  }
  for (int i = 0; i < kFeatureCount; ++i) {
    if (header[1 + i] != feature_names()[i]) {
      throw Error(ErrorKind::Schema, origin + ": feature column " + std::to_string(i + 1) +
                                         " is '" + header[1 + i] + "', expected '" +
                                         feature_names()[i] + "'");
    }
  }

  std::vector<FeatureRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected) {
      throw Error(ErrorKind::Parse, origin + ": line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(expected) + " cells, got " +
                                        std::to_string(cells.size()));
    }
    FeatureRow row;
    row.gait_id = cells[0];
    for (int i = 0; i < kFeatureCount; ++i) {
      const std::string& cell = cells[1 + i];
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end) {
        throw Error(ErrorKind::Parse, origin + ": line " + std::to_string(line_no) +
                                          ": bad number '" + cell + "'");
      }
      row.features[i] = value;
    }
    if (labeled) row.label = cells.back();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FeatureRow> load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open features file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_features_csv(buffer.str(), path.string());
}

void save_features_csv(const std::vector<FeatureRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write features file: " + path.string());
  out << write_features_csv(rows);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace emogait
