#include "emogait/bvh.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "emogait/error.hpp"

namespace emogait {
namespace {

enum class Channel { Xpos, Ypos, Zpos, Xrot, Yrot, Zrot };

bool is_position(Channel c) {
  return c == Channel::Xpos || c == Channel::Ypos || c == Channel::Zpos;
}

struct BvhNode {
  std::string name;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::vector<Channel> channels;
  int channel_base = 0;  // index of this node's first value in a motion frame
  int parent = -1;
  bool end_site = false;
};

// Whitespace tokenizer that tracks line numbers for error reporting.
class Tokenizer {
 public:
  Tokenizer(const std::string& text, std::string origin)
      : text_(text), origin_(std::move(origin)) {}

  bool next(std::string& token) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    token = text_.substr(start, pos_ - start);
    return true;
  }

  std::string expect_token(const std::string& what) {
    std::string token;
    if (!next(token)) fail("unexpected end of file, expected " + what);
    return token;
  }

  void expect_keyword(const std::string& keyword) {
    const std::string token = expect_token("'" + keyword + "'");
    if (token != keyword) fail("expected '" + keyword + "', got '" + token + "'");
  }

  double expect_number(const std::string& what) {
    const std::string token = expect_token(what);
    try {
      std::size_t used = 0;
      const double value = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return value;
    } catch (const std::exception&) {
      fail("expected " + what + ", got '" + token + "'");
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorKind::Parse,
                origin_ + ": line " + std::to_string(line_) + ": " + message);
  }

  int line() const { return line_; }

 private:
  const std::string& text_;
  std::string origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

Channel parse_channel(Tokenizer& tok, const std::string& token) {
  if (token == "Xposition") return Channel::Xpos;
  if (token == "Yposition") return Channel::Ypos;
  if (token == "Zposition") return Channel::Zpos;
  if (token == "Xrotation") return Channel::Xrot;
  if (token == "Yrotation") return Channel::Yrot;
  if (token == "Zrotation") return Channel::Zrot;
  tok.fail("unsupported channel token '" + token + "'");
}

// Parses one joint block (after ROOT/JOINT <name> has been consumed);
// appends the node and its children to `nodes` depth-first.
void parse_joint_block(Tokenizer& tok, std::vector<BvhNode>& nodes, int parent,
                       std::string name, int& channel_count) {
  BvhNode node;
  node.name = std::move(name);
  node.parent = parent;
  tok.expect_keyword("{");
  tok.expect_keyword("OFFSET");
  node.offset.x() = tok.expect_number("OFFSET x");
  node.offset.y() = tok.expect_number("OFFSET y");
  node.offset.z() = tok.expect_number("OFFSET z");

  std::string token = tok.expect_token("CHANNELS");
  if (token != "CHANNELS") tok.fail("expected CHANNELS for joint '" + node.name + "'");
  const double count = tok.expect_number("channel count");
  if (count != 3.0 && count != 6.0) {
    tok.fail("CHANNELS must be 3 or 6, got " + std::to_string(static_cast<int>(count)));
  }
  node.channel_base = channel_count;
  for (int i = 0; i < static_cast<int>(count); ++i) {
    const Channel c = parse_channel(tok, tok.expect_token("channel token"));
    if (is_position(c) && parent != -1) {
      tok.fail("position channel on non-root joint '" + node.name + "'");
    }
    node.channels.push_back(c);
  }
  channel_count += static_cast<int>(count);
  token = tok.expect_token("JOINT, End, or '}'");

  const int index = static_cast<int>(nodes.size());
  nodes.push_back(std::move(node));

  while (true) {
    if (token == "}") return;
    if (token == "JOINT") {
      std::string child = tok.expect_token("joint name");
      parse_joint_block(tok, nodes, index, std::move(child), channel_count);
    } else if (token == "End") {
      tok.expect_keyword("Site");
      tok.expect_keyword("{");
      tok.expect_keyword("OFFSET");
      BvhNode end;
      end.name = nodes[index].name + "_End";
      end.parent = index;
      end.end_site = true;
      end.offset.x() = tok.expect_number("OFFSET x");
      end.offset.y() = tok.expect_number("OFFSET y");
      end.offset.z() = tok.expect_number("OFFSET z");
      tok.expect_keyword("}");
      nodes.push_back(std::move(end));
    } else {
      tok.fail("expected JOINT, End, or '}', got '" + token + "'");
    }
    token = tok.expect_token("JOINT, End, or '}'");
  }
}

Eigen::Matrix3d axis_rotation(Channel c, double degrees) {
  const double radians = degrees * EIGEN_PI / 180.0;
  switch (c) {
    case Channel::Xrot:
      return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitX()).toRotationMatrix();
    case Channel::Yrot:
      return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitY()).toRotationMatrix();
    default:
      return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  }
}

}  // namespace

JointMap parse_joint_map(const std::string& text, const std::string& origin) {
  JointMap map;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string mocap, canonical;
    if (!(fields >> mocap)) continue;  // blank line
    if (mocap.front() == '#') continue;
    if (!(fields >> canonical)) {
      throw Error(ErrorKind::Parse, origin + ": line " + std::to_string(line_no) +
                                        ": expected two columns");
    }
    const auto id = joint_from_name(canonical);
    if (!id) {
      throw Error(ErrorKind::Mapping, origin + ": line " + std::to_string(line_no) +
                                          ": unknown canonical joint '" + canonical + "'");
    }
    if (map.count(mocap)) {
      throw Error(ErrorKind::Mapping, origin + ": duplicate mocap joint '" + mocap + "'");
    }
    map.emplace(mocap, *id);
  }
  // Every canonical joint must be covered exactly once.
  std::array<int, kJointCount> hits{};
  for (const auto& [mocap, id] : map) hits[static_cast<int>(id)]++;
  for (int j = 0; j < kJointCount; ++j) {
    if (hits[j] == 0) {
      throw Error(ErrorKind::Mapping, origin + ": canonical joint '" +
                                          std::string(joint_name(static_cast<JointId>(j))) +
                                          "' is not mapped");
    }
    if (hits[j] > 1) {
      throw Error(ErrorKind::Mapping, origin + ": canonical joint '" +
                                          std::string(joint_name(static_cast<JointId>(j))) +
                                          "' is mapped more than once");
    }
  }
  return map;
}

JointMap load_joint_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open joint map: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_joint_map(buffer.str(), path.string());
}

Gait import_bvh_text(const std::string& text, const JointMap& joint_map,
                     const std::string& gait_id, double scale) {
  Tokenizer tok(text, gait_id);
  tok.expect_keyword("HIERARCHY");
  tok.expect_keyword("ROOT");
  std::string root_name = tok.expect_token("root joint name");

  std::vector<BvhNode> nodes;
  int channel_count = 0;
  parse_joint_block(tok, nodes, -1, std::move(root_name), channel_count);

  tok.expect_keyword("MOTION");
  tok.expect_keyword("Frames:");
  const int frame_total = static_cast<int>(tok.expect_number("frame count"));
  tok.expect_keyword("Frame");
  tok.expect_keyword("Time:");
  const double frame_time = tok.expect_number("frame time");
  if (!(frame_time > 0.0)) tok.fail("Frame Time must be positive");

  // Resolve the canonical column of each node up front.
  std::vector<int> canonical_col(nodes.size(), -1);
  std::array<bool, kJointCount> covered{};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].end_site) continue;
    const auto it = joint_map.find(nodes[i].name);
    if (it == joint_map.end()) continue;
    canonical_col[i] = static_cast<int>(it->second);
    covered[canonical_col[i]] = true;
  }
  for (int j = 0; j < kJointCount; ++j) {
    if (!covered[j]) {
      throw Error(ErrorKind::Mapping,
                  gait_id + ": mapped source joint for canonical '" +
                      std::string(joint_name(static_cast<JointId>(j))) +
                      "' does not appear in the BVH hierarchy");
    }
  }

  Gait gait;
  gait.id = gait_id;
  gait.fps = 1.0 / frame_time;
  gait.frames.reserve(frame_total);

  std::vector<double> values(channel_count);
  std::vector<Eigen::Isometry3d> world(nodes.size());
  for (int f = 0; f < frame_total; ++f) {
    for (int c = 0; c < channel_count; ++c) {
      values[c] = tok.expect_number("motion value (frame " + std::to_string(f) + ")");
    }
    Pose pose;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const BvhNode& node = nodes[i];
      Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
      local.translate(node.offset * scale);
      int slot = node.channel_base;
      for (Channel c : node.channels) {
        const double v = values[slot++];
        switch (c) {
          case Channel::Xpos: local.translate(Eigen::Vector3d(v * scale, 0, 0)); break;
          case Channel::Ypos: local.translate(Eigen::Vector3d(0, v * scale, 0)); break;
          case Channel::Zpos: local.translate(Eigen::Vector3d(0, 0, v * scale)); break;
          default: local.rotate(axis_rotation(c, v)); break;
        }
      }
      world[i] = node.parent == -1 ? local : world[node.parent] * local;
      if (canonical_col[i] != -1) {
        pose.positions.col(canonical_col[i]) = world[i].translation();
      }
    }
    gait.frames.push_back(pose);
  }

  std::string trailing;
  if (tok.next(trailing)) tok.fail("trailing content after motion data");

  validate_gait(gait);
  return gait;
}

Gait import_bvh(const std::filesystem::path& path, const JointMap& joint_map, double scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open BVH file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return import_bvh_text(buffer.str(), joint_map, path.stem().string(), scale);
}

}  // namespace emogait
