#include "emogait/gea.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "emogait/error.hpp"

namespace emogait {
namespace {

// Plain (not ordered) json keeps object keys sorted, which is exactly the
// stable order the association file wants.
using json = nlohmann::json;

constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {"Happy", "Angry", "Sad",
                                                                       "Neutral"};
constexpr std::array<std::string_view, kEmotionCount> kRatingColumns = {"happy", "angry", "sad",
                                                                        "neutral"};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

CorrelationMatrix pearson(const std::vector<Eigen::Vector4d>& rows) {
  const double n = static_cast<double>(rows.size());
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (const auto& r : rows) mean += r;
  mean /= n;

  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (const auto& r : rows) {
    const Eigen::Vector4d d = r - mean;
    cov += d * d.transpose();
  }

  CorrelationMatrix out;
  for (int i = 0; i < kEmotionCount; ++i) out.defined[i] = cov(i, i) > 0.0;
  for (int i = 0; i < kEmotionCount; ++i) {
    for (int j = 0; j < kEmotionCount; ++j) {
      if (out.defined[i] && out.defined[j]) {
        out.values(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
      } else {
        out.values(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return out;
}

}  // namespace

std::string_view emotion_name(Emotion e) { return kEmotionNames[static_cast<int>(e)]; }

std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (int i = 0; i < kEmotionCount; ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

std::vector<RatingRecord> parse_ratings_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, origin + ": empty ratings file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "gait_id,participant_id,happy,angry,sad,neutral") {
    throw Error(ErrorKind::Schema, origin + ": unexpected ratings header '" + line + "'");
  }

  std::vector<RatingRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 2 + kEmotionCount) {
      throw Error(ErrorKind::Parse,
                  origin + ": line " + std::to_string(line_no) + ": expected 6 cells");
    }
    RatingRecord record;
    record.gait_id = cells[0];
    record.participant_id = cells[1];
    if (record.gait_id.empty() || record.participant_id.empty()) {
      throw Error(ErrorKind::Schema,
                  origin + ": line " + std::to_string(line_no) + ": empty id");
    }
    for (int e = 0; e < kEmotionCount; ++e) {
      const std::string& cell = cells[2 + e];
      int value = 0;
      try {
        std::size_t used = 0;
        value = std::stoi(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, origin + ": line " + std::to_string(line_no) +
                                          ": bad response '" + cell + "'");
      }
      if (value < 1 || value > 5) {
        throw Error(ErrorKind::Schema, origin + ": line " + std::to_string(line_no) +
                                           ": response " + std::to_string(value) +
                                           " outside Likert range [1,5]");
      }
      record.responses[e] = value;
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<RatingRecord> load_ratings_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open ratings file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_ratings_csv(buffer.str(), path.string());
}

ResponseMeans mean_response(const std::vector<RatingRecord>& ratings) {
  if (ratings.empty()) {
    throw Error(ErrorKind::Data, "mean_response needs at least one rating");
  }
  ResponseMeans sum = ResponseMeans::Zero();
  for (const RatingRecord& r : ratings) {
    for (int e = 0; e < kEmotionCount; ++e) sum[e] += r.responses[e];
  }
  return sum / static_cast<double>(ratings.size());
}

std::optional<Emotion> label_gait(const ResponseMeans& means, double theta) {
  std::optional<Emotion> best;
  double best_mean = theta;
  for (Emotion e : all_emotions()) {
    const double m = means[static_cast<int>(e)];
    if (m > best_mean) {  // strict: ties keep the earlier emotion
      best = e;
      best_mean = m;
    }
  }
  return best;
}

GaitEmotionAssociation build_gea(const std::vector<RatingRecord>& ratings, double theta,
                                 const std::set<std::string>* known_gaits) {
  std::map<std::string, std::vector<RatingRecord>> by_gait;
  for (const RatingRecord& r : ratings) {
    if (known_gaits && !known_gaits->count(r.gait_id)) {
      throw Error(ErrorKind::Data, "rating references unknown gait '" + r.gait_id + "'");
    }
    by_gait[r.gait_id].push_back(r);
  }

  GaitEmotionAssociation gea;
  gea.theta = theta;
  for (const auto& [gait_id, records] : by_gait) {
    const ResponseMeans means = mean_response(records);
    gea.mean_responses.emplace(gait_id, means);
    if (const auto label = label_gait(means, theta)) {
      gea.labels.emplace(gait_id, *label);
    } else {
      gea.discarded.insert(gait_id);
    }
  }
  return gea;
}

std::vector<std::string> gea_lookup(const GaitEmotionAssociation& gea, Emotion e) {
  std::vector<std::string> out;
  for (const auto& [gait_id, label] : gea.labels) {
    if (label == e) out.push_back(gait_id);
  }
  return out;
}

CorrelationMatrix emotion_correlation(const std::vector<RatingRecord>& ratings,
                                      bool per_gait_means) {
  std::vector<Eigen::Vector4d> rows;
  if (per_gait_means) {
    const GaitEmotionAssociation gea = build_gea(ratings);
    rows.reserve(gea.mean_responses.size());
    for (const auto& [gait_id, means] : gea.mean_responses) rows.push_back(means);
  } else {
    rows.reserve(ratings.size());
    for (const RatingRecord& r : ratings) {
      rows.emplace_back(r.responses[0], r.responses[1], r.responses[2], r.responses[3]);
    }
  }
  if (rows.size() < 2) {
    throw Error(ErrorKind::Data, "correlation needs at least 2 rated gaits");
  }
  return pearson(rows);
}

CorrelationMatrix correlation_of_means(const std::vector<ResponseMeans>& rows) {
  if (rows.size() < 2) {
    throw Error(ErrorKind::Data, "correlation needs at least 2 rated gaits");
  }
  return pearson(rows);
}

Eigen::Vector4d emotion_distribution(const GaitEmotionAssociation& gea) {
  if (gea.labels.empty()) {
    throw Error(ErrorKind::Data, "emotion distribution needs at least one labeled gait");
  }
  Eigen::Vector4d counts = Eigen::Vector4d::Zero();
  for (const auto& [gait_id, label] : gea.labels) counts[static_cast<int>(label)] += 1.0;
  return counts / static_cast<double>(gea.labels.size());
}

std::string serialize_association(const GaitEmotionAssociation& gea) {
  json doc;
  doc["theta"] = gea.theta;
  json gaits = json::object();
  for (const auto& [gait_id, means] : gea.mean_responses) {
    json entry;
    if (const auto it = gea.labels.find(gait_id); it != gea.labels.end()) {
      entry["label"] = emotion_name(it->second);
    } else {
      entry["label"] = nullptr;
    }
    json m = json::object();
    for (Emotion e : all_emotions()) {
      m[std::string(kRatingColumns[static_cast<int>(e)])] = means[static_cast<int>(e)];
    }
    entry["means"] = std::move(m);
    gaits[gait_id] = std::move(entry);
  }
  doc["gaits"] = std::move(gaits);
  return doc.dump(2) + "\n";
}

GaitEmotionAssociation parse_association(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": " + e.what());
  }
  GaitEmotionAssociation gea;
  try {
    gea.theta = doc.at("theta").get<double>();
    for (const auto& [gait_id, entry] : doc.at("gaits").items()) {
      ResponseMeans means;
      for (Emotion e : all_emotions()) {
        means[static_cast<int>(e)] =
            entry.at("means").at(std::string(kRatingColumns[static_cast<int>(e)])).get<double>();
      }
      gea.mean_responses.emplace(gait_id, means);
      const json& label = entry.at("label");
      if (label.is_null()) {
        gea.discarded.insert(gait_id);
      } else {
        const auto emotion = emotion_from_name(label.get<std::string>());
        if (!emotion) {
          throw Error(ErrorKind::Schema,
                      origin + ": unknown emotion label '" + label.get<std::string>() + "'");
        }
        gea.labels.emplace(gait_id, *emotion);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, origin + ": " + e.what());
  }
  return gea;
}

GaitEmotionAssociation load_association(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open association file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_association(buffer.str(), path.string());
}

void save_association(const GaitEmotionAssociation& gea, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write association file: " + path.string());
  out << serialize_association(gea);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace emogait
