#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace emogait {

inline constexpr int kEmotionCount = 4;

enum class Emotion : int { Happy = 0, Angry, Sad, Neutral };

std::string_view emotion_name(Emotion e);
std::optional<Emotion> emotion_from_name(std::string_view name);
constexpr std::array<Emotion, kEmotionCount> all_emotions() {
  return {Emotion::Happy, Emotion::Angry, Emotion::Sad, Emotion::Neutral};
}

// Per-emotion mean participant response, indexed by Emotion order.
using ResponseMeans = Eigen::Vector4d;

// One participant's Likert answers (1..5) for one gait.
struct RatingRecord {
  std::string gait_id;
  std::string participant_id;
  std::array<int, kEmotionCount> responses{};
};

// CSV with header `gait_id,participant_id,happy,angry,sad,neutral`.
std::vector<RatingRecord> parse_ratings_csv(const std::string& text,
                                            const std::string& origin = "<string>");
std::vector<RatingRecord> load_ratings_csv(const std::filesystem::path& path);

inline constexpr double kDefaultTheta = 3.5;

struct GaitEmotionAssociation {
  double theta = kDefaultTheta;
  std::map<std::string, Emotion> labels;           // labeled gaits only
  std::map<std::string, ResponseMeans> mean_responses;  // every rated gait
  std::set<std::string> discarded;                 // rated but not expressive

  int rated_count() const { return static_cast<int>(mean_responses.size()); }
};

// Arithmetic mean per emotion over the given records (all for one gait).
ResponseMeans mean_response(const std::vector<RatingRecord>& ratings);

// Label = argmax among emotions whose mean exceeds theta; ties broken by
// Emotion order; nullopt when nothing exceeds theta (gait discarded).
std::optional<Emotion> label_gait(const ResponseMeans& means, double theta);

// `known_gaits`, when given, makes records referencing other ids an error.
GaitEmotionAssociation build_gea(const std::vector<RatingRecord>& ratings,
                                 double theta = kDefaultTheta,
                                 const std::set<std::string>* known_gaits = nullptr);

// Ids labeled with the given emotion, sorted.
std::vector<std::string> gea_lookup(const GaitEmotionAssociation& gea, Emotion e);

struct CorrelationMatrix {
  Eigen::Matrix4d values = Eigen::Matrix4d::Zero();
  std::array<bool, kEmotionCount> defined{};  // false when a column has no variance
};

// Pearson correlation between the four emotion response columns. By default
// the columns are per-gait mean responses; with per_gait_means = false the
// raw per-participant rows are used instead.
CorrelationMatrix emotion_correlation(const std::vector<RatingRecord>& ratings,
                                      bool per_gait_means = true);
CorrelationMatrix correlation_of_means(const std::vector<ResponseMeans>& rows);

// Fraction of labeled gaits per emotion; sums to 1.
Eigen::Vector4d emotion_distribution(const GaitEmotionAssociation& gea);

// Association file: JSON with sorted gait keys for diffable output.
std::string serialize_association(const GaitEmotionAssociation& gea);
GaitEmotionAssociation parse_association(const std::string& text,
                                         const std::string& origin = "<string>");
GaitEmotionAssociation load_association(const std::filesystem::path& path);
void save_association(const GaitEmotionAssociation& gea, const std::filesystem::path& path);

}  // namespace emogait
