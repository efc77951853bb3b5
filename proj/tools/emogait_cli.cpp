// Command-line front end for the gait/gaze emotion pipeline: ingestion,
// feature extraction, association building, classifier training and
// evaluation, and the multi-agent simulator.

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "emogait/bvh.hpp"
#include "emogait/error.hpp"
#include "emogait/features.hpp"
#include "emogait/gea.hpp"
#include "emogait/navigation.hpp"
#include "emogait/simulator.hpp"
#include "emogait/skeleton.hpp"
#include "emogait/svm.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string format_double(double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

// Config file: JSON object with one section per subcommand; section values
// act as flag defaults, explicit flags win.
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw emogait::Error(emogait::ErrorKind::Io, "cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw emogait::Error(emogait::ErrorKind::Parse, path + ": " + e.what());
  }
}

struct CommonOptions {
  std::string config_path;

  json section(const std::string& command) const {
    const json config = load_config(config_path);
    return config.contains(command) ? config.at(command) : json::object();
  }
};

template <typename T>
void apply_default(const CLI::Option* option, const json& section, const char* key, T& value) {
  if (option->count() > 0) return;  // explicit flag wins
  if (section.contains(key)) value = section.at(key).get<T>();
}

std::vector<emogait::FeatureRow> rows_from_gaits(const std::map<std::string, emogait::Gait>& gaits,
                                             const emogait::GaitEmotionAssociation* gea) {
  std::vector<emogait::FeatureRow> rows;
  for (const auto& [id, gait] : gaits) {
    emogait::FeatureRow row;
    row.gait_id = id;
    row.features = emogait::extract_features(gait).flatten();
    if (gea) {
      const auto it = gea->labels.find(id);
      row.label = it != gea->labels.end() ? std::string(emogait::emotion_name(it->second)) : "";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Labeled rows -> matrix + emotion labels; rows without a label are skipped.
std::pair<Eigen::MatrixXd, std::vector<emogait::Emotion>> to_corpus(
    const std::vector<emogait::FeatureRow>& rows) {
  std::vector<const emogait::FeatureRow*> labeled;
  for (const auto& row : rows) {
    if (row.label && !row.label->empty()) labeled.push_back(&row);
  }
  Eigen::MatrixXd X(labeled.size(), emogait::kFeatureCount);
  std::vector<emogait::Emotion> y(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    X.row(static_cast<int>(i)) = labeled[i]->features.transpose();
    const auto e = emogait::emotion_from_name(*labeled[i]->label);
    if (!e) {
      throw emogait::Error(emogait::ErrorKind::Data,
                       "gait '" + labeled[i]->gait_id + "': unknown label '" + *labeled[i]->label +
                           "'");
    }
    y[i] = *e;
  }
  return {std::move(X), std::move(y)};
}

int run_ingest(const std::string& input, const std::string& output,
               const std::string& joint_map_path, double scale, const std::string& id) {
  emogait::Gait gait;
  const std::filesystem::path in_path(input);
  if (in_path.extension() == ".bvh") {
    if (joint_map_path.empty()) {
      throw emogait::Error(emogait::ErrorKind::Usage, "--joint-map is required for BVH input");
    }
    gait = emogait::import_bvh(in_path, emogait::load_joint_map(joint_map_path), scale);
  } else {
    gait = emogait::load_gait(in_path);
  }
  if (!id.empty()) gait.id = id;
  emogait::save_gait(gait, output);
  std::cerr << "ingested '" << gait.id << "': " << gait.frame_count() << " frames at "
            << gait.fps << " fps\n";
  return kExitOk;
}

int run_features(const std::string& gaits_dir, const std::string& output,
                 const std::string& gea_path) {
  const auto gaits = emogait::load_gait_directory(gaits_dir);
  std::optional<emogait::GaitEmotionAssociation> gea;
  if (!gea_path.empty()) gea = emogait::load_association(gea_path);
  const auto rows = rows_from_gaits(gaits, gea ? &*gea : nullptr);
  emogait::save_features_csv(rows, output);
  std::cerr << "wrote " << rows.size() << " feature rows to " << output << "\n";
  return kExitOk;
}

int run_build_gea(const std::string& ratings_path, double theta, const std::string& output,
                  const std::string& gaits_dir) {
  const auto ratings = emogait::load_ratings_csv(ratings_path);
  std::optional<std::set<std::string>> known;
  if (!gaits_dir.empty()) {
    known.emplace();
    for (const auto& [id, gait] : emogait::load_gait_directory(gaits_dir)) known->insert(id);
  }
  const auto gea = emogait::build_gea(ratings, theta, known ? &*known : nullptr);
  if (!output.empty()) emogait::save_association(gea, output);

  const Eigen::Vector4d distribution = emogait::emotion_distribution(gea);
  std::cout << "emotion,percent\n";
  for (emogait::Emotion e : emogait::all_emotions()) {
    std::cout << emogait::emotion_name(e) << ','
              << format_double(distribution[static_cast<int>(e)] * 100.0) << "\n";
  }
  std::cerr << "labeled " << gea.labels.size() << " gaits, discarded " << gea.discarded.size()
            << " (theta " << theta << ")\n";
  return kExitOk;
}

int run_train(const std::string& features_path, const std::string& output, double C, double gamma,
              double tolerance, std::uint64_t seed) {
  const auto rows = emogait::load_features_csv(features_path);
  auto [X, y] = to_corpus(rows);
  if (X.rows() == 0) {
    throw emogait::Error(emogait::ErrorKind::Data, features_path + ": no labeled rows");
  }

  std::vector<emogait::FeatureVec> raw(X.rows());
  for (int i = 0; i < X.rows(); ++i) raw[i] = X.row(i).transpose();
  const emogait::NormalizationBounds bounds = emogait::fit_normalization(raw);
  for (int i = 0; i < X.rows(); ++i) {
    X.row(i) = emogait::normalize(X.row(i).transpose(), bounds).transpose();
  }

  emogait::TrainingConfig config;
  config.C = C;
  config.gamma = gamma;
  config.tolerance = tolerance;
  config.seed = seed;
  const emogait::SvmModel model = emogait::train(X, y, config, bounds);
  emogait::save_model(model, output);
  std::cerr << "trained on " << X.rows() << " gaits, " << model.classes.size()
            << " classes -> " << output << "\n";
  return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& gait_path) {
  const emogait::SvmModel model = emogait::load_model(model_path);
  const emogait::Gait gait = emogait::load_gait(gait_path);
  const emogait::FeatureVec raw = emogait::extract_features(gait).flatten();
  const emogait::FeatureVec x = emogait::normalize(raw, model.bounds);
  const emogait::Prediction prediction = emogait::predict(model, x);

  std::cout << "predicted," << emogait::emotion_name(prediction.emotion) << "\n";
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    std::cout << "score," << emogait::emotion_name(model.classes[c]) << ','
              << format_double(prediction.scores[static_cast<int>(c)]) << "\n";
  }
  return kExitOk;
}

int run_crossval(const std::string& features_path, int k, double C, double gamma,
                 double tolerance, std::uint64_t seed, const std::string& output) {
  const auto rows = emogait::load_features_csv(features_path);
  const auto [X, y] = to_corpus(rows);
  emogait::TrainingConfig config;
  config.C = C;
  config.gamma = gamma;
  config.tolerance = tolerance;
  config.seed = seed;
  const emogait::CrossValidationResult result = emogait::cross_validate(X, y, k, config);
  if (!output.empty()) {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw emogait::Error(emogait::ErrorKind::Io, "cannot write report: " + output);
    out << emogait::write_confusion_csv(result.confusion, result.accuracy);
  }
  std::cout << "accuracy," << format_double(result.accuracy) << "\n";
  return kExitOk;
}

int run_simulate(const std::string& scenario_path, const std::string& gaits_dir,
                 const std::string& gea_path, const std::string& output,
                 const std::string& csv_output, const std::string& telemetry_output,
                 const CLI::Option* seed_opt, std::uint64_t seed,
                 const CLI::Option* duration_opt, double duration) {
  emogait::Scenario scenario = emogait::load_scenario(scenario_path);
  if (seed_opt->count() > 0) scenario.config.seed = seed;
  if (duration_opt->count() > 0) scenario.config.duration = duration;

  const auto gaits = emogait::load_gait_directory(gaits_dir);
  const auto gea = emogait::load_association(gea_path);

  std::optional<emogait::FrameExporter> jsonl;
  std::optional<emogait::FrameExporter> csv;
  if (!output.empty()) jsonl.emplace(output, emogait::ExportFormat::JsonLines);
  if (!csv_output.empty()) csv.emplace(csv_output, emogait::ExportFormat::Csv);
  std::string telemetry = "time,min_separation\n";
  const double radius = scenario.config.navigation.radius;

  int frames = 0;
  emogait::simulate(scenario, gea, gaits, [&](const emogait::FrameRecord& record) {
    ++frames;
    if (jsonl) jsonl->write(record);
    if (csv) csv->write(record);
    if (!telemetry_output.empty() && record.agents.size() > 1) {
      double min_gap = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < record.agents.size(); ++a) {
        const Eigen::Vector3d pa = record.agents[a].pose.position(emogait::JointId::Root);
        for (std::size_t b = a + 1; b < record.agents.size(); ++b) {
          const Eigen::Vector3d pb = record.agents[b].pose.position(emogait::JointId::Root);
          min_gap = std::min(min_gap,
                             std::hypot(pa.x() - pb.x(), pa.z() - pb.z()) - 2.0 * radius);
        }
      }
      telemetry += format_double(record.time);
      telemetry += ',';
      telemetry += format_double(min_gap);
      telemetry += '\n';
    }
  });
  if (jsonl) jsonl->close();
  if (csv) csv->close();
  if (!telemetry_output.empty()) {
    std::ofstream out(telemetry_output, std::ios::binary);
    if (!out) throw emogait::Error(emogait::ErrorKind::Io, "cannot write telemetry: " + telemetry_output);
    out << telemetry;
  }
  std::cerr << "simulated " << frames << " frames for " << scenario.agents.size()
            << " agents\n";
  return kExitOk;
}

int run_stats(const std::string& gea_path, const std::string& ratings_path, bool raw_rows) {
  emogait::CorrelationMatrix correlation;
  std::optional<emogait::GaitEmotionAssociation> gea;
  if (!ratings_path.empty()) {
    const auto ratings = emogait::load_ratings_csv(ratings_path);
    correlation = emogait::emotion_correlation(ratings, !raw_rows);
    gea = emogait::build_gea(ratings);
  } else if (!gea_path.empty()) {
    gea = emogait::load_association(gea_path);
    std::vector<emogait::ResponseMeans> means;
    for (const auto& [id, m] : gea->mean_responses) means.push_back(m);
    correlation = emogait::correlation_of_means(means);
  } else {
    throw emogait::Error(emogait::ErrorKind::Usage, "stats needs --association or --ratings");
  }

  std::cout << "metric,a,b,value\n";
  for (emogait::Emotion a : emogait::all_emotions()) {
    for (emogait::Emotion b : emogait::all_emotions()) {
      const int i = static_cast<int>(a);
      const int j = static_cast<int>(b);
      std::cout << "correlation," << emogait::emotion_name(a) << ',' << emogait::emotion_name(b) << ',';
      if (correlation.defined[i] && correlation.defined[j]) {
        std::cout << format_double(correlation.values(i, j));
      }
      std::cout << "\n";
    }
  }
  const Eigen::Vector4d distribution = emogait::emotion_distribution(*gea);
  for (emogait::Emotion e : emogait::all_emotions()) {
    std::cout << "distribution," << emogait::emotion_name(e) << ",,"
              << format_double(distribution[static_cast<int>(e)]) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-expressive gait analysis, classification, and multi-agent simulation"};
  app.require_subcommand(1);

  CommonOptions common;
  if (const char* env = std::getenv("EMOGAIT_CONFIG")) common.config_path = env;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a BVH or native gait file to canonical form");
  std::string in_path, out_path, joint_map, gait_id;
  double scale = 0.01;
  ingest->add_option("--input", in_path, "Input .bvh or .json gait")->required();
  ingest->add_option("--output", out_path, "Output canonical gait .json")->required();
  ingest->add_option("--joint-map", joint_map, "mocap->canonical joint table (BVH only)");
  ingest->add_option("--scale", scale, "File units to meters (default 0.01, centimeters)");
  ingest->add_option("--id", gait_id, "Override the gait id");

  // features
  auto* features = app.add_subcommand("features", "Extract 29-d feature vectors to CSV");
  std::string feat_gaits, feat_out, feat_gea;
  features->add_option("--gaits", feat_gaits, "Directory of gait .json files")->required();
  features->add_option("--output", feat_out, "Output CSV path")->required();
  features->add_option("--gea", feat_gea, "Association file; adds a label column");

  // build-gea
  auto* build = app.add_subcommand("build-gea", "Build the gait-emotion association from ratings");
  std::string ratings_path, gea_out, build_gaits;
  double theta = emogait::kDefaultTheta;
  build->add_option("--ratings", ratings_path, "Ratings CSV")->required();
  auto* theta_opt = build->add_option("--theta", theta, "Perception threshold (default 3.5)");
  build->add_option("--output", gea_out, "Association file to write");
  build->add_option("--gaits", build_gaits, "Gait directory; rating ids must match");
  build->add_option("--config", common.config_path, "JSON config with per-command defaults");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the one-vs-rest RBF classifier");
  std::string train_features, model_out;
  double C = 1.0, gamma = 1.0 / emogait::kFeatureCount, tolerance = 1e-3;
  std::uint64_t seed = 0;
  train_cmd->add_option("--features", train_features, "Labeled features CSV")->required();
  train_cmd->add_option("--output", model_out, "Model file to write")->required();
  auto* c_opt = train_cmd->add_option("--C", C, "Regularization (default 1)");
  auto* gamma_opt = train_cmd->add_option("--gamma", gamma, "RBF width (default 1/29)");
  auto* tol_opt = train_cmd->add_option("--tolerance", tolerance, "SMO tolerance (default 1e-3)");
  auto* train_seed = train_cmd->add_option("--seed", seed, "Mandatory unless set in config");
  train_cmd->add_option("--config", common.config_path, "JSON config with per-command defaults");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict the perceived emotion of a gait");
  std::string predict_model, predict_gait;
  predict_cmd->add_option("--model", predict_model, "Trained model file")->required();
  predict_cmd->add_option("--gait", predict_gait, "Gait .json")->required();

  // crossval
  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  std::string cv_features, cv_out;
  int k = 10;
  double cv_C = 1.0, cv_gamma = 1.0 / emogait::kFeatureCount, cv_tolerance = 1e-3;
  std::uint64_t cv_seed = 0;
  crossval->add_option("--features", cv_features, "Labeled features CSV")->required();
  auto* k_opt = crossval->add_option("--k", k, "Fold count (default 10)");
  auto* cv_c_opt = crossval->add_option("--C", cv_C, "Regularization (default 1)");
  auto* cv_gamma_opt = crossval->add_option("--gamma", cv_gamma, "RBF width (default 1/29)");
  auto* cv_tol_opt = crossval->add_option("--tolerance", cv_tolerance, "SMO tolerance");
  auto* cv_seed_opt = crossval->add_option("--seed", cv_seed, "Fold shuffle seed");
  crossval->add_option("--output", cv_out, "Confusion matrix CSV to write");
  crossval->add_option("--config", common.config_path, "JSON config with per-command defaults");

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the multi-agent walking simulation");
  std::string scenario_path, sim_gaits, sim_gea, sim_out, sim_csv;
  std::uint64_t sim_seed = 0;
  double sim_duration = 0.0;
  simulate_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  simulate_cmd->add_option("--gaits", sim_gaits, "Directory of gait .json files")->required();
  simulate_cmd->add_option("--gea", sim_gea, "Association file")->required();
  std::string sim_telemetry;
  simulate_cmd->add_option("--output", sim_out, "Frame export (JSON Lines)");
  simulate_cmd->add_option("--csv", sim_csv, "Root-trajectory CSV export");
  simulate_cmd->add_option("--telemetry", sim_telemetry,
                           "Per-frame minimum pairwise separation CSV");
  auto* sim_seed_opt = simulate_cmd->add_option("--seed", sim_seed, "Overrides the scenario seed");
  auto* sim_dur_opt = simulate_cmd->add_option("--duration", sim_duration, "Overrides duration (s)");

  // stats
  auto* stats = app.add_subcommand("stats", "Correlation matrix and emotion distribution");
  std::string stats_gea, stats_ratings;
  bool stats_raw = false;
  stats->add_option("--association", stats_gea, "Association file");
  stats->add_option("--ratings", stats_ratings, "Ratings CSV (means recomputed)");
  stats->add_flag("--raw-rows", stats_raw, "Correlate raw per-participant rows instead of means");

  try {
    app.parse(argc, argv);

    if (*ingest) return run_ingest(in_path, out_path, joint_map, scale, gait_id);
    if (*features) return run_features(feat_gaits, feat_out, feat_gea);
    if (*build) {
      apply_default(theta_opt, common.section("build-gea"), "theta", theta);
      return run_build_gea(ratings_path, theta, gea_out, build_gaits);
    }
    if (*train_cmd) {
      const json section = common.section("train");
      apply_default(c_opt, section, "C", C);
      apply_default(gamma_opt, section, "gamma", gamma);
      apply_default(tol_opt, section, "tolerance", tolerance);
      if (train_seed->count() == 0) {
        if (!section.contains("seed")) {
          throw emogait::Error(emogait::ErrorKind::Usage,
                           "train: --seed (or a config 'seed') is required");
        }
        seed = section.at("seed").get<std::uint64_t>();
      }
      return run_train(train_features, model_out, C, gamma, tolerance, seed);
    }
    if (*predict_cmd) return run_predict(predict_model, predict_gait);
    if (*crossval) {
      const json section = common.section("crossval");
      apply_default(k_opt, section, "k", k);
      apply_default(cv_c_opt, section, "C", cv_C);
      apply_default(cv_gamma_opt, section, "gamma", cv_gamma);
      apply_default(cv_tol_opt, section, "tolerance", cv_tolerance);
      apply_default(cv_seed_opt, section, "seed", cv_seed);
      return run_crossval(cv_features, k, cv_C, cv_gamma, cv_tolerance, cv_seed, cv_out);
    }
    if (*simulate_cmd) {
      return run_simulate(scenario_path, sim_gaits, sim_gea, sim_out, sim_csv, sim_telemetry,
                          sim_seed_opt, sim_seed, sim_dur_opt, sim_duration);
    }
    if (*stats) return run_stats(stats_gea, stats_ratings, stats_raw);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  } catch (const emogait::Error& e) {
    switch (e.kind()) {
      case emogait::ErrorKind::Usage:
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
      case emogait::ErrorKind::Internal:
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
      default:
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
