#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emogait/features.hpp"
#include "emogait/gea.hpp"

namespace emogait {

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double gamma);

struct TrainingConfig {
  double C = 1.0;
  double gamma = 1.0 / kFeatureCount;
  double tolerance = 1e-3;   // KKT violation at convergence
  int max_iterations = 200000;
  std::uint64_t seed = 0;    // fold shuffling in cross-validation
};

// One margin classifier of the one-vs-rest ensemble.
struct BinarySvm {
  Eigen::MatrixXd support_vectors;  // one row per SV
  Eigen::VectorXd coefficients;     // alpha_i * y_i, aligned with rows
  double bias = 0.0;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x, double gamma) const;
};

struct SvmModel {
  double C = 1.0;
  double gamma = 1.0 / kFeatureCount;
  std::vector<Emotion> classes;     // Emotion order, present classes only
  std::vector<BinarySvm> machines;  // aligned with classes
  NormalizationBounds bounds;       // the training corpus bounds
};

// Trains one-vs-rest RBF machines with SMO. `features` rows must already be
// normalized; `bounds` is carried in the model for later inputs.
// Throws Error(Data) when fewer than two classes are present.
SvmModel train(const Eigen::MatrixXd& features, const std::vector<Emotion>& labels,
               const TrainingConfig& config, const NormalizationBounds& bounds);

struct Prediction {
  Emotion emotion = Emotion::Happy;
  // Decision value per model class, aligned with model.classes.
  Eigen::VectorXd scores;
};

// `x` must be normalized with the model's bounds. Ties break by class order.
Prediction predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

struct ConfusionMatrix {
  // counts(p, a): samples of actual class `a` predicted as class `p`,
  // indexed by Emotion order.
  Eigen::Matrix<int, kEmotionCount, kEmotionCount> counts =
      Eigen::Matrix<int, kEmotionCount, kEmotionCount>::Zero();

  int total() const { return counts.sum(); }
  double accuracy() const;
};

struct CrossValidationResult {
  double accuracy = 0.0;  // mean of per-fold accuracies
  std::vector<double> fold_accuracies;
  ConfusionMatrix confusion;  // pooled over folds
};

// Stratified k-fold cross-validation over raw (unnormalized) features;
// normalization bounds are fitted per fold on the training split only.
CrossValidationResult cross_validate(const Eigen::MatrixXd& features,
                                     const std::vector<Emotion>& labels, int k,
                                     const TrainingConfig& config);

struct BinaryTrainResult {
  BinarySvm machine;
  Eigen::VectorXd alpha;  // per training sample, for KKT inspection
  int iterations = 0;
};

// SMO with second-order working-set pair selection on +/-1 signs.
BinaryTrainResult train_binary(const Eigen::MatrixXd& features, const std::vector<int>& signs,
                               double C, double gamma, double tolerance, int max_iterations);

// Versioned JSON model file; round-trips every field bit-exactly.
std::string serialize_model(const SvmModel& model);
SvmModel parse_model(const std::string& text, const std::string& origin = "<string>");
SvmModel load_model(const std::filesystem::path& path);
void save_model(const SvmModel& model, const std::filesystem::path& path);

std::string write_confusion_csv(const ConfusionMatrix& m, double accuracy);

}  // namespace emogait
