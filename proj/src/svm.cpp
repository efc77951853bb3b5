#include "emogait/svm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "emogait/error.hpp"
#include "emogait/random.hpp"

namespace emogait {
namespace {

using json = nlohmann::ordered_json;

constexpr double kCurvatureFloor = 1e-12;
constexpr double kAlphaCutoff = 1e-12;
constexpr int kModelVersion = 1;

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, double gamma) {
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * X * X.transpose()).colwise() + sq;
  d2.rowwise() += sq.transpose();
  return (-gamma * d2.cwiseMax(0.0)).array().exp();
}

}  // namespace

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double gamma) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Data, "rbf_kernel: dimension mismatch (" + std::to_string(x.size()) +
                                     " vs " + std::to_string(y.size()) + ")");
  }
  return std::exp(-gamma * (x - y).squaredNorm());
}

double BinarySvm::decision(const Eigen::Ref<const Eigen::VectorXd>& x, double gamma) const {
  if (x.size() != support_vectors.cols()) {
    throw Error(ErrorKind::Data, "decision: expected " + std::to_string(support_vectors.cols()) +
                                     " features, got " + std::to_string(x.size()));
  }
  const Eigen::VectorXd d2 =
      (support_vectors.rowwise() - x.transpose()).rowwise().squaredNorm();
  return coefficients.dot((-gamma * d2).array().exp().matrix()) + bias;
}

BinaryTrainResult train_binary(const Eigen::MatrixXd& X, const std::vector<int>& signs, double C,
                               double gamma, double tolerance, int max_iterations) {
  const int n = static_cast<int>(X.rows());
  const Eigen::MatrixXd K = gram_matrix(X, gamma);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

  auto in_up = [&](int t) { return signs[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
  auto in_low = [&](int t) { return signs[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

  int iterations = 0;
  double m = 0.0, M = 0.0;
  while (iterations < max_iterations) {
    ++iterations;

    int i = -1;
    m = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      if (in_up(t) && -signs[t] * grad[t] > m) {
        m = -signs[t] * grad[t];
        i = t;
      }
    }

    int j = -1;
    M = std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      M = std::min(M, -signs[t] * grad[t]);
      if (i < 0) continue;
      const double b = m + signs[t] * grad[t];
      if (b <= 0.0) continue;
      const double a = std::max(K(i, i) + K(t, t) - 2.0 * K(i, t), kCurvatureFloor);
      const double obj = -(b * b) / a;
      if (obj < best_obj) {
        best_obj = obj;
        j = t;
      }
    }

    if (i < 0 || j < 0 || m - M < tolerance) break;

    const double a = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), kCurvatureFloor);
    const double step = (-signs[i] * grad[i] + signs[j] * grad[j]) / a;

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double sum = signs[i] * old_ai + signs[j] * old_aj;
    alpha[i] = std::clamp(alpha[i] + signs[i] * step, 0.0, C);
    alpha[j] = std::clamp(signs[j] * (sum - signs[i] * alpha[i]), 0.0, C);
    alpha[i] = std::clamp(signs[i] * (sum - signs[j] * alpha[j]), 0.0, C);

    const double di = (alpha[i] - old_ai) * signs[i];
    const double dj = (alpha[j] - old_aj) * signs[j];
    for (int t = 0; t < n; ++t) {
      grad[t] += signs[t] * (K(i, t) * di + K(j, t) * dj);
    }
  }

  // Bias from free support vectors; midpoint of the violation interval when
  // everything sits on a box bound.
  double bias_sum = 0.0;
  int free_count = 0;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > kAlphaCutoff && alpha[t] < C - kAlphaCutoff) {
      bias_sum += -signs[t] * grad[t];
      ++free_count;
    }
  }
  double bias;
  if (free_count > 0) {
    bias = bias_sum / free_count;
  } else {
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      if (in_up(t)) up = std::max(up, -signs[t] * grad[t]);
      if (in_low(t)) low = std::min(low, -signs[t] * grad[t]);
    }
    bias = 0.5 * (up + low);
  }

  BinaryTrainResult result;
  result.alpha = alpha;
  result.iterations = iterations;
  result.machine.bias = bias;

  std::vector<int> sv;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > kAlphaCutoff) sv.push_back(t);
  }
  result.machine.support_vectors.resize(static_cast<int>(sv.size()), X.cols());
  result.machine.coefficients.resize(static_cast<int>(sv.size()));
  for (int r = 0; r < static_cast<int>(sv.size()); ++r) {
    result.machine.support_vectors.row(r) = X.row(sv[r]);
    result.machine.coefficients[r] = alpha[sv[r]] * signs[sv[r]];
  }
  return result;
}

SvmModel train(const Eigen::MatrixXd& features, const std::vector<Emotion>& labels,
               const TrainingConfig& config, const NormalizationBounds& bounds) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw Error(ErrorKind::Data, "train: feature rows and labels disagree");
  }
  if (!(config.C > 0.0) || !(config.gamma > 0.0) || !(config.tolerance > 0.0)) {
    throw Error(ErrorKind::Data, "train: hyperparameters must be positive");
  }

  std::vector<Emotion> present;
  for (Emotion e : all_emotions()) {
    if (std::find(labels.begin(), labels.end(), e) != labels.end()) present.push_back(e);
  }
  if (present.size() < 2) {
    throw Error(ErrorKind::Data, "train: corpus has " + std::to_string(present.size()) +
                                     " class(es), need at least 2");
  }

  SvmModel model;
  model.C = config.C;
  model.gamma = config.gamma;
  model.bounds = bounds;
  model.classes = present;
  model.machines.reserve(present.size());
  for (Emotion e : present) {
    std::vector<int> signs(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) signs[t] = labels[t] == e ? 1 : -1;
    model.machines.push_back(
        train_binary(features, signs, config.C, config.gamma, config.tolerance,
                     config.max_iterations)
            .machine);
  }
  return model;
}

Prediction predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Prediction out;
  out.scores.resize(static_cast<int>(model.machines.size()));
  int best = 0;
  for (int c = 0; c < static_cast<int>(model.machines.size()); ++c) {
    out.scores[c] = model.machines[c].decision(x, model.gamma);
    if (out.scores[c] > out.scores[best]) best = c;  // strict: ties keep class order
  }
  out.emotion = model.classes[best];
  return out;
}

double ConfusionMatrix::accuracy() const {
  const int n = total();
  return n > 0 ? static_cast<double>(counts.trace()) / n : 0.0;
}

CrossValidationResult cross_validate(const Eigen::MatrixXd& features,
                                     const std::vector<Emotion>& labels, int k,
                                     const TrainingConfig& config) {
  const int n = static_cast<int>(features.rows());
  if (k < 2) throw Error(ErrorKind::Data, "cross_validate: k must be at least 2");
  if (n < k) {
    throw Error(ErrorKind::Data, "cross_validate: corpus has " + std::to_string(n) +
                                     " samples, need at least k=" + std::to_string(k));
  }
  if (n != static_cast<int>(labels.size())) {
    throw Error(ErrorKind::Data, "cross_validate: feature rows and labels disagree");
  }

  // Stratified assignment: shuffle within each class, then deal samples to
  // folds with a counter that runs across classes so no fold stays empty.
  std::mt19937_64 rng(config.seed);
  std::vector<int> fold_of(n, -1);
  int counter = 0;
  for (Emotion e : all_emotions()) {
    std::vector<int> members;
    for (int t = 0; t < n; ++t) {
      if (labels[t] == e) members.push_back(t);
    }
    seeded_shuffle(members, rng);
    for (int idx : members) fold_of[idx] = counter++ % k;
  }

  CrossValidationResult result;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<int> train_idx, test_idx;
    for (int t = 0; t < n; ++t) {
      (fold_of[t] == fold ? test_idx : train_idx).push_back(t);
    }
    if (test_idx.empty()) continue;

    Eigen::MatrixXd train_X(train_idx.size(), features.cols());
    std::vector<Emotion> train_y(train_idx.size());
    std::vector<FeatureVec> train_rows(train_idx.size());
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      train_X.row(static_cast<int>(r)) = features.row(train_idx[r]);
      train_y[r] = labels[train_idx[r]];
      train_rows[r] = features.row(train_idx[r]).transpose();
    }
    const NormalizationBounds bounds = fit_normalization(train_rows);
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      train_X.row(static_cast<int>(r)) =
          normalize(train_X.row(static_cast<int>(r)).transpose(), bounds).transpose();
    }

    const SvmModel model = train(train_X, train_y, config, bounds);

    int correct = 0;
    for (int idx : test_idx) {
      const FeatureVec x = normalize(features.row(idx).transpose(), bounds);
      const Prediction p = predict(model, x);
      result.confusion.counts(static_cast<int>(p.emotion), static_cast<int>(labels[idx]))++;
      if (p.emotion == labels[idx]) ++correct;
    }
    result.fold_accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(test_idx.size()));
  }

  result.accuracy =
      std::accumulate(result.fold_accuracies.begin(), result.fold_accuracies.end(), 0.0) /
      static_cast<double>(result.fold_accuracies.size());
  return result;
}

std::string serialize_model(const SvmModel& model) {
  json doc;
  doc["format"] = "emogait-svm";
  doc["version"] = kModelVersion;
  doc["C"] = model.C;
  doc["gamma"] = model.gamma;
  doc["bounds"]["min"] = std::vector<double>(model.bounds.min.data(),
                                             model.bounds.min.data() + kFeatureCount);
  doc["bounds"]["max"] = std::vector<double>(model.bounds.max.data(),
                                             model.bounds.max.data() + kFeatureCount);
  doc["classes"] = json::array();
  for (Emotion e : model.classes) doc["classes"].push_back(emotion_name(e));
  doc["machines"] = json::array();
  for (const BinarySvm& machine : model.machines) {
    json m;
    m["bias"] = machine.bias;
    m["coefficients"] = std::vector<double>(
        machine.coefficients.data(), machine.coefficients.data() + machine.coefficients.size());
    json rows = json::array();
    for (int r = 0; r < machine.support_vectors.rows(); ++r) {
      std::vector<double> row(machine.support_vectors.cols());
      for (int c = 0; c < machine.support_vectors.cols(); ++c) {
        row[static_cast<std::size_t>(c)] = machine.support_vectors(r, c);
      }
      rows.push_back(std::move(row));
    }
    m["support_vectors"] = std::move(rows);
    doc["machines"].push_back(std::move(m));
  }
  return doc.dump(1) + "\n";
}

SvmModel parse_model(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": " + e.what());
  }
  try {
    if (doc.value("format", "") != "emogait-svm") {
      throw Error(ErrorKind::Schema, origin + ": not an emogait-svm model file");
    }
    if (doc.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorKind::Schema, origin + ": unsupported model version " +
                                         doc.at("version").dump() + ", expected " +
                                         std::to_string(kModelVersion));
    }
    SvmModel model;
    model.C = doc.at("C").get<double>();
    model.gamma = doc.at("gamma").get<double>();
    const auto min = doc.at("bounds").at("min").get<std::vector<double>>();
    const auto max = doc.at("bounds").at("max").get<std::vector<double>>();
    if (min.size() != kFeatureCount || max.size() != kFeatureCount) {
      throw Error(ErrorKind::Schema, origin + ": bounds must have 29 entries");
    }
    for (int i = 0; i < kFeatureCount; ++i) {
      model.bounds.min[i] = min[i];
      model.bounds.max[i] = max[i];
    }
    for (const json& name : doc.at("classes")) {
      const auto e = emotion_from_name(name.get<std::string>());
      if (!e) throw Error(ErrorKind::Schema, origin + ": unknown class " + name.dump());
      model.classes.push_back(*e);
    }
    for (const json& m : doc.at("machines")) {
      BinarySvm machine;
      machine.bias = m.at("bias").get<double>();
      const auto coeffs = m.at("coefficients").get<std::vector<double>>();
      const json& rows = m.at("support_vectors");
      if (rows.size() != coeffs.size() || rows.empty()) {
        throw Error(ErrorKind::Schema, origin + ": machine needs matching, non-empty "
                                                "support vectors and coefficients");
      }
      machine.coefficients = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
      machine.support_vectors.resize(rows.size(), rows.at(0).size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = rows.at(r).get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(machine.support_vectors.cols())) {
          throw Error(ErrorKind::Schema, origin + ": ragged support vector matrix");
        }
        machine.support_vectors.row(static_cast<int>(r)) =
            Eigen::Map<const Eigen::VectorXd>(row.data(), row.size()).transpose();
      }
      model.machines.push_back(std::move(machine));
    }
    if (model.machines.size() != model.classes.size()) {
      throw Error(ErrorKind::Schema, origin + ": classes and machines disagree");
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, origin + ": " + e.what());
  }
}

SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), path.string());
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write model file: " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::string write_confusion_csv(const ConfusionMatrix& m, double accuracy) {
  std::string out = "predicted\\actual";
  for (Emotion e : all_emotions()) {
    out += ',';
    out += emotion_name(e);
  }
  out += '\n';
  for (int p = 0; p < kEmotionCount; ++p) {
    out += emotion_name(static_cast<Emotion>(p));
    for (int a = 0; a < kEmotionCount; ++a) {
      out += ',';
      out += std::to_string(m.counts(p, a));
    }
    out += '\n';
  }
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, accuracy);
  out += "accuracy,";
  out.append(buffer, ptr);
  out += '\n';
  return out;
}

}  // namespace emogait
