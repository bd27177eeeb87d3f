#include "teamvec/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "teamvec/errors.hpp"
#include "teamvec/rng.hpp"

namespace teamvec::models {

const char* to_string(Feature f) {
  switch (f) {
    case Feature::DA: return "da";
    case Feature::Sentiment: return "sentiment";
    case Feature::Entrainment: return "entrainment";
  }
  return "?";
}

namespace {

void validate_training_input(const Matrix& x, const std::vector<int>& y) {
  if (x.empty()) throw DataError("training set is empty");
  if (x.size() != y.size()) {
    throw DataError("feature matrix and label vector sizes differ");
  }
  const size_t dim = x[0].size();
  bool has_pos = false;
  bool has_neg = false;
  for (size_t i = 0; i < y.size(); ++i) {
    if (x[i].size() != dim) throw DataError("ragged feature matrix");
    if (y[i] == 1) has_pos = true;
    else if (y[i] == -1) has_neg = true;
    else throw DataError("labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) {
    throw DataError("training set contains a single class");
  }
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

LinearModel train_svm(const Matrix& x, const std::vector<int>& y,
                      const TrainConfig& config) {
  validate_training_input(x, y);
  const size_t n = x.size();
  const size_t dim = x[0].size();

  LinearModel m;
  m.kind = ModelKind::SVM;
  m.weights.assign(dim, 0.0);
  m.bias = 0.0;

  Rng rng(derive_seed(config.seed, "svm-order"));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  size_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t i : order) {
      ++step;
      const double eta = 1.0 / (config.lambda * static_cast<double>(step));
      const double margin =
          static_cast<double>(y[i]) *
          (std::inner_product(x[i].begin(), x[i].end(), m.weights.begin(),
                              0.0) +
           m.bias);
      // Bias is treated as the weight of a constant feature, so it shares
      // the regularization shrink (plain Pegasos on the augmented vector).
      const double shrink = 1.0 - eta * config.lambda;
      for (double& w : m.weights) w *= shrink;
      m.bias *= shrink;
      if (margin < 1.0) {
        const double scale = eta * static_cast<double>(y[i]);
        for (size_t j = 0; j < dim; ++j) m.weights[j] += scale * x[i][j];
        m.bias += scale;
      }
    }
  }
  return m;
}

LinearModel train_logreg(const Matrix& x, const std::vector<int>& y,
                         const TrainConfig& config) {
  validate_training_input(x, y);
  const size_t n = x.size();
  const size_t dim = x[0].size();

  LinearModel m;
  m.kind = ModelKind::LogReg;
  m.weights.assign(dim, 0.0);
  m.bias = 0.0;

  std::vector<double> grad(dim, 0.0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double z = decision_value(m, x[i]);
      // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
      const double e = -static_cast<double>(y[i]) *
                       sigmoid(-static_cast<double>(y[i]) * z);
      for (size_t j = 0; j < dim; ++j) grad[j] += e * x[i][j];
      grad_bias += e;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (size_t j = 0; j < dim; ++j) {
      m.weights[j] -= config.learning_rate *
                      (grad[j] * inv_n + config.lambda * m.weights[j]);
    }
    m.bias -= config.learning_rate * grad_bias * inv_n;
  }
  return m;
}

double decision_value(const LinearModel& m, const std::vector<double>& x) {
  if (x.size() != m.weights.size()) {
    throw DataError("feature dimension does not match the model");
  }
  return std::inner_product(x.begin(), x.end(), m.weights.begin(), 0.0) +
         m.bias;
}

int predict(const LinearModel& m, const std::vector<double>& x) {
  return decision_value(m, x) >= 0.0 ? 1 : -1;
}

double accuracy(const LinearModel& m, const Matrix& x,
                const std::vector<int>& y) {
  if (x.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (predict(m, x[i]) == y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.size());
}

double majority_accuracy(const std::vector<int>& y) {
  if (y.empty()) throw DataError("majority_accuracy: empty label list");
  std::map<int, size_t> counts;
  for (int v : y) ++counts[v];
  size_t best = 0;
  for (const auto& [label, c] : counts) best = std::max(best, c);
  return static_cast<double>(best) / static_cast<double>(y.size());
}

void standardize(Matrix& x) {
  if (x.empty()) return;
  const size_t n = x.size();
  const size_t dim = x[0].size();
  for (size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += x[i][j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = x[i][j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    for (size_t i = 0; i < n; ++i) {
      x[i][j] = sd > 0.0 ? (x[i][j] - mean) / sd : 0.0;
    }
  }
}

std::vector<size_t> stratified_folds(const std::vector<int>& y, size_t k,
                                     uint64_t seed) {
  if (k < 2) throw UsageError("cross-validation needs k >= 2");
  if (k > y.size()) {
    throw DataError("cross-validation k exceeds the number of examples");
  }
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);

  std::vector<size_t> fold_of(y.size(), 0);
  Rng rng(derive_seed(seed, "folds"));
  for (auto& [label, positions] : by_class) {
    rng.shuffle(positions);
    for (size_t j = 0; j < positions.size(); ++j) {
      fold_of[positions[j]] = j % k;
    }
  }
  return fold_of;
}

double cross_validate(const Matrix& x, const std::vector<int>& y, size_t k,
                      uint64_t seed, ModelKind kind,
                      const TrainConfig& config) {
  const auto fold_of = stratified_folds(y, k, seed);

  double accuracy_sum = 0.0;
  size_t folds_used = 0;
  for (size_t fold = 0; fold < k; ++fold) {
    Matrix train_x, test_x;
    std::vector<int> train_y, test_y;
    for (size_t i = 0; i < x.size(); ++i) {
      if (fold_of[i] == fold) {
        test_x.push_back(x[i]);
        test_y.push_back(y[i]);
      } else {
        train_x.push_back(x[i]);
        train_y.push_back(y[i]);
      }
    }
    if (test_x.empty()) continue;
    TrainConfig fold_config = config;
    fold_config.seed = derive_seed(seed, "fold-" + std::to_string(fold));
    LinearModel m = kind == ModelKind::SVM
                        ? train_svm(train_x, train_y, fold_config)
                        : train_logreg(train_x, train_y, fold_config);
    size_t hits = 0;
    for (size_t i = 0; i < test_x.size(); ++i) {
      if (predict(m, test_x[i]) == test_y[i]) ++hits;
    }
    accuracy_sum += static_cast<double>(hits) /
                    static_cast<double>(test_x.size());
    ++folds_used;
  }
  if (folds_used == 0) throw DataError("no usable cross-validation fold");
  return accuracy_sum / static_cast<double>(folds_used);
}

std::vector<EvalRun> repeated_eval(
    const std::function<double(uint64_t)>& pipeline, size_t n_runs,
    uint64_t master_seed, Feature feature, corpus::PhaseKind phase) {
  std::vector<EvalRun> runs;
  runs.reserve(n_runs);
  for (size_t i = 0; i < n_runs; ++i) {
    EvalRun run;
    run.feature = feature;
    run.phase = phase;
    run.seed = derive_seed(master_seed, "eval-run-" + std::to_string(i));
    run.accuracy = pipeline(run.seed);
    runs.push_back(run);
  }
  return runs;
}

void save_eval_runs_csv(const std::string& path,
                        const std::vector<EvalRun>& runs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write eval runs: " + path);
  out << "feature,phase,seed,accuracy\n";
  for (const auto& r : runs) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy);
    out << to_string(r.feature) << "," << corpus::to_string(r.phase) << ","
        << r.seed << "," << buf << "\n";
  }
}

std::vector<EvalRun> load_eval_runs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open eval runs: " + path);
  std::vector<EvalRun> runs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;  // header
    std::stringstream ss(line);
    std::string feature, phase, seed, acc;
    if (!std::getline(ss, feature, ',') || !std::getline(ss, phase, ',') ||
        !std::getline(ss, seed, ',') || !std::getline(ss, acc)) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": expected feature,phase,seed,accuracy");
    }
    EvalRun r;
    if (feature == "da") r.feature = Feature::DA;
    else if (feature == "sentiment") r.feature = Feature::Sentiment;
    else if (feature == "entrainment") r.feature = Feature::Entrainment;
    else throw DataError(path + " line " + std::to_string(line_no) +
                         ": unknown feature " + feature);
    if (phase == "whole") r.phase = corpus::PhaseKind::Whole;
    else if (phase == "initial") r.phase = corpus::PhaseKind::Initial;
    else if (phase == "middle") r.phase = corpus::PhaseKind::Middle;
    else if (phase == "end") r.phase = corpus::PhaseKind::End;
    else throw DataError(path + " line " + std::to_string(line_no) +
                         ": unknown phase " + phase);
    try {
      r.seed = std::stoull(seed);
      r.accuracy = std::stod(acc);
    } catch (const std::exception&) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": malformed number");
    }
    runs.push_back(r);
  }
  return runs;
}

}  // namespace teamvec::models
