#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "teamvec/corpus.hpp"

namespace teamvec::models {

using Matrix = std::vector<std::vector<double>>;

enum class ModelKind { SVM, LogReg };

enum class Feature { DA, Sentiment, Entrainment };

const char* to_string(Feature f);

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  ModelKind kind = ModelKind::SVM;
};

struct TrainConfig {
  double lambda = 0.01;        // L2 regularization
  int epochs = 200;
  double learning_rate = 0.1;  // logistic regression only
  uint64_t seed = 1;
};

/// Pegasos-style SGD on the L2-regularized hinge loss. Labels are +1/-1 and
/// both classes must be present. Deterministic under the config seed.
LinearModel train_svm(const Matrix& x, const std::vector<int>& y,
                      const TrainConfig& config = {});

/// Full-batch gradient descent on L2-regularized logistic loss.
LinearModel train_logreg(const Matrix& x, const std::vector<int>& y,
                         const TrainConfig& config = {});

double decision_value(const LinearModel& m, const std::vector<double>& x);

/// +1 or -1: sign of the decision value (probability threshold 0.5 for
/// logistic regression amounts to the same sign rule).
int predict(const LinearModel& m, const std::vector<double>& x);

double accuracy(const LinearModel& m, const Matrix& x,
                const std::vector<int>& y);

/// Accuracy of always answering the most common label.
double majority_accuracy(const std::vector<int>& y);

/// In-place per-dimension z-scoring over the whole matrix (label-free).
/// Dimensions with zero variance become zero.
void standardize(Matrix& x);

/// Stratified fold assignment: within each class, positions are shuffled by
/// the seed and dealt round-robin, so membership depends only on the seed
/// and the label sequence. Returns fold index per example.
std::vector<size_t> stratified_folds(const std::vector<int>& y, size_t k,
                                     uint64_t seed);

/// Mean held-out accuracy over stratified k-fold splits.
double cross_validate(const Matrix& x, const std::vector<int>& y, size_t k,
                      uint64_t seed, ModelKind kind,
                      const TrainConfig& config = {});

struct EvalRun {
  Feature feature = Feature::DA;
  corpus::PhaseKind phase = corpus::PhaseKind::Whole;
  double accuracy = 0.0;
  uint64_t seed = 0;
};

/// Runs the given pipeline n_runs times with per-run seeds fanned out from
/// the master seed, collecting the accuracy distribution for statistical
/// testing.
std::vector<EvalRun> repeated_eval(
    const std::function<double(uint64_t)>& pipeline, size_t n_runs,
    uint64_t master_seed, Feature feature, corpus::PhaseKind phase);

void save_eval_runs_csv(const std::string& path,
                        const std::vector<EvalRun>& runs);
std::vector<EvalRun> load_eval_runs_csv(const std::string& path);

}  // namespace teamvec::models
