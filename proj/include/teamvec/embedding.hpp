#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "teamvec/tokens.hpp"

namespace teamvec::embedding {

struct Vocabulary {
  std::vector<std::string> tokens;               // id -> token
  std::unordered_map<std::string, size_t> ids;   // token -> id
  std::vector<size_t> freqs;                     // id -> corpus frequency
  std::vector<double> sampling_cdf;  // cumulative unigram^0.75 distribution

  size_t size() const { return tokens.size(); }
  std::optional<size_t> id_of(const std::string& token) const {
    auto it = ids.find(token);
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }
  /// Negative-sampling draw for a uniform u in [0,1).
  size_t sample(double u) const;
};

/// Counts tokens across the corpus, drops those below min_count (ids are
/// dense, ordered by descending frequency then token), and builds the
/// unigram^0.75 negative-sampling table.
Vocabulary build_vocab(const std::vector<TokenSequence>& docs,
                       size_t min_count);

enum class Doc2VecMode { PVDM, PVDBOW };

struct Doc2VecConfig {
  size_t dim = 100;
  size_t window = 10;
  int epochs = 5;
  int negative = 5;
  double initial_lr = 0.025;  // decays linearly to 1e-4 of this
  size_t min_count = 1;
  Doc2VecMode mode = Doc2VecMode::PVDM;
  uint64_t seed = 1;
  int threads = 1;  // >1 trades determinism for lock-free parallel updates
};

using Matrix = std::vector<std::vector<double>>;

struct Doc2VecModel {
  Doc2VecConfig config;
  Vocabulary vocab;
  Matrix word_in;   // V x dim input word vectors
  Matrix doc_vecs;  // N x dim document vectors, one row per training doc
  Matrix out;       // V x dim output vectors (zero-initialized)
  std::vector<double> epoch_losses;  // mean example loss per training epoch
  std::vector<std::string> doc_ids;  // optional, aligned with doc_vecs rows

  void save(const std::string& path) const;
  static Doc2VecModel load(const std::string& path);
};

/// One SGD step's inputs with the negative draws made explicit, so the loss
/// is a deterministic function of the parameters (which is what the
/// finite-difference gradient check needs). `context` is ignored by PV-DBOW.
struct TrainExample {
  size_t doc = 0;
  size_t target = 0;
  std::vector<size_t> context;
  std::vector<size_t> negatives;
};

enum class MatrixKind { WordIn, Doc, Out };

struct GradEntry {
  MatrixKind kind;
  size_t row;
  std::vector<double> grad;
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<GradEntry> grads;
};

/// Negative-sampling logistic loss of one example and its exact gradients
/// with respect to every touched row. PV-DM averages the context word
/// vectors with the document vector; PV-DBOW uses the document vector alone.
LossAndGrad loss_and_grad(const Doc2VecModel& model, const TrainExample& ex);

/// Trains word, output, and document vectors by SGD. Deterministic for a
/// fixed seed when threads == 1. Documents that lose all tokens to vocab
/// pruning keep their (untouched) initialized vector.
Doc2VecModel train(const std::vector<TokenSequence>& docs,
                   const Doc2VecConfig& config);

struct InferredVector {
  std::vector<double> values;
  bool in_vocab = true;  // false: nothing matched, values are all zero
};

/// Optimizes a fresh document vector against the frozen word/output
/// matrices for `steps` epochs over the document.
InferredVector infer_vector(const Doc2VecModel& model, const TokenSequence& doc,
                            int steps, uint64_t seed);

InferredVector infer_vector(const Doc2VecModel& model, const TokenSequence& doc,
                            int steps);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace teamvec::embedding
