#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "teamvec/corpus.hpp"
#include "teamvec/tokens.hpp"

namespace teamvec::lexical {

// The eight lexical categories scored for entrainment, plus OTHER for
// everything else. OTHER never participates in entrainment computation.
enum class LexCategory : uint8_t { NN, JJ, VB, RB, CC, CD, IN, PRP, OTHER };

constexpr std::array<LexCategory, 8> kEntrainmentCategories = {
    LexCategory::NN, LexCategory::JJ, LexCategory::VB, LexCategory::RB,
    LexCategory::CC, LexCategory::CD, LexCategory::IN, LexCategory::PRP};

const char* to_string(LexCategory c);
std::optional<LexCategory> category_from_string(const std::string& s);

/// Lowercases and splits text into word and punctuation tokens. Punctuation
/// at token edges is split off; the shipped contraction table splits forms
/// like "don't" into "do" + "n't". Pure and deterministic.
std::vector<std::string> tokenize(const std::string& text);

/// Rule-based part-of-speech tagger over the nine categories. Lookup order:
/// full-token lexicon, then numeric shape, then a plural/3rd-person -s strip
/// retried against the lexicon, then the suffix table, then OTHER.
class PosTagger {
 public:
  static PosTagger load(const std::string& words_path,
                        const std::string& suffixes_path);

  LexCategory tag_token(const std::string& token) const;
  std::vector<LexCategory> tag(const std::vector<std::string>& tokens) const;

 private:
  std::unordered_map<std::string, LexCategory> words_;
  std::vector<std::pair<std::string, LexCategory>> suffixes_;  // file order
};

struct SentimentLexicon {
  std::unordered_map<std::string, double> entries;  // word -> polarity [-1,1]
  std::unordered_set<std::string> negators;
  double negation_factor = -0.5;

  /// Loads "word<TAB>polarity" entries plus a one-word-per-line negator
  /// list. Polarities must lie in [-1,1] and negators must not also carry a
  /// polarity.
  static SentimentLexicon load(const std::string& lexicon_path,
                               const std::string& negators_path,
                               double negation_factor = -0.5);
};

/// Mean polarity of lexicon-matched tokens, 0.0 when nothing matches.
/// A negator within the 3 tokens preceding a matched word multiplies that
/// word's polarity by the lexicon's negation factor.
double sentiment_polarity(const std::string& text,
                          const SentimentLexicon& lexicon);

/// Polarity quantized to 2 decimals in fixed "%.2f" form ("-0.00" is
/// normalized to "0.00") so the embedder sees a finite vocabulary.
std::string polarity_token(double polarity);

/// Anything that can assign a dialogue-act tag to an utterance. The shipped
/// baseline below implements it; outputs of external taggers can instead be
/// carried on pre-tagged transcripts.
class DaTagger {
 public:
  virtual ~DaTagger() = default;
  virtual std::string tag_utterance(const std::string& text) const = 0;
};

std::vector<std::string> load_tag_inventory(const std::string& path);

/// One "utterance text<TAB>tag" pair per line (SwDA-exportable).
std::vector<std::pair<std::string, std::string>> load_da_corpus(
    const std::string& path);

struct DaTrainConfig {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int epochs = 50;
  uint64_t seed = 1;
};

/// Multinomial logistic regression over word 1-2-gram counts. Stands in for
/// heavier sentence-encoder models behind the DaTagger interface.
class DAClassifier : public DaTagger {
 public:
  /// Trains on (text, tag) pairs by SGD with a per-epoch seeded shuffle.
  /// Every tag must be a member of the inventory; a corpus with fewer than
  /// two distinct tags is rejected.
  static DAClassifier train(
      const std::vector<std::pair<std::string, std::string>>& corpus,
      const std::vector<std::string>& tag_inventory,
      const DaTrainConfig& config = {});

  /// Argmax tag over n-gram features; ties break to the lexicographically
  /// smallest tag code. An utterance with no in-vocabulary features falls
  /// back to the most frequent training tag.
  std::string classify(const std::string& text) const;
  std::string tag_utterance(const std::string& text) const override {
    return classify(text);
  }

  double accuracy(
      const std::vector<std::pair<std::string, std::string>>& corpus) const;

  void save(const std::string& path) const;
  static DAClassifier load(const std::string& path);

  const std::vector<std::string>& tags() const { return tags_; }
  const std::string& fallback_tag() const { return fallback_tag_; }

  /// Multiplies all weights and biases by a positive constant. Prediction
  /// argmaxes are unaffected; exposed so that invariant can be tested.
  void scale_weights(double factor);

 private:
  std::vector<std::string> features(const std::string& text) const;

  std::vector<std::string> tags_;                       // sorted tag codes
  std::unordered_map<std::string, size_t> feature_ids_;  // 1-2-gram -> column
  std::vector<std::vector<double>> weights_;            // per tag
  std::vector<double> bias_;                            // per tag
  std::string fallback_tag_;
};

/// One dialogue-act tag per utterance, in order.
TokenSequence da_sequence(const corpus::Transcript& t, const DaTagger& tagger);

/// Tag sequence read from pre-tagged utterances; every tag must be present
/// and a member of the inventory.
TokenSequence da_sequence_pretagged(const corpus::Transcript& t,
                                    const std::vector<std::string>& inventory);

/// One quantized polarity token per utterance, in order.
TokenSequence sentiment_sequence(const corpus::Transcript& t,
                                 const SentimentLexicon& lexicon);

}  // namespace teamvec::lexical
