#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "teamvec/corpus.hpp"

namespace teamvec::synth {

struct SynthConfig {
  size_t n_teams = 60;  // must be even; half low-conflict, half high-conflict
  size_t team_size = 4;  // 3 or 4 speakers
  size_t min_utterances = 240;  // dialogue lengths in the hundreds, like
  size_t max_utterances = 400;  // real team-game transcripts
  double separation = 1.0;  // 0: identical generators, 1: maximal contrast
  uint64_t seed = 1;
};

/// The per-utterance mixture a generator draws from. Echo replies repeat
/// the tail of the previous utterance, which is what plants the
/// entrainment signal.
struct Mixture {
  double p_positive = 0.0;
  double p_negative = 0.0;
  double p_echo = 0.0;
};

/// Mixture for a low- or high-conflict team at the given separation. The
/// two coincide exactly at separation 0.
Mixture mixture(double separation, bool low_conflict);

/// Generates a balanced synthetic corpus: the first half of the teams draw
/// from the low-conflict generator (positive wording, agreeing dialogue
/// acts, frequent echo replies scaled by `separation`), the second half
/// from the mirrored generator. Conflict z-scores cluster so a median
/// split recovers the generator identity. Utterances carry their template
/// dialogue-act tag. Fully deterministic under the seed.
std::vector<corpus::Transcript> generate(const SynthConfig& config);

/// A dialogue-act training corpus (text, tag) drawn from the same template
/// banks, `copies` passes over every template plus seeded echo-reply
/// examples. Suitable for training the baseline classifier used on
/// generated corpora.
std::vector<std::pair<std::string, std::string>> da_training_corpus(
    size_t copies, uint64_t seed);

/// Every distinct word the template banks can emit (tokenized form).
std::vector<std::string> template_vocabulary();

/// Positive- and negative-toned template words that the shipped sentiment
/// lexicon is expected to score accordingly.
std::vector<std::string> positive_marker_words();
std::vector<std::string> negative_marker_words();

}  // namespace teamvec::synth
