#include "teamvec/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <set>
#include <sstream>

#include "teamvec/errors.hpp"
#include "teamvec/lexical.hpp"
#include "teamvec/rng.hpp"

namespace teamvec::synth {

namespace {

struct Template {
  const char* text;
  const char* tag;
};

// Agreeing, appreciative, positively-worded turns.
constexpr Template kPositiveBank[] = {
    {"right", "aa"},
    {"i agree", "aa"},
    {"sounds good", "aa"},
    {"exactly", "aa"},
    {"sure that works", "aa"},
    {"good move", "ba"},
    {"nice play", "ba"},
    {"great job", "ba"},
    {"that was a perfect turn", "ba"},
    {"excellent choice", "ba"},
    {"yes", "ny"},
    {"yeah", "ny"},
    {"yes exactly", "ny"},
    {"this plan is great", "sv"},
    {"i think we have a good chance", "sv"},
    {"i love this strategy", "sv"},
    {"we are doing wonderful work", "sv"},
    {"we played that round well", "sd"},
};

// Rejecting, critical, negatively-worded turns.
constexpr Template kNegativeBank[] = {
    {"no way", "ar"},
    {"i disagree", "ar"},
    {"that is wrong", "ar"},
    {"absolutely not", "ar"},
    {"no", "nn"},
    {"nope", "nn"},
    {"no we cannot", "nn"},
    {"this plan is terrible", "sv"},
    {"i think this idea is awful", "sv"},
    {"i hate this strategy", "sv"},
    {"that move was stupid", "sv"},
    {"we are losing badly", "sd"},
    {"this game is a mess", "sd"},
};

// Task talk shared by both generators.
constexpr Template kNeutralBank[] = {
    {"i will draw a card", "sd"},
    {"we move to the next city", "sd"},
    {"take the red route", "sd"},
    {"i have two cards", "sd"},
    {"we need three more points", "sd"},
    {"put the piece on the board", "sd"},
    {"i pass my turn", "sd"},
    {"we trade at the station", "sd"},
    {"do you have the card", "qy"},
    {"can we trade now", "qy"},
    {"should we go north", "qy"},
    {"is it my turn", "qy"},
    {"what do you want to do", "qw"},
    {"where should we go next", "qw"},
    {"how many cards are left", "qw"},
    {"okay", "b"},
    {"uh huh", "b"},
    {"mm", "b"},
    {"i see", "b"},
    {"alright we are done", "fc"},
    {"see you next time", "fc"},
};

constexpr const char* kEchoPrefixes[] = {"yes", "yeah", "right"};

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> words;
  std::stringstream ss(text);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

template <size_t N>
const Template& pick(const Template (&bank)[N], Rng& rng) {
  return bank[rng.uniform_int(N)];
}

std::string echo_reply(const std::string& trigger, Rng& rng) {
  const auto words = words_of(trigger);
  size_t k = std::min<size_t>(words.size(), 2 + rng.uniform_int(3));
  std::string out = kEchoPrefixes[rng.uniform_int(3)];
  for (size_t i = words.size() - k; i < words.size(); ++i) {
    out += " " + words[i];
  }
  return out;
}

void validate(const SynthConfig& c) {
  if (c.n_teams < 2 || c.n_teams % 2 != 0) {
    throw UsageError("n_teams must be even and >= 2 for balanced classes");
  }
  if (c.team_size < 3 || c.team_size > 4) {
    throw UsageError("team_size must be 3 or 4");
  }
  if (c.min_utterances < 9 || c.max_utterances < c.min_utterances) {
    throw UsageError("utterance range must satisfy 9 <= min <= max");
  }
  if (!(c.separation >= 0.0 && c.separation <= 1.0)) {
    throw UsageError("separation must lie in [0,1]");
  }
}

}  // namespace

Mixture mixture(double separation, bool low_conflict) {
  const double sign = low_conflict ? 1.0 : -1.0;
  Mixture m;
  m.p_positive = 0.30 + 0.28 * separation * sign;
  m.p_negative = 0.30 - 0.28 * separation * sign;
  m.p_echo = low_conflict ? 0.05 + 0.55 * separation
                          : 0.05 - 0.05 * separation;
  return m;
}

std::vector<corpus::Transcript> generate(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);

  static const std::vector<std::string> speaker_pool = {"A", "B", "C", "D"};
  std::vector<corpus::Transcript> out;
  out.reserve(config.n_teams);

  for (size_t ti = 0; ti < config.n_teams; ++ti) {
    const bool low_conflict = ti < config.n_teams / 2;
    const Mixture mix = mixture(config.separation, low_conflict);

    corpus::Transcript t;
    char team_name[16];
    std::snprintf(team_name, sizeof team_name, "team%03zu", ti);
    t.team_id = team_name;
    t.session_id = "g1";

    const size_t length =
        config.min_utterances +
        rng.uniform_int(config.max_utterances - config.min_utterances + 1);

    std::string prev_text;
    size_t prev_speaker = speaker_pool.size();  // none yet
    for (size_t ui = 0; ui < length; ++ui) {
      // Next speaker differs from the previous one so every turn forms an
      // adjacency pair.
      size_t s = rng.uniform_int(config.team_size);
      while (s == prev_speaker) s = rng.uniform_int(config.team_size);

      corpus::Utterance u;
      u.speaker_id = speaker_pool[s];
      u.index = ui;
      if (ui > 0 && rng.uniform() < mix.p_echo) {
        u.text = echo_reply(prev_text, rng);
        u.da_tag = "b^m";
      } else {
        const double r = rng.uniform();
        const Template& tpl =
            r < mix.p_positive ? pick(kPositiveBank, rng)
            : r < mix.p_positive + mix.p_negative ? pick(kNegativeBank, rng)
                                                  : pick(kNeutralBank, rng);
        u.text = tpl.text;
        u.da_tag = tpl.tag;
      }
      prev_text = u.text;
      prev_speaker = s;
      t.utterances.push_back(std::move(u));
    }

    const double z = low_conflict ? rng.uniform_in(-1.5, -0.5)
                                  : rng.uniform_in(0.5, 1.5);
    t.outcome = corpus::ConflictScore{z};
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> da_training_corpus(
    size_t copies, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::string, std::string>> out;
  for (size_t pass = 0; pass < copies; ++pass) {
    for (const auto& tpl : kPositiveBank) out.emplace_back(tpl.text, tpl.tag);
    for (const auto& tpl : kNegativeBank) out.emplace_back(tpl.text, tpl.tag);
    for (const auto& tpl : kNeutralBank) out.emplace_back(tpl.text, tpl.tag);
    // Echo replies over random triggers, the same way generate() builds them.
    for (int i = 0; i < 12; ++i) {
      const double r = rng.uniform();
      const Template& trigger = r < 0.3   ? pick(kPositiveBank, rng)
                                : r < 0.6 ? pick(kNegativeBank, rng)
                                          : pick(kNeutralBank, rng);
      out.emplace_back(echo_reply(trigger.text, rng), "b^m");
    }
  }
  return out;
}

std::vector<std::string> template_vocabulary() {
  std::set<std::string> vocab;
  auto add_bank = [&](const Template* bank, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      for (const auto& tok : lexical::tokenize(bank[i].text)) {
        vocab.insert(tok);
      }
    }
  };
  add_bank(kPositiveBank, std::size(kPositiveBank));
  add_bank(kNegativeBank, std::size(kNegativeBank));
  add_bank(kNeutralBank, std::size(kNeutralBank));
  for (const char* p : kEchoPrefixes) vocab.insert(p);
  return {vocab.begin(), vocab.end()};
}

std::vector<std::string> positive_marker_words() {
  return {"good", "nice",  "great",     "perfect", "excellent",
          "love", "agree", "wonderful", "well"};
}

std::vector<std::string> negative_marker_words() {
  return {"wrong", "terrible", "awful", "hate",
          "stupid", "mess",    "badly", "disagree"};
}

}  // namespace teamvec::synth
