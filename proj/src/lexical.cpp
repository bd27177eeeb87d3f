#include "teamvec/lexical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "teamvec/errors.hpp"
#include "teamvec/rng.hpp"

namespace teamvec::lexical {

using nlohmann::json;

const char* to_string(LexCategory c) {
  switch (c) {
    case LexCategory::NN: return "NN";
    case LexCategory::JJ: return "JJ";
    case LexCategory::VB: return "VB";
    case LexCategory::RB: return "RB";
    case LexCategory::CC: return "CC";
    case LexCategory::CD: return "CD";
    case LexCategory::IN: return "IN";
    case LexCategory::PRP: return "PRP";
    case LexCategory::OTHER: return "OTHER";
  }
  return "?";
}

std::optional<LexCategory> category_from_string(const std::string& s) {
  static const std::map<std::string, LexCategory> table = {
      {"NN", LexCategory::NN}, {"JJ", LexCategory::JJ},
      {"VB", LexCategory::VB}, {"RB", LexCategory::RB},
      {"CC", LexCategory::CC}, {"CD", LexCategory::CD},
      {"IN", LexCategory::IN}, {"PRP", LexCategory::PRP},
      {"OTHER", LexCategory::OTHER}};
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

namespace {

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Contraction suffixes, longest first. One split per token.
constexpr const char* kContractionSuffixes[] = {"n't", "'ll", "'re", "'ve",
                                                "'s",  "'m",  "'d"};

void emit_chunk(const std::string& chunk, std::vector<std::string>& out) {
  size_t begin = 0;
  size_t end = chunk.size();
  while (begin < end && is_punct(chunk[begin])) {
    out.push_back(std::string(1, chunk[begin]));
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && is_punct(chunk[end - 1])) {
    trailing.push_back(std::string(1, chunk[end - 1]));
    --end;
  }
  if (end > begin) {
    std::string core = chunk.substr(begin, end - begin);
    bool split = false;
    for (const char* suf : kContractionSuffixes) {
      size_t slen = std::strlen(suf);
      if (core.size() > slen &&
          core.compare(core.size() - slen, slen, suf) == 0) {
        out.push_back(core.substr(0, core.size() - slen));
        out.push_back(core.substr(core.size() - slen));
        split = true;
        break;
      }
    }
    if (!split) out.push_back(core);
  }
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string chunk;
  auto flush = [&] {
    if (!chunk.empty()) {
      emit_chunk(chunk, out);
      chunk.clear();
    }
  };
  for (char raw : text) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else {
      chunk.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

PosTagger PosTagger::load(const std::string& words_path,
                          const std::string& suffixes_path) {
  PosTagger tagger;

  auto parse = [](const std::string& path,
                  auto&& handle_entry) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open POS rule file: " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw DataError(path + " line " + std::to_string(line_no) +
                        ": expected \"entry<TAB>category\"");
      }
      std::string entry = line.substr(0, tab);
      auto cat = category_from_string(line.substr(tab + 1));
      if (!cat) {
        throw DataError(path + " line " + std::to_string(line_no) +
                        ": unknown category " + line.substr(tab + 1));
      }
      handle_entry(entry, *cat);
    }
  };

  parse(words_path, [&](const std::string& w, LexCategory c) {
    tagger.words_[w] = c;
  });
  parse(suffixes_path, [&](const std::string& s, LexCategory c) {
    tagger.suffixes_.emplace_back(s, c);
  });
  return tagger;
}

namespace {

bool is_numeric_shape(const std::string& token) {
  bool has_digit = false;
  for (char c : token) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      has_digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return has_digit;
}

}  // namespace

LexCategory PosTagger::tag_token(const std::string& token) const {
  auto it = words_.find(token);
  if (it != words_.end()) return it->second;

  if (is_numeric_shape(token)) return LexCategory::CD;

  // Inflection strip: plural / 3rd person -s forms retried against the
  // lexicon ("cards" -> "card", "carries" -> "carry", "goes" -> "go").
  if (token.size() > 2 && token.back() == 's') {
    std::vector<std::string> candidates;
    if (token.size() > 3 && token.compare(token.size() - 3, 3, "ies") == 0) {
      candidates.push_back(token.substr(0, token.size() - 3) + "y");
    }
    candidates.push_back(token.substr(0, token.size() - 1));
    if (token.size() > 3 && token.compare(token.size() - 2, 2, "es") == 0) {
      candidates.push_back(token.substr(0, token.size() - 2));
    }
    for (const auto& cand : candidates) {
      auto cit = words_.find(cand);
      if (cit != words_.end()) return cit->second;
    }
  }

  for (const auto& [suffix, category] : suffixes_) {
    if (token.size() > suffix.size() &&
        token.compare(token.size() - suffix.size(), suffix.size(), suffix) ==
            0) {
      return category;
    }
  }
  return LexCategory::OTHER;
}

std::vector<LexCategory> PosTagger::tag(
    const std::vector<std::string>& tokens) const {
  std::vector<LexCategory> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(tag_token(t));
  return out;
}

SentimentLexicon SentimentLexicon::load(const std::string& lexicon_path,
                                        const std::string& negators_path,
                                        double negation_factor) {
  if (!(negation_factor >= -1.0 && negation_factor <= 1.0)) {
    throw DataError("negation factor must lie in [-1,1]");
  }
  SentimentLexicon lex;
  lex.negation_factor = negation_factor;

  std::ifstream in(lexicon_path);
  if (!in) throw DataError("cannot open sentiment lexicon: " + lexicon_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(lexicon_path + " line " + std::to_string(line_no) +
                      ": expected \"word<TAB>polarity\"");
    }
    std::string word = line.substr(0, tab);
    double polarity = 0.0;
    try {
      polarity = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError(lexicon_path + " line " + std::to_string(line_no) +
                      ": polarity is not a number");
    }
    if (!(polarity >= -1.0 && polarity <= 1.0)) {
      throw DataError(lexicon_path + " line " + std::to_string(line_no) +
                      ": polarity outside [-1,1]");
    }
    lex.entries[word] = polarity;
  }

  std::ifstream neg(negators_path);
  if (!neg) throw DataError("cannot open negator list: " + negators_path);
  line_no = 0;
  while (std::getline(neg, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lex.entries.count(line)) {
      throw DataError("negator \"" + line +
                      "\" also carries a polarity; the sets must be disjoint");
    }
    lex.negators.insert(line);
  }
  return lex;
}

double sentiment_polarity(const std::string& text,
                          const SentimentLexicon& lexicon) {
  const auto tokens = tokenize(text);
  double sum = 0.0;
  size_t matched = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicon.entries.find(tokens[i]);
    if (it == lexicon.entries.end()) continue;
    double polarity = it->second;
    size_t window_start = i >= 3 ? i - 3 : 0;
    for (size_t j = window_start; j < i; ++j) {
      if (lexicon.negators.count(tokens[j])) {
        polarity *= lexicon.negation_factor;
        break;
      }
    }
    sum += polarity;
    ++matched;
  }
  return matched == 0 ? 0.0 : sum / static_cast<double>(matched);
}

std::string polarity_token(double polarity) {
  double rounded = std::round(polarity * 100.0) / 100.0;
  if (rounded == 0.0) rounded = 0.0;  // normalize -0
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", rounded);
  if (std::strcmp(buf, "-0.00") == 0) return "0.00";
  return buf;
}

std::vector<std::string> load_tag_inventory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tag inventory: " + path);
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    tags.push_back(line);
  }
  if (tags.empty()) throw DataError("tag inventory is empty: " + path);
  return tags;
}

std::vector<std::pair<std::string, std::string>> load_da_corpus(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open DA training corpus: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 == line.size()) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": expected \"text<TAB>tag\"");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::vector<std::string> DAClassifier::features(
    const std::string& text) const {
  auto tokens = tokenize(text);
  std::vector<std::string> feats = tokens;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    feats.push_back(tokens[i] + " " + tokens[i + 1]);
  }
  return feats;
}

DAClassifier DAClassifier::train(
    const std::vector<std::pair<std::string, std::string>>& corpus,
    const std::vector<std::string>& tag_inventory,
    const DaTrainConfig& config) {
  if (corpus.empty()) throw DataError("DA training corpus is empty");

  std::set<std::string> inventory(tag_inventory.begin(), tag_inventory.end());
  std::set<std::string> seen_tags;
  std::map<std::string, size_t> tag_counts;
  for (const auto& [text, tag] : corpus) {
    if (!inventory.count(tag)) {
      throw DataError("training tag \"" + tag +
                      "\" is not in the tag inventory");
    }
    seen_tags.insert(tag);
    ++tag_counts[tag];
  }
  if (seen_tags.size() < 2) {
    throw DataError("DA training corpus has a single tag; need at least 2");
  }

  DAClassifier model;
  model.tags_.assign(seen_tags.begin(), seen_tags.end());

  // Most frequent training tag; count ties break to the smallest code.
  size_t best_count = 0;
  for (const auto& [tag, count] : tag_counts) {
    if (count > best_count) {
      best_count = count;
      model.fallback_tag_ = tag;
    }
  }

  for (const auto& [text, tag] : corpus) {
    for (const auto& f : model.features(text)) {
      model.feature_ids_.emplace(f, model.feature_ids_.size());
    }
  }

  const size_t n_tags = model.tags_.size();
  const size_t n_feats = model.feature_ids_.size();
  model.weights_.assign(n_tags, std::vector<double>(n_feats, 0.0));
  model.bias_.assign(n_tags, 0.0);

  std::unordered_map<std::string, size_t> tag_id;
  for (size_t t = 0; t < n_tags; ++t) tag_id[model.tags_[t]] = t;

  // Precompute sparse count vectors.
  std::vector<std::vector<std::pair<size_t, double>>> xs(corpus.size());
  std::vector<size_t> ys(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    std::map<size_t, double> counts;
    for (const auto& f : model.features(corpus[i].first)) {
      counts[model.feature_ids_.at(f)] += 1.0;
    }
    xs[i].assign(counts.begin(), counts.end());
    ys[i] = tag_id.at(corpus[i].second);
  }

  Rng rng(config.seed);
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> scores(n_tags);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t i : order) {
      for (size_t t = 0; t < n_tags; ++t) {
        double s = model.bias_[t];
        for (const auto& [f, c] : xs[i]) s += model.weights_[t][f] * c;
        scores[t] = s;
      }
      double max_score = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (size_t t = 0; t < n_tags; ++t) {
        scores[t] = std::exp(scores[t] - max_score);
        z += scores[t];
      }
      for (size_t t = 0; t < n_tags; ++t) {
        double g = scores[t] / z - (t == ys[i] ? 1.0 : 0.0);
        model.bias_[t] -= config.learning_rate * g;
        for (const auto& [f, c] : xs[i]) {
          model.weights_[t][f] -= config.learning_rate *
                                  (g * c + config.l2 * model.weights_[t][f]);
        }
      }
    }
  }
  return model;
}

std::string DAClassifier::classify(const std::string& text) const {
  std::map<size_t, double> counts;
  for (const auto& f : features(text)) {
    auto it = feature_ids_.find(f);
    if (it != feature_ids_.end()) counts[it->second] += 1.0;
  }
  if (counts.empty()) return fallback_tag_;

  size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < tags_.size(); ++t) {
    double s = bias_[t];
    for (const auto& [f, c] : counts) s += weights_[t][f] * c;
    if (s > best_score) {  // tags_ sorted, so ties keep the smaller code
      best_score = s;
      best = t;
    }
  }
  return tags_[best];
}

double DAClassifier::accuracy(
    const std::vector<std::pair<std::string, std::string>>& corpus) const {
  if (corpus.empty()) return 0.0;
  size_t hits = 0;
  for (const auto& [text, tag] : corpus) {
    if (classify(text) == tag) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(corpus.size());
}

void DAClassifier::scale_weights(double factor) {
  for (auto& row : weights_) {
    for (double& w : row) w *= factor;
  }
  for (double& b : bias_) b *= factor;
}

void DAClassifier::save(const std::string& path) const {
  json j;
  j["format"] = "teamvec-da";
  j["version"] = 1;
  j["tags"] = tags_;
  j["fallback_tag"] = fallback_tag_;
  std::vector<std::string> feats(feature_ids_.size());
  for (const auto& [f, id] : feature_ids_) feats[id] = f;
  j["features"] = feats;
  j["weights"] = weights_;
  j["bias"] = bias_;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write DA model: " + path);
  out << j.dump() << "\n";
}

DAClassifier DAClassifier::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open DA model: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("invalid DA model JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "teamvec-da" || j.value("version", 0) != 1) {
    throw DataError("unsupported DA model format in " + path);
  }
  DAClassifier model;
  model.tags_ = j.at("tags").get<std::vector<std::string>>();
  model.fallback_tag_ = j.at("fallback_tag").get<std::string>();
  auto feats = j.at("features").get<std::vector<std::string>>();
  for (size_t i = 0; i < feats.size(); ++i) model.feature_ids_[feats[i]] = i;
  model.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
  model.bias_ = j.at("bias").get<std::vector<double>>();
  if (model.weights_.size() != model.tags_.size() ||
      model.bias_.size() != model.tags_.size()) {
    throw DataError("DA model dimensions are inconsistent in " + path);
  }
  return model;
}

TokenSequence da_sequence(const corpus::Transcript& t, const DaTagger& tagger) {
  TokenSequence seq;
  seq.reserve(t.utterances.size());
  for (const auto& u : t.utterances) seq.push_back(tagger.tag_utterance(u.text));
  return seq;
}

TokenSequence da_sequence_pretagged(const corpus::Transcript& t,
                                    const std::vector<std::string>& inventory) {
  std::set<std::string> allowed(inventory.begin(), inventory.end());
  TokenSequence seq;
  seq.reserve(t.utterances.size());
  for (const auto& u : t.utterances) {
    if (!u.da_tag) {
      throw DataError("utterance " + std::to_string(u.index) + " of team " +
                      t.team_id + " has no da_tag; cannot use pre-tagged path");
    }
    if (!allowed.count(*u.da_tag)) {
      throw DataError("da_tag \"" + *u.da_tag + "\" of team " + t.team_id +
                      " is not in the tag inventory");
    }
    seq.push_back(*u.da_tag);
  }
  return seq;
}

TokenSequence sentiment_sequence(const corpus::Transcript& t,
                                 const SentimentLexicon& lexicon) {
  TokenSequence seq;
  seq.reserve(t.utterances.size());
  for (const auto& u : t.utterances) {
    seq.push_back(polarity_token(sentiment_polarity(u.text, lexicon)));
  }
  return seq;
}

}  // namespace teamvec::lexical
