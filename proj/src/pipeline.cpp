#include "teamvec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "teamvec/errors.hpp"
#include "teamvec/rng.hpp"

namespace teamvec::pipeline {

using models::Feature;
using models::Matrix;

std::string default_data_dir() {
  if (const char* env = std::getenv("TEAMVEC_DATA")) return env;
#ifdef TEAMVEC_DEFAULT_DATA_DIR
  return TEAMVEC_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

namespace {

Feature parse_feature(const std::string& s) {
  if (s == "da") return Feature::DA;
  if (s == "sentiment") return Feature::Sentiment;
  if (s == "entrainment") return Feature::Entrainment;
  throw UsageError("unknown feature: " + s +
                   " (expected da|sentiment|entrainment)");
}

corpus::PhaseKind parse_phase(const std::string& s) {
  if (s == "whole") return corpus::PhaseKind::Whole;
  if (s == "initial") return corpus::PhaseKind::Initial;
  if (s == "middle") return corpus::PhaseKind::Middle;
  if (s == "end") return corpus::PhaseKind::End;
  throw UsageError("unknown phase: " + s +
                   " (expected whole|initial|middle|end)");
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError("key " + key + " expects true or false, got " + s);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_kv(
    const std::map<std::string, std::string>& kv) {
  PipelineConfig c;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "corpus") c.corpus_path = value;
      else if (key == "format") {
        if (value == "jsonl") c.format = corpus::FileFormat::Jsonl;
        else if (value == "csv") c.format = corpus::FileFormat::Csv;
        else throw UsageError("format must be jsonl or csv");
      } else if (key == "data_dir") c.data_dir = value;
      else if (key == "features") {
        c.features.clear();
        for (const auto& f : split_list(value)) {
          c.features.push_back(parse_feature(f));
        }
        if (c.features.empty()) throw UsageError("empty feature list");
      } else if (key == "phases") {
        c.phases.clear();
        for (const auto& p : split_list(value)) {
          c.phases.push_back(parse_phase(p));
        }
        if (c.phases.empty()) throw UsageError("empty phase list");
      } else if (key == "da_model") c.da_model_path = value;
      else if (key == "da_train") c.da_train_path = value;
      else if (key == "da_pretagged") c.da_pretagged = parse_bool(key, value);
      else if (key == "dim") c.doc2vec.dim = std::stoul(value);
      else if (key == "window") c.doc2vec.window = std::stoul(value);
      else if (key == "epochs") c.doc2vec.epochs = std::stoi(value);
      else if (key == "negative") c.doc2vec.negative = std::stoi(value);
      else if (key == "learning_rate") c.doc2vec.initial_lr = std::stod(value);
      else if (key == "min_count") c.doc2vec.min_count = std::stoul(value);
      else if (key == "threads") c.doc2vec.threads = std::stoi(value);
      else if (key == "mode") {
        if (value == "pvdm") c.doc2vec.mode = embedding::Doc2VecMode::PVDM;
        else if (value == "pvdbow") {
          c.doc2vec.mode = embedding::Doc2VecMode::PVDBOW;
        } else throw UsageError("mode must be pvdm or pvdbow");
      } else if (key == "classifier") {
        if (value == "svm") c.classifier = models::ModelKind::SVM;
        else if (value == "logreg") c.classifier = models::ModelKind::LogReg;
        else throw UsageError("classifier must be svm or logreg");
      } else if (key == "lambda") c.classifier_config.lambda = std::stod(value);
      else if (key == "classifier_epochs") {
        c.classifier_config.epochs = std::stoi(value);
      } else if (key == "classifier_lr") {
        c.classifier_config.learning_rate = std::stod(value);
      } else if (key == "cv_folds") c.cv_folds = std::stoul(value);
      else if (key == "split") {
        if (value == "median") c.split = corpus::SplitRule::Median;
        else if (value == "sign") c.split = corpus::SplitRule::Sign;
        else throw UsageError("split must be median or sign");
      } else if (key == "standardize") {
        c.standardize = parse_bool(key, value);
      } else if (key == "runs") c.runs = std::stoul(value);
      else if (key == "seed") c.master_seed = std::stoull(value);
      else throw UsageError("unknown configuration key: " + key);
    } catch (const std::invalid_argument&) {
      throw UsageError("key " + key + " has a malformed value: " + value);
    } catch (const std::out_of_range&) {
      throw UsageError("key " + key + " has an out-of-range value: " + value);
    }
  }
  return c;
}

FeaturizeContext FeaturizeContext::make(const PipelineConfig& config) {
  const std::string dir =
      config.data_dir.empty() ? default_data_dir() : config.data_dir;
  FeaturizeContext ctx{
      lexical::PosTagger::load(dir + "/pos_words.tsv",
                               dir + "/pos_suffixes.tsv"),
      lexical::SentimentLexicon::load(dir + "/sentiment_lexicon.tsv",
                                      dir + "/negators.txt"),
      lexical::load_tag_inventory(dir + "/damsl_tags.txt"),
      std::nullopt,
      config.da_pretagged};
  if (ctx.da_pretagged) return ctx;
  if (!config.da_model_path.empty()) {
    ctx.da_model = lexical::DAClassifier::load(config.da_model_path);
  } else if (!config.da_train_path.empty()) {
    lexical::DaTrainConfig train_config;
    train_config.seed = derive_seed(config.master_seed, "da-train");
    ctx.da_model = lexical::DAClassifier::train(
        lexical::load_da_corpus(config.da_train_path), ctx.tag_inventory,
        train_config);
  }
  return ctx;
}

std::vector<TokenDoc> featurize(
    const std::vector<corpus::Transcript>& transcripts,
    models::Feature feature, corpus::PhaseKind phase,
    const FeaturizeContext& ctx) {
  std::vector<TokenDoc> docs;
  docs.reserve(transcripts.size());

  if (feature == Feature::Entrainment) {
    std::vector<entrainment::KernelVector> team_vectors;
    team_vectors.reserve(transcripts.size());
    double katz_min = std::numeric_limits<double>::infinity();
    double katz_max = -std::numeric_limits<double>::infinity();
    for (const auto& t : transcripts) {
      const auto sliced = corpus::phase_slice(t, phase);
      const auto graph = entrainment::build_graph(sliced, ctx.tagger);
      const auto tv = entrainment::team_vector(graph);
      katz_min = std::min(katz_min, tv.katz);
      katz_max = std::max(katz_max, tv.katz);
      team_vectors.push_back(tv);
    }
    for (size_t i = 0; i < transcripts.size(); ++i) {
      docs.push_back(TokenDoc{
          transcripts[i].team_id + ":" + transcripts[i].session_id,
          entrainment::entrainment_tokens(team_vectors[i], katz_min,
                                          katz_max)});
    }
    return docs;
  }

  for (const auto& t : transcripts) {
    const auto sliced = corpus::phase_slice(t, phase);
    TokenDoc doc;
    doc.id = t.team_id + ":" + t.session_id;
    if (feature == Feature::Sentiment) {
      doc.tokens = lexical::sentiment_sequence(sliced, ctx.lexicon);
    } else {
      if (ctx.da_pretagged) {
        doc.tokens = lexical::da_sequence_pretagged(sliced, ctx.tag_inventory);
      } else if (ctx.da_model) {
        doc.tokens = lexical::da_sequence(sliced, *ctx.da_model);
      } else {
        throw UsageError(
            "dialogue-act featurization needs a DA model (da_model or "
            "da_train) or a pre-tagged corpus (da_pretagged)");
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<int> labels_for(const std::vector<corpus::Transcript>& transcripts,
                            corpus::SplitRule rule) {
  std::vector<corpus::ConflictScore> scores;
  scores.reserve(transcripts.size());
  for (const auto& t : transcripts) {
    if (!t.outcome) {
      throw DataError("team " + t.team_id + " session " + t.session_id +
                      " has no process_conflict_z; cannot label outcomes");
    }
    scores.push_back(*t.outcome);
  }
  const auto labels = corpus::binarize_outcomes(scores, rule);
  std::vector<int> y;
  y.reserve(labels.size());
  for (auto label : labels) {
    y.push_back(label == corpus::ConflictLabel::HighPerforming ? 1 : -1);
  }
  return y;
}

EvalReport run_pipeline(const PipelineConfig& config) {
  if (config.corpus_path.empty()) {
    throw UsageError("run_pipeline needs a corpus path");
  }
  const auto transcripts =
      corpus::load_transcripts(config.corpus_path, config.format);
  if (transcripts.empty()) {
    throw DataError("corpus is empty: " + config.corpus_path);
  }
  const auto ctx = FeaturizeContext::make(config);
  const auto y = labels_for(transcripts, config.split);

  EvalReport report;
  report.master_seed = config.master_seed;
  report.corpus_path = config.corpus_path;
  report.classifier =
      config.classifier == models::ModelKind::SVM ? "svm" : "logreg";
  report.cv_folds = config.cv_folds;

  for (auto phase : config.phases) {
    for (auto feature : config.features) {
      const auto docs = featurize(transcripts, feature, phase, ctx);
      std::vector<TokenSequence> sequences;
      sequences.reserve(docs.size());
      for (const auto& d : docs) sequences.push_back(d.tokens);

      auto eval_at = [&](uint64_t seed) {
        embedding::Doc2VecConfig d2v = config.doc2vec;
        d2v.seed = derive_seed(seed, "embed");
        auto model = embedding::train(sequences, d2v);
        if (config.standardize) models::standardize(model.doc_vecs);
        return models::cross_validate(model.doc_vecs, y, config.cv_folds,
                                      derive_seed(seed, "cv"),
                                      config.classifier,
                                      config.classifier_config);
      };

      const std::string cell_name = std::string(models::to_string(feature)) +
                                    "-" + corpus::to_string(phase);
      ReportCell cell;
      cell.feature = feature;
      cell.phase = phase;
      cell.accuracy = eval_at(derive_seed(config.master_seed, cell_name));
      if (config.runs > 0) {
        cell.runs = models::repeated_eval(
            eval_at, config.runs,
            derive_seed(config.master_seed, cell_name + "-runs"), feature,
            phase);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void write_report_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  out << "# teamvec report\n";
  out << "# master_seed=" << report.master_seed << "\n";
  out << "# corpus=" << report.corpus_path << "\n";
  out << "# classifier=" << report.classifier << "\n";
  out << "# cv_folds=" << report.cv_folds << "\n";

  // Rebuild the requested grid in cell order: phases are rows, features
  // columns.
  std::vector<corpus::PhaseKind> phases;
  std::vector<models::Feature> features;
  for (const auto& c : report.cells) {
    if (std::find(phases.begin(), phases.end(), c.phase) == phases.end()) {
      phases.push_back(c.phase);
    }
    if (std::find(features.begin(), features.end(), c.feature) ==
        features.end()) {
      features.push_back(c.feature);
    }
  }
  out << "phase";
  for (auto f : features) out << "," << models::to_string(f);
  out << "\n";
  for (auto p : phases) {
    out << corpus::to_string(p);
    for (auto f : features) {
      auto it = std::find_if(report.cells.begin(), report.cells.end(),
                             [&](const ReportCell& c) {
                               return c.phase == p && c.feature == f;
                             });
      if (it == report.cells.end()) {
        out << ",";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", it->accuracy);
        out << "," << buf;
      }
    }
    out << "\n";
  }
}

void write_report_json(const std::string& path, const EvalReport& report) {
  nlohmann::json j;
  j["master_seed"] = report.master_seed;
  j["corpus"] = report.corpus_path;
  j["classifier"] = report.classifier;
  j["cv_folds"] = report.cv_folds;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json cell;
    cell["feature"] = models::to_string(c.feature);
    cell["phase"] = corpus::to_string(c.phase);
    cell["accuracy"] = c.accuracy;
    if (!c.runs.empty()) {
      cell["runs"] = nlohmann::json::array();
      for (const auto& r : c.runs) {
        cell["runs"].push_back({{"seed", r.seed}, {"accuracy", r.accuracy}});
      }
    }
    j["cells"].push_back(cell);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

namespace {

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Leading eigenvector of a symmetric PSD matrix by power iteration,
// optionally constrained orthogonal to a previous component.
std::vector<double> power_component(const Matrix& cov,
                                    const std::vector<double>* orthogonal_to) {
  const size_t d = cov.size();
  std::vector<double> v(d);
  for (size_t i = 0; i < d; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
  auto orthogonalize = [&](std::vector<double>& w) {
    if (!orthogonal_to) return;
    const double proj = vec_dot(w, *orthogonal_to);
    for (size_t i = 0; i < d; ++i) w[i] -= proj * (*orthogonal_to)[i];
  };
  auto normalize = [&](std::vector<double>& w) {
    const double norm = std::sqrt(vec_dot(w, w));
    if (norm < 1e-300) return false;
    for (double& x : w) x /= norm;
    return true;
  };
  orthogonalize(v);
  if (!normalize(v)) {
    // Degenerate start (can only happen when d == 1 with a constraint);
    // the projection is zero everywhere anyway.
    return std::vector<double>(d, 0.0);
  }
  for (int iter = 0; iter < 10000; ++iter) {
    std::vector<double> w(d, 0.0);
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = 0; j < d; ++j) w[i] += cov[i][j] * v[j];
    }
    orthogonalize(w);
    if (!normalize(w)) break;  // no variance left in this subspace
    const double align = std::fabs(vec_dot(w, v));
    v = std::move(w);
    if (align > 1.0 - 1e-15) break;
  }
  // Sign convention: the largest-magnitude loading is positive.
  size_t arg = 0;
  for (size_t i = 1; i < d; ++i) {
    if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
  return v;
}

}  // namespace

Matrix project_2d(const Matrix& embeddings) {
  const size_t n = embeddings.size();
  if (n == 0) return {};
  const size_t d = embeddings[0].size();

  std::vector<double> mean(d, 0.0);
  for (const auto& row : embeddings) {
    if (row.size() != d) throw DataError("ragged embedding matrix");
    for (size_t i = 0; i < d; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix centered(n, std::vector<double>(d));
  for (size_t r = 0; r < n; ++r) {
    for (size_t i = 0; i < d; ++i) centered[r][i] = embeddings[r][i] - mean[i];
  }

  Matrix cov(d, std::vector<double>(d, 0.0));
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (size_t r = 0; r < n; ++r) {
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = i; j < d; ++j) {
        cov[i][j] += centered[r][i] * centered[r][j] / denom;
      }
    }
  }
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < i; ++j) cov[i][j] = cov[j][i];
  }

  const auto v1 = power_component(cov, nullptr);
  const auto v2 = power_component(cov, &v1);

  Matrix projected(n, std::vector<double>(2, 0.0));
  for (size_t r = 0; r < n; ++r) {
    projected[r][0] = vec_dot(centered[r], v1);
    projected[r][1] = vec_dot(centered[r], v2);
  }
  return projected;
}

void save_docs_tsv(const std::string& path,
                   const std::vector<TokenDoc>& docs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write docs file: " + path);
  for (const auto& d : docs) {
    out << d.id << "\t";
    for (size_t i = 0; i < d.tokens.size(); ++i) {
      if (i > 0) out << " ";
      out << d.tokens[i];
    }
    out << "\n";
  }
}

std::vector<TokenDoc> load_docs_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open docs file: " + path);
  std::vector<TokenDoc> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": expected \"id<TAB>tokens\"");
    }
    TokenDoc d;
    d.id = line.substr(0, tab);
    std::stringstream ss(line.substr(tab + 1));
    std::string tok;
    while (ss >> tok) d.tokens.push_back(tok);
    docs.push_back(std::move(d));
  }
  return docs;
}

void save_embeddings_csv(const std::string& path,
                         const std::vector<std::string>& doc_ids,
                         const Matrix& vectors) {
  if (doc_ids.size() != vectors.size()) {
    throw DataError("doc id and vector counts differ");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings: " + path);
  const size_t dim = vectors.empty() ? 0 : vectors[0].size();
  out << "team_id,session_id";
  for (size_t i = 0; i < dim; ++i) out << ",v_" << i;
  out << "\n";
  for (size_t r = 0; r < vectors.size(); ++r) {
    const auto colon = doc_ids[r].find(':');
    const std::string team =
        colon == std::string::npos ? doc_ids[r] : doc_ids[r].substr(0, colon);
    const std::string session =
        colon == std::string::npos ? "" : doc_ids[r].substr(colon + 1);
    out << team << "," << session;
    for (double v : vectors[r]) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

std::pair<std::vector<std::string>, Matrix> load_embeddings_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings: " + path);
  std::vector<std::string> ids;
  Matrix vectors;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;  // header
    std::stringstream ss(line);
    std::string team, session, cell;
    if (!std::getline(ss, team, ',') || !std::getline(ss, session, ',')) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": expected team_id,session_id,v_0,...");
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path + " line " + std::to_string(line_no) +
                        ": malformed number " + cell);
      }
    }
    if (row.empty()) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": no vector components");
    }
    ids.push_back(session.empty() ? team : team + ":" + session);
    vectors.push_back(std::move(row));
  }
  return {std::move(ids), std::move(vectors)};
}

}  // namespace teamvec::pipeline
