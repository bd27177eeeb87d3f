#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "teamvec/corpus.hpp"
#include "teamvec/embedding.hpp"
#include "teamvec/entrainment.hpp"
#include "teamvec/lexical.hpp"
#include "teamvec/models.hpp"
#include "teamvec/tokens.hpp"

namespace teamvec::pipeline {

/// Location of the shipped data artifacts (sentiment lexicon, negator list,
/// POS rule tables, tag inventory). Falls back to the build-time default.
std::string default_data_dir();

/// All flat configuration of a full run. Unknown keys in from_kv are
/// rejected; every default is documented in the README.
struct PipelineConfig {
  std::string corpus_path;
  corpus::FileFormat format = corpus::FileFormat::Jsonl;
  std::string data_dir;  // empty: default_data_dir()
  std::vector<models::Feature> features = {models::Feature::DA,
                                           models::Feature::Sentiment,
                                           models::Feature::Entrainment};
  std::vector<corpus::PhaseKind> phases = {
      corpus::PhaseKind::Whole, corpus::PhaseKind::Initial,
      corpus::PhaseKind::Middle, corpus::PhaseKind::End};
  std::string da_model_path;  // pre-trained DA baseline (JSON)
  std::string da_train_path;  // SwDA-format TSV to train the baseline on
  bool da_pretagged = false;  // use da_tag fields carried by the corpus
  embedding::Doc2VecConfig doc2vec;
  models::ModelKind classifier = models::ModelKind::SVM;
  models::TrainConfig classifier_config;
  size_t cv_folds = 5;
  corpus::SplitRule split = corpus::SplitRule::Median;
  bool standardize = true;  // z-score embedding dimensions before the
                            // classifier (label-free)
  size_t runs = 0;  // when > 0, also collect an n-run accuracy distribution
  uint64_t master_seed = 7;

  static PipelineConfig from_kv(
      const std::map<std::string, std::string>& kv);
};

/// The shipped artifacts plus whichever dialogue-act source the
/// configuration selected.
struct FeaturizeContext {
  lexical::PosTagger tagger;
  lexical::SentimentLexicon lexicon;
  std::vector<std::string> tag_inventory;
  std::optional<lexical::DAClassifier> da_model;
  bool da_pretagged = false;

  static FeaturizeContext make(const PipelineConfig& config);
};

/// One token document per transcript for the requested feature and phase,
/// ids "team_id:session_id", in corpus order.
std::vector<TokenDoc> featurize(
    const std::vector<corpus::Transcript>& transcripts,
    models::Feature feature, corpus::PhaseKind phase,
    const FeaturizeContext& ctx);

/// +1 for HighPerforming (low conflict), -1 for LowPerforming. Every
/// transcript must carry an outcome score.
std::vector<int> labels_for(const std::vector<corpus::Transcript>& transcripts,
                            corpus::SplitRule rule);

struct ReportCell {
  models::Feature feature;
  corpus::PhaseKind phase;
  double accuracy = 0.0;
  std::vector<models::EvalRun> runs;  // present when config.runs > 0
};

struct EvalReport {
  uint64_t master_seed = 0;
  std::string corpus_path;
  std::string classifier;
  size_t cv_folds = 5;
  std::vector<ReportCell> cells;  // phase-major, feature-minor order
};

/// Embeds and cross-validates every requested (feature x phase) cell.
EvalReport run_pipeline(const PipelineConfig& config);

void write_report_csv(const std::string& path, const EvalReport& report);
void write_report_json(const std::string& path, const EvalReport& report);

/// Top-2 principal components of the mean-centered embeddings, n x 2.
/// Deterministic: each component's largest-magnitude loading is positive.
models::Matrix project_2d(const models::Matrix& embeddings);

// Docs TSV ("id<TAB>space-joined tokens") and embeddings CSV
// ("team_id,session_id,v_0..v_{dim-1}"; the doc id splits at the first ':').
void save_docs_tsv(const std::string& path, const std::vector<TokenDoc>& docs);
std::vector<TokenDoc> load_docs_tsv(const std::string& path);
void save_embeddings_csv(const std::string& path,
                         const std::vector<std::string>& doc_ids,
                         const models::Matrix& vectors);
std::pair<std::vector<std::string>, models::Matrix> load_embeddings_csv(
    const std::string& path);

}  // namespace teamvec::pipeline
