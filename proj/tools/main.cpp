// teamvec: predicts team conflict from multiparty dialogue transcripts by
// embedding dialogue-act, sentiment-polarity, and entrainment-graph token
// sequences and classifying teams per teamwork phase.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "teamvec/corpus.hpp"
#include "teamvec/embedding.hpp"
#include "teamvec/entrainment.hpp"
#include "teamvec/errors.hpp"
#include "teamvec/lexical.hpp"
#include "teamvec/models.hpp"
#include "teamvec/pipeline.hpp"
#include "teamvec/rng.hpp"
#include "teamvec/stats.hpp"
#include "teamvec/synth.hpp"

namespace fs = std::filesystem;
using namespace teamvec;

namespace {

corpus::FileFormat parse_format(const std::string& s) {
  if (s == "jsonl") return corpus::FileFormat::Jsonl;
  if (s == "csv") return corpus::FileFormat::Csv;
  throw UsageError("format must be jsonl or csv");
}

models::Feature parse_feature(const std::string& s) {
  if (s == "da") return models::Feature::DA;
  if (s == "sentiment") return models::Feature::Sentiment;
  if (s == "entrainment") return models::Feature::Entrainment;
  throw UsageError("feature must be da, sentiment, or entrainment");
}

corpus::PhaseKind parse_phase(const std::string& s) {
  if (s == "whole") return corpus::PhaseKind::Whole;
  if (s == "initial") return corpus::PhaseKind::Initial;
  if (s == "middle") return corpus::PhaseKind::Middle;
  if (s == "end") return corpus::PhaseKind::End;
  throw UsageError("phase must be whole, initial, middle, or end");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + " line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Common flag bundle for commands that need dialogue-act featurization.
struct DaFlags {
  std::string model_path;
  std::string train_path;
  bool pretagged = false;
};

std::string sanitize_for_filename(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"team conflict prediction from multiparty dialogue"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- ingest
  auto* ingest = app.add_subcommand(
      "ingest", "validate a transcript file and summarize it");
  std::string in_path, in_format = "jsonl", ingest_out;
  bool allow_empty = false;
  ingest->add_option("--input", in_path, "transcript file")->required();
  ingest->add_option("--format", in_format, "jsonl or csv");
  ingest->add_option("--out", ingest_out, "write normalized JSONL here");
  ingest->add_flag("--allow-empty-text", allow_empty,
                   "accept records with empty text");
  ingest->callback([&] {
    corpus::LoadOptions opts;
    opts.allow_empty_text = allow_empty;
    auto transcripts =
        corpus::load_transcripts(in_path, parse_format(in_format), opts);
    size_t utterances = 0;
    for (const auto& t : transcripts) {
      utterances += t.size();
      std::printf("%s:%s  utterances=%zu speakers=%zu%s\n", t.team_id.c_str(),
                  t.session_id.c_str(), t.size(), t.speakers().size(),
                  t.outcome ? "" : " (no outcome score)");
    }
    std::printf("total: %zu transcripts, %zu utterances\n", transcripts.size(),
                utterances);
    if (!ingest_out.empty()) {
      corpus::save_transcripts_jsonl(ingest_out, transcripts);
    }
  });

  // ------------------------------------------------------------- featurize
  auto* featurize = app.add_subcommand(
      "featurize", "turn transcripts into token documents for the embedder");
  std::string ft_input, ft_format = "jsonl", ft_feature, ft_phase = "whole";
  std::string ft_out, ft_data_dir, ft_graph_dir, ft_da_model_out;
  DaFlags ft_da;
  uint64_t ft_seed = 7;
  featurize->add_option("--input", ft_input, "transcript file")->required();
  featurize->add_option("--format", ft_format, "jsonl or csv");
  featurize->add_option("--feature", ft_feature, "da|sentiment|entrainment")
      ->required();
  featurize->add_option("--phase", ft_phase, "whole|initial|middle|end");
  featurize->add_option("--out", ft_out, "output docs TSV")->required();
  featurize->add_option("--data-dir", ft_data_dir,
                        "directory with the shipped lexicons");
  featurize->add_option("--da-model", ft_da.model_path,
                        "pre-trained DA classifier JSON");
  featurize->add_option("--da-train", ft_da.train_path,
                        "train the DA baseline on this text<TAB>tag TSV");
  featurize->add_option("--da-model-out", ft_da_model_out,
                        "save the trained DA classifier here");
  featurize->add_flag("--pretagged", ft_da.pretagged,
                      "use da_tag fields carried by the corpus");
  featurize->add_option("--graph-dir", ft_graph_dir,
                        "dump entrainment graphs (DOT + JSON) here");
  featurize->add_option("--seed", ft_seed, "seed for DA baseline training");
  featurize->callback([&] {
    pipeline::PipelineConfig config;
    config.data_dir = ft_data_dir;
    config.da_model_path = ft_da.model_path;
    config.da_train_path = ft_da.train_path;
    config.da_pretagged = ft_da.pretagged;
    config.master_seed = ft_seed;
    auto ctx = pipeline::FeaturizeContext::make(config);
    auto transcripts =
        corpus::load_transcripts(ft_input, parse_format(ft_format));
    auto feature = parse_feature(ft_feature);
    auto phase = parse_phase(ft_phase);
    auto docs = pipeline::featurize(transcripts, feature, phase, ctx);
    pipeline::save_docs_tsv(ft_out, docs);
    std::printf("wrote %zu documents to %s\n", docs.size(), ft_out.c_str());
    if (!ft_da_model_out.empty()) {
      if (!ctx.da_model) {
        throw UsageError("--da-model-out needs --da-train or --da-model");
      }
      ctx.da_model->save(ft_da_model_out);
    }
    if (!ft_graph_dir.empty()) {
      if (feature != models::Feature::Entrainment) {
        throw UsageError("--graph-dir applies to --feature entrainment");
      }
      fs::create_directories(ft_graph_dir);
      for (const auto& t : transcripts) {
        auto sliced = corpus::phase_slice(t, phase);
        auto graph = entrainment::build_graph(sliced, ctx.tagger);
        const std::string stem = ft_graph_dir + "/" +
                                 sanitize_for_filename(t.team_id) + "_" +
                                 sanitize_for_filename(t.session_id);
        std::ofstream dot(stem + ".dot");
        dot << entrainment::to_dot(graph);
        std::ofstream js(stem + ".json");
        js << entrainment::to_json(graph);
      }
      std::printf("wrote %zu graphs to %s\n", transcripts.size(),
                  ft_graph_dir.c_str());
    }
  });

  // ------------------------------------------------------------------ embed
  auto* embed = app.add_subcommand(
      "embed", "train a paragraph-vector model over token documents");
  std::string em_docs, em_out, em_model_out, em_mode = "pvdm";
  embedding::Doc2VecConfig em_config;
  embed->add_option("--docs", em_docs, "docs TSV from featurize")->required();
  embed->add_option("--out", em_out, "output embeddings CSV")->required();
  embed->add_option("--model-out", em_model_out, "save the model JSON here");
  embed->add_option("--dim", em_config.dim, "vector dimensionality");
  embed->add_option("--window", em_config.window, "context window size");
  embed->add_option("--epochs", em_config.epochs, "training epochs");
  embed->add_option("--negative", em_config.negative, "negative samples");
  embed->add_option("--lr", em_config.initial_lr, "initial learning rate");
  embed->add_option("--min-count", em_config.min_count,
                    "minimum token frequency");
  embed->add_option("--mode", em_mode, "pvdm or pvdbow");
  embed->add_option("--seed", em_config.seed, "training seed");
  embed->add_option("--threads", em_config.threads,
                    "worker threads (>1 is nondeterministic)");
  embed->callback([&] {
    if (em_mode == "pvdm") em_config.mode = embedding::Doc2VecMode::PVDM;
    else if (em_mode == "pvdbow") {
      em_config.mode = embedding::Doc2VecMode::PVDBOW;
    } else throw UsageError("mode must be pvdm or pvdbow");
    auto docs = pipeline::load_docs_tsv(em_docs);
    std::vector<TokenSequence> sequences;
    std::vector<std::string> ids;
    for (auto& d : docs) {
      ids.push_back(d.id);
      sequences.push_back(d.tokens);
    }
    auto model = embedding::train(sequences, em_config);
    model.doc_ids = ids;
    pipeline::save_embeddings_csv(em_out, ids, model.doc_vecs);
    std::printf("trained on %zu documents (vocab %zu); wrote %s\n",
                sequences.size(), model.vocab.size(), em_out.c_str());
    if (!em_model_out.empty()) model.save(em_model_out);
  });

  // --------------------------------------------------------------- evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "cross-validate a classifier over team embeddings");
  std::string ev_embeddings, ev_corpus, ev_format = "jsonl";
  std::string ev_classifier = "svm", ev_split = "median", ev_runs_out;
  std::string ev_feature = "da", ev_phase = "whole";
  size_t ev_folds = 5, ev_runs = 0;
  bool ev_loo = false, ev_raw = false;
  uint64_t ev_seed = 7;
  models::TrainConfig ev_train;
  evaluate->add_option("--embeddings", ev_embeddings, "embeddings CSV")
      ->required();
  evaluate->add_option("--corpus", ev_corpus, "transcript file with outcomes")
      ->required();
  evaluate->add_option("--format", ev_format, "jsonl or csv");
  evaluate->add_option("--classifier", ev_classifier, "svm or logreg");
  evaluate->add_option("--folds", ev_folds, "cross-validation folds");
  evaluate->add_flag("--loo", ev_loo, "leave-one-out cross-validation");
  evaluate->add_option("--split", ev_split, "median or sign binarization");
  evaluate->add_flag("--no-standardize", ev_raw,
                     "skip per-dimension z-scoring of the embeddings");
  evaluate->add_option("--lambda", ev_train.lambda, "L2 regularization");
  evaluate->add_option("--epochs", ev_train.epochs, "training epochs");
  evaluate->add_option("--lr", ev_train.learning_rate,
                       "logistic regression learning rate");
  evaluate->add_option("--seed", ev_seed, "seed");
  evaluate->add_option("--runs", ev_runs,
                       "also collect an n-run distribution (CV seed varies)");
  evaluate->add_option("--runs-out", ev_runs_out, "EvalRun CSV output");
  evaluate->add_option("--feature", ev_feature,
                       "feature label for the runs CSV");
  evaluate->add_option("--phase", ev_phase, "phase label for the runs CSV");
  evaluate->callback([&] {
    auto [ids, vectors] = pipeline::load_embeddings_csv(ev_embeddings);
    auto transcripts =
        corpus::load_transcripts(ev_corpus, parse_format(ev_format));
    std::map<std::string, const corpus::Transcript*> by_id;
    for (const auto& t : transcripts) {
      by_id[t.team_id + ":" + t.session_id] = &t;
    }
    std::vector<corpus::Transcript> matched;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw DataError("embedding row " + id + " has no transcript");
      }
      matched.push_back(*it->second);
    }
    auto rule = ev_split == "sign" ? corpus::SplitRule::Sign
                                   : corpus::SplitRule::Median;
    auto y = pipeline::labels_for(matched, rule);
    if (!ev_raw) models::standardize(vectors);
    auto kind = ev_classifier == "logreg" ? models::ModelKind::LogReg
                                          : models::ModelKind::SVM;
    const size_t folds = ev_loo ? y.size() : ev_folds;
    double acc =
        models::cross_validate(vectors, y, folds, ev_seed, kind, ev_train);
    std::printf("cv_accuracy=%.6f (k=%zu, n=%zu)\n", acc, folds, y.size());
    if (ev_runs > 0) {
      auto runs = models::repeated_eval(
          [&](uint64_t seed) {
            return models::cross_validate(vectors, y, folds, seed, kind,
                                          ev_train);
          },
          ev_runs, ev_seed, parse_feature(ev_feature), parse_phase(ev_phase));
      if (ev_runs_out.empty()) {
        throw UsageError("--runs needs --runs-out for the EvalRun CSV");
      }
      models::save_eval_runs_csv(ev_runs_out, runs);
      std::printf("wrote %zu runs to %s\n", runs.size(), ev_runs_out.c_str());
    }
  });

  // ----------------------------------------------------------------- report
  auto* report = app.add_subcommand(
      "report", "full pipeline: accuracy per (feature x phase) cell");
  std::string rp_corpus, rp_format, rp_out_dir = ".", rp_config_path;
  std::string rp_features, rp_phases, rp_classifier, rp_split, rp_mode;
  std::string rp_data_dir, rp_da_model, rp_da_train;
  bool rp_pretagged = false;
  std::string rp_dim, rp_window, rp_epochs, rp_negative, rp_runs, rp_seed;
  std::string rp_folds;
  report->add_option("--corpus", rp_corpus, "transcript file");
  report->add_option("--format", rp_format, "jsonl or csv");
  report->add_option("--config", rp_config_path, "key=value config file");
  report->add_option("--out-dir", rp_out_dir, "where report files go");
  report->add_option("--features", rp_features,
                     "comma list: da,sentiment,entrainment");
  report->add_option("--phases", rp_phases,
                     "comma list: whole,initial,middle,end");
  report->add_option("--classifier", rp_classifier, "svm or logreg");
  report->add_option("--split", rp_split, "median or sign");
  report->add_option("--mode", rp_mode, "pvdm or pvdbow");
  report->add_option("--data-dir", rp_data_dir, "shipped data directory");
  report->add_option("--da-model", rp_da_model, "pre-trained DA model");
  report->add_option("--da-train", rp_da_train, "DA training TSV");
  report->add_flag("--pretagged", rp_pretagged, "use carried da_tag fields");
  report->add_option("--dim", rp_dim, "doc2vec dimensionality");
  report->add_option("--window", rp_window, "doc2vec window");
  report->add_option("--epochs", rp_epochs, "doc2vec epochs");
  report->add_option("--negative", rp_negative, "doc2vec negative samples");
  report->add_option("--cv-folds", rp_folds, "cross-validation folds");
  report->add_option("--runs", rp_runs, "n-run distributions per cell");
  report->add_option("--seed", rp_seed, "master seed");
  report->callback([&] {
    std::map<std::string, std::string> kv;
    if (!rp_config_path.empty()) kv = read_config_file(rp_config_path);
    auto set_if = [&](const char* key, const std::string& v) {
      if (!v.empty()) kv[key] = v;
    };
    set_if("corpus", rp_corpus);
    set_if("format", rp_format);
    set_if("features", rp_features);
    set_if("phases", rp_phases);
    set_if("classifier", rp_classifier);
    set_if("split", rp_split);
    set_if("mode", rp_mode);
    set_if("data_dir", rp_data_dir);
    set_if("da_model", rp_da_model);
    set_if("da_train", rp_da_train);
    if (rp_pretagged) kv["da_pretagged"] = "true";
    set_if("dim", rp_dim);
    set_if("window", rp_window);
    set_if("epochs", rp_epochs);
    set_if("negative", rp_negative);
    set_if("cv_folds", rp_folds);
    set_if("runs", rp_runs);
    set_if("seed", rp_seed);

    auto config = pipeline::PipelineConfig::from_kv(kv);
    auto result = pipeline::run_pipeline(config);
    fs::create_directories(rp_out_dir);
    pipeline::write_report_csv(rp_out_dir + "/report.csv", result);
    pipeline::write_report_json(rp_out_dir + "/report.json", result);
    for (const auto& cell : result.cells) {
      std::printf("%-12s %-8s accuracy=%.6f\n",
                  models::to_string(cell.feature),
                  corpus::to_string(cell.phase), cell.accuracy);
      if (!cell.runs.empty()) {
        models::save_eval_runs_csv(
            rp_out_dir + "/runs_" +
                std::string(models::to_string(cell.feature)) + "_" +
                corpus::to_string(cell.phase) + ".csv",
            cell.runs);
      }
    }
    std::printf("report written to %s\n", rp_out_dir.c_str());
  });

  // ------------------------------------------------------------------ synth
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate a synthetic corpus with a planted conflict signal");
  std::string sy_out, sy_da_out;
  synth::SynthConfig sy_config;
  size_t sy_da_copies = 3;
  synth_cmd->add_option("--out", sy_out, "output JSONL")->required();
  synth_cmd->add_option("--teams", sy_config.n_teams, "number of teams");
  synth_cmd->add_option("--team-size", sy_config.team_size, "3 or 4");
  synth_cmd->add_option("--min-utt", sy_config.min_utterances,
                        "min utterances per dialogue");
  synth_cmd->add_option("--max-utt", sy_config.max_utterances,
                        "max utterances per dialogue");
  synth_cmd->add_option("--separation", sy_config.separation,
                        "signal strength in [0,1]");
  synth_cmd->add_option("--seed", sy_config.seed, "generator seed");
  synth_cmd->add_option("--da-train-out", sy_da_out,
                        "also emit a DA training TSV from the templates");
  synth_cmd->add_option("--da-copies", sy_da_copies,
                        "template passes in the DA training TSV");
  synth_cmd->callback([&] {
    auto transcripts = synth::generate(sy_config);
    corpus::save_transcripts_jsonl(sy_out, transcripts);
    std::printf("wrote %zu transcripts to %s\n", transcripts.size(),
                sy_out.c_str());
    if (!sy_da_out.empty()) {
      auto pairs = synth::da_training_corpus(
          sy_da_copies, derive_seed(sy_config.seed, "da-train-corpus"));
      std::ofstream out(sy_da_out);
      if (!out) throw DataError("cannot write " + sy_da_out);
      for (const auto& [text, tag] : pairs) {
        out << text << "\t" << tag << "\n";
      }
      std::printf("wrote %zu DA training pairs to %s\n", pairs.size(),
                  sy_da_out.c_str());
    }
  });

  // ------------------------------------------------------------------ stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "significance tests over EvalRun CSV files");
  stats_cmd->require_subcommand(1);
  auto* ks = stats_cmd->add_subcommand(
      "ks", "two-sample Kolmogorov-Smirnov test");
  std::string ks_a, ks_b;
  ks->add_option("--a", ks_a, "first EvalRun CSV")->required();
  ks->add_option("--b", ks_b, "second EvalRun CSV")->required();
  ks->callback([&] {
    auto runs_a = models::load_eval_runs_csv(ks_a);
    auto runs_b = models::load_eval_runs_csv(ks_b);
    std::vector<double> a, b;
    for (const auto& r : runs_a) a.push_back(r.accuracy);
    for (const auto& r : runs_b) b.push_back(r.accuracy);
    auto result = stats::ks_two_sample(a, b);
    std::printf("D=%.6f p=%.6g\n", result.statistic, result.p_value);
  });
  auto* norm = stats_cmd->add_subcommand(
      "normality", "D'Agostino-Pearson normality test");
  std::string norm_input;
  norm->add_option("--input", norm_input, "EvalRun CSV")->required();
  norm->callback([&] {
    auto runs = models::load_eval_runs_csv(norm_input);
    std::vector<double> sample;
    for (const auto& r : runs) sample.push_back(r.accuracy);
    auto result = stats::dagostino_pearson(sample);
    std::printf("K2=%.6f p=%.6g\n", result.statistic, result.p_value);
  });

  // ---------------------------------------------------------------- project
  auto* project = app.add_subcommand(
      "project", "2-D principal-component projection of embeddings");
  std::string pj_embeddings, pj_corpus, pj_format = "jsonl", pj_out;
  std::string pj_split = "median";
  project->add_option("--embeddings", pj_embeddings, "embeddings CSV")
      ->required();
  project->add_option("--corpus", pj_corpus, "transcript file with outcomes")
      ->required();
  project->add_option("--format", pj_format, "jsonl or csv");
  project->add_option("--split", pj_split, "median or sign");
  project->add_option("--out", pj_out, "projection CSV")->required();
  project->callback([&] {
    auto [ids, vectors] = pipeline::load_embeddings_csv(pj_embeddings);
    auto transcripts =
        corpus::load_transcripts(pj_corpus, parse_format(pj_format));
    std::map<std::string, const corpus::Transcript*> by_id;
    for (const auto& t : transcripts) {
      by_id[t.team_id + ":" + t.session_id] = &t;
    }
    std::vector<corpus::Transcript> matched;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw DataError("embedding row " + id + " has no transcript");
      }
      matched.push_back(*it->second);
    }
    auto rule = pj_split == "sign" ? corpus::SplitRule::Sign
                                   : corpus::SplitRule::Median;
    auto y = pipeline::labels_for(matched, rule);
    auto projected = pipeline::project_2d(vectors);
    std::ofstream out(pj_out);
    if (!out) throw DataError("cannot write " + pj_out);
    out << "team_id,session_id,x,y,label\n";
    for (size_t i = 0; i < ids.size(); ++i) {
      const auto colon = ids[i].find(':');
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", projected[i][0],
                    projected[i][1]);
      out << (colon == std::string::npos ? ids[i] : ids[i].substr(0, colon))
          << ","
          << (colon == std::string::npos ? "" : ids[i].substr(colon + 1))
          << "," << buf << "," << (y[i] == 1 ? "high_performing" : "low_performing")
          << "\n";
    }
    std::printf("wrote %zu projected points to %s\n", ids.size(),
                pj_out.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags are usage errors
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
