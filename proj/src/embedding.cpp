#include "teamvec/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "json.hpp"
#include "teamvec/errors.hpp"
#include "teamvec/rng.hpp"

namespace teamvec::embedding {

using nlohmann::json;

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// -log sigmoid(x) = softplus(-x), computed without overflow.
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void validate(const Doc2VecConfig& c) {
  if (c.dim < 1) throw UsageError("doc2vec dim must be >= 1");
  if (c.window < 1) throw UsageError("doc2vec window must be >= 1");
  if (c.negative < 1) throw UsageError("doc2vec negative must be >= 1");
  if (c.epochs < 1) throw UsageError("doc2vec epochs must be >= 1");
  if (c.threads < 1) throw UsageError("doc2vec threads must be >= 1");
  if (!(c.initial_lr > 0.0)) throw UsageError("doc2vec learning rate must be > 0");
}

// Core of the objective: loss and exact gradients of one example given the
// document vector. Shared by training, inference, and loss_and_grad.
struct CoreGrads {
  double loss = 0.0;
  std::vector<double> d_doc;
  std::vector<std::pair<size_t, std::vector<double>>> d_words;  // word_in rows
  std::vector<std::pair<size_t, std::vector<double>>> d_out;    // out rows
};

CoreGrads example_grads(const std::vector<double>& doc_vec, const Matrix& w_in,
                        const Matrix& out, Doc2VecMode mode,
                        const TrainExample& ex) {
  const size_t dim = doc_vec.size();
  const bool use_context = mode == Doc2VecMode::PVDM;

  std::vector<double> hidden = doc_vec;
  double denom = 1.0;
  if (use_context) {
    for (size_t c : ex.context) {
      for (size_t i = 0; i < dim; ++i) hidden[i] += w_in[c][i];
    }
    denom = 1.0 + static_cast<double>(ex.context.size());
    for (double& h : hidden) h /= denom;
  }

  CoreGrads g;
  g.d_doc.assign(dim, 0.0);
  std::vector<double> d_hidden(dim, 0.0);

  // Accumulate output-row gradients; a token may repeat among negatives.
  std::map<size_t, std::vector<double>> out_grads;
  auto touch = [&](size_t id, double label) {
    const double logit = dot(hidden, out[id]);
    g.loss += softplus(label > 0.5 ? -logit : logit);
    const double err = sigmoid(logit) - label;  // dLoss/dLogit
    auto [it, inserted] = out_grads.emplace(id, std::vector<double>());
    if (inserted) it->second.assign(dim, 0.0);
    for (size_t i = 0; i < dim; ++i) {
      it->second[i] += err * hidden[i];
      d_hidden[i] += err * out[id][i];
    }
  };
  touch(ex.target, 1.0);
  for (size_t n : ex.negatives) touch(n, 0.0);

  for (size_t i = 0; i < dim; ++i) g.d_doc[i] = d_hidden[i] / denom;
  if (use_context) {
    std::map<size_t, std::vector<double>> word_grads;
    for (size_t c : ex.context) {
      auto [it, inserted] = word_grads.emplace(c, std::vector<double>());
      if (inserted) it->second.assign(dim, 0.0);
      for (size_t i = 0; i < dim; ++i) it->second[i] += d_hidden[i] / denom;
    }
    g.d_words.assign(word_grads.begin(), word_grads.end());
  }
  g.d_out.assign(out_grads.begin(), out_grads.end());
  return g;
}

std::vector<size_t> draw_negatives(const Vocabulary& vocab, size_t target,
                                   int count, Rng& rng) {
  std::vector<size_t> negatives;
  negatives.reserve(count);
  for (int i = 0; i < count; ++i) {
    size_t pick = target;
    for (int attempt = 0; attempt < 100 && pick == target; ++attempt) {
      pick = vocab.sample(rng.uniform());
    }
    if (pick != target) negatives.push_back(pick);
  }
  return negatives;
}

std::vector<std::vector<size_t>> encode_docs(
    const std::vector<TokenSequence>& docs, const Vocabulary& vocab) {
  std::vector<std::vector<size_t>> encoded(docs.size());
  for (size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      if (auto id = vocab.id_of(tok)) encoded[d].push_back(*id);
    }
  }
  return encoded;
}

void check_finite(const Matrix& m, const char* name) {
  for (const auto& row : m) {
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw std::runtime_error(std::string("non-finite value in ") + name +
                                 " matrix during training");
      }
    }
  }
}

}  // namespace

size_t Vocabulary::sample(double u) const {
  auto it = std::lower_bound(sampling_cdf.begin(), sampling_cdf.end(), u);
  if (it == sampling_cdf.end()) return sampling_cdf.size() - 1;
  return static_cast<size_t>(it - sampling_cdf.begin());
}

Vocabulary build_vocab(const std::vector<TokenSequence>& docs,
                       size_t min_count) {
  std::map<std::string, size_t> counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::pair<std::string, size_t>> kept;
  for (const auto& [tok, c] : counts) {
    if (c >= min_count) kept.emplace_back(tok, c);
  }
  if (kept.empty()) {
    throw DataError("no token survives min_count pruning; vocabulary empty");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (const auto& [tok, c] : kept) {
    v.ids[tok] = v.tokens.size();
    v.tokens.push_back(tok);
    v.freqs.push_back(c);
  }
  double total = 0.0;
  for (size_t c : v.freqs) total += std::pow(static_cast<double>(c), 0.75);
  double cum = 0.0;
  v.sampling_cdf.reserve(v.freqs.size());
  for (size_t c : v.freqs) {
    cum += std::pow(static_cast<double>(c), 0.75) / total;
    v.sampling_cdf.push_back(cum);
  }
  v.sampling_cdf.back() = 1.0;
  return v;
}

LossAndGrad loss_and_grad(const Doc2VecModel& model, const TrainExample& ex) {
  CoreGrads core = example_grads(model.doc_vecs[ex.doc], model.word_in,
                                 model.out, model.config.mode, ex);
  LossAndGrad out;
  out.loss = core.loss;
  out.grads.push_back(GradEntry{MatrixKind::Doc, ex.doc, std::move(core.d_doc)});
  for (auto& [row, grad] : core.d_words) {
    out.grads.push_back(GradEntry{MatrixKind::WordIn, row, std::move(grad)});
  }
  for (auto& [row, grad] : core.d_out) {
    out.grads.push_back(GradEntry{MatrixKind::Out, row, std::move(grad)});
  }
  return out;
}

Doc2VecModel train(const std::vector<TokenSequence>& docs,
                   const Doc2VecConfig& config) {
  validate(config);
  if (docs.empty()) throw DataError("doc2vec: empty corpus");

  Doc2VecModel model;
  model.config = config;
  model.vocab = build_vocab(docs, config.min_count);
  const auto encoded = encode_docs(docs, model.vocab);

  size_t positions_per_epoch = 0;
  for (const auto& e : encoded) positions_per_epoch += e.size();
  if (positions_per_epoch == 0) {
    throw DataError("doc2vec: no document survives vocabulary pruning");
  }

  const size_t dim = config.dim;
  const size_t vocab_size = model.vocab.size();
  Rng init_rng(derive_seed(config.seed, "doc2vec-init"));
  const double bound = 0.5 / static_cast<double>(dim);
  model.word_in.assign(vocab_size, std::vector<double>(dim, 0.0));
  for (auto& row : model.word_in) {
    for (double& v : row) v = init_rng.uniform_in(-bound, bound);
  }
  model.doc_vecs.assign(docs.size(), std::vector<double>(dim, 0.0));
  for (auto& row : model.doc_vecs) {
    for (double& v : row) v = init_rng.uniform_in(-bound, bound);
  }
  model.out.assign(vocab_size, std::vector<double>(dim, 0.0));

  const double total_positions =
      static_cast<double>(positions_per_epoch) * config.epochs;
  const double final_lr = 1e-4 * config.initial_lr;

  auto train_doc = [&](size_t doc_idx, Rng& rng, size_t& positions_done,
                       double& loss_sum, size_t& loss_count) {
    const auto& seq = encoded[doc_idx];
    for (size_t t = 0; t < seq.size(); ++t) {
      const double progress =
          static_cast<double>(positions_done) / total_positions;
      const double lr =
          config.initial_lr + (final_lr - config.initial_lr) * progress;
      ++positions_done;

      TrainExample ex;
      ex.doc = doc_idx;
      ex.target = seq[t];
      if (config.mode == Doc2VecMode::PVDM) {
        const size_t lo = t >= config.window ? t - config.window : 0;
        const size_t hi = std::min(seq.size() - 1, t + config.window);
        for (size_t j = lo; j <= hi; ++j) {
          if (j != t) ex.context.push_back(seq[j]);
        }
      }
      ex.negatives =
          draw_negatives(model.vocab, ex.target, config.negative, rng);

      CoreGrads g = example_grads(model.doc_vecs[doc_idx], model.word_in,
                                  model.out, config.mode, ex);
      loss_sum += g.loss;
      ++loss_count;
      const double mscale = 1.0 + static_cast<double>(ex.context.size());
      auto& dvec = model.doc_vecs[doc_idx];
      for (size_t i = 0; i < dim; ++i) dvec[i] -= lr * mscale * g.d_doc[i];
      for (const auto& [row, grad] : g.d_words) {
        for (size_t i = 0; i < dim; ++i) model.word_in[row][i] -= lr * mscale * grad[i];
      }
      for (const auto& [row, grad] : g.d_out) {
        for (size_t i = 0; i < dim; ++i) model.out[row][i] -= lr * grad[i];
      }
    }
  };

  if (config.threads <= 1) {
    Rng rng(derive_seed(config.seed, "doc2vec-train"));
    size_t positions_done = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      double loss_sum = 0.0;
      size_t loss_count = 0;
      for (size_t d = 0; d < encoded.size(); ++d) {
        train_doc(d, rng, positions_done, loss_sum, loss_count);
      }
      model.epoch_losses.push_back(loss_sum /
                                   static_cast<double>(loss_count));
      check_finite(model.word_in, "word");
      check_finite(model.doc_vecs, "doc");
      check_finite(model.out, "output");
    }
  } else {
    // Lock-free data-parallel mode: docs are sharded across threads and row
    // updates race (lost updates possible). The result is approximate and
    // not reproducible; the loss trend is preserved.
    const int n_threads =
        static_cast<int>(std::min<size_t>(config.threads, encoded.size()));
    std::atomic<size_t> positions_done{0};
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      std::vector<double> loss_sums(n_threads, 0.0);
      std::vector<size_t> loss_counts(n_threads, 0);
      std::vector<std::thread> workers;
      for (int w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
          Rng rng(derive_seed(config.seed,
                              "doc2vec-train-" + std::to_string(epoch) + "-" +
                                  std::to_string(w)));
          for (size_t d = w; d < encoded.size();
               d += static_cast<size_t>(n_threads)) {
            size_t local = positions_done.fetch_add(encoded[d].size());
            train_doc(d, rng, local, loss_sums[w], loss_counts[w]);
          }
        });
      }
      for (auto& t : workers) t.join();
      double loss_sum = 0.0;
      size_t loss_count = 0;
      for (int w = 0; w < n_threads; ++w) {
        loss_sum += loss_sums[w];
        loss_count += loss_counts[w];
      }
      model.epoch_losses.push_back(loss_sum /
                                   static_cast<double>(loss_count));
      check_finite(model.word_in, "word");
      check_finite(model.doc_vecs, "doc");
      check_finite(model.out, "output");
    }
  }
  return model;
}

InferredVector infer_vector(const Doc2VecModel& model, const TokenSequence& doc,
                            int steps, uint64_t seed) {
  if (steps < 1) throw UsageError("infer_vector: steps must be >= 1");
  const size_t dim = model.config.dim;

  std::vector<size_t> seq;
  for (const auto& tok : doc) {
    if (auto id = model.vocab.id_of(tok)) seq.push_back(*id);
  }
  if (seq.empty()) {
    return InferredVector{std::vector<double>(dim, 0.0), false};
  }

  Rng rng(derive_seed(seed, "doc2vec-infer"));
  const double bound = 0.5 / static_cast<double>(dim);
  std::vector<double> dvec(dim);
  for (double& v : dvec) v = rng.uniform_in(-bound, bound);

  const double total = static_cast<double>(seq.size()) * steps;
  const double final_lr = 1e-4 * model.config.initial_lr;
  size_t done = 0;
  for (int step = 0; step < steps; ++step) {
    for (size_t t = 0; t < seq.size(); ++t) {
      const double progress = static_cast<double>(done) / total;
      const double lr = model.config.initial_lr +
                        (final_lr - model.config.initial_lr) * progress;
      ++done;

      TrainExample ex;
      ex.target = seq[t];
      if (model.config.mode == Doc2VecMode::PVDM) {
        const size_t lo =
            t >= model.config.window ? t - model.config.window : 0;
        const size_t hi = std::min(seq.size() - 1, t + model.config.window);
        for (size_t j = lo; j <= hi; ++j) {
          if (j != t) ex.context.push_back(seq[j]);
        }
      }
      ex.negatives =
          draw_negatives(model.vocab, ex.target, model.config.negative, rng);

      CoreGrads g = example_grads(dvec, model.word_in, model.out,
                                  model.config.mode, ex);
      for (size_t i = 0; i < dim; ++i) dvec[i] -= lr * g.d_doc[i];
    }
  }
  return InferredVector{std::move(dvec), true};
}

InferredVector infer_vector(const Doc2VecModel& model, const TokenSequence& doc,
                            int steps) {
  return infer_vector(model, doc, steps, model.config.seed);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = dot(a, b);
  double na = std::sqrt(dot(a, a));
  double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return ab / (na * nb);
}

namespace {

json config_to_json(const Doc2VecConfig& c) {
  return json{{"dim", c.dim},
              {"window", c.window},
              {"epochs", c.epochs},
              {"negative", c.negative},
              {"initial_lr", c.initial_lr},
              {"min_count", c.min_count},
              {"mode", c.mode == Doc2VecMode::PVDM ? "pvdm" : "pvdbow"},
              {"seed", c.seed},
              {"threads", c.threads}};
}

Doc2VecConfig config_from_json(const json& j) {
  Doc2VecConfig c;
  c.dim = j.at("dim").get<size_t>();
  c.window = j.at("window").get<size_t>();
  c.epochs = j.at("epochs").get<int>();
  c.negative = j.at("negative").get<int>();
  c.initial_lr = j.at("initial_lr").get<double>();
  c.min_count = j.at("min_count").get<size_t>();
  c.mode = j.at("mode").get<std::string>() == "pvdbow" ? Doc2VecMode::PVDBOW
                                                       : Doc2VecMode::PVDM;
  c.seed = j.at("seed").get<uint64_t>();
  c.threads = j.at("threads").get<int>();
  return c;
}

}  // namespace

void Doc2VecModel::save(const std::string& path) const {
  json j;
  j["format"] = "teamvec-doc2vec";
  j["version"] = 1;
  j["config"] = config_to_json(config);
  j["vocab"] = {{"tokens", vocab.tokens}, {"freqs", vocab.freqs}};
  j["word_in"] = word_in;
  j["doc_vecs"] = doc_vecs;
  j["out"] = out;
  j["epoch_losses"] = epoch_losses;
  j["doc_ids"] = doc_ids;
  std::ofstream f(path);
  if (!f) throw DataError("cannot write doc2vec model: " + path);
  f << j.dump() << "\n";
}

Doc2VecModel Doc2VecModel::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open doc2vec model: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw DataError("invalid doc2vec model JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "teamvec-doc2vec" ||
      j.value("version", 0) != 1) {
    throw DataError("unsupported doc2vec model format in " + path);
  }
  Doc2VecModel m;
  m.config = config_from_json(j.at("config"));
  m.vocab.tokens = j.at("vocab").at("tokens").get<std::vector<std::string>>();
  m.vocab.freqs = j.at("vocab").at("freqs").get<std::vector<size_t>>();
  for (size_t i = 0; i < m.vocab.tokens.size(); ++i) {
    m.vocab.ids[m.vocab.tokens[i]] = i;
  }
  double total = 0.0;
  for (size_t c : m.vocab.freqs) total += std::pow(static_cast<double>(c), 0.75);
  double cum = 0.0;
  for (size_t c : m.vocab.freqs) {
    cum += std::pow(static_cast<double>(c), 0.75) / total;
    m.vocab.sampling_cdf.push_back(cum);
  }
  if (!m.vocab.sampling_cdf.empty()) m.vocab.sampling_cdf.back() = 1.0;
  m.word_in = j.at("word_in").get<Matrix>();
  m.doc_vecs = j.at("doc_vecs").get<Matrix>();
  m.out = j.at("out").get<Matrix>();
  m.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  return m;
}

}  // namespace teamvec::embedding
