#include "teamvec/entrainment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "teamvec/errors.hpp"

namespace teamvec::entrainment {

namespace {

size_t category_bit(lexical::LexCategory c) {
  for (size_t i = 0; i < lexical::kEntrainmentCategories.size(); ++i) {
    if (lexical::kEntrainmentCategories[i] == c) return i;
  }
  throw std::invalid_argument(
      "OTHER does not participate in entrainment computation");
}

constexpr size_t kUnreachable = std::numeric_limits<size_t>::max();

}  // namespace

std::vector<CategorySet> categorize(const corpus::Transcript& t,
                                    const lexical::PosTagger& tagger) {
  std::vector<CategorySet> masks;
  masks.reserve(t.utterances.size());
  for (const auto& u : t.utterances) {
    CategorySet mask;
    for (lexical::LexCategory c : tagger.tag(lexical::tokenize(u.text))) {
      if (c != lexical::LexCategory::OTHER) mask.set(category_bit(c));
    }
    masks.push_back(mask);
  }
  return masks;
}

std::vector<AdjacencyPair> adjacency_pairs(
    const corpus::Transcript& t, const std::vector<CategorySet>& masks,
    const std::string& x, const std::string& y) {
  if (x == y) {
    throw std::invalid_argument("adjacency_pairs requires distinct speakers");
  }
  std::vector<AdjacencyPair> pairs;
  for (size_t i = 0; i + 1 < t.utterances.size(); ++i) {
    if (t.utterances[i].speaker_id == x &&
        t.utterances[i + 1].speaker_id == y) {
      pairs.push_back(AdjacencyPair{masks[i], masks[i + 1]});
    }
  }
  return pairs;
}

std::vector<AdjacencyPair> adjacency_pairs(const corpus::Transcript& t,
                                           const lexical::PosTagger& tagger,
                                           const std::string& x,
                                           const std::string& y) {
  return adjacency_pairs(t, categorize(t, tagger), x, y);
}

std::optional<double> entrainment_c(const std::vector<AdjacencyPair>& pairs,
                                    lexical::LexCategory c) {
  const size_t bit = category_bit(c);
  size_t n_trigger = 0;
  size_t n_both = 0;
  size_t n_reply = 0;
  for (const auto& p : pairs) {
    const bool trig = p.trigger_categories.test(bit);
    const bool rep = p.reply_categories.test(bit);
    if (trig) ++n_trigger;
    if (trig && rep) ++n_both;
    if (rep) ++n_reply;
  }
  if (n_trigger == 0) return std::nullopt;
  return static_cast<double>(n_both) / static_cast<double>(n_trigger) -
         static_cast<double>(n_reply) / static_cast<double>(pairs.size());
}

std::optional<double> entrainment_mean(const corpus::Transcript& t,
                                       const std::vector<CategorySet>& masks,
                                       const std::string& x,
                                       const std::string& y) {
  const auto pairs = adjacency_pairs(t, masks, x, y);
  double sum = 0.0;
  size_t defined = 0;
  for (lexical::LexCategory c : lexical::kEntrainmentCategories) {
    if (auto v = entrainment_c(pairs, c)) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / static_cast<double>(defined);
}

std::optional<size_t> EntrainmentGraph::node_index(
    const std::string& speaker) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == speaker) return i;
  }
  return std::nullopt;
}

EntrainmentGraph build_graph(const corpus::Transcript& t,
                             const lexical::PosTagger& tagger) {
  EntrainmentGraph g;
  g.nodes = t.speakers();
  if (g.nodes.size() < 2) {
    throw DataError("team " + t.team_id + " session " + t.session_id +
                    ": entrainment graph needs at least 2 speakers");
  }
  if (g.nodes.size() > 8) {
    throw DataError("team " + t.team_id + " session " + t.session_id +
                    ": more than 8 speakers is outside the supported range");
  }
  const auto masks = categorize(t, tagger);
  for (size_t xi = 0; xi < g.nodes.size(); ++xi) {
    for (size_t yi = 0; yi < g.nodes.size(); ++yi) {
      if (xi == yi) continue;
      auto mean = entrainment_mean(t, masks, g.nodes[xi], g.nodes[yi]);
      if (mean && *mean > 0.0) {
        g.edges.push_back(EntrainmentGraph::Edge{yi, xi, *mean});
      }
    }
  }
  return g;
}

namespace {

struct GraphMatrices {
  size_t n = 0;
  std::vector<std::vector<bool>> adj;      // unweighted skeleton
  std::vector<std::vector<double>> weight;
};

GraphMatrices matrices(const EntrainmentGraph& g) {
  GraphMatrices m;
  m.n = g.size();
  m.adj.assign(m.n, std::vector<bool>(m.n, false));
  m.weight.assign(m.n, std::vector<double>(m.n, 0.0));
  for (const auto& e : g.edges) {
    m.adj[e.from][e.to] = true;
    m.weight[e.from][e.to] = e.weight;
  }
  return m;
}

std::vector<double> pagerank(const GraphMatrices& m) {
  const size_t n = m.n;
  const double d = 0.85;
  std::vector<double> out_strength(n, 0.0);
  for (size_t u = 0; u < n; ++u) {
    for (size_t v = 0; v < n; ++v) out_strength[u] += m.weight[u][v];
  }
  std::vector<double> rank(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  for (int iter = 0; iter < 100000; ++iter) {
    double dangling = 0.0;
    for (size_t u = 0; u < n; ++u) {
      if (out_strength[u] == 0.0) dangling += rank[u];
    }
    for (size_t v = 0; v < n; ++v) {
      next[v] = (1.0 - d) / static_cast<double>(n) +
                d * dangling / static_cast<double>(n);
    }
    for (size_t u = 0; u < n; ++u) {
      if (out_strength[u] == 0.0) continue;
      for (size_t v = 0; v < n; ++v) {
        if (m.weight[u][v] != 0.0) {
          next[v] += d * rank[u] * m.weight[u][v] / out_strength[u];
        }
      }
    }
    double residual = 0.0;
    for (size_t v = 0; v < n; ++v) residual += std::fabs(next[v] - rank[v]);
    rank.swap(next);
    if (residual < 1e-10) break;
  }
  return rank;
}

// All-pairs BFS distances and shortest-path counts on the skeleton.
void bfs_all_pairs(const GraphMatrices& m,
                   std::vector<std::vector<size_t>>& dist,
                   std::vector<std::vector<double>>& sigma) {
  const size_t n = m.n;
  dist.assign(n, std::vector<size_t>(n, kUnreachable));
  sigma.assign(n, std::vector<double>(n, 0.0));
  for (size_t s = 0; s < n; ++s) {
    dist[s][s] = 0;
    sigma[s][s] = 1.0;
    std::vector<size_t> frontier = {s};
    while (!frontier.empty()) {
      std::vector<size_t> nxt;
      for (size_t u : frontier) {
        for (size_t v = 0; v < n; ++v) {
          if (!m.adj[u][v]) continue;
          if (dist[s][v] == kUnreachable) {
            dist[s][v] = dist[s][u] + 1;
            nxt.push_back(v);
          }
          if (dist[s][v] == dist[s][u] + 1) sigma[s][v] += sigma[s][u];
        }
      }
      frontier.swap(nxt);
    }
  }
}

double spectral_radius(const GraphMatrices& m) {
  const size_t n = m.n;
  // Power iteration on A + I; the shift keeps the iteration aperiodic and
  // shifts the radius by exactly 1 for a nonnegative matrix.
  std::vector<double> x(n, 1.0);
  double lambda = 1.0;
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<double> y(n, 0.0);
    for (size_t u = 0; u < n; ++u) {
      y[u] = x[u];
      for (size_t v = 0; v < n; ++v) {
        if (m.adj[u][v]) y[u] += x[v];
      }
    }
    double norm = 0.0;
    for (double v : y) norm = std::max(norm, std::fabs(v));
    if (norm == 0.0) return 0.0;
    for (double& v : y) v /= norm;
    lambda = norm;
    x.swap(y);
  }
  return std::max(0.0, lambda - 1.0);
}

// Gaussian elimination with partial pivoting; fine at n <= 8.
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) {
      throw std::runtime_error("singular linear system in katz centrality");
    }
    for (size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t r = n; r-- > 0;) {
    double s = b[r];
    for (size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

std::vector<double> katz(const GraphMatrices& m) {
  const size_t n = m.n;
  const double rho = spectral_radius(m);
  const double alpha = rho > 1e-9 ? std::min(0.1, 0.9 / rho) : 0.1;
  // (I - alpha * A^T) x = 1
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    for (size_t j = 0; j < n; ++j) {
      if (m.adj[j][i]) a[i][j] -= alpha;
    }
  }
  return solve_linear(std::move(a), std::vector<double>(n, 1.0));
}

}  // namespace

std::vector<KernelVector> all_kernels(const EntrainmentGraph& g) {
  const GraphMatrices m = matrices(g);
  const size_t n = m.n;
  if (n == 0) return {};

  std::vector<std::vector<size_t>> dist;
  std::vector<std::vector<double>> sigma;
  bfs_all_pairs(m, dist, sigma);

  const auto pr = pagerank(m);
  const auto kz = katz(m);

  std::vector<KernelVector> out(n);
  for (size_t v = 0; v < n; ++v) {
    KernelVector k;
    k.pagerank = pr[v];
    k.katz = kz[v];

    double between = 0.0;
    size_t reachable_pairs = 0;
    for (size_t s = 0; s < n; ++s) {
      if (s == v) continue;
      for (size_t t = 0; t < n; ++t) {
        if (t == s || t == v) continue;
        if (dist[s][t] == kUnreachable) continue;
        ++reachable_pairs;
        if (dist[s][v] != kUnreachable && dist[v][t] != kUnreachable &&
            dist[s][v] + dist[v][t] == dist[s][t]) {
          between += sigma[s][v] * sigma[v][t] / sigma[s][t];
        }
      }
    }
    k.betweenness =
        reachable_pairs == 0
            ? 0.0
            : between / static_cast<double>(reachable_pairs);

    size_t reach = 0;
    size_t dist_sum = 0;
    for (size_t u = 0; u < n; ++u) {
      if (u == v || dist[u][v] == kUnreachable) continue;
      ++reach;
      dist_sum += dist[u][v];
    }
    if (reach > 0 && n > 1) {
      const double r = static_cast<double>(reach);
      k.closeness = (r / static_cast<double>(n - 1)) *
                    (r / static_cast<double>(dist_sum));
    }

    size_t in_deg = 0;
    size_t out_deg = 0;
    for (size_t u = 0; u < n; ++u) {
      if (m.adj[u][v]) ++in_deg;
      if (m.adj[v][u]) ++out_deg;
    }
    if (n > 1) {
      k.degree = static_cast<double>(in_deg + out_deg) /
                 (2.0 * static_cast<double>(n - 1));
      k.in_degree =
          static_cast<double>(in_deg) / static_cast<double>(n - 1);
    }
    out[v] = k;
  }
  return out;
}

KernelVector kernel_vector(const EntrainmentGraph& g, size_t node) {
  if (node >= g.size()) {
    throw std::out_of_range("kernel_vector: node index out of range");
  }
  return all_kernels(g)[node];
}

KernelVector team_vector(const EntrainmentGraph& g) {
  const auto kernels = all_kernels(g);
  KernelVector mean;
  if (kernels.empty()) return mean;
  for (const auto& k : kernels) {
    mean.pagerank += k.pagerank;
    mean.betweenness += k.betweenness;
    mean.closeness += k.closeness;
    mean.degree += k.degree;
    mean.in_degree += k.in_degree;
    mean.katz += k.katz;
  }
  const double n = static_cast<double>(kernels.size());
  mean.pagerank /= n;
  mean.betweenness /= n;
  mean.closeness /= n;
  mean.degree /= n;
  mean.in_degree /= n;
  mean.katz /= n;
  return mean;
}

TokenSequence entrainment_tokens(const KernelVector& v, double katz_min,
                                 double katz_max) {
  auto values = v.as_array();
  values[5] = katz_max > katz_min
                  ? (values[5] - katz_min) / (katz_max - katz_min)
                  : 0.0;
  TokenSequence tokens;
  tokens.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    double x = std::clamp(values[i], 0.0, 1.0);
    int bin = std::min(9, static_cast<int>(x * 10.0));
    char buf[16];
    std::snprintf(buf, sizeof buf, "k%zu_b%d", i, bin);
    tokens.push_back(buf);
  }
  return tokens;
}

std::string to_dot(const EntrainmentGraph& g) {
  std::ostringstream out;
  out << "digraph entrainment {\n";
  for (const auto& node : g.nodes) {
    out << "  \"" << node << "\";\n";
  }
  for (const auto& e : g.edges) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", e.weight);
    out << "  \"" << g.nodes[e.from] << "\" -> \"" << g.nodes[e.to]
        << "\" [label=\"" << buf << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_json(const EntrainmentGraph& g) {
  nlohmann::json j;
  j["nodes"] = g.nodes;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    j["edges"].push_back({{"from", g.nodes[e.from]},
                          {"to", g.nodes[e.to]},
                          {"weight", e.weight}});
  }
  return j.dump(2) + "\n";
}

}  // namespace teamvec::entrainment
