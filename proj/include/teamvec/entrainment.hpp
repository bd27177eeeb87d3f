#pragma once

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <vector>

#include "teamvec/corpus.hpp"
#include "teamvec/lexical.hpp"
#include "teamvec/tokens.hpp"

namespace teamvec::entrainment {

/// Which of the eight entrainment categories an utterance contains, one bit
/// per entry of lexical::kEntrainmentCategories.
using CategorySet = std::bitset<8>;

/// One mask per utterance: the categories whose part of speech appears at
/// least once in the utterance.
std::vector<CategorySet> categorize(const corpus::Transcript& t,
                                    const lexical::PosTagger& tagger);

/// A trigger utterance by speaker x immediately followed by a reply from
/// speaker y, reduced to the category masks of the two utterances.
struct AdjacencyPair {
  CategorySet trigger_categories;
  CategorySet reply_categories;
};

/// Every consecutive utterance pair where speaker x talks and speaker y
/// replies next. Requires x != y; the list may be empty.
std::vector<AdjacencyPair> adjacency_pairs(
    const corpus::Transcript& t, const std::vector<CategorySet>& masks,
    const std::string& x, const std::string& y);

std::vector<AdjacencyPair> adjacency_pairs(const corpus::Transcript& t,
                                           const lexical::PosTagger& tagger,
                                           const std::string& x,
                                           const std::string& y);

/// Excess probability that a reply echoes category c:
///   P(reply contains c | trigger contains c) - P(reply contains c),
/// with probabilities estimated as frequencies over the pair list. Absent
/// when no trigger contains c (the conditional is undefined).
std::optional<double> entrainment_c(const std::vector<AdjacencyPair>& pairs,
                                    lexical::LexCategory c);

/// Arithmetic mean of entrainment_c over the eight categories for which the
/// value is defined; absent if none is defined.
std::optional<double> entrainment_mean(const corpus::Transcript& t,
                                       const std::vector<CategorySet>& masks,
                                       const std::string& x,
                                       const std::string& y);

/// Directed weighted graph over the speakers of one dialogue. An edge y->x
/// carries the mean entrainment of speaker y to speaker x and exists only
/// when that mean is defined and strictly positive. All speakers appear as
/// nodes even when edge-less.
struct EntrainmentGraph {
  struct Edge {
    size_t from;  // the entraining speaker (y)
    size_t to;    // the speaker being echoed (x)
    double weight;
  };
  std::vector<std::string> nodes;  // speaker ids, first-seen order
  std::vector<Edge> edges;

  size_t size() const { return nodes.size(); }
  std::optional<size_t> node_index(const std::string& speaker) const;
};

EntrainmentGraph build_graph(const corpus::Transcript& t,
                             const lexical::PosTagger& tagger);

/// The six centrality kernels of one node, in this fixed order.
struct KernelVector {
  double pagerank = 0.0;
  double betweenness = 0.0;
  double closeness = 0.0;
  double degree = 0.0;
  double in_degree = 0.0;
  double katz = 0.0;

  std::array<double, 6> as_array() const {
    return {pagerank, betweenness, closeness, degree, in_degree, katz};
  }
};

// Conventions, shared by implementation and tests:
//  - pagerank: weighted by edge weight, damping 0.85, dangling mass spread
//    uniformly, power iteration to an L1 residual of 1e-10. Sums to 1.
//  - betweenness: directed unweighted; the mean over ordered pairs (s,t)
//    with s != t != v and t reachable from s of the fraction of shortest
//    s-t paths passing through v. 0 when no such pair exists. Lies in [0,1].
//  - closeness: directed unweighted over incoming distances,
//    (r/(n-1)) * (r/sum of distances) where r counts the nodes that can
//    reach v. 0 when nothing reaches v.
//  - degree: (in + out) / (2(n-1)); in_degree: in / (n-1).
//  - katz: the solution of x = alpha * A^T x + 1 on the unweighted skeleton
//    with alpha = min(0.1, 0.9 / spectral_radius(A)).
std::vector<KernelVector> all_kernels(const EntrainmentGraph& g);

KernelVector kernel_vector(const EntrainmentGraph& g, size_t node);

/// Component-wise mean over all nodes, edge-less ones included.
KernelVector team_vector(const EntrainmentGraph& g);

/// Six tokens "k{i}_b{j}": kernel i's value dropped into one of 10 uniform
/// bins over [0,1]. Katz is min-max scaled with the given corpus-wide range
/// before binning (a degenerate range maps to bin 0).
TokenSequence entrainment_tokens(const KernelVector& v, double katz_min,
                                 double katz_max);

std::string to_dot(const EntrainmentGraph& g);
std::string to_json(const EntrainmentGraph& g);

}  // namespace teamvec::entrainment
