#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sociolex/corpus.hpp"
#include "sociolex/ses.hpp"

namespace sociolex {

/// Undirected simple edge, u < v.
struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Mutual-mention network. Node ids are sorted; edges sorted and unique.
class MentionGraph {
 public:
  MentionGraph() = default;
  /// Edges given by node id; self-loops and duplicates are dropped.
  MentionGraph(std::vector<std::string> nodes,
               const std::vector<std::pair<std::string, std::string>>& edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::optional<std::uint32_t> index_of(std::string_view id) const;
  bool has_edge(std::uint32_t a, std::uint32_t b) const;
  bool has_edge(std::string_view a, std::string_view b) const;
  std::vector<std::size_t> degrees() const;

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> edge_keys_;  // sorted, for has_edge
};

/// Dense symmetric k x k matrix of class-pair quantities.
struct ClassMatrix {
  int k = 0;
  std::vector<double> cells;
  explicit ClassMatrix(int k_ = 0) : k(k_), cells(static_cast<std::size_t>(k_) * k_, 0.0) {}
  double& at(int i, int j) { return cells[static_cast<std::size_t>(i) * k + j]; }
  double at(int i, int j) const { return cells[static_cast<std::size_t>(i) * k + j]; }
};

/// Per-node class in [0, k) or -1 when the node has no class.
struct NodeClasses {
  int k = 0;
  std::vector<int> label;
  std::size_t unlabeled = 0;
};

struct NullEnsemble {
  int k = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<ClassMatrix> samples;  // per-sample link counts
  ClassMatrix mean;                  // E_rand
};

struct HomophilyMatrix {
  int k = 0;
  ClassMatrix observed;
  ClassMatrix expected;
  ClassMatrix ratio;  // NaN where expected is 0
  std::size_t n_samples = 0;
  std::size_t dropped_nodes = 0;
  std::size_t dropped_edges = 0;
};

struct ChiSquare {
  double statistic = 0.0;
  double p = 1.0;
  std::size_t n_samples = 0;
};

enum class PairCategory { ConnectedSameClass, Connected, DisconnectedSameClass, DisconnectedRandom };

namespace socionet {

constexpr std::size_t kDefaultNullSamples = 100;
constexpr std::size_t kDefaultSwapsPerEdge = 10;
constexpr std::size_t kDefaultPairSamples = 10'000;

/// Edge {u,v} iff u mentioned v and v mentioned u; self-mentions ignored.
/// Nodes are all authors.
MentionGraph build_network(const std::vector<CleanPost>& posts);
MentionGraph build_network(const std::vector<std::pair<std::string, std::vector<std::string>>>& mentions);

/// Classes of graph nodes from a partition (1-based classes become 0-based labels).
NodeClasses label_nodes(const MentionGraph& g, const ClassPartition& partition);

/// Class-pair link counts; each edge adds 1 to its unordered cell (mirrored).
ClassMatrix count_links(const std::vector<Edge>& edges, const NodeClasses& classes);

/// One degree-preserving randomization by attempted double-edge swaps.
std::vector<Edge> randomize(const std::vector<Edge>& edges, std::size_t swaps_per_edge,
                            std::uint64_t seed);

/// `n_samples` independent randomizations; sample i uses derive_seed(seed, i).
NullEnsemble configuration_null(const MentionGraph& g, const NodeClasses& classes,
                                std::size_t n_samples = kDefaultNullSamples,
                                std::size_t swaps_per_edge = kDefaultSwapsPerEdge,
                                std::uint64_t seed = 0);

HomophilyMatrix homophily_matrix(const MentionGraph& g, const NodeClasses& classes,
                                 const NullEnsemble& null);

/// Monte Carlo chi-square of observed counts against the ensemble mean.
ChiSquare chi_square_test(const ClassMatrix& observed, const NullEnsemble& null);

PairCategory parse_category(std::string_view name);
std::string category_name(PairCategory c);

/// `n` pairs drawn uniformly with replacement among classed users. Throws
/// DataError when the category is empty.
std::vector<std::pair<std::string, std::string>> sample_pairs(
    const MentionGraph& g, const ClassPartition& partition, PairCategory category,
    std::size_t n = kDefaultPairSamples, std::uint64_t seed = 0);

}  // namespace socionet
}  // namespace sociolex
