#include "sociolex/socionet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "sociolex/common.hpp"

namespace sociolex {

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Open-addressing set of edge keys with backward-shift deletion; the swap
// chain does tens of millions of lookups per ensemble.
class EdgeSet {
 public:
  explicit EdgeSet(std::size_t n) {
    std::size_t cap = 16;
    while (cap < n * 4) cap <<= 1;
    slots_.assign(cap, kEmpty);
    mask_ = cap - 1;
  }
  bool contains(std::uint64_t key) const {
    for (std::size_t i = slot(key);; i = (i + 1) & mask_) {
      if (slots_[i] == key) return true;
      if (slots_[i] == kEmpty) return false;
    }
  }
  void insert(std::uint64_t key) {
    std::size_t i = slot(key);
    while (slots_[i] != kEmpty) {
      if (slots_[i] == key) return;
      i = (i + 1) & mask_;
    }
    slots_[i] = key;
  }
  void erase(std::uint64_t key) {
    std::size_t i = slot(key);
    while (slots_[i] != key) {
      if (slots_[i] == kEmpty) return;
      i = (i + 1) & mask_;
    }
    std::size_t j = i;
    for (;;) {
      j = (j + 1) & mask_;
      if (slots_[j] == kEmpty) break;
      const std::size_t home = slot(slots_[j]);
      // Move slots_[j] into the hole at i unless its home lies cyclically in (i, j].
      const bool between = (i <= j) ? (home > i && home <= j) : (home > i || home <= j);
      if (!between) {
        slots_[i] = slots_[j];
        i = j;
      }
    }
    slots_[i] = kEmpty;
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  std::size_t slot(std::uint64_t key) const { return splitmix64(key) & mask_; }
  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
};

}  // namespace

MentionGraph::MentionGraph(std::vector<std::string> nodes,
                           const std::vector<std::pair<std::string, std::string>>& edges)
    : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  index_.reserve(nodes_.size());
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);
  for (const auto& [a, b] : edges) {
    auto ia = index_of(a), ib = index_of(b);
    if (!ia || !ib) throw UsageError("edge endpoint '" + (ia ? b : a) + "' is not a node");
    if (*ia == *ib) continue;
    edges_.push_back({std::min(*ia, *ib), std::max(*ia, *ib)});
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  edge_keys_.reserve(edges_.size());
  for (const auto& e : edges_) edge_keys_.push_back(edge_key(e.u, e.v));
  std::sort(edge_keys_.begin(), edge_keys_.end());
}

std::optional<std::uint32_t> MentionGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool MentionGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return false;
  return std::binary_search(edge_keys_.begin(), edge_keys_.end(), edge_key(a, b));
}

bool MentionGraph::has_edge(std::string_view a, std::string_view b) const {
  auto ia = index_of(a), ib = index_of(b);
  return ia && ib && has_edge(*ia, *ib);
}

std::vector<std::size_t> MentionGraph::degrees() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  for (const auto& e : edges_) {
    ++d[e.u];
    ++d[e.v];
  }
  return d;
}

namespace socionet {

MentionGraph build_network(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& mentions) {
  std::set<std::pair<std::string, std::string>> directed;
  std::vector<std::string> authors;
  for (const auto& [author, targets] : mentions) {
    authors.push_back(author);
    for (const auto& t : targets)
      if (t != author) directed.emplace(author, t);
  }
  std::vector<std::pair<std::string, std::string>> mutual;
  for (const auto& [a, b] : directed)
    if (a < b && directed.count({b, a})) mutual.emplace_back(a, b);
  return MentionGraph(std::move(authors), mutual);
}

MentionGraph build_network(const std::vector<CleanPost>& posts) {
  std::vector<std::pair<std::string, std::vector<std::string>>> m;
  m.reserve(posts.size());
  for (const auto& p : posts) m.emplace_back(p.author_id, p.mentioned_ids);
  return build_network(m);
}

NodeClasses label_nodes(const MentionGraph& g, const ClassPartition& partition) {
  NodeClasses nc;
  nc.k = partition.k;
  nc.label.assign(g.node_count(), -1);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    auto it = partition.assignment.find(g.nodes()[i]);
    if (it == partition.assignment.end()) {
      ++nc.unlabeled;
      continue;
    }
    if (it->second < 1 || it->second > partition.k)
      throw UsageError("class of '" + it->first + "' outside 1.." + std::to_string(partition.k));
    nc.label[i] = it->second - 1;
  }
  return nc;
}

ClassMatrix count_links(const std::vector<Edge>& edges, const NodeClasses& classes) {
  ClassMatrix m(classes.k);
  for (const auto& e : edges) {
    const int a = classes.label[e.u], b = classes.label[e.v];
    if (a < 0 || b < 0) continue;
    m.at(a, b) += 1.0;
    if (a != b) m.at(b, a) += 1.0;
  }
  return m;
}

std::vector<Edge> randomize(const std::vector<Edge>& edges, std::size_t swaps_per_edge,
                            std::uint64_t seed) {
  std::vector<Edge> e(edges);
  if (e.size() < 2) return e;
  EdgeSet present(e.size());
  for (const auto& x : e) present.insert(edge_key(x.u, x.v));
  Rng rng(seed);
  const std::size_t attempts = swaps_per_edge * e.size();
  const std::uint64_t m = e.size();
  for (std::size_t t = 0; t < attempts; ++t) {
    const auto i = static_cast<std::size_t>(rng.below(m));
    const auto j = static_cast<std::size_t>(rng.below(m));
    const bool flip = (rng.next() >> 63) != 0;
    if (i == j) continue;
    const std::uint32_t a = e[i].u, b = e[i].v;
    std::uint32_t c = e[j].u, d = e[j].v;
    if (flip) std::swap(c, d);
    // (a,b),(c,d) -> (a,d),(c,b)
    if (a == d || c == b) continue;
    const std::uint64_t k1 = edge_key(a, d), k2 = edge_key(c, b);
    if (k1 == k2 || present.contains(k1) || present.contains(k2)) continue;
    present.erase(edge_key(a, b));
    present.erase(edge_key(c, d));
    present.insert(k1);
    present.insert(k2);
    e[i] = {std::min(a, d), std::max(a, d)};
    e[j] = {std::min(c, b), std::max(c, b)};
  }
  return e;
}

NullEnsemble configuration_null(const MentionGraph& g, const NodeClasses& classes,
                                std::size_t n_samples, std::size_t swaps_per_edge,
                                std::uint64_t seed) {
  if (g.edge_count() < 2) throw DataError("configuration null model needs at least 2 edges");
  if (n_samples == 0) throw UsageError("configuration null model needs at least one sample");
  if (classes.label.size() != g.node_count()) throw UsageError("node labels do not match the graph");
  NullEnsemble ens;
  ens.k = classes.k;
  ens.n_samples = n_samples;
  ens.seed = seed;
  ens.samples.assign(n_samples, ClassMatrix(classes.k));
  parallel_for(n_samples, [&](std::size_t s) {
    const auto edges = randomize(g.edges(), swaps_per_edge, derive_seed(seed, kTagNullModel, s));
    ens.samples[s] = count_links(edges, classes);
  });
  ens.mean = ClassMatrix(classes.k);
  for (const auto& s : ens.samples)
    for (std::size_t c = 0; c < s.cells.size(); ++c) ens.mean.cells[c] += s.cells[c];
  for (double& v : ens.mean.cells) v /= static_cast<double>(n_samples);
  return ens;
}

HomophilyMatrix homophily_matrix(const MentionGraph& g, const NodeClasses& classes,
                                 const NullEnsemble& null) {
  if (classes.k != null.k) throw UsageError("partition has " + std::to_string(classes.k) +
                                            " classes but the null ensemble " + std::to_string(null.k));
  if (classes.label.size() != g.node_count()) throw UsageError("node labels do not match the graph");
  HomophilyMatrix h;
  h.k = classes.k;
  h.observed = count_links(g.edges(), classes);
  h.expected = null.mean;
  h.ratio = ClassMatrix(classes.k);
  h.n_samples = null.n_samples;
  h.dropped_nodes = classes.unlabeled;
  for (const auto& e : g.edges())
    if (classes.label[e.u] < 0 || classes.label[e.v] < 0) ++h.dropped_edges;
  for (std::size_t c = 0; c < h.ratio.cells.size(); ++c) {
    const double exp = h.expected.cells[c];
    h.ratio.cells[c] = exp > 0.0 ? h.observed.cells[c] / exp : std::numeric_limits<double>::quiet_NaN();
  }
  return h;
}

namespace {
double chi_stat(const ClassMatrix& obs, const ClassMatrix& exp) {
  double s = 0.0;
  for (int i = 0; i < obs.k; ++i)
    for (int j = i; j < obs.k; ++j) {
      const double e = exp.at(i, j);
      if (e <= 0.0) continue;
      const double d = obs.at(i, j) - e;
      s += d * d / e;
    }
  return s;
}
}  // namespace

ChiSquare chi_square_test(const ClassMatrix& observed, const NullEnsemble& null) {
  if (observed.k != null.k) throw UsageError("chi-square: class counts differ");
  std::size_t nonempty = 0;
  for (int i = 0; i < null.k; ++i)
    for (int j = i; j < null.k; ++j)
      if (null.mean.at(i, j) > 0.0 || observed.at(i, j) > 0.0) ++nonempty;
  bool any_expected = false;
  for (double v : null.mean.cells) any_expected = any_expected || v > 0.0;
  if (!any_expected) throw DataError("chi-square: every expected count is zero");
  if (nonempty < 2) throw DataError("chi-square: need at least 2 non-empty cells");
  ChiSquare out;
  out.n_samples = null.n_samples;
  out.statistic = chi_stat(observed, null.mean);
  const double threshold = out.statistic * (1.0 - 1e-12);
  std::size_t extreme = 0;
  for (const auto& s : null.samples)
    if (chi_stat(s, null.mean) >= threshold) ++extreme;
  out.p = (static_cast<double>(extreme) + 1.0) / (static_cast<double>(null.samples.size()) + 1.0);
  return out;
}

PairCategory parse_category(std::string_view name) {
  if (name == "connected-same-class") return PairCategory::ConnectedSameClass;
  if (name == "connected") return PairCategory::Connected;
  if (name == "disconnected-same-class") return PairCategory::DisconnectedSameClass;
  if (name == "disconnected-random") return PairCategory::DisconnectedRandom;
  throw UsageError("unknown pair category '" + std::string(name) + "'");
}

std::string category_name(PairCategory c) {
  switch (c) {
    case PairCategory::ConnectedSameClass: return "connected-same-class";
    case PairCategory::Connected: return "connected";
    case PairCategory::DisconnectedSameClass: return "disconnected-same-class";
    case PairCategory::DisconnectedRandom: return "disconnected-random";
  }
  return "?";
}

std::vector<std::pair<std::string, std::string>> sample_pairs(const MentionGraph& g,
                                                               const ClassPartition& partition,
                                                               PairCategory category, std::size_t n,
                                                               std::uint64_t seed) {
  // Universe: classed users, sorted by id.
  std::vector<const std::string*> users;
  std::vector<int> cls;
  for (const auto& [id, c] : partition.assignment) {
    users.push_back(&id);
    cls.push_back(c);
  }
  const std::size_t N = users.size();
  std::vector<std::optional<std::uint32_t>> node(N);
  std::vector<int> user_of_node(g.node_count(), -1);
  for (std::size_t i = 0; i < N; ++i) {
    node[i] = g.index_of(*users[i]);
    if (node[i]) user_of_node[*node[i]] = static_cast<int>(i);
  }
  auto connected = [&](std::size_t a, std::size_t b) {
    return node[a] && node[b] && g.has_edge(*node[a], *node[b]);
  };

  Rng rng(derive_seed(seed, kTagPairs, static_cast<std::uint64_t>(category)));
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(n);
  const std::string name = category_name(category);

  if (category == PairCategory::ConnectedSameClass || category == PairCategory::Connected) {
    std::vector<std::pair<int, int>> pool;
    for (const auto& e : g.edges()) {
      const int a = user_of_node[e.u], b = user_of_node[e.v];
      if (a < 0 || b < 0) continue;
      if (category == PairCategory::ConnectedSameClass && cls[a] != cls[b]) continue;
      pool.emplace_back(a, b);
    }
    if (pool.empty()) throw DataError("no pairs in category " + name);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& [a, b] = pool[rng.below(pool.size())];
      out.emplace_back(*users[a], *users[b]);
    }
    return out;
  }

  const bool same = category == PairCategory::DisconnectedSameClass;
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < N; ++i) members[cls[i]].push_back(i);
  double total_pairs = 0.0;
  std::vector<std::pair<double, const std::vector<std::size_t>*>> weights;
  if (same) {
    for (const auto& [c, m] : members) {
      const double w = 0.5 * static_cast<double>(m.size()) * static_cast<double>(m.size() - 1);
      if (w > 0) weights.emplace_back(w, &m);
      total_pairs += w;
    }
  } else {
    total_pairs = 0.5 * static_cast<double>(N) * static_cast<double>(N > 0 ? N - 1 : 0);
  }
  double linked = 0.0;
  for (const auto& e : g.edges()) {
    const int a = user_of_node[e.u], b = user_of_node[e.v];
    if (a < 0 || b < 0) continue;
    if (same && cls[a] != cls[b]) continue;
    linked += 1.0;
  }
  const double available = total_pairs - linked;
  if (available <= 0.0) throw DataError("no pairs in category " + name);

  if (available / total_pairs < 0.05) {
    // Dense case: enumerate the qualifying pairs instead of rejecting.
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = a + 1; b < N; ++b)
        if ((!same || cls[a] == cls[b]) && !connected(a, b)) pool.emplace_back(a, b);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& [a, b] = pool[rng.below(pool.size())];
      out.emplace_back(*users[a], *users[b]);
    }
    return out;
  }

  while (out.size() < n) {
    std::size_t a, b;
    if (same) {
      double r = rng.uniform() * total_pairs;
      const std::vector<std::size_t>* m = weights.back().second;
      for (const auto& [w, mm] : weights) {
        if (r < w) {
          m = mm;
          break;
        }
        r -= w;
      }
      a = (*m)[rng.below(m->size())];
      b = (*m)[rng.below(m->size())];
    } else {
      a = rng.below(N);
      b = rng.below(N);
    }
    if (a == b || connected(a, b)) continue;
    out.emplace_back(*users[a], *users[b]);
  }
  return out;
}

}  // namespace socionet
}  // namespace sociolex
