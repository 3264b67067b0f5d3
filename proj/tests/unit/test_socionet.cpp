#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "sociolex/socionet.hpp"

using namespace sociolex;
using namespace sociolex::socionet;

namespace {

std::string nid(std::size_t i) {
  char b[16];
  std::snprintf(b, sizeof b, "n%05zu", i);
  return b;
}

// Erdos-Renyi style graph with exactly `m` distinct edges.
MentionGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(nid(i));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::string, std::string>> edges;
  while (edges.size() < m) {
    std::size_t a = rng.below(n), b = rng.below(n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) edges.emplace_back(nodes[a], nodes[b]);
  }
  return MentionGraph(nodes, edges);
}

ClassPartition partition_of(const std::map<std::string, int>& classes, int k) {
  ClassPartition p;
  p.k = k;
  p.assignment = classes;
  return p;
}

}  // namespace

using Mentions = std::vector<std::pair<std::string, std::vector<std::string>>>;

TEST_CASE("mutual mention rule") {
  auto g = build_network(Mentions{{"u", {"v"}}, {"v", {"u"}}});
  CHECK(g.edge_count() == 1);
  CHECK(g.has_edge("u", "v"));

  g = build_network(Mentions{{"u", {"v", "v"}}, {"u", {"v"}}, {"u", {"v", "v"}}, {"v", {}}});
  CHECK(g.edge_count() == 0);
  CHECK(g.node_count() == 2);

  g = build_network(Mentions{{"u", {"u"}}, {"u", {"u"}}});
  CHECK(g.edge_count() == 0);

  // A mentioned user who never posts is not a node and gets no edge.
  g = build_network(Mentions{{"u", {"ghost"}}});
  CHECK(g.node_count() == 1);
}

TEST_CASE("network construction ignores post order") {
  std::vector<CleanPost> posts = {testutil::post("1", "a", 1, "x", {"b", "c"}), testutil::post("2", "b", 2, "x", {"a"}),
                                  testutil::post("3", "c", 3, "x", {"a", "b"}), testutil::post("4", "b", 4, "x", {"c"}),
                                  testutil::post("5", "d", 5, "x", {"a"})};
  const auto ref = build_network(posts);
  CHECK(ref.edge_count() == 3);
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    rng.shuffle(posts);
    const auto g = build_network(posts);
    CHECK(g.edges() == ref.edges());
    CHECK(g.nodes() == ref.nodes());
  }
}

TEST_CASE("double edge swaps preserve degrees and simplicity") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto g = random_graph(300, 1200, s);
    const auto deg = g.degrees();
    const auto e = randomize(g.edges(), 10, 100 + s);
    std::vector<std::size_t> d(g.node_count(), 0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> uniq;
    for (const auto& x : e) {
      CHECK(x.u < x.v);
      ++d[x.u];
      ++d[x.v];
      uniq.insert({x.u, x.v});
    }
    CHECK(d == deg);
    CHECK(uniq.size() == e.size());
    CHECK(e != g.edges());
  }
}

TEST_CASE("randomization is reproducible") {
  const auto g = random_graph(100, 300, 9);
  CHECK(randomize(g.edges(), 10, 5) == randomize(g.edges(), 10, 5));
  CHECK(randomize(g.edges(), 10, 5) != randomize(g.edges(), 10, 6));
}

TEST_CASE("triangle is rigid") {
  MentionGraph g({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  NodeClasses nc{2, {0, 0, 1}, 0};
  const auto ens = configuration_null(g, nc, 20, 10, 1);
  const auto obs = count_links(g.edges(), nc);
  CHECK(ens.mean.cells == obs.cells);
  const auto h = homophily_matrix(g, nc, ens);
  CHECK(h.ratio.at(0, 0) == 1.0);
  CHECK(h.ratio.at(0, 1) == 1.0);
  CHECK(std::isnan(h.ratio.at(1, 1)));
}

TEST_CASE("path graph swaps visit both realizations evenly") {
  // Degree sequence (1,2,2,1) has two simple realizations: a-b-c-d and a-c-b-d.
  MentionGraph g({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
  const std::size_t n = 1000;
  std::size_t other = 0;
  for (std::size_t s = 0; s < n; ++s) {
    auto e = randomize(g.edges(), 10, derive_seed(3, s));
    std::sort(e.begin(), e.end());
    const std::vector<Edge> acbd = {{0, 2}, {1, 2}, {1, 3}};
    if (e == acbd)
      ++other;
    else
      CHECK(e == g.edges());
  }
  const double share = static_cast<double>(other) / n;
  CHECK(share > 0.45);
  CHECK(share < 0.55);
}

TEST_CASE("link counting convention") {
  MentionGraph g({"a", "b", "c", "d", "x"}, {{"a", "b"}, {"a", "c"}, {"c", "d"}, {"d", "x"}});
  NodeClasses nc{2, {0, 0, 1, 1, -1}, 1};
  const auto m = count_links(g.edges(), nc);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 1) == 1.0);
  CHECK(m.at(0, 1) == 1.0);
  CHECK(m.at(1, 0) == 1.0);
  double upper = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) upper += m.at(i, j);
  CHECK(upper == 3.0);  // the edge to the unlabeled node is dropped
}

TEST_CASE("planted extreme homophily") {
  // Two cliques joined by a few bridges; every clique edge is same-class.
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < 40; ++i) nodes.push_back(nid(i));
  for (int i = 0; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) {
      edges.emplace_back(nid(i), nid(j));
      edges.emplace_back(nid(20 + i), nid(20 + j));
    }
  for (int i = 0; i < 5; ++i) edges.emplace_back(nid(i), nid(20 + i));
  MentionGraph g(nodes, edges);
  std::map<std::string, int> cls;
  for (int i = 0; i < 40; ++i) cls[nid(i)] = i < 20 ? 1 : 2;
  const auto nc = label_nodes(g, partition_of(cls, 2));
  const auto ens = configuration_null(g, nc, 100, 10, 4);
  const auto h = homophily_matrix(g, nc, ens);
  CHECK(h.ratio.at(0, 0) > 1.0);
  CHECK(h.ratio.at(0, 1) < 1.0);
  const auto chi = chi_square_test(h.observed, ens);
  CHECK(chi.p <= 0.01);
}

TEST_CASE("random labels give ratios near one") {
  const auto g = random_graph(2000, 8000, 17);
  Rng rng(18);
  std::map<std::string, int> cls;
  for (const auto& n : g.nodes()) cls[n] = 1 + static_cast<int>(rng.below(3));
  const auto nc = label_nodes(g, partition_of(cls, 3));
  const auto ens = configuration_null(g, nc, 100, 10, 19);
  const auto h = homophily_matrix(g, nc, ens);
  for (double r : h.ratio.cells) {
    CHECK(r >= 0.8);
    CHECK(r <= 1.2);
  }
  // Every null sample keeps the edge count.
  for (const auto& s : ens.samples) {
    double upper = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) upper += s.at(i, j);
    CHECK(upper == 8000.0);
  }
}

TEST_CASE("null ensemble is reproducible and thread independent") {
  const auto g = random_graph(200, 600, 2);
  std::map<std::string, int> cls;
  for (std::size_t i = 0; i < g.node_count(); ++i) cls[g.nodes()[i]] = 1 + static_cast<int>(i % 4);
  const auto nc = label_nodes(g, partition_of(cls, 4));
  const std::size_t saved = thread_count();
  set_thread_count(1);
  const auto a = configuration_null(g, nc, 12, 10, 42);
  set_thread_count(3);
  const auto b = configuration_null(g, nc, 12, 10, 42);
  set_thread_count(saved);
  CHECK(a.mean.cells == b.mean.cells);
}

TEST_CASE("chi-square null case and errors") {
  NullEnsemble ens;
  ens.k = 2;
  ens.n_samples = 3;
  ClassMatrix s1(2), s2(2), s3(2);
  s1.cells = {10, 5, 5, 10};
  s2.cells = {8, 6, 6, 12};
  s3.cells = {12, 4, 4, 8};
  ens.samples = {s1, s2, s3};
  ens.mean = ClassMatrix(2);
  ens.mean.cells = {10, 5, 5, 10};
  auto c = chi_square_test(ens.mean, ens);
  CHECK(c.statistic == 0.0);
  CHECK(c.p == 1.0);

  NullEnsemble zero;
  zero.k = 2;
  zero.mean = ClassMatrix(2);
  CHECK_THROWS_AS(chi_square_test(ClassMatrix(2), zero), DataError);

  MentionGraph g({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  NodeClasses wrong{2, {0, 1}, 0};
  CHECK_THROWS_AS(configuration_null(g, wrong, 5, 10, 1), UsageError);
  NodeClasses ok{3, {0, 1, 2}, 0};
  CHECK_THROWS_AS(homophily_matrix(g, ok, ens), UsageError);
}

TEST_CASE("pair sampling") {
  SUBCASE("complete graph has no disconnected pairs") {
    MentionGraph g({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
    const auto p = partition_of({{"a", 1}, {"b", 1}, {"c", 2}}, 2);
    CHECK_THROWS_AS(sample_pairs(g, p, PairCategory::DisconnectedRandom, 10, 1), DataError);
    CHECK_THROWS_AS(sample_pairs(g, p, PairCategory::DisconnectedSameClass, 10, 1), DataError);
  }
  SUBCASE("single edge is drawn with replacement") {
    MentionGraph g({"a", "b"}, {{"a", "b"}});
    const auto p = partition_of({{"a", 1}, {"b", 2}}, 2);
    const auto pairs = sample_pairs(g, p, PairCategory::Connected, 3, 1);
    REQUIRE(pairs.size() == 3);
    for (const auto& pr : pairs) {
      CHECK(std::set<std::string>{pr.first, pr.second} == std::set<std::string>{"a", "b"});
    }
    CHECK_THROWS_AS(sample_pairs(g, p, PairCategory::ConnectedSameClass, 3, 1), DataError);
  }
  SUBCASE("categories respect their definitions") {
    const auto g = random_graph(200, 600, 5);
    std::map<std::string, int> cls;
    for (std::size_t i = 0; i < g.node_count(); ++i) cls[g.nodes()[i]] = i < 100 ? 1 : 2;
    const auto p = partition_of(cls, 2);
    for (auto cat : {PairCategory::ConnectedSameClass, PairCategory::Connected, PairCategory::DisconnectedSameClass,
                     PairCategory::DisconnectedRandom}) {
      const auto pairs = sample_pairs(g, p, cat, 500, 9);
      CHECK(pairs.size() == 500);
      for (const auto& [a, b] : pairs) {
        CHECK(a != b);
        const bool connected = g.has_edge(a, b);
        const bool same = cls.at(a) == cls.at(b);
        switch (cat) {
          case PairCategory::ConnectedSameClass: CHECK((connected && same)); break;
          case PairCategory::Connected: CHECK(connected); break;
          case PairCategory::DisconnectedSameClass: CHECK((!connected && same)); break;
          case PairCategory::DisconnectedRandom: CHECK(!connected); break;
        }
      }
    }
    CHECK(sample_pairs(g, p, PairCategory::Connected, 50, 3) == sample_pairs(g, p, PairCategory::Connected, 50, 3));
  }
  CHECK(parse_category(category_name(PairCategory::DisconnectedSameClass)) == PairCategory::DisconnectedSameClass);
  CHECK_THROWS_AS(parse_category("friends"), UsageError);
}
