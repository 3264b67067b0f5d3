#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "sociolex/analysis.hpp"

using namespace sociolex;

namespace {

CleanPost at_hour(const std::string& id, const std::string& author, int hour, const std::string& text) {
  auto p = testutil::post(id, author, testutil::kMonday + hour * 3600LL, text);
  REQUIRE(p.local_hour_of_week == hour);
  return p;
}

PluralLexicon tiny_lexicon() {
  PluralLexicon lex;
  lex.add("cheval", "chevaux");
  return lex;
}

}  // namespace

TEST_CASE("temporal profile of a constant population is flat") {
  const auto lex = tiny_lexicon();
  std::vector<CleanPost> posts;
  for (int h = 0; h < kHoursPerWeek; h += 3) {
    posts.push_back(at_hour("a" + std::to_string(h), "a", h, "je ne sais pas"));
    posts.push_back(at_hour("b" + std::to_string(h), "b", h, "je sais pas"));
  }
  const std::map<std::string, double> inc = {{"a", 100.0}, {"b", 300.0}};
  const auto tp = analysis::temporal_profile(posts, lex, Marker::Negation, inc);
  CHECK(tp.population == "all");
  for (int h = 0; h < kHoursPerWeek; ++h) {
    if (h % 3 == 0) {
      CHECK(*tp.values[h] == 0.5);
      CHECK(*tp.income_overlay[h] == 200.0);
      CHECK(tp.n_observations[h] == 2);
      CHECK(tp.n_active_users[h] == 2);
    } else {
      CHECK_FALSE(tp.values[h]);
      CHECK_FALSE(tp.income_overlay[h]);
    }
  }
}

TEST_CASE("temporal profile details") {
  const auto lex = tiny_lexicon();
  std::vector<CleanPost> posts = {at_hour("1", "a", 10, "je ne sais pas"), at_hour("2", "a", 10, "rien du tout"),
                                  at_hour("3", "b", 10, "bonjour"), at_hour("4", "c", 11, "les chevaux les cheval")};
  const std::map<std::string, double> inc = {{"a", 100.0}, {"b", 200.0}};
  auto tp = analysis::temporal_profile(posts, lex, Marker::Negation, inc);
  CHECK(*tp.values[10] == 0.5);
  CHECK(tp.n_observations[10] == 2);
  CHECK(*tp.income_overlay[10] == 150.0);  // b posts without a marker but is active
  CHECK_FALSE(tp.values[11]);
  CHECK_FALSE(tp.income_overlay[11]);  // c has no known income

  tp = analysis::temporal_profile(posts, lex, Marker::Plural, inc);
  CHECK(*tp.values[11] == 0.5);
  CHECK_FALSE(tp.values[10]);

  const std::set<std::string> only_b = {"b"};
  analysis::TemporalOptions opt;
  opt.population = &only_b;
  opt.population_label = "geo";
  tp = analysis::temporal_profile(posts, lex, Marker::Negation, inc, opt);
  CHECK(tp.population == "geo");
  CHECK_FALSE(tp.values[10]);
  CHECK(*tp.income_overlay[10] == 200.0);

  CHECK_THROWS_AS(analysis::temporal_profile(posts, lex, Marker::Vocabulary, inc), UsageError);
  posts[0].local_hour_of_week = 168;
  CHECK_THROWS_AS(analysis::temporal_profile(posts, lex, Marker::Negation, inc), DataError);
}

TEST_CASE("temporal profile shifts with the clock") {
  const auto lex = tiny_lexicon();
  const std::vector<std::string> texts = {"je ne sais pas", "je sais pas", "jamais", "il n'y a rien"};
  Rng rng(4);
  std::vector<CleanPost> posts;
  for (int i = 0; i < 400; ++i) {
    const int h = static_cast<int>(rng.below(kHoursPerWeek));
    posts.push_back(at_hour(std::to_string(i), "u" + std::to_string(rng.below(20)), h, texts[rng.below(4)]));
  }
  const std::map<std::string, double> inc;
  const auto base = analysis::temporal_profile(posts, lex, Marker::Negation, inc);
  const int shift = 37;
  for (auto& p : posts) p.local_hour_of_week = (p.local_hour_of_week + shift) % kHoursPerWeek;
  const auto moved = analysis::temporal_profile(posts, lex, Marker::Negation, inc);
  for (int h = 0; h < kHoursPerWeek; ++h) {
    CHECK(moved.values[(h + shift) % kHoursPerWeek] == base.values[h]);
    CHECK(moved.n_observations[(h + shift) % kHoursPerWeek] == base.n_observations[h]);
  }

  // Batches in any order give the same profile.
  analysis::TemporalBuilder b(lex, Marker::Negation, inc);
  std::vector<CleanPost> first(posts.begin() + 200, posts.end()), second(posts.begin(), posts.begin() + 200);
  b.add_batch(first);
  b.add_batch(second);
  CHECK(b.finish().values == moved.values);
}

TEST_CASE("hourly income correlation") {
  TemporalProfile tp;
  for (int h = 0; h < 20; ++h) {
    tp.values[h] = 0.5 + 0.01 * h;
    tp.income_overlay[h] = 1000.0 + 10.0 * h;
  }
  tp.values[30] = 0.9;  // no overlay, skipped
  const auto c = analysis::temporal_income_correlation(tp, 999, 1);
  CHECK(c.n == 20);
  CHECK(c.r == doctest::Approx(1.0));
  CHECK(c.p < 0.01);
}

TEST_CASE("spatial aggregation") {
  geoloc::RegionMap regions(200);
  regions.add({0, 0, 200}, "department", "d1");
  regions.add({200, 0, 200}, "department", "d2");
  const geoloc::Projection proj;
  std::map<std::string, PlanarPoint> homes = {
      {"a", {50, 50}}, {"b", {150, 50}}, {"c", {250, 50}}, {"d", {350, 150}}, {"far", {9000, 0}}};
  std::map<std::string, LinguisticProfile> profiles;
  profiles["a"].L_cn = 0.2;
  profiles["b"].L_cn = 0.6;
  profiles["c"].L_cn = 1.0;
  const auto agg = analysis::spatial_aggregate(homes, profiles, regions, "department", Marker::Negation, proj);
  REQUIRE(agg.units.size() == 2);
  CHECK(agg.unassigned == 1);
  CHECK(agg.units[0].unit_id == "d1");
  CHECK(*agg.units[0].mean == doctest::Approx(0.4));
  CHECK(agg.units[0].n_users == 2);
  CHECK(agg.units[1].n_users == 2);
  CHECK(agg.units[1].n_with_marker == 1);
  CHECK(*agg.units[1].mean == 1.0);
  const auto g = proj.unproject({100, 50});
  CHECK(agg.units[0].mean_lat == doctest::Approx(g.lat));
  CHECK(agg.units[0].mean_lon == doctest::Approx(g.lon));
}

namespace {

struct PairWorld {
  MentionGraph g;
  ClassPartition partition;
};

PairWorld pair_world() {
  Rng rng(10);
  std::vector<std::string> nodes;
  for (int i = 0; i < 120; ++i) nodes.push_back("n" + std::to_string(i));
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<std::string, std::string>> edges;
  while (edges.size() < 400) {
    int a = static_cast<int>(rng.below(120)), b = static_cast<int>(rng.below(120));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) edges.emplace_back(nodes[a], nodes[b]);
  }
  PairWorld w{MentionGraph(nodes, edges), {}};
  w.partition.k = 2;
  for (int i = 0; i < 120; ++i) w.partition.assignment[nodes[i]] = i % 2 ? 1 : 2;
  return w;
}

}  // namespace

TEST_CASE("similarity of identical users is a point mass") {
  const auto w = pair_world();
  std::map<std::string, LinguisticProfile> profiles;
  for (const auto& n : w.g.nodes()) profiles[n].L_cn = 0.5;
  const auto d = analysis::similarity_distributions(w.g, w.partition, profiles, Marker::Negation, 300, 0.05, 2);
  REQUIRE(d.size() == 4);
  for (const auto& s : d) {
    CHECK(s.n_pairs == 300);
    REQUIRE(s.histogram.size() == 1);
    CHECK(s.histogram[0] == 300);
    CHECK(s.mean == 0.0);
    CHECK(s.resampled == 0);
  }
}

TEST_CASE("similarity histograms conserve mass") {
  const auto w = pair_world();
  Rng rng(3);
  std::map<std::string, LinguisticProfile> profiles;
  for (const auto& n : w.g.nodes())
    if (rng.bernoulli(0.7)) profiles[n].L_cn = rng.uniform();
  const auto d = analysis::similarity_distributions(w.g, w.partition, profiles, Marker::Negation, 500, 0.1, 4);
  for (const auto& s : d) {
    CHECK(std::accumulate(s.histogram.begin(), s.histogram.end(), std::size_t{0}) == 500);
    CHECK(s.histogram.size() <= 10);
    CHECK(s.resampled > 0);
  }
  const auto again = analysis::similarity_distributions(w.g, w.partition, profiles, Marker::Negation, 500, 0.1, 4);
  CHECK(again[2].histogram == d[2].histogram);
  CHECK_THROWS_AS(
      analysis::similarity_distributions(w.g, w.partition, profiles, Marker::Negation, 10, 0.0, 4), UsageError);
  CHECK_THROWS_AS(analysis::similarity_distributions(w.g, w.partition, {}, Marker::Negation, 10, 0.1, 4),
                  DataError);
}

TEST_CASE("pair_up aligns users") {
  std::map<std::string, LinguisticProfile> profiles;
  profiles["a"].L_cn = 0.1;
  profiles["b"].L_vs = 3.0;
  profiles["c"].L_cn = 0.3;
  const auto p = analysis::pair_up({{"a", 1.0}, {"b", 2.0}, {"c", 3.0}, {"z", 4.0}}, profiles, Marker::Negation);
  CHECK(p.users == std::vector<std::string>{"a", "c"});
  CHECK(p.x == std::vector<double>{1.0, 3.0});
  CHECK(p.y == std::vector<double>{0.1, 0.3});
}
