#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "sociolex/ses.hpp"

using namespace sociolex;

namespace {

std::vector<std::pair<std::string, double>> named(const std::vector<double>& incomes) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < incomes.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "u%04zu", i);
    out.emplace_back(id, incomes[i]);
  }
  return out;
}

// Smallest achievable spread of class sums over all contiguous splits.
double brute_min_spread(std::vector<double> x, int k) {
  std::sort(x.begin(), x.end());
  const int n = static_cast<int>(x.size());
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + x[i];
  double best = 1e300;
  std::vector<int> cut(k + 1);
  cut[0] = 0;
  cut[k] = n;
  auto rec = [&](auto&& self, int c) -> void {
    if (c == k) {
      double lo = 1e300, hi = -1e300;
      for (int j = 0; j < k; ++j) {
        const double s = cum[cut[j + 1]] - cum[cut[j]];
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      best = std::min(best, hi - lo);
      return;
    }
    for (int p = cut[c - 1] + 1; p <= n - (k - c); ++p) {
      cut[c] = p;
      self(self, c + 1);
    }
  };
  rec(rec, 1);
  return best;
}

}  // namespace

TEST_CASE("indicator arithmetic") {
  auto ind = ses::compute_indicators(60000, 3, 1, 2);
  CHECK(*ind.S_inc == 20000.0);
  ind = ses::compute_indicators(1000, 10, 0, 400);
  CHECK(*ind.S_own == 0.0);
  CHECK(*ind.S_den == 0.01);
  ind = ses::compute_indicators(1000, 0, 0, 0);
  CHECK_FALSE(ind.S_inc);
  CHECK_FALSE(ind.S_own);
  CHECK(*ind.S_den == 0.0);
}

TEST_CASE("patch file validation") {
  testutil::TempDir dir("patches");
  testutil::write_file(dir / "ok.csv",
                       "patch_id,easting_m,northing_m,S_hh,N_hh,N_own,N\nA,0,0,60000,3,1,3\nB,200,0,0,0,0,0\n");
  auto patches = ses::load_patches(dir / "ok.csv");
  REQUIRE(patches.size() == 2);
  CHECK(*patches[0].ind.S_inc == 20000.0);
  CHECK_FALSE(patches[1].ind.S_inc);
  testutil::write_file(dir / "bad.csv", "patch_id,easting_m,northing_m,S_hh,N_hh,N_own,N\nA,0,0,1,1,5,3\n");
  CHECK_THROWS_AS(ses::load_patches(dir / "bad.csv"), DataError);
  testutil::write_file(dir / "neg.csv", "patch_id,easting_m,northing_m,S_hh,N_hh,N_own,N\nA,0,0,-1,1,0,3\n");
  CHECK_THROWS_AS(ses::load_patches(dir / "neg.csv"), DataError);
}

TEST_CASE("users inherit the nearest patch") {
  std::vector<Patch> patches(2);
  patches[0].patch_id = "A";
  patches[0].cell = {0, 0, 200};
  patches[0].ind = ses::compute_indicators(100, 1, 0, 1);
  patches[1].patch_id = "B";
  patches[1].cell = {10000, 0, 200};
  patches[1].ind = ses::compute_indicators(300, 1, 1, 1);
  std::map<std::string, HomeLocation> homes;
  homes["u"] = {"u", {100, 0, 100}, 1, 1};
  homes["far"] = {"far", {5000, 0, 100}, 1, 1};
  std::size_t unmatched = 0;
  auto users = ses::attach(homes, patches, &unmatched);
  CHECK(users.size() == 1);
  CHECK(unmatched == 1);
  CHECK(users.at("u").patch_id == "A");
  CHECK(*users.at("u").ind.S_inc == 100.0);
  CHECK_FALSE(users.at("u").socio_class);
}

TEST_CASE("partition examples") {
  auto p = ses::partition_classes(named(std::vector<double>(9, 5.0)), 9);
  for (int c = 1; c <= 9; ++c) CHECK(p.class_size[c - 1] == 1);

  const auto users = named({1, 1, 1, 1, 1, 1, 1, 1, 10});
  p = ses::partition_classes(users, 2);
  CHECK(p.class_income == std::vector<double>{8.0, 10.0});
  for (std::size_t i = 0; i < users.size(); ++i) CHECK(p.assignment.at(users[i].first) == (i < 8 ? 1 : 2));
  CHECK(p.boundaries == std::vector<double>{10.0});
  CHECK(brute_min_spread({1, 1, 1, 1, 1, 1, 1, 1, 10}, 2) == 2.0);

  CHECK_THROWS_AS(ses::partition_classes(named({0, 0, 0}), 2), DataError);
  CHECK_THROWS_AS(ses::partition_classes(named({1, 2}), 3), UsageError);
  CHECK_THROWS_AS(ses::partition_classes(named({1, 2}), 1), UsageError);
}

TEST_CASE("partition balance, monotonicity and scale invariance") {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const int k = 2 + static_cast<int>(rng.below(8));
    const std::size_t n = k + rng.below(60);
    std::vector<double> x(n);
    for (auto& v : x) {
      switch (t % 4) {
        case 0: v = std::exp(10.0 + rng.normal()); break;
        case 1: v = rng.uniform(); break;
        case 2: v = 1.0 / std::pow(1.0 - rng.uniform(), 1.5); break;
        default: v = static_cast<double>(rng.below(4));
      }
    }
    if (std::accumulate(x.begin(), x.end(), 0.0) == 0.0) x[0] = 1.0;
    const auto users = named(x);
    const auto p = ses::partition_classes(users, k);
    const double mx = *std::max_element(x.begin(), x.end());
    const auto [lo, hi] = std::minmax_element(p.class_income.begin(), p.class_income.end());
    CHECK(*hi - *lo <= mx * (1 + 1e-12));
    for (std::size_t c = 0; c < p.class_size.size(); ++c) CHECK(p.class_size[c] >= 1);
    for (const auto& a : users)
      for (const auto& b : users)
        if (a.second < b.second) CHECK(p.assignment.at(a.first) <= p.assignment.at(b.first));

    auto scaled = users;
    for (auto& u : scaled) u.second *= 8.0;  // exact in binary floating point
    CHECK(ses::partition_classes(scaled, k).assignment == p.assignment);
  }
}

TEST_CASE("partition is close to the best contiguous split") {
  Rng rng(5);
  int optimal = 0, total = 0;
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const std::size_t n = k + rng.below(9);
    std::vector<double> x(n);
    for (auto& v : x) v = std::exp(2.0 * rng.normal());
    const auto p = ses::partition_classes(named(x), k);
    const auto [lo, hi] = std::minmax_element(p.class_income.begin(), p.class_income.end());
    const double best = brute_min_spread(x, k);
    CHECK(*hi - *lo >= best - 1e-9);
    total++;
    if (*hi - *lo <= best + 1e-9) optimal++;
  }
  CHECK(optimal >= total * 9 / 10);
}

TEST_CASE("cross correlations") {
  std::vector<Indicators> rows;
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double inc = rng.uniform(10000, 40000);
    rows.push_back({inc, 0.2 + inc * 1e-5, rng.uniform(0, 0.02)});
  }
  const auto m = ses::cross_correlations(rows, 999, 1);
  CHECK(m[0][1].r == doctest::Approx(1.0));
  CHECK(m[0][0].r == doctest::Approx(1.0));
  CHECK(std::abs(m[0][2].r) < 0.2);
  CHECK(m[0][2].p > 0.05);
  CHECK(m[1][2].r == doctest::Approx(m[2][1].r));

  std::vector<Indicators> few(5, Indicators{1.0, 0.5, 0.1});
  CHECK_THROWS_AS(ses::cross_correlations(few), DataError);
}
