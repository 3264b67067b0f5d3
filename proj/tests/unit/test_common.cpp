#include <doctest.h>

#include <atomic>
#include <set>

#include "sociolex/common.hpp"

using namespace sociolex;

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  CHECK(derive_seed(1, kTagPermutation, 0) != derive_seed(1, kTagPermutation, 1));
  CHECK(derive_seed(1, kTagPermutation, 0) != derive_seed(1, kTagBootstrap, 0));
  CHECK(derive_seed(7, 3, 9) == derive_seed(7, 3, 9));
}

TEST_CASE("rng helpers stay in range") {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    CHECK(r.below(7) < 7);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(r.geometric(1.0) == 0);
  CHECK(r.poisson(0.0) == 0);
}

TEST_CASE("rng moments are about right") {
  Rng r(11);
  const int n = 200000;
  double s = 0, s2 = 0, ps = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    ps += static_cast<double>(r.poisson(3.5));
  }
  CHECK(s / n == doctest::Approx(0.0).epsilon(0.01).scale(1.0));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ps / n == doctest::Approx(3.5).epsilon(0.02));
}

TEST_CASE("shuffle is a permutation") {
  Rng r(3);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  r.shuffle(v);
  CHECK(std::set<int>(v.begin(), v.end()).size() == 100);
}

TEST_CASE("parallel_for visits every index once for any thread count") {
  const std::size_t saved = thread_count();
  for (std::size_t t : {1u, 2u, 3u, 8u}) {
    set_thread_count(t);
    std::vector<std::atomic<int>> hits(1001);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  set_thread_count(saved);
}

TEST_CASE("parallel_for propagates exceptions") {
  const std::size_t saved = thread_count();
  set_thread_count(4);
  CHECK_THROWS_AS(parallel_for(100,
                               [](std::size_t i) {
                                 if (i == 57) throw DataError("boom");
                               }),
                  DataError);
  set_thread_count(saved);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}
