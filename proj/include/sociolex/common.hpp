#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sociolex {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing input data (unreadable file, malformed table, degenerate sample).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition (bad parameter, wrong sizes).
class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Randomness
//
// Every random stream in the library is a pure function of (seed, stream tag,
// index). Parallel replicas derive their own generator from their index, so
// results never depend on scheduling or thread count.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);

/// Derive an independent seed for sub-stream `index` of stream `tag`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);

/// xoshiro256** generator with portable helper distributions. The standard
/// <random> distributions are implementation-defined, which would make output
/// differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Number of failures before the first success, p in (0, 1].
  std::uint64_t geometric(double p);
  std::uint64_t poisson(double mean);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

// Stream tags used with derive_seed. Kept in one place so streams never collide.
enum StreamTag : std::uint64_t {
  kTagPermutation = 0x7065726d,
  kTagBootstrap = 0x626f6f74,
  kTagNullModel = 0x6e756c6c,
  kTagPairs = 0x70616972,
  kTagSynthUser = 0x73796e75,
  kTagSynthGraph = 0x73796e67,
  kTagSynthPatch = 0x73796e70,
  kTagSynthPost = 0x73796e74,
};

// ---------------------------------------------------------------------------
// Concurrency
// ---------------------------------------------------------------------------

/// Worker count used by parallel_for. Defaults to SOCIOLEX_THREADS or 1.
std::size_t thread_count();
/// SOCIOLEX_THREADS when it holds a positive integer, else 1.
std::size_t env_thread_count();
void set_thread_count(std::size_t n);

/// Run fn(i) for i in [0, n). Work is split into contiguous blocks; callers
/// write results by index so the outcome is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

void log_warning(const std::string& msg);
/// Silence or restore warnings (tests, benchmarks).
void set_warnings_enabled(bool enabled);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace sociolex
