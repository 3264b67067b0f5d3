#pragma once

// Statistical primitives of the analysis battery: Pearson/Spearman with
// permutation p-values, binned regression with bootstrap bands, and
// standardized multivariate OLS. All resampling is seeded and replica-indexed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sociolex::stats {

constexpr std::size_t kDefaultPermutations = 10'000;
constexpr std::size_t kDefaultBootstrap = 1'000;

struct Moments {
  double mean_x = 0, mean_y = 0, sxx = 0, syy = 0, sxy = 0;
};
Moments moments(const std::vector<double>& x, const std::vector<double>& y);

/// Sample Pearson correlation. Throws DataError on zero variance or n < 3.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided permutation p-value
  std::size_t n = 0;
};

/// p = (#{|r_perm| >= |r|} + 1) / (n_perm + 1).
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y,
                    std::size_t n_perm = kDefaultPermutations, std::uint64_t seed = 0);

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> ranks(const std::vector<double>& v);

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t n_perm = kDefaultPermutations, std::uint64_t seed = 0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
  double r2 = 0.0;  // 0 when the response is constant
};

/// Unweighted least squares line. Requires >= 2 points and varying x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Linear-interpolated quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> v, double q);

struct BinnedPoint {
  int bin = 0;
  double center = 0.0;
  double mean_y = 0.0;
  std::size_t n = 0;
  double ci_low = 0.0;  // bootstrap band of the fitted line at this center
  double ci_high = 0.0;
};

struct BinnedOptions {
  int n_bins = 30;  // must lie in [20, 50]
  bool log_x = false;
  std::size_t n_perm = kDefaultPermutations;
  std::size_t n_boot = kDefaultBootstrap;
  std::uint64_t seed = 0;
};

struct StatResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
  double r2 = 0.0;
  double p = 1.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  std::size_t n = 0;
  int n_bins = 0;
  bool log_x = false;
  std::vector<BinnedPoint> points;  // non-empty bins only
};

/// Equal-width bins over [min x, max x] (after the optional log), per-bin mean
/// of y, OLS over (bin center, bin mean). The permutation test shuffles y
/// against x and recomputes the binned R^2; the bootstrap resamples users.
StatResult binned_regression(const std::vector<double>& x, const std::vector<double>& y,
                             const BinnedOptions& opt = {});

struct MultivariateResult {
  std::vector<std::string> names;
  std::vector<double> coefficients;  // per standardized regressor
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// OLS on z-scored regressors via the normal equations. Throws DataError
/// naming the offending pair when the design is singular.
MultivariateResult multivariate_regression(const std::vector<double>& y,
                                           const std::vector<std::vector<double>>& columns,
                                           const std::vector<std::string>& names);

}  // namespace sociolex::stats
