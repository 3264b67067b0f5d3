#include "sociolex/stats.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

#include "sociolex/common.hpp"

namespace sociolex::stats {

namespace {

// Replicas are processed in fixed blocks so scratch buffers are reused while
// every replica still draws from its own derived stream.
constexpr std::size_t kReplicaBlock = 64;

template <class Fn>
void for_replica_blocks(std::size_t n_replicas, Fn&& fn) {
  const std::size_t blocks = (n_replicas + kReplicaBlock - 1) / kReplicaBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kReplicaBlock;
    fn(lo, std::min(n_replicas, lo + kReplicaBlock));
  });
}

// Scores within this relative distance of the observed one count as "at
// least as extreme"; exact re-orderings must not lose ties to rounding.
constexpr double kTieEps = 1e-12;

}  // namespace

Moments moments(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw UsageError("x and y differ in length");
  Moments m;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return m;
  m.mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  m.mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x, dy = y[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw UsageError("pearson: x and y differ in length");
  if (x.size() < 3) throw DataError("pearson: need at least 3 observations");
  const Moments m = moments(x, y);
  if (m.sxx <= 0.0 || m.syy <= 0.0) throw DataError("pearson: zero variance");
  return std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y,
                    std::size_t n_perm, std::uint64_t seed) {
  Correlation c;
  c.r = pearson_r(x, y);
  c.n = x.size();
  if (n_perm == 0) return c;
  const Moments m = moments(x, y);
  std::vector<double> xc(x.size()), yc(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xc[i] = x[i] - m.mean_x;
    yc[i] = y[i] - m.mean_y;
  }
  const double norm = std::sqrt(m.sxx * m.syy);
  const double threshold = std::abs(c.r) * (1.0 - kTieEps);
  std::vector<char> extreme(n_perm, 0);
  for_replica_blocks(n_perm, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> buf;
    for (std::size_t rep = lo; rep < hi; ++rep) {
      buf = yc;
      Rng rng(derive_seed(seed, kTagPermutation, rep));
      rng.shuffle(buf);
      double s = 0.0;
      for (std::size_t i = 0; i < buf.size(); ++i) s += xc[i] * buf[i];
      extreme[rep] = std::abs(s / norm) >= threshold;
    }
  });
  const auto count = static_cast<double>(std::count(extreme.begin(), extreme.end(), 1));
  c.p = (count + 1.0) / (static_cast<double>(n_perm) + 1.0);
  return c;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t n_perm, std::uint64_t seed) {
  return pearson(ranks(x), ranks(y), n_perm, seed);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) throw DataError("line fit needs at least 2 points");
  const Moments m = moments(x, y);
  if (m.sxx <= 0.0) throw DataError("line fit: x has zero variance");
  LineFit f;
  f.slope = m.sxy / m.sxx;
  f.intercept = m.mean_y - f.slope * m.mean_x;
  if (m.syy > 0.0) {
    f.r = std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
    f.r2 = f.r * f.r;
  }
  return f;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw DataError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

namespace {

struct BinLayout {
  std::vector<int> bin_of;       // per observation
  std::vector<int> nonempty;     // bin ids with data, ascending
  std::vector<double> centers;   // per nonempty bin
  std::vector<double> centered;  // centers minus their mean
  double scc = 0.0;              // sum of squared centered centers
};

// R^2 of the line through (center, mean) over bins with data, given per-bin sums.
double binned_r2(const BinLayout& L, const std::vector<double>& sums,
                 const std::vector<std::size_t>& counts) {
  const std::size_t m = L.nonempty.size();
  double mean_of_means = 0.0;
  thread_local std::vector<double> means;
  means.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const int b = L.nonempty[k];
    means[k] = sums[b] / static_cast<double>(counts[b]);
    mean_of_means += means[k];
  }
  mean_of_means /= static_cast<double>(m);
  double sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dy = means[k] - mean_of_means;
    sxy += L.centered[k] * dy;
    syy += dy * dy;
  }
  // Bin means of a constant response differ only by rounding.
  const double scale = mean_of_means * mean_of_means * static_cast<double>(m);
  if (syy <= 1e-24 * scale || syy <= 0.0) return 0.0;
  return std::min(1.0, sxy * sxy / (L.scc * syy));
}

}  // namespace

StatResult binned_regression(const std::vector<double>& x, const std::vector<double>& y,
                             const BinnedOptions& opt) {
  if (x.size() != y.size()) throw UsageError("binned regression: x and y differ in length");
  if (opt.n_bins < 20 || opt.n_bins > 50)
    throw UsageError("binned regression: bin count must lie in [20, 50]");
  std::vector<double> xt(x);
  if (opt.log_x) {
    for (double& v : xt) {
      if (!(v > 0.0)) throw DataError("binned regression: log scale needs positive x");
      v = std::log(v);
    }
  }
  {
    std::vector<double> distinct(xt);
    std::sort(distinct.begin(), distinct.end());
    const auto n_distinct =
        static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
    if (n_distinct < static_cast<std::size_t>(opt.n_bins))
      throw DataError("binned regression: " + std::to_string(n_distinct) +
                      " distinct x values for " + std::to_string(opt.n_bins) + " bins");
  }
  const auto [mn, mx] = std::minmax_element(xt.begin(), xt.end());
  const double lo = *mn;
  const double width = (*mx - lo) / opt.n_bins;

  BinLayout L;
  L.bin_of.resize(xt.size());
  std::vector<std::size_t> counts(opt.n_bins, 0);
  std::vector<double> sums(opt.n_bins, 0.0);
  for (std::size_t i = 0; i < xt.size(); ++i) {
    int b = static_cast<int>(std::floor((xt[i] - lo) / width));
    b = std::clamp(b, 0, opt.n_bins - 1);
    L.bin_of[i] = b;
    ++counts[b];
    sums[b] += y[i];
  }
  for (int b = 0; b < opt.n_bins; ++b) {
    if (counts[b] == 0) continue;
    L.nonempty.push_back(b);
    L.centers.push_back(lo + (b + 0.5) * width);
  }
  if (L.nonempty.size() < 3) throw DataError("binned regression: fewer than 3 non-empty bins");
  const double cbar =
      std::accumulate(L.centers.begin(), L.centers.end(), 0.0) / static_cast<double>(L.centers.size());
  for (double c : L.centers) {
    L.centered.push_back(c - cbar);
    L.scc += (c - cbar) * (c - cbar);
  }

  StatResult res;
  res.n = x.size();
  res.n_bins = opt.n_bins;
  res.log_x = opt.log_x;
  std::vector<double> means;
  for (std::size_t k = 0; k < L.nonempty.size(); ++k) {
    const int b = L.nonempty[k];
    BinnedPoint pt;
    pt.bin = b;
    pt.center = L.centers[k];
    pt.n = counts[b];
    pt.mean_y = sums[b] / static_cast<double>(counts[b]);
    means.push_back(pt.mean_y);
    res.points.push_back(pt);
  }
  const LineFit fit = fit_line(L.centers, means);
  res.slope = fit.slope;
  res.intercept = fit.intercept;
  const double observed = binned_r2(L, sums, counts);
  res.r = observed > 0.0 ? fit.r : 0.0;
  res.r2 = observed > 0.0 ? fit.r2 : 0.0;

  if (opt.n_perm > 0) {
    const double threshold = observed * (1.0 - kTieEps);
    std::vector<char> extreme(opt.n_perm, 0);
    for_replica_blocks(opt.n_perm, [&](std::size_t lo_rep, std::size_t hi_rep) {
      std::vector<double> ys;
      std::vector<double> s(opt.n_bins);
      for (std::size_t rep = lo_rep; rep < hi_rep; ++rep) {
        ys = y;
        Rng rng(derive_seed(opt.seed, kTagPermutation, rep));
        rng.shuffle(ys);
        std::fill(s.begin(), s.end(), 0.0);
        for (std::size_t i = 0; i < ys.size(); ++i) s[L.bin_of[i]] += ys[i];
        extreme[rep] = binned_r2(L, s, counts) >= threshold;
      }
    });
    const auto count = static_cast<double>(std::count(extreme.begin(), extreme.end(), 1));
    res.p = (count + 1.0) / (static_cast<double>(opt.n_perm) + 1.0);
  }

  if (opt.n_boot > 0) {
    const std::size_t m = L.nonempty.size();
    std::vector<double> slopes(opt.n_boot, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> band(opt.n_boot * m, std::numeric_limits<double>::quiet_NaN());
    const std::size_t n = x.size();
    for_replica_blocks(opt.n_boot, [&](std::size_t lo_rep, std::size_t hi_rep) {
      std::vector<double> s(opt.n_bins);
      std::vector<std::size_t> c(opt.n_bins);
      std::vector<double> bx, by;
      for (std::size_t rep = lo_rep; rep < hi_rep; ++rep) {
        Rng rng(derive_seed(opt.seed, kTagBootstrap, rep));
        std::fill(s.begin(), s.end(), 0.0);
        std::fill(c.begin(), c.end(), 0);
        for (std::size_t draw = 0; draw < n; ++draw) {
          const auto i = static_cast<std::size_t>(rng.below(n));
          s[L.bin_of[i]] += y[i];
          ++c[L.bin_of[i]];
        }
        bx.clear();
        by.clear();
        for (std::size_t k = 0; k < m; ++k) {
          const int b = L.nonempty[k];
          if (c[b] == 0) continue;
          bx.push_back(L.centers[k]);
          by.push_back(s[b] / static_cast<double>(c[b]));
        }
        if (bx.size() < 2) continue;
        const LineFit f = fit_line(bx, by);
        slopes[rep] = f.slope;
        for (std::size_t k = 0; k < m; ++k) band[rep * m + k] = f.intercept + f.slope * L.centers[k];
      }
    });
    std::vector<double> ok;
    for (double v : slopes)
      if (!std::isnan(v)) ok.push_back(v);
    if (!ok.empty()) {
      res.slope_ci_low = quantile(ok, 0.025);
      res.slope_ci_high = quantile(ok, 0.975);
    }
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<double> col;
      for (std::size_t rep = 0; rep < opt.n_boot; ++rep)
        if (!std::isnan(band[rep * m + k])) col.push_back(band[rep * m + k]);
      if (col.empty()) continue;
      res.points[k].ci_low = quantile(col, 0.025);
      res.points[k].ci_high = quantile(col, 0.975);
    }
  } else {
    for (auto& pt : res.points) pt.ci_low = pt.ci_high = res.intercept + res.slope * pt.center;
    res.slope_ci_low = res.slope_ci_high = res.slope;
  }
  return res;
}

MultivariateResult multivariate_regression(const std::vector<double>& y,
                                           const std::vector<std::vector<double>>& columns,
                                           const std::vector<std::string>& names) {
  const std::size_t p = columns.size();
  const std::size_t n = y.size();
  if (names.size() != p) throw UsageError("multivariate regression: one name per regressor");
  for (const auto& c : columns)
    if (c.size() != n) throw UsageError("multivariate regression: column length mismatch");
  if (n < 10) throw DataError("multivariate regression: need at least 10 observations");

  std::vector<std::vector<double>> z(p, std::vector<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    const double mean = std::accumulate(columns[j].begin(), columns[j].end(), 0.0) / n;
    double ss = 0.0;
    for (double v : columns[j]) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw DataError("multivariate regression: regressor '" + names[j] + "' is constant");
    for (std::size_t i = 0; i < n; ++i) z[j][i] = (columns[j][i] - mean) / sd;
  }
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;

  // Normal equations on centered, standardized regressors; the intercept is ybar.
  std::vector<double> a(p * p, 0.0), rhs(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += z[j][i] * z[k][i];
      a[j * p + k] = a[k * p + j] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += z[j][i] * (y[i] - ybar);
    rhs[j] = s;
  }

  auto collinear_pair = [&]() {
    std::size_t bj = 0, bk = 1;
    double best = -1.0;
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j + 1; k < p; ++k) {
        const double r = std::abs(a[j * p + k]) / static_cast<double>(n - 1);
        if (r > best) {
          best = r;
          bj = j;
          bk = k;
        }
      }
    return "'" + names[bj] + "' and '" + names[bk] + "'";
  };

  // Cholesky; a pivot collapsing relative to its diagonal means collinearity.
  std::vector<double> L(p * p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double d = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) d -= L[j * p + k] * L[j * p + k];
    if (d <= a[j * p + j] * 1e-10)
      throw DataError("multivariate regression: collinear regressors " + collinear_pair());
    L[j * p + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * p + k] * L[j * p + k];
      L[i * p + j] = s / L[j * p + j];
    }
  }
  std::vector<double> w(p), beta(p);
  for (std::size_t i = 0; i < p; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i * p + k] * w[k];
    w[i] = s / L[i * p + i];
  }
  for (std::size_t i = p; i-- > 0;) {
    double s = w[i];
    for (std::size_t k = i + 1; k < p; ++k) s -= L[k * p + i] * beta[k];
    beta[i] = s / L[i * p + i];
  }

  MultivariateResult out;
  out.names = names;
  out.coefficients = beta;
  out.intercept = ybar;
  out.n = n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = ybar;
    for (std::size_t j = 0; j < p; ++j) pred += beta[j] * z[j][i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  out.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 0.0;
  return out;
}

}  // namespace sociolex::stats
