#include "fatigue/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "fatigue/common.hpp"

namespace fatigue::stats {

double mean(std::span<const double> x) {
  if (x.empty()) raise(ErrorCode::domain_error, "mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x) {
  if (x.size() < 2) raise(ErrorCode::domain_error, "sample_std needs n >= 2");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    raise(ErrorCode::domain_error, "pearson: mismatched or too-short inputs");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

namespace {

// ln Gamma(x), Lanczos.
double ln_gamma(double x) {
  static const double c[6] = {76.18009172947146,  -86.50532032941677,
                              24.01409824083091,  -1.231739572450155,
                              0.1208650973866179e-2, -0.5395239384953e-5};
  double y = x;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (double ci : c) ser += ci / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

// Regularized lower incomplete gamma P(a, x) by series expansion.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - ln_gamma(a)) * h;
}

}  // namespace

double chi_squared_sf(double x, double dof) {
  if (dof <= 0.0) raise(ErrorCode::domain_error, "chi_squared_sf: dof must be > 0");
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * dof;
  const double xx = 0.5 * x;
  if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
  return gamma_q_cf(a, xx);
}

std::vector<double> midranks(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2)
    raise(ErrorCode::insufficient_classes, "kruskal_wallis: needs >= 2 groups");
  size_t n = 0;
  for (const auto& g : groups) {
    if (g.empty()) raise(ErrorCode::domain_error, "kruskal_wallis: empty group");
    n += g.size();
  }
  std::vector<double> pooled;
  pooled.reserve(n);
  for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  const auto ranks = midranks(pooled);

  const double dn = static_cast<double>(n);
  double h = 0.0;
  size_t off = 0;
  for (const auto& g : groups) {
    double rsum = 0.0;
    for (size_t i = 0; i < g.size(); ++i) rsum += ranks[off + i];
    h += rsum * rsum / static_cast<double>(g.size());
    off += g.size();
  }
  h = 12.0 / (dn * (dn + 1.0)) * h - 3.0 * (dn + 1.0);

  // Tie correction.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double corr = 1.0 - tie_sum / (dn * dn * dn - dn);
  KruskalWallisResult res;
  if (corr <= 0.0) {
    // All pooled values identical: no evidence against the null.
    res.statistic = 0.0;
    res.p_value = 1.0;
    return res;
  }
  res.statistic = h / corr;
  res.p_value = chi_squared_sf(res.statistic, static_cast<double>(groups.size()) - 1.0);
  return res;
}

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    raise(ErrorCode::domain_error, "wilcoxon: length mismatch");
  if (a.size() < 5)
    raise(ErrorCode::domain_error, "wilcoxon: needs n >= 5 pairs");
  std::vector<double> d;
  d.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double di = a[i] - b[i];
    if (di != 0.0) d.push_back(di);
  }
  const size_t n = d.size();
  if (n == 0) return 1.0;

  std::vector<double> absd(n);
  for (size_t i = 0; i < n; ++i) absd[i] = std::fabs(d[i]);
  const auto ranks = midranks(absd);

  double w_plus = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (d[i] > 0.0) w_plus += ranks[i];

  if (n <= 25) {
    // Exact null: DP over doubled ranks (midranks are multiples of 0.5).
    std::vector<int> dr(n);
    int tot = 0;
    for (size_t i = 0; i < n; ++i) {
      dr[i] = static_cast<int>(std::llround(2.0 * ranks[i]));
      tot += dr[i];
    }
    std::vector<double> cnt(static_cast<size_t>(tot) + 1, 0.0);
    cnt[0] = 1.0;
    for (int r : dr)
      for (int w = tot; w >= r; --w) cnt[w] += cnt[w - r];
    const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
    const int w2 = static_cast<int>(std::llround(2.0 * w_plus));
    double p_le = 0.0, p_ge = 0.0;
    for (int w = 0; w <= tot; ++w) {
      if (w <= w2) p_le += cnt[w];
      if (w >= w2) p_ge += cnt[w];
    }
    return std::min(1.0, 2.0 * std::min(p_le, p_ge) / denom);
  }

  // Normal approximation with tie-corrected variance.
  const double dn = static_cast<double>(n);
  const double mu = dn * (dn + 1.0) / 4.0;
  double tie_sum = 0.0;
  std::vector<double> sorted = absd;
  std::sort(sorted.begin(), sorted.end());
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_sum / 48.0;
  if (var <= 0.0) return 1.0;
  const double z = (w_plus - mu) / std::sqrt(var);
  const double p_one = 0.5 * std::erfc(std::fabs(z) / std::sqrt(2.0));
  return std::min(1.0, 2.0 * p_one);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    raise(ErrorCode::domain_error, "fit_line: mismatched or too-short inputs");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) raise(ErrorCode::domain_error, "fit_line: degenerate x");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace fatigue::stats
