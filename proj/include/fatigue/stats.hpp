#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fatigue::stats {

double mean(std::span<const double> x);
double sample_std(std::span<const double> x);  // n-1 denominator
double pearson(std::span<const double> a, std::span<const double> b);

// Survival function of the chi-squared distribution, P(X >= x) with `dof`
// degrees of freedom. Regularized upper incomplete gamma.
double chi_squared_sf(double x, double dof);

struct KruskalWallisResult {
  double statistic = 0.0;  // tie-corrected H
  double p_value = 1.0;    // chi-squared approximation, k-1 dof
};

// Rank-based k-sample test. Requires >= 2 groups, each with >= 1 sample.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences are
// dropped (per the classical procedure); if all differences are zero the
// p-value is 1. Exact null distribution (over all sign assignments, with
// average ranks for ties) for n <= 25, normal approximation beyond.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Midranks of `x` (average ranks for ties), 1-based.
std::vector<double> midranks(std::span<const double> x);

}  // namespace fatigue::stats
