#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace bbmlab::stats {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double std_error(const std::vector<double>& v);
double median(std::vector<double> v);  // by value: scratch copy

struct WilsonInterval {
  double p_hat, lo, hi;
};
// Wilson score interval for a binomial proportion (default z for 95%).
WilsonInterval wilson_interval(std::size_t successes, std::size_t n,
                               double z = 1.959963984540054);

// One-sample Kolmogorov–Smirnov statistic of sorted samples against a CDF.
double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf);

// Asymptotic KS p-value with the Stephens small-sample correction.
double ks_pvalue(double d, std::size_t n);

// KS distance between a signed atomic measure (normalized by its total
// weight) and a reference CDF.  Atoms need not be sorted; weights may be
// negative.  Throws numerical_error("degenerate replica") if the total weight
// is not positive.
double weighted_ks(std::vector<std::pair<double, double>> atoms,
                   const std::function<double(double)>& cdf);

// Least squares y ~ sum_j beta_j * cols[j], via normal equations with column
// scaling (design matrices here are tiny and tall).  Optionally returns the
// residual vector.
std::vector<double> least_squares(const std::vector<std::vector<double>>& cols,
                                  const std::vector<double>& y,
                                  std::vector<double>* residuals = nullptr);

struct LineFit {
  double slope, intercept, slope_stderr;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bbmlab::stats
