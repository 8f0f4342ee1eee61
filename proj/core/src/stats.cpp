#include "bbmlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "bbmlab/errors.hpp"

namespace bbmlab::stats {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw domain_error("mean of empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw domain_error("variance needs at least two samples");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double std_error(const std::vector<double>& v) {
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  if (v.empty()) throw domain_error("median of empty sample");
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) throw domain_error("Wilson interval with n = 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {p, center - half, center + half};
}

double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_samples.size();
  if (n == 0) throw domain_error("KS of empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = cdf(sorted_samples[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(std::abs(F - lo), std::abs(F - hi)));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  // Kolmogorov tail sum; converges very fast for lambda > 0.3.
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

double weighted_ks(std::vector<std::pair<double, double>> atoms,
                   const std::function<double(double)>& cdf) {
  if (atoms.empty()) throw numerical_error("degenerate replica");
  double total = 0.0;
  for (const auto& a : atoms) total += a.second;
  if (!(total > 0.0)) throw numerical_error("degenerate replica");
  std::sort(atoms.begin(), atoms.end());
  double d = 0.0, cum = 0.0;
  for (const auto& [x, w] : atoms) {
    const double F = cdf(x);
    d = std::max(d, std::abs(cum / total - F));  // left limit
    cum += w;
    d = std::max(d, std::abs(cum / total - F));
  }
  return d;
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& cols,
                                  const std::vector<double>& y,
                                  std::vector<double>* residuals) {
  const std::size_t p = cols.size();
  if (p == 0) throw domain_error("least squares without regressors");
  const std::size_t n = y.size();
  for (const auto& c : cols) {
    if (c.size() != n) throw domain_error("least squares: ragged design");
  }
  if (n < p) throw domain_error("least squares: underdetermined");

  // Scale each column to unit Euclidean norm to tame the conditioning of the
  // normal equations (columns here are T, T^{1/3}, log T, 1 over a decade).
  std::vector<double> scale(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (double v : cols[j]) s += v * v;
    scale[j] = s > 0.0 ? std::sqrt(s) : 1.0;
  }

  std::vector<std::vector<double>> G(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += cols[i][k] * cols[j][k];
      G[i][j] = s / (scale[i] * scale[j]);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += cols[i][k] * y[k];
    G[i][p] = s / scale[i];
  }

  // Gaussian elimination with partial pivoting on the (p x p+1) tableau.
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(G[r][col]) > std::abs(G[piv][col])) piv = r;
    }
    if (std::abs(G[piv][col]) < 1e-13) {
      throw domain_error("insufficient horizon spread");
    }
    std::swap(G[col], G[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = G[r][col] / G[col][col];
      for (std::size_t cc = col; cc <= p; ++cc) G[r][cc] -= f * G[col][cc];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = G[j][p] / G[j][j] / scale[j];

  if (residuals) {
    residuals->assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double fit = 0.0;
      for (std::size_t j = 0; j < p; ++j) fit += beta[j] * cols[j][k];
      (*residuals)[k] = y[k] - fit;
    }
  }
  return beta;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw domain_error("line fit needs n >= 2");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw domain_error("line fit: degenerate abscissae");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - intercept - slope * x[i];
    sse += r * r;
  }
  const double se =
      n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  return {slope, intercept, se};
}

}  // namespace bbmlab::stats
