#pragma once

#include <cstddef>
#include <vector>

namespace bbmlab {

// Thomas algorithm for a tridiagonal system with sub/diag/super bands
// (a, b, c); a[0] and c[n-1] are ignored.  Scratch buffers are caller-owned so
// time-stepping loops can reuse them without reallocating.
struct TridiagWorkspace {
  std::vector<double> cp, dp;
  void resize(std::size_t n) {
    cp.resize(n);
    dp.resize(n);
  }
};

inline void tridiag_solve(const std::vector<double>& a,
                          const std::vector<double>& b,
                          const std::vector<double>& c,
                          const std::vector<double>& d,
                          std::vector<double>& x, TridiagWorkspace& ws) {
  const std::size_t n = b.size();
  ws.resize(n);
  double beta = b[0];
  ws.cp[0] = c[0] / beta;
  ws.dp[0] = d[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = b[i] - a[i] * ws.cp[i - 1];
    ws.cp[i] = c[i] / beta;
    ws.dp[i] = (d[i] - a[i] * ws.dp[i - 1]) / beta;
  }
  x.resize(n);
  x[n - 1] = ws.dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = ws.dp[i] - ws.cp[i] * x[i + 1];
  }
}

}  // namespace bbmlab
