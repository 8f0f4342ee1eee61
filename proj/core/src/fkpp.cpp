#include "bbmlab/fkpp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bbmlab/errors.hpp"
#include "bbmlab/stats.hpp"
#include "bbmlab/tridiag.hpp"

namespace bbmlab {

namespace {

// dF/dtau = beta (F^2 - F) integrates in closed form (logistic decay toward
// the stable roots); E = exp(-beta tau) is hoisted out of the point loop.
void reaction_binary(std::vector<double>& F, double E) {
  for (double& f : F) {
    const double fe = f * E;
    f = fe / (1.0 - f + fe);
  }
}

void reaction_euler(std::vector<double>& F, const OffspringLaw& law,
                    double beta_dtau) {
  for (double& f : F) {
    f = std::clamp(f + beta_dtau * (law.generating(f) - f), 0.0, 1.0);
  }
}

}  // namespace

FkppResult solve_fkpp(const SigmaProfile& profile, const OffspringLaw& law,
                      double T, FkppConfig cfg) {
  if (!(T > 0.0)) throw domain_error("horizon must be positive");
  if (!(cfg.dx > 0.0) || cfg.dx > 0.05 + 1e-12) {
    throw domain_error("dx must lie in (0, 0.05]");
  }
  const double sig0 = profile.sigma(0.0);
  const double dt_cap = cfg.dx * cfg.dx / (sig0 * sig0);
  if (cfg.dt <= 0.0) cfg.dt = dt_cap;
  if (cfg.dt > dt_cap * (1.0 + 1e-12)) {
    throw domain_error("dt exceeds dx^2/sigma(0)^2");
  }
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw domain_error("level must lie in (0,1)");
  }

  const long n_steps = std::lround(std::ceil(T / cfg.dt - 1e-12));
  const double dt = T / static_cast<double>(n_steps);
  const double dx = cfg.dx;
  constexpr int kShiftBlock = 512;

  // Window [-pad_left, pad_right + block*dx]; translated right in whole
  // blocks so the front keeps at least pad_left behind and pad_right ahead.
  const int n_left = static_cast<int>(std::ceil(cfg.pad_left / dx));
  const int n_right =
      static_cast<int>(std::ceil(cfg.pad_right / dx)) + kShiftBlock;
  const int n = n_left + n_right + 1;
  double x0 = -n_left * dx;
  std::vector<double> F(n);
  for (int i = 0; i < n; ++i) F[i] = (x0 + i * dx) >= 0.0 ? 1.0 : 0.0;
  int fi = n_left - 1;  // F[fi] < level <= F[fi+1]

  const bool binary = law.is_binary();
  const double beta = law.beta0();
  const double E_half = std::exp(-beta * 0.5 * dt);

  std::vector<double> a(n - 2), b(n - 2), c(n - 2), d(n - 2), sol(n - 2);
  TridiagWorkspace ws;

  FkppResult res;
  const long curve_every = std::max(1L, n_steps / 512);
  std::set<long> snap_at;
  for (int j = 1; j <= cfg.n_snapshots; ++j) {
    snap_at.insert(n_steps * j / (cfg.n_snapshots + 1));
  }

  auto front_x = [&]() {
    const double f0 = F[fi], f1 = F[fi + 1];
    const double frac = f1 > f0 ? (cfg.level - f0) / (f1 - f0) : 1.0;
    return x0 + dx * (fi + frac);
  };

  for (long k = 0; k < n_steps; ++k) {
    const double t = k * dt;

    if (binary) {
      reaction_binary(F, E_half);
    } else {
      reaction_euler(F, law, beta * 0.5 * dt);
    }

    const double arg = std::clamp(1.0 - (t + 0.5 * dt) / T, 0.0, 1.0);
    const double sig = profile.sigma(arg);
    const double nu = 0.5 * sig * sig;
    if (k < 2) {
      // Damped implicit-Euler substeps absorb the Heaviside kink that
      // Crank-Nicolson would keep ringing.
      const double r = nu * (0.5 * dt) / (dx * dx);
      for (int sub = 0; sub < 2; ++sub) {
        for (int i = 0; i < n - 2; ++i) {
          a[i] = -r;
          b[i] = 1.0 + 2.0 * r;
          c[i] = -r;
          d[i] = F[i + 1];
        }
        d[0] += r * F[0];
        d[n - 3] += r * F[n - 1];
        tridiag_solve(a, b, c, d, sol, ws);
        for (int i = 0; i < n - 2; ++i) F[i + 1] = sol[i];
      }
    } else {
      const double r = nu * dt / (dx * dx);
      for (int i = 0; i < n - 2; ++i) {
        a[i] = -0.5 * r;
        b[i] = 1.0 + r;
        c[i] = -0.5 * r;
        d[i] = 0.5 * r * F[i] + (1.0 - r) * F[i + 1] + 0.5 * r * F[i + 2];
      }
      d[0] += 0.5 * r * F[0];
      d[n - 3] += 0.5 * r * F[n - 1];
      tridiag_solve(a, b, c, d, sol, ws);
      for (int i = 0; i < n - 2; ++i) F[i + 1] = sol[i];
    }

    if (binary) {
      reaction_binary(F, E_half);
    } else {
      reaction_euler(F, law, beta * 0.5 * dt);
    }

    F[0] = 0.0;
    F[n - 1] = 1.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      double v = std::clamp(F[i], 0.0, 1.0);
      if (v < prev) v = prev;
      F[i] = v;
      prev = v;
    }

    while (fi + 2 < n && F[fi + 1] < cfg.level) ++fi;
    while (fi > 0 && F[fi] >= cfg.level) --fi;
    const double fx = front_x();
    if (x0 + (n - 1) * dx - fx < 5.0) {
      throw numerical_error("domain exhausted");
    }
    if (fx - x0 > cfg.pad_left + kShiftBlock * dx) {
      std::copy(F.begin() + kShiftBlock, F.end(), F.begin());
      std::fill(F.end() - kShiftBlock, F.end(), 1.0);
      x0 += kShiftBlock * dx;
      fi -= kShiftBlock;
    }

    const long k1 = k + 1;
    if (k1 % curve_every == 0 || k1 == n_steps) {
      res.front_curve.emplace_back(k1 * dt, front_x());
    }
    if (snap_at.count(k1)) {
      ScalarField1D snap;
      snap.x0 = x0;
      snap.dx = dx;
      snap.time = k1 * dt;
      snap.values = F;
      res.snapshots.push_back(std::move(snap));
    }
  }

  res.final_cdf.x0 = x0;
  res.final_cdf.dx = dx;
  res.final_cdf.time = T;
  res.final_cdf.values = std::move(F);
  res.front_median = front_position(res.final_cdf, cfg.level);
  return res;
}

double front_position(const ScalarField1D& field, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw domain_error("level must lie in (0,1)");
  }
  const auto& v = field.values;
  if (v.size() < 2 || v.front() >= level || v.back() < level) {
    throw domain_error("front not in domain");
  }
  std::size_t i = 1;
  while (v[i] < level) ++i;
  const double f0 = v[i - 1], f1 = v[i];
  const double frac = f1 > f0 ? (level - f0) / (f1 - f0) : 1.0;
  return field.x0 + field.dx * (static_cast<double>(i - 1) + frac);
}

ExpansionFit fit_expansion(
    const std::vector<std::pair<double, double>>& fronts) {
  std::set<double> horizons;
  for (const auto& [T, m] : fronts) horizons.insert(T);
  if (horizons.size() < 6 ||
      *horizons.rbegin() < 10.0 * (1.0 - 1e-9) * *horizons.begin()) {
    throw domain_error("insufficient horizon spread");
  }
  std::vector<std::vector<double>> cols(4);
  std::vector<double> y;
  for (const auto& [T, m] : fronts) {
    cols[0].push_back(T);
    cols[1].push_back(std::cbrt(T));
    cols[2].push_back(std::log(T));
    cols[3].push_back(1.0);
    y.push_back(m);
  }
  ExpansionFit fit;
  const std::vector<double> beta =
      stats::least_squares(cols, y, &fit.residuals);
  fit.c_T = beta[0];
  fit.c_T13 = beta[1];
  fit.c_logT = beta[2];
  fit.c_1 = beta[3];
  return fit;
}

}  // namespace bbmlab
