#include "bbmlab/fd_oracle.hpp"

#include <cmath>
#include <vector>

#include "bbmlab/errors.hpp"
#include "bbmlab/tridiag.hpp"

namespace bbmlab {

ScalarField1D fd_solve(const CanonicalProblem& prob,
                       const ScalarField1D& initial, double t_end,
                       FdConfig cfg) {
  const double eps = prob.epsilon;
  if (cfg.dx <= 0.0) cfg.dx = std::sqrt(eps) / 50.0;
  if (cfg.dt <= 0.0) cfg.dt = 4e-3 * eps * std::sqrt(eps);
  if (cfg.dx > std::sqrt(eps) / 20.0 + 1e-15) {
    throw domain_error("grid does not resolve the boundary layer: dx must be <= sqrt(epsilon)/20");
  }
  if (!(t_end >= 0.0) || t_end > 1.0 + 1e-9) {
    throw domain_error("canonical time outside [0,1]");
  }

  const int m = static_cast<int>(std::round(cfg.x_max / cfg.dx));
  const double dx = cfg.x_max / m;
  const int nin = m - 1;  // interior nodes

  // Resample the initial condition onto this grid; Dirichlet 0 at both ends.
  std::vector<double> u(nin);
  for (int i = 0; i < nin; ++i) u[i] = initial.at((i + 1) * dx);

  const long steps = std::lround(std::ceil(t_end / cfg.dt - 1e-12));
  const double dt = steps > 0 ? t_end / steps : 0.0;
  const double r = 0.5 * dt / (eps * dx * dx);

  std::vector<double> a(nin, -r), b(nin), c(nin, -r), d(nin), x(nin);
  std::vector<double> xg(nin);
  for (int i = 0; i < nin; ++i) xg[i] = (i + 1) * dx;
  TridiagWorkspace ws;

  auto l2 = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double vv : v) s += vv * vv;
    return std::sqrt(s * dx);
  };
  double norm_prev = l2(u);

  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double qmid = prob.q(t + 0.5 * dt);
    const double pscale = 0.5 * dt * qmid / eps;
    for (int i = 0; i < nin; ++i) {
      const double pot = pscale * xg[i];
      b[i] = 1.0 + 2.0 * r + pot;
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < nin ? u[i + 1] : 0.0;
      d[i] = r * (left + right) + (1.0 - 2.0 * r - pot) * u[i];
    }
    tridiag_solve(a, b, c, d, x, ws);
    u.swap(x);
    t += dt;
    if ((k & 255) == 0 || k + 1 == steps) {
      const double nn = l2(u);
      if (nn > norm_prev * (1.0 + 1e-9)) {
        throw numerical_error("finite-difference norm guard violated");
      }
      norm_prev = nn;
    }
  }

  ScalarField1D out;
  out.x0 = 0.0;
  out.dx = dx;
  out.time = t_end;
  out.values.resize(m + 1);
  out.values[0] = 0.0;
  out.values[m] = 0.0;
  for (int i = 0; i < nin; ++i) out.values[i + 1] = u[i];
  return out;
}

}  // namespace bbmlab
