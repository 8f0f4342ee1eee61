#pragma once

#include "bbmlab/field.hpp"
#include "bbmlab/spectral.hpp"

namespace bbmlab {

// Direct Crank-Nicolson integration of w_t = eps^{-1} (w_xx - q(t) x w) on
// (0, x_max) with Dirichlet ends, used as an independent cross-check of the
// spectral solver.  Grid spacing must resolve the boundary layer:
// dx <= sqrt(epsilon)/20 is enforced.
struct FdConfig {
  double dx = 0.0;     // 0 -> sqrt(epsilon)/50
  double dt = 0.0;     // 0 -> 4e-3 * epsilon^{3/2}
  double x_max = 14.0;
};

ScalarField1D fd_solve(const CanonicalProblem& prob,
                       const ScalarField1D& initial, double t_end,
                       FdConfig cfg = {});

}  // namespace bbmlab
