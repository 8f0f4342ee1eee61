#pragma once

#include <utility>
#include <vector>

#include "bbmlab/field.hpp"
#include "bbmlab/offspring.hpp"
#include "bbmlab/sigma_profile.hpp"

namespace bbmlab {

// Reaction-diffusion front solver for
//   dF/dt = sigma^2(1 - t/T)/2 F_xx + beta0 (E[F^L] - F),  F(x,0) = 1_{x>=0},
// whose solution at time T is the CDF of the maximum at the horizon.  The
// clock runs in reverse so the, initially slow, late-time variance acts
// first.  Strang splitting: exact (binary) or clamped-Euler (general law)
// reaction halves around a Crank-Nicolson diffusion step; the first two
// steps use damped implicit-Euler substeps to absorb the Heaviside kink.
// The uniform grid is a window that translates with the front.
struct FkppConfig {
  double dx = 0.05;       // must be <= 0.05
  double dt = 0.0;        // 0 -> dx^2 / sigma(0)^2 (also the enforced cap)
  double pad_left = 20.0;   // space kept behind the front (units)
  double pad_right = 60.0;  // space kept ahead of the front (units)
  double level = 0.5;       // quantile tracked as "the front"
  int n_snapshots = 0;      // evenly spaced intermediate fields to keep
};

struct FkppResult {
  ScalarField1D final_cdf;
  std::vector<ScalarField1D> snapshots;
  std::vector<std::pair<double, double>> front_curve;  // (t, front position)
  double front_median = 0.0;  // level crossing of the final CDF
};

FkppResult solve_fkpp(const SigmaProfile& profile, const OffspringLaw& law,
                      double T, FkppConfig cfg = {});

// Interpolated level crossing of a monotone field.
double front_position(const ScalarField1D& field, double level = 0.5);

// Least squares of front positions against (T, T^{1/3}, log T, 1).
struct ExpansionFit {
  double c_T = 0, c_T13 = 0, c_logT = 0, c_1 = 0;  // raw coefficients
  double v1_hat() const { return c_T; }
  double w1_hat() const { return -c_T13; }
  double ell_hat() const { return -c_logT; }
  std::vector<double> residuals;
};
ExpansionFit fit_expansion(const std::vector<std::pair<double, double>>& fronts);

}  // namespace bbmlab
