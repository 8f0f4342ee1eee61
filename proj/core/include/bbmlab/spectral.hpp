#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bbmlab/airy.hpp"
#include "bbmlab/field.hpp"
#include "bbmlab/predictor.hpp"

namespace bbmlab {

// The canonical Airy-type evolution problem
//   w_t = eps^{-1} (w_xx - q(t) x w)  on (0,inf), Dirichlet at 0, t in [0,1]
// described by the potential schedule q, its logarithmic derivative, the
// small parameter eps, and the eigen-truncation level.
struct CanonicalProblem {
  std::function<double(double)> q;      // positive on [0,1]
  std::function<double(double)> dlogq;  // (log q)'
  double epsilon = 0.01;
  int n_modes = 0;  // 0 -> truncation rule below
  std::string name;

  double Q1() const;  // inf q^{2/3} over a grid
  double Q2() const;  // sup |(log q)'| over a grid
  // Smallest N with exp(-4 (alpha_N - alpha_1) Q1) below machine epsilon
  // (the mode is extinct by the earliest time the shape estimates apply),
  // clamped to [12, 120].
  int default_modes() const;

  // "const1" (q = 1) or "ramp" (q = 1 + t/2).
  static CanonicalProblem registry(const std::string& name, double epsilon);
  // J-reparametrized potential of a variance profile at horizon T, with
  // eps = 1/(J(1) T^{1/3}).
  static CanonicalProblem from_profile(const Predictor& pred, double T);
};

// Coefficients c_n(t) of the rescaled solution W_t (the solution times
// exp(eps^{-1} alpha_1 int_0^t q^{2/3})) in the moving basis psi_n^{q(t)}.
struct SpectralState {
  std::vector<double> c;
  double t = 0.0;
  double norm() const;
};

class SpectralSolver {
 public:
  explicit SpectralSolver(CanonicalProblem prob);

  const CanonicalProblem& problem() const { return prob_; }
  int n_modes() const { return basis_.size(); }
  const airy::Basis& basis() const { return basis_; }

  // Spectral representation of delta(. - x0): c_n(0) = psi_n^{q(0)}(x0).
  SpectralState project_delta(double x0) const;
  // Quadrature projection of a smooth initial condition.
  SpectralState project_function(const std::function<double(double)>& f) const;

  // Integrate dc/dt = (D(t) + (log q)'(t) A) c with the exact exponential of
  // the diagonal D(t) = -eps^{-1} q^{2/3} diag(alpha_n - alpha_1) and an
  // explicit midpoint pass for the coupling.  Step h <= eps/10; the L2 norm
  // of c may never increase beyond 1e-9 slack.
  SpectralState evolve(const SpectralState& s, double t_end) const;

  // Field value / sampled field sum_n c_n psi_n^{q(t)}(y) (the W_t frame).
  double reconstruct(const SpectralState& s, double y) const;
  ScalarField1D reconstruct_field(const SpectralState& s, double y_max,
                                  double dy) const;

  // log of the removed ground amplitude: -eps^{-1} alpha_1 int_0^t q^{2/3}.
  double ground_log_amplitude(double t) const;

  // Fundamental solution g(x, y; t) from delta initial data at x.  For
  // t < 4 eps the shape estimates do not apply yet: the value is still
  // computed and *regime_warning is set.
  double fundamental_g(double x, double y, double t,
                       bool* regime_warning = nullptr) const;
  // W-frame shape g(x, .; t) e^{eps^{-1} alpha_1 int q^{2/3}} / psi_1^{q(0)}(x),
  // the object that converges to psi_1^{q(t)} up to O(eps).
  ScalarField1D fundamental_shape(double x, double t, double y_max, double dy,
                                  bool* regime_warning = nullptr) const;

  struct ModeDecayReport {
    double slope = 0;     // d log|c_n| / d n^{2/3}
    double kappa2 = 0;    // -slope * eps / min(t, delta), the fitted decay rate
    int modes_used = 0;
  };
  // Fit of log|c_n(t)|, n >= 2, against n^{2/3}.
  ModeDecayReport check_mode_decay(const SpectralState& s, double delta) const;

 private:
  std::vector<double> coupling_apply(double t, const std::vector<double>& c) const;
  double q23_integral(double a, double b) const;  // 2-pt Gauss per call

  CanonicalProblem prob_;
  airy::Basis basis_;
  airy::CouplingMatrix A_;
  std::vector<double> dshift_;        // alpha_n - alpha_1
  mutable double Q2_cache_ = -1.0;    // sup |(log q)'|, computed on demand
};

// Fundamental solution of the original barrier-potential equation on [0,T],
// obtained from the canonical one by the clock change tau = J(t/T)/J(1), the
// space scaling y -> T^{-1/3} y and the exponential amplitude; the amplitude
// exactly cancels the ground decay of g, so this is numerically benign.
double transport_G(const Predictor& pred, double T, double x, double y,
                   double t, bool* regime_warning = nullptr);
ScalarField1D transport_G_field(const Predictor& pred, double T, double x,
                                double t, double y_max, double dy,
                                bool* regime_warning = nullptr);

}  // namespace bbmlab
