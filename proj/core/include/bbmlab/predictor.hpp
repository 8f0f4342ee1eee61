#pragma once

#include <string>

#include "bbmlab/sigma_profile.hpp"

namespace bbmlab {

// Deterministic front geometry derived from a variance profile: the linear
// and T^{1/3} speed coefficients v, w, the clock change J, the predicted
// maximum location, the high-probability envelope gamma_T, the bent envelope
// zeta_T = gamma_T + K - phi_T, and the potential q_T with its canonical
// J-reparametrization.
class Predictor {
 public:
  explicit Predictor(SigmaProfile profile);

  const SigmaProfile& profile() const { return prof_; }

  // Curve integrals on macroscopic time t in [0,1] (abs tol 1e-10):
  //   v(t)  = int_0^t sigma
  //   w(t)  = 2^{-1/3} alpha_1 int_0^t sigma^{1/3} |sigma'|^{2/3}
  //   J(t)  = int_0^t sigma^2 / 2
  double v(double t) const;
  double w(double t) const;
  double J(double t) const;
  double w_prime(double t) const;  // integrand of w
  double v1() const { return v1_; }
  double w1() const { return w1_; }
  double J1() const { return J1_; }
  double J_inverse(double y) const;  // bisection on [0,1]

  struct Bundle {
    double T, v1, w1, m_prime, sigma0, sigma1;
  };
  // m'_T = v(1) T - w(1) T^{1/3} - sigma(1) log T; requires T >= 3.
  Bundle prediction(double T) const;

  // Envelope gamma_T(t) = T v(t/T) - T^{1/3} w(t/T) for t in [0,T].
  double gamma(double T, double t) const;

  // Final-window correction phi_T: zero until T - h (h = T^{2/3}), then a
  // parabola a u^2 glued at u = h/2 to a line of slope a h, reaching
  // S = sigma(1) log T at u = h.  a = 4S/(3h^2).
  struct Phi {
    double T = 0, h = 0, S = 0, a = 0;
    double value(double t) const;
    double slope(double t) const;
  };
  Phi build_phi(double T) const;

  struct Barrier {
    double T = 0, K = 0;
    Phi phi;
    const Predictor* pred = nullptr;
    double gamma(double t) const { return pred->gamma(T, t); }
    double zeta(double t) const { return pred->gamma(T, t) + K - phi.value(t); }
  };
  Barrier barrier(double T, double K) const;

  // q_T(t) = |sigma'(t)|/sigma^2(t) + T^{-2/3} (w'/sigma^2)'(t), t in [0,1].
  double q_T(double T, double t) const;
  // Throws if q_T is not positive on a grid (the potential must be positive).
  void require_positive_q(double T, int grid = 512) const;
  // Canonical-time potential: q(J(u)/J(1)) = 2 q_T(u) / sigma^2(u).
  double q_canonical(double T, double s) const;
  // Small parameter of the canonical equation: 1 / (J(1) T^{1/3}).
  double epsilon_of(double T) const;
  // s_0 = J^{-1}(4 T^{-1/3}) T, the time by which the clock change has
  // accumulated 4 epsilon of canonical time.
  double s0(double T) const;

  struct ValidationReport {
    bool member = false;
    double sum_condition = 0;    // sigma(0) + 1/sigma(1), must be < c0
    double sup_d2 = 0;           // sup |sigma''|, must be < c0
    double inf_abs_dsigma = 0;   // inf |sigma'|, must be > 1/c0
    double margin_sum = 0, margin_curvature = 0, margin_slope = 0;
  };
  // Verdict + margins for the admissibility class at level c0.  A profile
  // that is not strictly decreasing on the validation grid is an error, not
  // a non-member.
  ValidationReport validate(double c0, int grid = 1000) const;

 private:
  SigmaProfile prof_;
  double v1_ = 0, w1_ = 0, J1_ = 0;
};

}  // namespace bbmlab
