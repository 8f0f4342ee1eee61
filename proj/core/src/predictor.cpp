#include "bbmlab/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "bbmlab/airy.hpp"
#include "bbmlab/errors.hpp"
#include "bbmlab/quadrature.hpp"

namespace bbmlab {

namespace {
const double kCbrtHalf = std::pow(2.0, -1.0 / 3.0);

double check01(double t, const char* what) {
  if (t < -1e-9 || t > 1.0 + 1e-9) {
    throw domain_error(std::string(what) + ": time outside [0,1]");
  }
  return std::clamp(t, 0.0, 1.0);
}
}  // namespace

Predictor::Predictor(SigmaProfile profile) : prof_(std::move(profile)) {
  v1_ = v(1.0);
  w1_ = w(1.0);
  J1_ = J(1.0);
}

double Predictor::v(double t) const {
  t = check01(t, "v");
  return integrate([this](double s) { return prof_.sigma(s); }, 0.0, t, 1e-10);
}

double Predictor::w_prime(double t) const {
  t = check01(t, "w'");
  const double s = prof_.sigma(t);
  const double ds = std::abs(prof_.dsigma(t));
  return kCbrtHalf * airy::zero(1) * std::cbrt(s) * std::pow(ds, 2.0 / 3.0);
}

double Predictor::w(double t) const {
  t = check01(t, "w");
  return integrate([this](double s) { return w_prime(s); }, 0.0, t, 1e-10);
}

double Predictor::J(double t) const {
  t = check01(t, "J");
  return integrate(
      [this](double s) {
        const double v = prof_.sigma(s);
        return 0.5 * v * v;
      },
      0.0, t, 1e-10);
}

double Predictor::J_inverse(double y) const {
  if (y < -1e-12 || y > J1_ + 1e-12) {
    throw domain_error("J_inverse: value outside [0, J(1)]");
  }
  if (y <= 0.0) return 0.0;
  if (y >= J1_) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (J(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14) break;
  }
  return 0.5 * (lo + hi);
}

Predictor::Bundle Predictor::prediction(double T) const {
  if (!(T >= 3.0)) throw domain_error("horizon too small");
  Bundle b;
  b.T = T;
  b.v1 = v1_;
  b.w1 = w1_;
  b.sigma0 = prof_.sigma(0.0);
  b.sigma1 = prof_.sigma(1.0);
  b.m_prime = v1_ * T - w1_ * std::cbrt(T) - b.sigma1 * std::log(T);
  return b;
}

double Predictor::gamma(double T, double t) const {
  if (t < -1e-9 || t > T * (1.0 + 1e-12) + 1e-9) {
    throw domain_error("gamma: time outside [0,T]");
  }
  const double s = std::clamp(t / T, 0.0, 1.0);
  return T * v(s) - std::cbrt(T) * w(s);
}

double Predictor::Phi::value(double t) const {
  const double u = t - (T - h);
  if (u <= 0.0) return 0.0;
  if (u <= 0.5 * h) return a * u * u;
  return S / 3.0 + a * h * (std::min(u, h) - 0.5 * h);
}

double Predictor::Phi::slope(double t) const {
  const double u = t - (T - h);
  if (u <= 0.0 || u > h) return 0.0;
  if (u <= 0.5 * h) return 2.0 * a * u;
  return a * h;
}

Predictor::Phi Predictor::build_phi(double T) const {
  const double h = std::cbrt(T) * std::cbrt(T);
  const double S = prof_.sigma(1.0) * std::log(T);
  if (!(h >= 8.0) || !(S > 0.0)) {
    throw domain_error("horizon too small for glue");
  }
  Phi phi;
  phi.T = T;
  phi.h = h;
  phi.S = S;
  phi.a = 4.0 * S / (3.0 * h * h);
  return phi;
}

Predictor::Barrier Predictor::barrier(double T, double K) const {
  Barrier b;
  b.T = T;
  b.K = K;
  b.phi = build_phi(T);
  b.pred = this;
  return b;
}

double Predictor::q_T(double T, double t) const {
  t = check01(t, "q_T");
  const double s = prof_.sigma(t);
  const double ds = prof_.dsigma(t);
  const double d2s = prof_.d2sigma(t);
  const double lead = std::abs(ds) / (s * s);
  // (w'/sigma^2)' with w' = 2^{-1/3} alpha_1 sigma^{1/3} |sigma'|^{2/3}:
  const double mag = std::abs(ds);
  const double corr =
      kCbrtHalf * airy::zero(1) *
      ((5.0 / 3.0) * std::pow(s, -8.0 / 3.0) * std::pow(mag, 5.0 / 3.0) -
       (2.0 / 3.0) * std::pow(s, -5.0 / 3.0) * std::pow(mag, -1.0 / 3.0) * d2s);
  return lead + std::pow(T, -2.0 / 3.0) * corr;
}

void Predictor::require_positive_q(double T, int grid) const {
  for (int i = 0; i <= grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    if (!(q_T(T, t) > 0.0)) {
      throw numerical_error("horizon too small for positive potential");
    }
  }
}

double Predictor::q_canonical(double T, double s) const {
  s = check01(s, "q_canonical");
  const double u = J_inverse(J1_ * s);
  const double sig = prof_.sigma(u);
  return 2.0 * q_T(T, u) / (sig * sig);
}

double Predictor::epsilon_of(double T) const {
  return 1.0 / (J1_ * std::cbrt(T));
}

double Predictor::s0(double T) const {
  const double target = 4.0 * std::pow(T, -1.0 / 3.0);
  if (target > J1_) throw domain_error("horizon too small");
  return J_inverse(target) * T;
}

Predictor::ValidationReport Predictor::validate(double c0, int grid) const {
  ValidationReport r;
  double inf_slope = 1e300, sup_d2 = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    const double ds = prof_.dsigma(t);
    if (!(ds < 0.0)) throw domain_error("sigma not strictly decreasing");
    inf_slope = std::min(inf_slope, std::abs(ds));
    sup_d2 = std::max(sup_d2, std::abs(prof_.d2sigma(t)));
  }
  r.sum_condition = prof_.sigma(0.0) + 1.0 / prof_.sigma(1.0);
  r.sup_d2 = sup_d2;
  r.inf_abs_dsigma = inf_slope;
  r.margin_sum = c0 - r.sum_condition;
  r.margin_curvature = c0 - r.sup_d2;
  r.margin_slope = r.inf_abs_dsigma - 1.0 / c0;
  r.member = r.margin_sum > 0.0 && r.margin_curvature > 0.0 && r.margin_slope > 0.0;
  return r;
}

}  // namespace bbmlab
