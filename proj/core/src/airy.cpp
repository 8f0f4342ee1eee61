#include "bbmlab/airy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bbmlab/quadrature.hpp"

namespace bbmlab::airy {

namespace {

struct AiPairL {
  long double ai, aip;
};

// ---------------------------------------------------------------------------
// Maclaurin series.  Ai(x) = c1 f(x) - c2 g(x) with
//   f = sum 3^k (1/3)_k x^{3k} / (3k)!,  g = sum 3^k (2/3)_k x^{3k+1} / (3k+1)!
// evaluated through pure multiplicative term recurrences in long double.
// Usable for x in [-8, 4.5]: the worst cancellation there is ~e^{15}, well
// inside the 64-bit mantissa.
AiPairL maclaurin(long double x) {
  constexpr long double c1 = 0.355028053887817239260L;  //  Ai(0)
  constexpr long double c2 = 0.258819403792806798405L;  // -Ai'(0)
  if (x == 0.0L) return {c1, -c2};
  const long double x3 = x * x * x;
  long double t = 1.0L, s = x;
  long double f = t, g = s, fp = 0.0L, gp = s / x;
  for (int k = 1; k <= 400; ++k) {
    const long double a = 3.0L * (k - 1);
    t *= x3 / ((a + 2.0L) * (a + 3.0L));
    s *= x3 / ((a + 3.0L) * (a + 4.0L));
    f += t;
    g += s;
    fp += (3.0L * k) * t / x;
    gp += (3.0L * k + 1.0L) * s / x;
    if (std::abs(t) < 1e-25L * std::abs(f) &&
        std::abs(s) < 1e-25L * std::abs(g)) {
      break;
    }
  }
  return {c1 * f - c2 * g, c1 * fp - c2 * gp};
}

// ---------------------------------------------------------------------------
// Asymptotic expansions (both sides) built from the u_k / v_k coefficient
// recurrences
//   u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k),  v_k = u_k (6k+1)/(1-6k).
constexpr int kAsymTerms = 60;

struct AsymCoeffs {
  long double u[kAsymTerms + 1], v[kAsymTerms + 1];
  AsymCoeffs() {
    u[0] = v[0] = 1.0L;
    for (int k = 1; k <= kAsymTerms; ++k) {
      u[k] = u[k - 1] * (6.0L * k - 5.0L) * (6.0L * k - 3.0L) *
             (6.0L * k - 1.0L) / ((2.0L * k - 1.0L) * 216.0L * k);
      v[k] = u[k] * (6.0L * k + 1.0L) / (1.0L - 6.0L * k);
    }
  }
};

const AsymCoeffs& asym() {
  static const AsymCoeffs c;
  return c;
}

const long double kSqrtPi = 1.77245385090551602730L;

// x >= 9: Ai(x) ~ e^{-z}/(2 sqrt(pi) x^{1/4}) sum (-1)^k u_k z^-k, truncated
// at the smallest term (error ~e^{-2z}, i.e. below 1e-15 relative here).
AiPairL asym_positive(long double x) {
  const auto& c = asym();
  const long double z = (2.0L / 3.0L) * x * std::sqrt(x);
  long double su = 1.0L, sv = 1.0L, tu = 1.0L, tv = 1.0L;
  long double best = 1e99L;
  for (int k = 1; k <= kAsymTerms; ++k) {
    tu *= -c.u[k] / c.u[k - 1] / z;
    tv *= -c.v[k] / c.v[k - 1] / z;
    if (std::abs(tu) >= best) break;
    best = std::abs(tu);
    su += tu;
    sv += tv;
  }
  const long double pre = std::exp(-z) / (2.0L * kSqrtPi * std::pow(x, 0.25L));
  const long double prep =
      -std::pow(x, 0.25L) * std::exp(-z) / (2.0L * kSqrtPi);
  return {pre * su, prep * sv};
}

// x <= -8: oscillatory expansion around omega = z - pi/4 with even/odd
// u,v-sums; absolute error ~e^{-2z} relative to the local amplitude.
AiPairL asym_negative(long double x) {
  const auto& c = asym();
  const long double zx = -x;
  const long double z = (2.0L / 3.0L) * zx * std::sqrt(zx);
  const long double w = z - 0.785398163397448309616L;
  long double ue = 1.0L, uo = c.u[1] / z, ve = 1.0L, vo = c.v[1] / z;
  long double pe = 1.0L;  // running magnitude of the even u-term
  long double sgn = -1.0L;
  for (int k = 1; 2 * k + 1 <= kAsymTerms; ++k) {
    const long double te = sgn * c.u[2 * k] / std::pow(z, 2.0L * k);
    if (std::abs(te) >= pe) break;
    pe = std::abs(te);
    ue += te;
    uo += sgn * c.u[2 * k + 1] / std::pow(z, 2.0L * k + 1);
    ve += sgn * c.v[2 * k] / std::pow(z, 2.0L * k);
    vo += sgn * c.v[2 * k + 1] / std::pow(z, 2.0L * k + 1);
    sgn = -sgn;
  }
  const long double q4 = std::pow(zx, 0.25L);
  const long double cw = std::cos(w), sw = std::sin(w);
  const long double aiv = (cw * ue + sw * uo) / (kSqrtPi * q4);
  const long double aipv = (sw * ve - cw * vo) * q4 / kSqrtPi;
  return {aiv, aipv};
}

// ---------------------------------------------------------------------------
// Bridge on (4.5, 9): downward Taylor propagation of y'' = x y from x = 9.5
// (the direction in which the unwanted growing solution decays), cached at
// spacing 1/16 so queries Taylor-expand at most 1/32 from a node.
constexpr double kBridgeHi = 9.5;
constexpr double kBridgeLo = 4.4375;
constexpr double kBridgeStep = 0.0625;
constexpr int kBridgeNodes =
    static_cast<int>((kBridgeHi - kBridgeLo) / kBridgeStep + 1.5);

AiPairL taylor_step(long double x0, AiPairL y, long double h) {
  constexpr int deg = 18;
  long double c[deg + 1];
  c[0] = y.ai;
  c[1] = y.aip;
  for (int k = 0; k + 2 <= deg; ++k) {
    const long double prev = (k >= 1) ? c[k - 1] : 0.0L;
    c[k + 2] = (x0 * c[k] + prev) / ((k + 1.0L) * (k + 2.0L));
  }
  long double v = c[deg], d = deg * c[deg];
  for (int k = deg - 1; k >= 0; --k) {
    v = v * h + c[k];
    if (k >= 1) d = d * h + k * c[k];
  }
  return {v, d};
}

struct BridgeTable {
  AiPairL node[kBridgeNodes];
  BridgeTable() {
    AiPairL y = asym_positive(kBridgeHi);
    node[kBridgeNodes - 1] = y;
    for (int i = kBridgeNodes - 2; i >= 0; --i) {
      const long double x0 = kBridgeLo + kBridgeStep * (i + 1);
      y = taylor_step(x0, y, -kBridgeStep);
      node[i] = y;
    }
  }
};

AiPairL bridge(long double x) {
  static const BridgeTable table;
  int i = static_cast<int>((static_cast<double>(x) - kBridgeLo) / kBridgeStep +
                           0.5);
  i = std::clamp(i, 0, kBridgeNodes - 1);
  const long double x0 = kBridgeLo + kBridgeStep * i;
  return taylor_step(x0, table.node[i], x - x0);
}

}  // namespace

AiPair ai_both(double x) {
  if (!std::isfinite(x)) throw domain_error("ai: non-finite argument");
  AiPairL r;
  if (x < -8.0) {
    r = asym_negative(x);
  } else if (x <= 4.5) {
    r = maclaurin(x);
  } else if (x < 9.0) {
    r = bridge(x);
  } else {
    r = asym_positive(x);
  }
  return {static_cast<double>(r.ai), static_cast<double>(r.aip)};
}

double ai(double x) { return ai_both(x).ai; }
double ai_prime(double x) { return ai_both(x).aip; }

namespace {

constexpr int kMaxZeros = 200;

std::vector<double> compute_zeros() {
  std::vector<double> z(kMaxZeros);
  for (int n = 1; n <= kMaxZeros; ++n) {
    const double seed =
        std::pow(3.0 * std::numbers::pi * (4.0 * n - 1.0) / 8.0, 2.0 / 3.0);
    double a = seed;
    for (int it = 0; it < 60; ++it) {
      const AiPair p = ai_both(-a);
      const double step = p.ai / p.aip;  // Newton on f(a) = Ai(-a)
      a += step;
      if (std::abs(step) < 1e-13 * std::max(1.0, a)) break;
    }
    z[n - 1] = a;
  }
  return z;
}

const std::vector<double>& zero_table() {
  static const std::vector<double> z = compute_zeros();
  return z;
}

}  // namespace

int max_zero_index() { return kMaxZeros; }

double zero(int n) {
  if (n < 1 || n > kMaxZeros) throw domain_error("zero index exceeds table");
  return zero_table()[n - 1];
}

double normalizer_signed(int n) { return ai_prime(-zero(n)); }
double normalizer(int n) { return std::abs(normalizer_signed(n)); }

CouplingMatrix coupling_matrix(int n) {
  if (n < 2) throw domain_error("coupling matrix needs n >= 2");
  if (n > kMaxZeros) throw domain_error("zero index exceeds table");
  CouplingMatrix m;
  m.n = n;
  m.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      const double d = zero(j) - zero(i);
      m.entries[static_cast<std::size_t>(i - 1) * n + (j - 1)] =
          2.0 / (d * d * d);
    }
  }
  return m;
}

Basis::Basis(int n_modes) {
  if (n_modes < 1) throw domain_error("basis needs at least one mode");
  if (n_modes > kMaxZeros) throw domain_error("zero index exceeds table");
  alpha_.resize(n_modes);
  signed_norm_.resize(n_modes);
  norm_.resize(n_modes);
  for (int n = 1; n <= n_modes; ++n) {
    alpha_[n - 1] = zero(n);
    signed_norm_[n - 1] = normalizer_signed(n);
    norm_[n - 1] = std::abs(signed_norm_[n - 1]);
  }
}

double Basis::psi(int n, double x) const {
  return ai(x - alpha_.at(n - 1)) / signed_norm_[n - 1];
}

double Basis::psi_prime(int n, double x) const {
  return ai_prime(x - alpha_.at(n - 1)) / signed_norm_[n - 1];
}

double Basis::psi_scaled(int n, double q, double x) const {
  if (!(q > 0.0)) throw domain_error("psi_scaled: q must be positive");
  return std::pow(q, 1.0 / 6.0) * psi(n, std::cbrt(q) * x);
}

double Basis::psi_scaled_prime(int n, double q, double x) const {
  if (!(q > 0.0)) throw domain_error("psi_scaled: q must be positive");
  return std::sqrt(q) * psi_prime(n, std::cbrt(q) * x);
}

double coupling_quadrature(const Basis& basis, int i, int j) {
  auto f = [&](double x) {
    return x * (basis.psi_prime(i, x) * basis.psi(j, x) -
                basis.psi_prime(j, x) * basis.psi(i, x));
  };
  const double upper = std::max(basis.alpha(i), basis.alpha(j)) + 25.0;
  return integrate(f, 0.0, upper, 1e-10) / 6.0;
}

namespace {

// 16-point Gauss-Legendre rule on [-1, 1].
constexpr double kGl16X[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGl16W[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

// Composite GL-16 on unit-length segments.  The local oscillation
// wavelength of the basis integrands is 2 pi / sqrt(alpha - x) >= 0.6 even
// for the deepest tabulated mode, so 16 nodes per unit segment keep the
// rule at >= 10 points per wavelength and the error near round-off.
template <class F>
double gl16_unit_segments(F f, double a, double b) {
  const int segs = std::max(1, static_cast<int>(std::ceil(b - a)));
  const double h = (b - a) / segs;
  double total = 0.0;
  for (int s = 0; s < segs; ++s) {
    const double c = a + (s + 0.5) * h;
    const double r = 0.5 * h;
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) {
      acc += kGl16W[k] * (f(c - r * kGl16X[k]) + f(c + r * kGl16X[k]));
    }
    total += acc * r;
  }
  return total;
}

}  // namespace

double inner_product(const Basis& basis, int m, int n) {
  auto f = [&](double x) { return basis.psi(m, x) * basis.psi(n, x); };
  // Past alpha + 10 both factors are below Ai(10) ~ 1e-10, so the tail
  // contributes < 1e-20.
  const double upper = std::max(basis.alpha(m), basis.alpha(n)) + 10.0;
  return gl16_unit_segments(f, 0.0, upper);
}

double inner_weighted_x(const Basis& basis, int n) {
  // |psi_n| has kinks at the interior sign changes x = alpha_n - alpha_m;
  // integrate piecewise between them so the adaptive rule sees smooth pieces.
  auto f = [&](double x) { return std::abs(basis.psi(n, x)) * x; };
  std::vector<double> cuts;
  cuts.push_back(0.0);
  for (int m = n - 1; m >= 1; --m) {
    cuts.push_back(basis.alpha(n) - basis.alpha(m));
  }
  cuts.push_back(basis.alpha(n));
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += integrate(f, cuts[k], cuts[k + 1], 1e-10);
  }
  total += integrate_to_decay(f, basis.alpha(n), 5.0, 1e-10);
  return total;
}

double eigen_residual(const Basis& basis, int n, double h) {
  const double upper = basis.alpha(n) + 8.0;
  double worst = 0.0;
  for (double x = h; x <= upper; x += 0.05) {
    const double second =
        (basis.psi(n, x + h) - 2.0 * basis.psi(n, x) + basis.psi(n, x - h)) /
        (h * h);
    const double res = second - x * basis.psi(n, x) + basis.alpha(n) * basis.psi(n, x);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace bbmlab::airy
