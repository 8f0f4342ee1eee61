#pragma once

#include <vector>

#include "bbmlab/errors.hpp"

namespace bbmlab::airy {

// Airy function of the first kind and its derivative, self-contained:
// Maclaurin series on the core interval, asymptotic expansions for large
// |x| on both sides, and a cached Taylor-ODE bridge across the positive gap
// where neither converges to full precision.  Relative accuracy ~1e-12
// against the local amplitude on [-20, 20].
struct AiPair {
  double ai, aip;
};
AiPair ai_both(double x);
double ai(double x);
double ai_prime(double x);

// n-th positive zero alpha_n of Ai(-x), 1-based; table capped at 200.
int max_zero_index();
double zero(int n);
double normalizer(int n);         // |Ai'(-alpha_n)| = ||Ai(. - alpha_n)||_2
double normalizer_signed(int n);  // Ai'(-alpha_n) including its sign

// Antisymmetric mode-coupling matrix with closed-form off-diagonal entries
// 2 (alpha_j - alpha_i)^{-3}; 1-based accessor.
struct CouplingMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major
  double operator()(int i, int j) const {
    return entries[static_cast<std::size_t>(i - 1) * n + (j - 1)];
  }
};
CouplingMatrix coupling_matrix(int n);

// Dirichlet eigenbasis of u'' - x u on (0, inf): psi_n(x) =
// Ai(x - alpha_n) / Ai'(-alpha_n), normalized so psi_n'(0) = 1 for every n
// and ||psi_n||_2 = 1.  psi_scaled covers the potential q x u via
// psi_n^q(x) = q^{1/6} psi_n(q^{1/3} x) with eigenvalue -alpha_n q^{2/3}.
class Basis {
 public:
  explicit Basis(int n_modes);
  int size() const { return static_cast<int>(alpha_.size()); }
  double alpha(int n) const { return alpha_.at(n - 1); }
  double normalizer(int n) const { return norm_.at(n - 1); }
  double psi(int n, double x) const;
  double psi_prime(int n, double x) const;
  double psi_scaled(int n, double q, double x) const;
  double psi_scaled_prime(int n, double q, double x) const;

 private:
  std::vector<double> alpha_;
  std::vector<double> signed_norm_;
  std::vector<double> norm_;
};

// Quadrature-side checks used by validation paths (adaptive Simpson with
// decay-truncated upper limit).
double coupling_quadrature(const Basis& basis, int i, int j);
double inner_product(const Basis& basis, int m, int n);
double inner_weighted_x(const Basis& basis, int n);
// max_x |psi_n''(x) - x psi_n(x) + alpha_n psi_n(x)| by finite differences.
double eigen_residual(const Basis& basis, int n, double h = 1e-3);

}  // namespace bbmlab::airy
