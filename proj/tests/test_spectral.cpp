#include <cmath>
#include <vector>

#include <doctest.h>

#include "bbmlab/errors.hpp"
#include "bbmlab/fd_oracle.hpp"
#include "bbmlab/field.hpp"
#include "bbmlab/predictor.hpp"
#include "bbmlab/sigma_profile.hpp"
#include "bbmlab/spectral.hpp"
#include "oracles.hpp"

using namespace bbmlab;

namespace {
double bump(double x) { return x * std::exp(-x * x); }
}  // namespace

TEST_CASE("Constant potential decouples the modes exactly") {
  const auto prob = CanonicalProblem::registry("const1", 0.04);
  const SpectralSolver solver(prob);
  SpectralState s;
  s.c.assign(solver.n_modes(), 0.0);
  s.c[0] = 0.7;
  s.c[1] = 0.4;
  const auto out = solver.evolve(s, 0.01);
  // Ground mode is inert in the ground-removed frame; mode 2 decays at the
  // eigenvalue gap over epsilon.
  CHECK(out.c[0] == doctest::Approx(0.7).epsilon(1e-12));
  const double gap = airy::zero(2) - airy::zero(1);
  CHECK(out.c[1] ==
        doctest::Approx(0.4 * std::exp(-gap * 0.01 / 0.04)).epsilon(1e-10));
  for (int n = 3; n <= solver.n_modes(); ++n) CHECK(out.c[n - 1] == 0.0);
}

TEST_CASE("Norm never increases along the evolution") {
  const auto prob = CanonicalProblem::registry("ramp", 0.02);
  const SpectralSolver solver(prob);
  SpectralState s = solver.project_function(bump);
  double prev = s.norm();
  for (int k = 1; k <= 25; ++k) {
    s = solver.evolve(s, static_cast<double>(k) / 25.0);
    const double cur = s.norm();
    CHECK(cur <= prev * (1.0 + 1e-9));
    prev = cur;
  }
}

TEST_CASE("Projection of a basis function recovers a coordinate vector") {
  const auto prob = CanonicalProblem::registry("ramp", 0.02);
  const SpectralSolver solver(prob);
  const double q0 = prob.q(0.0);
  const auto s = solver.project_function(
      [&](double x) { return solver.basis().psi_scaled(1, q0, x); });
  CHECK(s.c[0] == doctest::Approx(1.0).epsilon(1e-7));
  for (int n = 2; n <= solver.n_modes(); ++n) {
    CHECK(std::fabs(s.c[n - 1]) < 1e-7);
  }

  const auto d = solver.project_delta(0.8);
  for (int n = 1; n <= solver.n_modes(); ++n) {
    CHECK(d.c[n - 1] ==
          doctest::Approx(solver.basis().psi_scaled(n, q0, 0.8)));
  }
}

TEST_CASE("Ground-mode depletion scales linearly in the small parameter") {
  double prev_depletion = 0.0;
  for (double eps : {0.04, 0.02}) {
    const auto prob = CanonicalProblem::registry("ramp", eps);
    const SpectralSolver solver(prob);
    const SpectralState s0 = solver.project_function(bump);
    const SpectralState s1 = solver.evolve(s0, 1.0);
    const double depletion = std::fabs(s1.c[0] - s0.c[0]);
    CHECK(depletion > 0.0);
    if (prev_depletion > 0.0) {
      const double ratio = prev_depletion / depletion;
      CHECK(ratio > 1.3);
      CHECK(ratio < 3.0);
    }
    prev_depletion = depletion;
  }
}

TEST_CASE("Early-time tail modes fit a positive decay rate") {
  for (double eps : {0.04, 0.02}) {
    const auto prob = CanonicalProblem::registry("ramp", eps);
    const SpectralSolver solver(prob);
    const auto s = solver.evolve(solver.project_function(bump), 6.0 * eps);
    const auto rep = solver.check_mode_decay(s, 1.0);
    CHECK(rep.slope < 0.0);
    CHECK(rep.kappa2 > 0.0);
    CHECK(rep.modes_used >= 5);
  }

  // Late in the run at small epsilon every tail mode has died: no fit left.
  const SpectralSolver tiny(CanonicalProblem::registry("const1", 0.003));
  const auto dead = tiny.evolve(tiny.project_function(bump), 1.0);
  CHECK_THROWS_WITH_AS(tiny.check_mode_decay(dead, 1.0),
                       "insufficient resolvable modes", numerical_error);
}

TEST_CASE("Truncation rule stays within the supported band") {
  CHECK(CanonicalProblem::registry("const1", 0.01).default_modes() >= 12);
  CHECK(CanonicalProblem::registry("const1", 0.01).default_modes() <= 120);
  CHECK(CanonicalProblem::registry("ramp", 0.01).default_modes() >= 12);
  CHECK_THROWS_AS(CanonicalProblem::registry("no-such-q", 0.01), domain_error);
}

TEST_CASE("Evolution guards reject out-of-range requests") {
  const SpectralSolver solver(CanonicalProblem::registry("const1", 0.02));
  const auto s = solver.project_delta(0.5);
  CHECK_THROWS_WITH_AS(solver.evolve(s, 1.5), "canonical time outside [0,1]",
                       domain_error);
  const auto mid = solver.evolve(s, 0.5);
  CHECK_THROWS_WITH_AS(solver.evolve(mid, 0.2), "evolve target precedes state",
                       domain_error);

  const SpectralSolver starved(CanonicalProblem::registry("const1", 1e-9));
  CHECK_THROWS_WITH_AS(starved.evolve(starved.project_delta(0.5), 1.0),
                       "epsilon too small for truncation/step budget",
                       numerical_error);
}

TEST_CASE("Field reconstruction matches pointwise evaluation") {
  const SpectralSolver solver(CanonicalProblem::registry("ramp", 0.02));
  const auto s = solver.evolve(solver.project_function(bump), 0.3);
  const auto f = solver.reconstruct_field(s, 10.0, 0.05);
  CHECK(f.time == doctest::Approx(0.3));
  CHECK(f.x0 == 0.0);
  for (std::size_t i = 0; i < f.size(); i += 17) {
    CHECK(f.values[i] == doctest::Approx(solver.reconstruct(s, f.x(i))));
  }
}

TEST_CASE("Fundamental solution flags the pre-asymptotic regime") {
  const SpectralSolver solver(CanonicalProblem::registry("ramp", 0.04));
  bool warn = false;
  (void)solver.fundamental_g(0.5, 0.6, 0.1, &warn);
  CHECK(warn);  // 0.1 < 4 * 0.04
  (void)solver.fundamental_g(0.5, 0.6, 0.5, &warn);
  CHECK_FALSE(warn);
  CHECK_THROWS_WITH_AS(solver.fundamental_shape(500.0, 0.5, 8.0, 0.1),
                       "source point outside ground mode support",
                       numerical_error);
}

TEST_CASE("Fundamental shape settles on the moving ground state") {
  const double eps = 0.02;
  const SpectralSolver solver(CanonicalProblem::registry("ramp", eps));
  const auto shape = solver.fundamental_shape(0.5, 1.0, 10.0, 0.02);
  const double q1 = solver.problem().q(1.0);
  ScalarField1D target = shape;
  for (std::size_t i = 0; i < target.size(); ++i) {
    target.values[i] = solver.basis().psi_scaled(1, q1, target.x(i));
  }
  double num = 0.0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const double d = shape.values[i] - target.values[i];
    num += d * d;
  }
  CHECK(std::sqrt(num * shape.dx) < 5.0 * eps);
}

TEST_CASE("Spectral solution agrees with the finite-difference oracle") {
  const double eps = 0.04;
  const auto prob = CanonicalProblem::registry("ramp", eps);
  const SpectralSolver solver(prob);
  const auto state = solver.evolve(solver.project_function(bump), 1.0);

  ScalarField1D init;
  init.x0 = 0.0;
  init.dx = std::sqrt(eps) / 50.0;
  init.values.resize(static_cast<std::size_t>(std::lround(14.0 / init.dx)) + 1);
  for (std::size_t i = 0; i < init.values.size(); ++i) {
    init.values[i] = bump(init.x(i));
  }
  init.values.front() = init.values.back() = 0.0;
  const ScalarField1D ref = fd_solve(prob, init, 1.0);

  ScalarField1D mine = ref;
  const double amp = std::exp(solver.ground_log_amplitude(1.0));
  for (std::size_t i = 0; i < mine.values.size(); ++i) {
    mine.values[i] = solver.reconstruct(state, mine.x(i)) * amp;
  }
  CHECK(relative_l2_gap(mine, ref) < 5e-4);

  FdConfig coarse;
  coarse.dx = std::sqrt(eps) / 10.0;
  CHECK_THROWS_WITH_AS(
      fd_solve(prob, init, 1.0, coarse),
      "grid does not resolve the boundary layer: dx must be <= sqrt(epsilon)/20",
      domain_error);
  CHECK_THROWS_WITH_AS(fd_solve(prob, init, 1.5), "canonical time outside [0,1]",
                       domain_error);
}

TEST_CASE("Profile-derived problems carry the clock-changed potential") {
  const Predictor pred(SigmaProfile::registry("linear2"));
  const double T = 3000.0;
  const auto prob = CanonicalProblem::from_profile(pred, T);
  CHECK(prob.epsilon == doctest::Approx(pred.epsilon_of(T)).epsilon(1e-12));
  for (double u : {0.0, 0.3, 0.7, 1.0}) {
    const double s = pred.J(u) / pred.J1();
    const double sig = 2.0 - u;
    CHECK(prob.q(s) ==
          doctest::Approx(2.0 * pred.q_T(T, u) / (sig * sig)).epsilon(1e-6));
  }
  // Logarithmic derivative consistent with a coarse finite difference.
  const double h = 1e-3;
  const double fd =
      (std::log(prob.q(0.5 + h)) - std::log(prob.q(0.5 - h))) / (2.0 * h);
  CHECK(prob.dlogq(0.5) == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("Transported fundamental solution satisfies the original equation") {
  const Predictor pred(SigmaProfile::registry("linear2"));
  const double T = 3000.0;
  const double scale = std::cbrt(T);
  const double x = 0.5 * scale;
  const double y0 = 0.6 * scale;
  const double t0 = 0.5 * T;

  // Fourth-order stencils in both variables; the residual floor is set by
  // the integrator's own step error, not by the stencils.
  const double hy = 0.25, ht = 2.0;
  auto G = [&](double y, double t) {
    return transport_G(pred, T, x, y, t);
  };
  const double g00 = G(y0, t0);
  const double gyy = (-G(y0 + 2 * hy, t0) + 16.0 * G(y0 + hy, t0) -
                      30.0 * g00 + 16.0 * G(y0 - hy, t0) - G(y0 - 2 * hy, t0)) /
                     (12.0 * hy * hy);
  const double gt = (-G(y0, t0 + 2 * ht) + 8.0 * G(y0, t0 + ht) -
                     8.0 * G(y0, t0 - ht) + G(y0, t0 - 2 * ht)) /
                    (12.0 * ht);

  const double u = t0 / T;
  const double sig2 = (2.0 - u) * (2.0 - u);
  const double tau = pred.J(u) / pred.J1();
  const double qc = pred.q_canonical(T, tau);
  const double a1 = airy::zero(1);
  const double diffusion = 0.5 * sig2 * gyy;
  const double potential = -(pred.q_T(T, u) / T) * y0 * g00;
  const double amplitude =
      0.5 * a1 * sig2 * std::pow(qc, 2.0 / 3.0) / std::pow(T, 2.0 / 3.0) * g00;
  const double residual = gt - diffusion - potential - amplitude;
  const double scale_terms = std::fabs(diffusion) + std::fabs(potential) +
                             std::fabs(amplitude) + 1e-300;
  CHECK(std::fabs(residual) / scale_terms < 1.5e-3);

  bool warn = true;
  const auto field = transport_G_field(pred, T, x, t0, y0 + 1.0, 0.5, &warn);
  CHECK_FALSE(warn);
  const std::size_t i = static_cast<std::size_t>(std::lround(y0 / 0.5));
  CHECK(field.values[i] ==
        doctest::Approx(G(field.x(i), t0)).epsilon(1e-10));
}
