#include <cmath>
#include <utility>
#include <vector>

#include "bbmlab/errors.hpp"
#include "bbmlab/field.hpp"
#include "bbmlab/fkpp.hpp"
#include "bbmlab/offspring.hpp"
#include "bbmlab/sigma_profile.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace golden = oracle::golden;

using bbmlab::FkppConfig;
using bbmlab::OffspringLaw;
using bbmlab::ScalarField1D;
using bbmlab::SigmaProfile;

namespace {

SigmaProfile unit_profile() {
  return SigmaProfile(
      "unit", [](double) { return 1.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
}

ScalarField1D make_field(double x0, double dx, std::vector<double> v) {
  ScalarField1D f;
  f.x0 = x0;
  f.dx = dx;
  f.values = std::move(v);
  return f;
}

}  // namespace

TEST_CASE("front position interpolates the level crossing of a monotone field") {
  const auto step = make_field(0.0, 0.1, {0, 0, 0, 1, 1, 1});
  CHECK(bbmlab::front_position(step, 0.5) == doctest::Approx(0.25));
  CHECK(bbmlab::front_position(step, 0.25) == doctest::Approx(0.225));

  const auto ramp = make_field(-2.0, 1.0, {0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(bbmlab::front_position(ramp, 0.5) == doctest::Approx(0.0));
  CHECK(bbmlab::front_position(ramp, 0.6) == doctest::Approx(0.4));
  CHECK(bbmlab::front_position(ramp, 0.1) == doctest::Approx(-1.6));

  CHECK_THROWS_WITH_AS(bbmlab::front_position(step, 0.0),
                       "level must lie in (0,1)", bbmlab::domain_error);
  CHECK_THROWS_WITH_AS(bbmlab::front_position(step, 1.0),
                       "level must lie in (0,1)", bbmlab::domain_error);
  CHECK_THROWS_WITH_AS(bbmlab::front_position(step, -0.2),
                       "level must lie in (0,1)", bbmlab::domain_error);

  const auto below = make_field(0.0, 1.0, {0.0, 0.2, 0.4});
  CHECK_THROWS_WITH_AS(bbmlab::front_position(below, 0.5), "front not in domain",
                       bbmlab::domain_error);
  const auto above = make_field(0.0, 1.0, {0.7, 0.8, 1.0});
  CHECK_THROWS_WITH_AS(bbmlab::front_position(above, 0.5), "front not in domain",
                       bbmlab::domain_error);
  const auto tiny = make_field(0.0, 1.0, {0.3});
  CHECK_THROWS_WITH_AS(bbmlab::front_position(tiny, 0.5), "front not in domain",
                       bbmlab::domain_error);
}

TEST_CASE("decreasing-variance horizon matches the frozen reference median") {
  const auto profile = SigmaProfile::registry("linear2");
  const auto law = OffspringLaw::binary();
  const auto res = bbmlab::solve_fkpp(profile, law, 40.0);

  CHECK(std::abs(res.front_median - golden::kFkppLinear2T40Median) < 0.02);

  // Final CDF must be a CDF: monotone, clamped, pinned at the window edges.
  const auto& v = res.final_cdf.values;
  REQUIRE(v.size() > 10);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 1.0);
  for (std::size_t i = 1; i < v.size(); ++i) {
    CHECK(v[i] >= v[i - 1]);
    CHECK(v[i] >= 0.0);
    CHECK(v[i] <= 1.0);
  }

  // The sampled curve ends where the final median is read off.
  REQUIRE(!res.front_curve.empty());
  const auto& last = res.front_curve.back();
  CHECK(last.first == doctest::Approx(40.0));
  CHECK(std::abs(last.second - res.front_median) < 1e-9);
  for (std::size_t i = 1; i < res.front_curve.size(); ++i) {
    CHECK(res.front_curve[i].first > res.front_curve[i - 1].first);
  }

  // The clock is reversed, so the small late-time variance acts first and
  // the front accelerates: last-quarter displacement beats the first quarter.
  auto pos_near = [&](double t) {
    double best = res.front_curve.front().second;
    double gap = 1e300;
    for (const auto& [tk, xk] : res.front_curve) {
      if (std::abs(tk - t) < gap) {
        gap = std::abs(tk - t);
        best = xk;
      }
    }
    return best;
  };
  const double early = pos_near(10.0) - pos_near(0.5);
  const double late = pos_near(40.0) - pos_near(30.0);
  CHECK(late > early + 3.0);
}

TEST_CASE("constant-variance medians advance at unit speed with log correction") {
  const auto profile = unit_profile();
  const auto law = OffspringLaw::binary();
  const double m100 = bbmlab::solve_fkpp(profile, law, 100.0).front_median;
  const double m200 = bbmlab::solve_fkpp(profile, law, 200.0).front_median;

  // m(T) ~ T - (3/2) log T + const for this normalization, so the pair
  // difference removes the constant: 100 - 1.5 log 2 = 98.96.
  const double expected = 100.0 - 1.5 * std::log(2.0);
  CHECK(std::abs((m200 - m100) - expected) < 0.5);
  CHECK(m100 > 90.0);
  CHECK(m100 < 100.0);
}

TEST_CASE("snapshots are evenly spaced, ordered, and well formed") {
  FkppConfig cfg;
  cfg.n_snapshots = 3;
  const auto res = bbmlab::solve_fkpp(SigmaProfile::registry("linear2"),
                                      OffspringLaw::binary(), 4.0, cfg);
  REQUIRE(res.snapshots.size() == 3);
  for (int j = 0; j < 3; ++j) {
    const auto& s = res.snapshots[j];
    CHECK(std::abs(s.time - (j + 1)) < 0.01);
    CHECK(s.dx == doctest::Approx(cfg.dx));
    REQUIRE(s.values.size() > 10);
    for (std::size_t i = 1; i < s.values.size(); ++i) {
      CHECK(s.values[i] >= s.values[i - 1]);
    }
    CHECK(s.values.front() == 0.0);
    CHECK(s.values.back() == 1.0);
  }
  // Front recedes never: snapshot crossings are ordered in time.
  const double f0 = bbmlab::front_position(res.snapshots[0], 0.5);
  const double f1 = bbmlab::front_position(res.snapshots[1], 0.5);
  const double f2 = bbmlab::front_position(res.snapshots[2], 0.5);
  CHECK(f1 >= f0);
  CHECK(f2 >= f1);
}

TEST_CASE("expansion fit recovers planted coefficients exactly") {
  std::vector<std::pair<double, double>> fronts;
  for (double T : {10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0}) {
    const double m = 2.0 * T - 3.0 * std::cbrt(T) - 1.2 * std::log(T) + 0.7;
    fronts.emplace_back(T, m);
  }
  const auto fit = bbmlab::fit_expansion(fronts);
  CHECK(fit.c_T == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.c_T13 == doctest::Approx(-3.0).epsilon(1e-8));
  CHECK(fit.c_logT == doctest::Approx(-1.2).epsilon(1e-8));
  CHECK(fit.c_1 == doctest::Approx(0.7).epsilon(1e-7));
  CHECK(fit.v1_hat() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.w1_hat() == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(fit.ell_hat() == doctest::Approx(1.2).epsilon(1e-8));
  REQUIRE(fit.residuals.size() == fronts.size());
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-7);
}

TEST_CASE("expansion fit demands six horizons spanning a decade") {
  auto planted = [](double T) { return 2.0 * T + 1.0; };
  std::vector<std::pair<double, double>> five;
  for (double T : {10.0, 20.0, 40.0, 80.0, 160.0}) {
    five.emplace_back(T, planted(T));
  }
  CHECK_THROWS_WITH_AS(bbmlab::fit_expansion(five),
                       "insufficient horizon spread", bbmlab::domain_error);

  std::vector<std::pair<double, double>> narrow;
  for (double T : {10.0, 12.0, 14.0, 16.0, 18.0, 20.0}) {
    narrow.emplace_back(T, planted(T));
  }
  CHECK_THROWS_WITH_AS(bbmlab::fit_expansion(narrow),
                       "insufficient horizon spread", bbmlab::domain_error);

  // Duplicated horizons do not count twice.
  std::vector<std::pair<double, double>> dup = five;
  dup.emplace_back(10.0, planted(10.0));
  CHECK_THROWS_WITH_AS(bbmlab::fit_expansion(dup), "insufficient horizon spread",
                       bbmlab::domain_error);

  // Exactly six distinct values at exactly a 10x span is accepted.
  std::vector<std::pair<double, double>> edge;
  for (double T : {10.0, 20.0, 40.0, 60.0, 80.0, 100.0}) {
    edge.emplace_back(T, planted(T));
  }
  CHECK_NOTHROW(bbmlab::fit_expansion(edge));
}

TEST_CASE("solver rejects malformed configurations") {
  const auto profile = SigmaProfile::registry("linear2");
  const auto law = OffspringLaw::binary();

  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, 0.0),
                       "horizon must be positive", bbmlab::domain_error);
  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, -3.0),
                       "horizon must be positive", bbmlab::domain_error);

  FkppConfig wide;
  wide.dx = 0.06;
  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, 1.0, wide),
                       "dx must lie in (0, 0.05]", bbmlab::domain_error);
  FkppConfig zero;
  zero.dx = 0.0;
  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, 1.0, zero),
                       "dx must lie in (0, 0.05]", bbmlab::domain_error);

  // linear2 has sigma(0) = 2, so the parabolic cap is dx^2/4.
  FkppConfig fast;
  fast.dt = 0.01;
  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, 1.0, fast),
                       "dt exceeds dx^2/sigma(0)^2", bbmlab::domain_error);

  FkppConfig level0;
  level0.level = 0.0;
  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, 1.0, level0),
                       "level must lie in (0,1)", bbmlab::domain_error);
  FkppConfig level1;
  level1.level = 1.0;
  CHECK_THROWS_WITH_AS(bbmlab::solve_fkpp(profile, law, 1.0, level1),
                       "level must lie in (0,1)", bbmlab::domain_error);

  // dt exactly at the cap is accepted.
  FkppConfig at_cap;
  at_cap.dt = at_cap.dx * at_cap.dx / 4.0;
  CHECK_NOTHROW(bbmlab::solve_fkpp(profile, law, 0.01, at_cap));
}

TEST_CASE("a narrow window ahead of the front is exhausted") {
  FkppConfig cfg;
  cfg.dx = 0.02;
  cfg.pad_left = 10.0;
  cfg.pad_right = 2.0;
  CHECK_THROWS_WITH_AS(
      bbmlab::solve_fkpp(unit_profile(), OffspringLaw::binary(), 16.0, cfg),
      "domain exhausted", bbmlab::numerical_error);
}

TEST_CASE("non-binary laws run through the clamped Euler reaction") {
  const auto profile = unit_profile();
  const double mb =
      bbmlab::solve_fkpp(profile, OffspringLaw::binary(), 8.0).front_median;
  const double mt = bbmlab::solve_fkpp(profile, OffspringLaw::from_spec("3"),
                                       8.0)
                        .front_median;
  const double mm =
      bbmlab::solve_fkpp(profile, OffspringLaw::from_spec("2:0.5,4:0.5"), 8.0)
          .front_median;
  // beta0 = (2(E[L]-1))^{-1} pins the asymptotic speed at sigma for every
  // law, so medians at a common horizon only differ by O(1) constants.
  CHECK(std::abs(mt - mb) < 1.0);
  CHECK(std::abs(mm - mb) < 1.0);
  CHECK(mb > 3.0);
  CHECK(mb < 8.0);

  // Refining dt moves the binary median only marginally.
  FkppConfig fine;
  fine.dt = fine.dx * fine.dx / 2.0;
  const double mb2 =
      bbmlab::solve_fkpp(profile, OffspringLaw::binary(), 8.0, fine)
          .front_median;
  CHECK(std::abs(mb2 - mb) < 0.05);
}
