#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bbmlab/offspring.hpp"

namespace bbmlab {

// Atomic measure with signed weights (locations X/sqrt(t), weights X e^{-X}).
struct EmpiricalMeasure {
  std::vector<std::pair<double, double>> atoms;  // (location, weight)
  double total_weight = 0.0;
};

// Law of a three-dimensional Bessel process at time 1 started at 0:
// rho(x) = sqrt(2/pi) x^2 e^{-x^2/2} on x >= 0 (the weak limit of the
// normalized derivative Gibbs measure).
struct BesselReference {
  double density(double x) const;
  double cdf(double x) const;
};

// Time-homogeneous BBM with unit variance, drift +1, branch rate beta0.
// The free version discards particles below the floor; the killed version
// absorbs at 0, with a Brownian-bridge correction for within-step dips.
struct GibbsConfig {
  double t = 15.0;   // simulation horizon; must be <= 25
  double dt = 0.01;
  double floor = -5.0;
  bool killed = false;
  double x0 = 0.0;   // start position (the killed variant needs x0 > 0)
  std::vector<double> checkpoints;  // times where W_s = sum e^{-X_u(s)} is taken
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t population_cap = 10'000'000;
};

struct GibbsReplica {
  EmpiricalMeasure mu;
  double D = 0.0;              // derivative martingale sum X e^{-X}
  double negative_mass = 0.0;  // |negative weight| / total |weight|
  std::vector<double> W;       // per config checkpoint
  std::size_t final_population = 0;
  std::uint64_t pruned = 0;
};

class GibbsSimulator {
 public:
  GibbsSimulator(OffspringLaw law, GibbsConfig cfg);

  const GibbsConfig& config() const { return cfg_; }
  GibbsReplica run_replica(std::uint64_t replica_index) const;
  // Same replica-pool contract as the inhomogeneous simulator: merge keyed
  // by replica index, byte-identical for any worker count.
  std::vector<GibbsReplica> run() const;

 private:
  OffspringLaw law_;
  GibbsConfig cfg_;
  long n_steps_ = 0;
  double dt_ = 0.0;
};

// Kolmogorov-Smirnov distance between measure/total-weight and the reference
// CDF.  Throws numerical_error("degenerate replica") if the total weight is
// not positive.
double normalized_distance(const EmpiricalMeasure& mu,
                           const BesselReference& ref);

// Concatenation of atoms across replicas; each replica thereby enters the
// pool weighted by its own D, which is what the random-multiple limit needs.
EmpiricalMeasure pool_measures(const std::vector<GibbsReplica>& replicas);

struct KilledMoment {
  double mean = 0.0;       // estimate of E_x[D_t^2] with absorption at 0
  double std_error = 0.0;
  std::size_t replicas = 0;
};
KilledMoment second_moment_killed(double x, double t, const OffspringLaw& law,
                                  std::size_t replicas, std::uint64_t seed,
                                  int threads = 1);

}  // namespace bbmlab
