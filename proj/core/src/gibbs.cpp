#include "bbmlab/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "bbmlab/errors.hpp"
#include "bbmlab/rng.hpp"
#include "bbmlab/stats.hpp"

namespace bbmlab {

double BesselReference::density(double x) const {
  if (x < 0.0) return 0.0;
  return std::sqrt(2.0 / M_PI) * x * x * std::exp(-0.5 * x * x);
}

double BesselReference::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return std::erf(x / std::sqrt(2.0)) -
         std::sqrt(2.0 / M_PI) * x * std::exp(-0.5 * x * x);
}

GibbsSimulator::GibbsSimulator(OffspringLaw law, GibbsConfig cfg)
    : law_(std::move(law)), cfg_(std::move(cfg)) {
  if (!(cfg_.t >= 0.0)) throw domain_error("time must be nonnegative");
  if (cfg_.t > 25.0 + 1e-12) {
    throw domain_error("time exceeds the homogeneous desk cap of 25");
  }
  if (!(cfg_.dt > 0.0) || cfg_.dt > 0.01 + 1e-12) {
    throw domain_error("step size must lie in (0, 0.01]");
  }
  if (cfg_.killed && !(cfg_.x0 > 0.0)) {
    throw domain_error("killed dynamics need a positive start");
  }
  if (cfg_.replicas == 0) throw domain_error("replica count must be positive");
  for (double s : cfg_.checkpoints) {
    if (s < 0.0 || s > cfg_.t + 1e-12) {
      throw domain_error("checkpoint outside [0, t]");
    }
  }
  n_steps_ = cfg_.t > 0.0 ? std::lround(std::ceil(cfg_.t / cfg_.dt - 1e-12))
                          : 0;
  dt_ = n_steps_ > 0 ? cfg_.t / static_cast<double>(n_steps_) : 0.0;
}

GibbsReplica GibbsSimulator::run_replica(std::uint64_t replica_index) const {
  Rng rng(cfg_.seed, replica_index);
  const double beta = law_.beta0();
  const bool killed = cfg_.killed;

  std::vector<double> pos{cfg_.x0};
  std::vector<double> btime{rng.exponential(beta)};
  std::vector<double> p_pos, p_btime, p_birth;

  std::vector<long> check_step(cfg_.checkpoints.size());
  for (std::size_t j = 0; j < cfg_.checkpoints.size(); ++j) {
    check_step[j] = std::lround(cfg_.checkpoints[j] / std::max(dt_, 1e-300));
    check_step[j] = std::clamp(check_step[j], 0L, n_steps_);
  }

  GibbsReplica out;
  out.W.assign(cfg_.checkpoints.size(), 0.0);

  // Drifted unit-variance segment; the killed variant applies the bridge
  // absorption probability exp(-2ab/tau) when both endpoints are positive.
  auto move = [&](double x, double tau) -> double {
    const double y = x + tau + rng.normal() * std::sqrt(tau);
    if (!killed) return y;
    if (y <= 0.0) return -1.0;  // absorbed
    if (x <= 0.0) return -1.0;
    if (rng.uniform01() < std::exp(-2.0 * x * y / tau)) return -1.0;
    return y;
  };

  for (long k = 0; k < n_steps_; ++k) {
    const double t0 = k * dt_;
    const double t1 = (k + 1) * dt_;
    const std::size_t pop0 = pos.size();

    for (std::size_t i = 0; i < pop0; ++i) {
      double x = pos[i];
      double ct = t0;
      double tb = btime[i];
      bool dead = false;
      while (tb <= t1) {
        x = move(x, tb - ct);
        ct = tb;
        if (killed && x < 0.0) {
          dead = true;
          break;
        }
        const int L = law_.sample(rng);
        for (int c = 1; c < L; ++c) {
          p_pos.push_back(x);
          p_birth.push_back(tb);
          p_btime.push_back(tb + rng.exponential(beta));
        }
        tb += rng.exponential(beta);
      }
      if (!dead) {
        x = move(x, t1 - ct);
        if (killed && x < 0.0) dead = true;
      }
      btime[i] = tb;
      pos[i] = dead ? -1e300 : x;
    }

    for (std::size_t p = 0; p < p_pos.size(); ++p) {
      double x = p_pos[p];
      double ct = p_birth[p];
      double tb = p_btime[p];
      bool dead = false;
      while (tb <= t1) {
        x = move(x, tb - ct);
        ct = tb;
        if (killed && x < 0.0) {
          dead = true;
          break;
        }
        const int L = law_.sample(rng);
        for (int c = 1; c < L; ++c) {
          p_pos.push_back(x);
          p_birth.push_back(tb);
          p_btime.push_back(tb + rng.exponential(beta));
        }
        tb += rng.exponential(beta);
      }
      if (!dead) {
        x = move(x, t1 - ct);
        if (killed && x < 0.0) dead = true;
      }
      p_btime[p] = tb;
      p_pos[p] = dead ? -1e300 : x;
    }
    if (!p_pos.empty()) {
      pos.insert(pos.end(), p_pos.begin(), p_pos.end());
      btime.insert(btime.end(), p_btime.begin(), p_btime.end());
      p_pos.clear();
      p_btime.clear();
      p_birth.clear();
    }

    // Drop absorbed particles and, in the free version, everything below
    // the floor.
    const double cut = killed ? -1e299 : cfg_.floor;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (pos[i] >= cut) {
        pos[keep] = pos[i];
        btime[keep] = btime[i];
        ++keep;
      }
    }
    out.pruned += pos.size() - keep;
    pos.resize(keep);
    btime.resize(keep);
    if (pos.size() > cfg_.population_cap) {
      throw numerical_error("reduce t or raise floor");
    }

    for (std::size_t j = 0; j < check_step.size(); ++j) {
      if (check_step[j] == k + 1) {
        double w = 0.0;
        for (double x : pos) w += std::exp(-x);
        out.W[j] = w;
      }
    }
  }

  for (std::size_t j = 0; j < check_step.size(); ++j) {
    if (check_step[j] == 0) {
      out.W[j] = pos.empty() ? 0.0 : std::exp(-cfg_.x0);
    }
  }

  const double scale = cfg_.t > 0.0 ? 1.0 / std::sqrt(cfg_.t) : 0.0;
  double abs_mass = 0.0, neg_mass = 0.0;
  out.mu.atoms.reserve(pos.size());
  for (double x : pos) {
    const double w = x * std::exp(-x);
    out.mu.atoms.emplace_back(x * scale, w);
    out.mu.total_weight += w;
    abs_mass += std::abs(w);
    if (w < 0.0) neg_mass += -w;
  }
  out.D = out.mu.total_weight;
  out.negative_mass = abs_mass > 0.0 ? neg_mass / abs_mass : 0.0;
  out.final_population = pos.size();
  return out;
}

std::vector<GibbsReplica> GibbsSimulator::run() const {
  const std::size_t R = cfg_.replicas;
  std::vector<GibbsReplica> results(R);
  const int threads =
      std::max(1, std::min<int>(cfg_.threads, static_cast<int>(R)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= R) return;
      try {
        results[r] = run_replica(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

double normalized_distance(const EmpiricalMeasure& mu,
                           const BesselReference& ref) {
  return stats::weighted_ks(mu.atoms,
                            [&ref](double x) { return ref.cdf(x); });
}

EmpiricalMeasure pool_measures(const std::vector<GibbsReplica>& replicas) {
  EmpiricalMeasure pooled;
  std::size_t total = 0;
  for (const auto& r : replicas) total += r.mu.atoms.size();
  pooled.atoms.reserve(total);
  for (const auto& r : replicas) {
    pooled.atoms.insert(pooled.atoms.end(), r.mu.atoms.begin(),
                        r.mu.atoms.end());
    pooled.total_weight += r.mu.total_weight;
  }
  return pooled;
}

KilledMoment second_moment_killed(double x, double t, const OffspringLaw& law,
                                  std::size_t replicas, std::uint64_t seed,
                                  int threads) {
  if (!(x > 0.0)) throw domain_error("killed dynamics need a positive start");
  GibbsConfig cfg;
  cfg.t = t;
  cfg.killed = true;
  cfg.x0 = x;
  cfg.replicas = replicas;
  cfg.seed = seed;
  cfg.threads = threads;
  GibbsSimulator sim(law, cfg);
  if (t == 0.0) {
    KilledMoment m;
    m.mean = x * x * std::exp(-2.0 * x);
    m.std_error = 0.0;
    m.replicas = replicas;
    return m;
  }
  const std::vector<GibbsReplica> reps = sim.run();
  std::vector<double> d2;
  d2.reserve(reps.size());
  for (const auto& r : reps) d2.push_back(r.D * r.D);
  KilledMoment m;
  m.mean = stats::mean(d2);
  m.std_error = stats::std_error(d2);
  m.replicas = replicas;
  return m;
}

}  // namespace bbmlab
