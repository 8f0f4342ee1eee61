#include "bbmlab/bbm_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "bbmlab/errors.hpp"

namespace bbmlab {

double step_increment(double t, double dt, const Predictor& pred, double T,
                      Rng& rng) {
  if (!(dt > 0.0) || t < -1e-12 || t + dt > T * (1.0 + 1e-12)) {
    throw domain_error("increment window outside [0, T]");
  }
  const double var = 2.0 * T * (pred.J((t + dt) / T) - pred.J(t / T));
  return rng.normal() * std::sqrt(std::max(var, 0.0));
}

BbmSimulator::BbmSimulator(SigmaProfile profile, OffspringLaw law,
                           McConfig cfg)
    : profile_(std::move(profile)),
      law_(std::move(law)),
      cfg_(std::move(cfg)),
      pred_(profile_) {
  if (!(cfg_.T > 0.0)) throw domain_error("horizon must be positive");
  if (cfg_.T > cfg_.horizon_cap * (1.0 + 1e-12)) {
    throw domain_error("horizon exceeds desk-scale cap");
  }
  if (!(cfg_.dt > 0.0) || cfg_.dt > 0.01 + 1e-12) {
    throw domain_error("step size must lie in (0, 0.01]");
  }
  if (cfg_.replicas == 0) throw domain_error("replica count must be positive");

  n_steps_ = std::lround(std::ceil(cfg_.T / cfg_.dt - 1e-12));
  dt_ = cfg_.T / static_cast<double>(n_steps_);

  // Variance integral on a sub-step grid (needed at mid-step branch times),
  // composite Simpson cell by cell.
  const int sub = std::max(1, static_cast<int>(std::ceil(dt_ / 1e-3 - 1e-9)));
  vtab_dt_ = dt_ / sub;
  const long nfine = n_steps_ * sub;
  vtab_.resize(nfine + 1);
  vtab_[0] = 0.0;
  auto s2 = [&](double t) {
    const double s = profile_.sigma(std::clamp(t / cfg_.T, 0.0, 1.0));
    return s * s;
  };
  for (long i = 0; i < nfine; ++i) {
    const double a = i * vtab_dt_, b = a + vtab_dt_;
    vtab_[i + 1] =
        vtab_[i] + vtab_dt_ / 6.0 * (s2(a) + 4.0 * s2(0.5 * (a + b)) + s2(b));
  }
  sd_step_.resize(n_steps_);
  for (long k = 0; k < n_steps_; ++k) {
    sd_step_[k] = std::sqrt(vtab_[(k + 1) * sub] - vtab_[k * sub]);
  }

  const bool need_gamma =
      std::isfinite(cfg_.prune_depth) || !cfg_.K_list.empty();
  if (need_gamma) {
    gamma_tab_.resize(n_steps_ + 1);
    for (long k = 0; k <= n_steps_; ++k) {
      gamma_tab_[k] = pred_.gamma(cfg_.T, k * dt_);
    }
  }
  if (cfg_.measure_NT) {
    const Predictor::Barrier barrier = pred_.barrier(cfg_.T, cfg_.barrier_K);
    zeta_tab_.resize(n_steps_ + 1);
    for (long k = 0; k <= n_steps_; ++k) {
      zeta_tab_[k] = barrier.zeta(k * dt_);
    }
  }
}

double BbmSimulator::variance_at(double t) const {
  if (t <= 0.0) return 0.0;
  const double f = t / vtab_dt_;
  const auto i = std::min(static_cast<std::size_t>(f), vtab_.size() - 2);
  const double w = f - static_cast<double>(i);
  return vtab_[i] + w * (vtab_[i + 1] - vtab_[i]);
}

double BbmSimulator::gamma_at(double t) const {
  if (gamma_tab_.empty()) throw domain_error("envelope table not configured");
  const double f = std::clamp(t / dt_, 0.0, double(n_steps_));
  const auto i = std::min(static_cast<std::size_t>(f), gamma_tab_.size() - 2);
  const double w = f - static_cast<double>(i);
  return gamma_tab_[i] + w * (gamma_tab_[i + 1] - gamma_tab_[i]);
}

double BbmSimulator::zeta_at(double t) const {
  if (zeta_tab_.empty()) throw domain_error("upper-curve table not configured");
  const double f = std::clamp(t / dt_, 0.0, double(n_steps_));
  const auto i = std::min(static_cast<std::size_t>(f), zeta_tab_.size() - 2);
  const double w = f - static_cast<double>(i);
  return zeta_tab_[i] + w * (zeta_tab_[i + 1] - zeta_tab_[i]);
}

ReplicaResult BbmSimulator::run_replica(std::uint64_t replica_index) const {
  Rng rng(cfg_.seed, replica_index);
  const double beta = law_.beta0();
  const bool track_nt = cfg_.measure_NT;
  const bool track_cross = !cfg_.K_list.empty();
  const bool prune = std::isfinite(cfg_.prune_depth);

  std::vector<double> pos{0.0};
  std::vector<double> btime{rng.exponential(beta)};
  std::vector<std::uint8_t> flag;
  if (track_nt) flag.assign(1, 0);

  std::vector<double> p_pos, p_btime, p_birth;
  std::vector<std::uint8_t> p_flag;

  auto var_between = [&](double a, double b) {
    return std::max(variance_at(b) - variance_at(a), 0.0);
  };

  ReplicaResult out;
  out.peak_population = 1;
  if (track_cross) out.crossed.assign(cfg_.K_list.size(), 0);
  double max_excess = -1e300;

  for (long k = 0; k < n_steps_; ++k) {
    const double t1 = (k + 1) * dt_;
    const double sd = sd_step_[k];
    const std::size_t pop0 = pos.size();

    // Existing particles: almost all take the single-displacement fast path.
    for (std::size_t i = 0; i < pop0; ++i) {
      if (btime[i] > t1) {
        pos[i] += rng.normal() * sd;
        continue;
      }
      double x = pos[i];
      double ct = k * dt_;
      double tb = btime[i];
      const std::uint8_t fl = track_nt ? flag[i] : 0;
      while (tb <= t1) {
        x += rng.normal() * std::sqrt(var_between(ct, tb));
        ct = tb;
        const int L = law_.sample(rng);
        for (int c = 1; c < L; ++c) {
          p_pos.push_back(x);
          p_birth.push_back(tb);
          p_btime.push_back(tb + rng.exponential(beta));
          if (track_nt) p_flag.push_back(fl);
        }
        tb += rng.exponential(beta);
      }
      btime[i] = tb;
      pos[i] = x + rng.normal() * std::sqrt(var_between(ct, t1));
    }

    // Children born this step (their own children append to the same list).
    for (std::size_t p = 0; p < p_pos.size(); ++p) {
      double x = p_pos[p];
      double ct = p_birth[p];
      double tb = p_btime[p];
      const std::uint8_t fl = track_nt ? p_flag[p] : 0;
      while (tb <= t1) {
        x += rng.normal() * std::sqrt(var_between(ct, tb));
        ct = tb;
        const int L = law_.sample(rng);
        for (int c = 1; c < L; ++c) {
          p_pos.push_back(x);
          p_birth.push_back(tb);
          p_btime.push_back(tb + rng.exponential(beta));
          if (track_nt) p_flag.push_back(fl);
        }
        tb += rng.exponential(beta);
      }
      p_btime[p] = tb;
      p_pos[p] = x + rng.normal() * std::sqrt(var_between(ct, t1));
    }
    if (!p_pos.empty()) {
      pos.insert(pos.end(), p_pos.begin(), p_pos.end());
      btime.insert(btime.end(), p_btime.begin(), p_btime.end());
      if (track_nt) flag.insert(flag.end(), p_flag.begin(), p_flag.end());
      p_pos.clear();
      p_btime.clear();
      p_birth.clear();
      p_flag.clear();
    }

    // Step-boundary bookkeeping: crossing excess, upper-curve flags, pruning.
    const std::size_t n = pos.size();
    if (track_cross || prune) {
      const double g1 = gamma_tab_[k + 1];
      double best = -1e300;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (pos[i] > best) {
          best = pos[i];
          best_i = i;
        }
      }
      if (track_cross) max_excess = std::max(max_excess, best - g1);
      if (track_nt) {
        const double z1 = zeta_tab_[k + 1];
        for (std::size_t i = 0; i < n; ++i) {
          if (pos[i] > z1) flag[i] = 1;
        }
      }
      if (prune) {
        // Depth is measured from min(envelope, current front).  The running
        // front typically trails the envelope by an O(1) lag, so an absolute
        // cut at envelope - depth would sweep out entire replicas once the lag
        // plus ordinary front fluctuations exceed the depth; anchoring at the
        // front keeps the retained band (and hence the population) of fixed
        // width.  The envelope still caps the band from above in runs whose
        // front overshoots it.
        const double cut = std::min(g1, best) - cfg_.prune_depth;
        std::size_t keep = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (pos[i] >= cut) {
            pos[keep] = pos[i];
            btime[keep] = btime[i];
            if (track_nt) flag[keep] = flag[i];
            ++keep;
          }
        }
        if (keep == 0) {
          // Unreachable when the front anchors the cut (the lead particle
          // always survives); kept as a safety net for degenerate depths.
          pos[0] = pos[best_i];
          btime[0] = btime[best_i];
          if (track_nt) flag[0] = flag[best_i];
          keep = 1;
        }
        out.pruned += n - keep;
        pos.resize(keep);
        btime.resize(keep);
        if (track_nt) flag.resize(keep);
      }
    } else if (track_nt) {
      const double z1 = zeta_tab_[k + 1];
      for (std::size_t i = 0; i < n; ++i) {
        if (pos[i] > z1) flag[i] = 1;
      }
    }

    out.peak_population = std::max(out.peak_population, pos.size());
    if (pos.size() > cfg_.population_cap) {
      throw numerical_error("pruning depth too large for horizon");
    }
  }

  out.final_population = pos.size();
  out.M_T = *std::max_element(pos.begin(), pos.end());
  if (track_nt) {
    const double zT = zeta_tab_[n_steps_];
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (!flag[i] && pos[i] >= zT - 2.0 && pos[i] <= zT - 1.0) ++out.N_T;
    }
  }
  if (track_cross) {
    for (std::size_t j = 0; j < cfg_.K_list.size(); ++j) {
      out.crossed[j] = max_excess > cfg_.K_list[j] ? 1 : 0;
    }
  }
  return out;
}

RunStatistics BbmSimulator::run() const {
  const std::size_t R = cfg_.replicas;
  std::vector<ReplicaResult> results(R);
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

  RunStatistics st;
  st.M_samples.reserve(R);
  st.N_counts.reserve(R);
  st.crossings.reserve(R);
  st.replica_streams.reserve(R);
  st.peak_population.reserve(R);
  double pop_sum = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    st.M_samples.push_back(results[r].M_T);
    st.N_counts.push_back(results[r].N_T);
    st.crossings.push_back(results[r].crossed);
    st.replica_streams.push_back(r);
    st.peak_population.push_back(results[r].peak_population);
    pop_sum += static_cast<double>(results[r].final_population);
  }
  st.mean_final_population = pop_sum / static_cast<double>(R);
  return st;
}

namespace {

DecayReport build_decay_report(const std::vector<double>& K_list,
                               const std::vector<std::size_t>& hits,
                               std::size_t n, double sigma0, double T) {
  DecayReport rep;
  std::vector<double> xs, ys_raw, ys_adj;
  for (std::size_t j = 0; j < K_list.size(); ++j) {
    const double K = K_list[j];
    if (K < 1.0) {
      throw domain_error("K below the decay regime (need K >= 1)");
    }
    if (K > std::cbrt(T) * (1.0 + 1e-12)) rep.regime_flag = true;
    DecayReport::Row row;
    row.K = K;
    row.hits = hits[j];
    row.ci = stats::wilson_interval(hits[j], n);
    row.ratio = row.ci.p_hat / (K * std::exp(-K / sigma0));
    row.in_fit = hits[j] > 0;
    if (row.in_fit) {
      xs.push_back(K);
      ys_raw.push_back(std::log(row.ci.p_hat));
      ys_adj.push_back(std::log(row.ci.p_hat) - std::log(K));
    }
    rep.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    const stats::LineFit raw = stats::fit_line(xs, ys_raw);
    const stats::LineFit adj = stats::fit_line(xs, ys_adj);
    rep.slope_raw = raw.slope;
    rep.slope_raw_stderr = raw.slope_stderr;
    rep.slope_adjusted = adj.slope;
    rep.slope_adjusted_stderr = adj.slope_stderr;
  } else {
    rep.slope_raw = rep.slope_adjusted = 0.0;
    rep.slope_raw_stderr = rep.slope_adjusted_stderr =
        std::numeric_limits<double>::infinity();
  }
  double rmin = 1e300, rmax = 0.0;
  for (const auto& row : rep.rows) {
    if (row.hits == 0) continue;
    rmin = std::min(rmin, row.ratio);
    rmax = std::max(rmax, row.ratio);
  }
  rep.ratio_band = rmax > 0.0 && rmin < 1e300 ? rmax / rmin : 0.0;
  return rep;
}

}  // namespace

DecayReport crossing_report(const RunStatistics& stats, const McConfig& cfg,
                            const SigmaProfile& profile) {
  if (cfg.K_list.empty()) throw domain_error("no K offsets configured");
  const std::size_t n = stats.crossings.size();
  std::vector<std::size_t> hits(cfg.K_list.size(), 0);
  for (const auto& row : stats.crossings) {
    for (std::size_t j = 0; j < row.size(); ++j) hits[j] += row[j];
  }
  DecayReport rep =
      build_decay_report(cfg.K_list, hits, n, profile.sigma(0.0), cfg.T);
  rep.slope = rep.slope_raw;
  rep.slope_stderr = rep.slope_raw_stderr;
  return rep;
}

DecayReport tail_report(const RunStatistics& stats, const McConfig& cfg,
                        const SigmaProfile& profile) {
  if (cfg.K_list.empty()) throw domain_error("no K offsets configured");
  const std::size_t n = stats.M_samples.size();
  DecayReport rep;
  const double m_hat = stats::median(stats.M_samples);
  std::vector<std::size_t> hits(cfg.K_list.size(), 0);
  for (std::size_t j = 0; j < cfg.K_list.size(); ++j) {
    const double cut = m_hat + cfg.K_list[j];
    for (double m : stats.M_samples) {
      if (m >= cut) ++hits[j];
    }
  }
  rep = build_decay_report(cfg.K_list, hits, n, profile.sigma(0.0), cfg.T);
  rep.slope = rep.slope_adjusted;
  rep.slope_stderr = rep.slope_adjusted_stderr;
  rep.m_hat = m_hat;
  return rep;
}

}  // namespace bbmlab
