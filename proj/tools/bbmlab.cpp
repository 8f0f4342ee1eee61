// Command-line laboratory for branching Brownian motion with a time-varying
// variance profile: front predictions, the canonical Airy-type spectral
// solver, FKPP front tracking, particle Monte Carlo, and the homogeneous
// derivative-Gibbs-measure experiments.  Every emitted file starts with (or,
// for JSON, contains) the hash of the science-relevant configuration and the
// master seed, so a persisted config re-runs to byte-identical outputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbmlab/airy.hpp"
#include "bbmlab/bbm_mc.hpp"
#include "bbmlab/errors.hpp"
#include "bbmlab/fd_oracle.hpp"
#include "bbmlab/field.hpp"
#include "bbmlab/fkpp.hpp"
#include "bbmlab/gibbs.hpp"
#include "bbmlab/offspring.hpp"
#include "bbmlab/output.hpp"
#include "bbmlab/predictor.hpp"
#include "bbmlab/sigma_profile.hpp"
#include "bbmlab/spectral.hpp"
#include "bbmlab/stats.hpp"

namespace {

using nlohmann::ordered_json;

// Key/value pairs that identify a run scientifically.  Execution details
// (thread count, output directory, config-file path) stay out, so reruns on
// different machines or worker counts hash identically.
struct HashParts {
  std::vector<std::pair<std::string, std::string>> kv;
  void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
  void add(const std::string& k, double v) { add(k, bbmlab::format_g17(v)); }
  void add(const std::string& k, std::uint64_t v) { add(k, std::to_string(v)); }
  void add(const std::string& k, int v) { add(k, std::to_string(v)); }
  void add(const std::string& k, bool v) { add(k, std::string(v ? "1" : "0")); }
  void add(const std::string& k, const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += bbmlab::format_g17(v[i]);
    }
    add(k, s);
  }
};

std::uint64_t config_hash(const std::string& subcommand, const HashParts& p) {
  std::string s = subcommand;
  for (const auto& [k, v] : p.kv) {
    s += ';';
    s += k;
    s += '=';
    s += v;
  }
  return bbmlab::fnv1a64(s);
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ordered_json json_preamble(const std::string& subcommand, std::uint64_t hash,
                           std::uint64_t seed) {
  ordered_json j;
  j["schema_version"] = 1;
  j["subcommand"] = subcommand;
  j["config_hash"] = hex16(hash);
  j["master_seed"] = seed;
  return j;
}

std::string g17(double v) { return bbmlab::format_g17(v); }

// ---------------------------------------------------------------------------
// validate-airy

struct ValidateAiryOpts {
  int n_max = 20;
};

void run_validate_airy(const ValidateAiryOpts& o, const std::string& out_dir) {
  HashParts hp;
  hp.add("n-max", o.n_max);
  const std::uint64_t hash = config_hash("validate-airy", hp);

  bbmlab::airy::Basis basis(o.n_max);
  std::string csv = bbmlab::comment_header(
      hash, 0,
      {"columns: n, alpha_n, abs_aiprime_at_minus_alpha_n, ortho_error, "
       "eigen_residual",
       "ortho_error: max_m |<psi_n, psi_m> - delta_nm| over m <= n-max",
       "eigen_residual: max_x |psi_n'' - (x - alpha_n) psi_n| (finite "
       "differences)"});
  double worst_ortho = 0.0, worst_eigen = 0.0;
  for (int n = 1; n <= o.n_max; ++n) {
    double ortho = 0.0;
    for (int m = 1; m <= o.n_max; ++m) {
      const double ip = bbmlab::airy::inner_product(basis, n, m);
      ortho = std::max(ortho, std::fabs(ip - (m == n ? 1.0 : 0.0)));
    }
    const double eig = bbmlab::airy::eigen_residual(basis, n);
    worst_ortho = std::max(worst_ortho, ortho);
    worst_eigen = std::max(worst_eigen, eig);
    csv += std::to_string(n) + "," + g17(basis.alpha(n)) + "," +
           g17(basis.normalizer(n)) + "," + g17(ortho) + "," + g17(eig) + "\n";
  }
  const std::string path = out_dir + "/airy_validation.csv";
  bbmlab::write_text_file(path, csv);
  std::printf("validate-airy: n_max=%d max_ortho_error=%.3e max_eigen_residual=%.3e -> %s\n",
              o.n_max, worst_ortho, worst_eigen, path.c_str());
}

// ---------------------------------------------------------------------------
// predict

struct PredictOpts {
  std::string sigma;
  double T = 0.0;
  double K = 0.0;
};

void run_predict(const PredictOpts& o, const std::string& out_dir) {
  HashParts hp;
  hp.add("sigma", o.sigma);
  hp.add("T", o.T);
  hp.add("K", o.K);
  const std::uint64_t hash = config_hash("predict", hp);

  const bbmlab::SigmaProfile profile = bbmlab::SigmaProfile::resolve(o.sigma);
  const bbmlab::Predictor pred(profile);
  const auto bundle = pred.prediction(o.T);
  const auto barrier = pred.barrier(o.T, o.K);

  ordered_json j = json_preamble("predict", hash, 0);
  j["sigma"] = profile.name();
  j["T"] = o.T;
  j["K"] = o.K;
  j["v1"] = bundle.v1;
  j["w1"] = bundle.w1;
  j["m_prime"] = bundle.m_prime;
  j["sigma0"] = bundle.sigma0;
  j["sigma1"] = bundle.sigma1;
  j["epsilon"] = pred.epsilon_of(o.T);
  j["s0"] = pred.s0(o.T);
  ordered_json gs = ordered_json::array(), zs = ordered_json::array();
  const int n_samples = 64;
  for (int i = 0; i <= n_samples; ++i) {
    const double t = o.T * static_cast<double>(i) / n_samples;
    gs.push_back({t, pred.gamma(o.T, t)});
    zs.push_back({t, barrier.zeta(t)});
  }
  j["gamma_samples"] = gs;
  j["zeta_samples"] = zs;

  const std::string path = out_dir + "/prediction.json";
  bbmlab::write_text_file(path, j.dump(2) + "\n");
  std::printf("predict: sigma=%s T=%s m_prime=%s -> %s\n",
              profile.name().c_str(), g17(o.T).c_str(),
              g17(bundle.m_prime).c_str(), path.c_str());
}

// ---------------------------------------------------------------------------
// solve-airy

struct SolveAiryOpts {
  std::string q;
  double epsilon = 0.0;
  double t = 0.0;
  bool oracle = false;
  int snapshots = 0;
};

double bump(double x) { return x * std::exp(-x * x); }

void run_solve_airy(const SolveAiryOpts& o, const std::string& out_dir) {
  HashParts hp;
  hp.add("q", o.q);
  hp.add("epsilon", o.epsilon);
  hp.add("t", o.t);
  hp.add("oracle", o.oracle);
  hp.add("snapshots", o.snapshots);
  const std::uint64_t hash = config_hash("solve-airy", hp);

  const auto prob = bbmlab::CanonicalProblem::registry(o.q, o.epsilon);
  const bbmlab::SpectralSolver solver(prob);
  bbmlab::SpectralState state = solver.project_function(bump);

  // Intermediate W-frame fields on a fixed grid, written beside the modes.
  const double y_max = 12.0, dy = 0.02;
  std::vector<std::pair<double, bbmlab::ScalarField1D>> fields;
  for (int j = 1; j <= o.snapshots; ++j) {
    const double tj = o.t * static_cast<double>(j) / o.snapshots;
    state = solver.evolve(state, tj);
    fields.emplace_back(tj, solver.reconstruct_field(state, y_max, dy));
  }
  if (o.snapshots == 0) state = solver.evolve(state, o.t);

  std::vector<std::string> header = {
      "initial condition: x exp(-x^2), projected on " +
          std::to_string(solver.n_modes()) + " modes",
      "columns: n, c_n at t=" + g17(o.t) + " (W frame: ground amplitude removed)"};
  double gap = -1.0;
  if (o.oracle) {
    const bbmlab::FdConfig fd_cfg;
    bbmlab::ScalarField1D init;
    init.x0 = 0.0;
    init.dx = std::sqrt(o.epsilon) / 50.0;
    init.values.resize(
        static_cast<std::size_t>(std::lround(fd_cfg.x_max / init.dx)) + 1);
    for (std::size_t i = 0; i < init.values.size(); ++i) {
      init.values[i] = bump(init.x(i));
    }
    init.values.front() = init.values.back() = 0.0;
    const bbmlab::ScalarField1D ref = bbmlab::fd_solve(prob, init, o.t, fd_cfg);
    bbmlab::ScalarField1D mine = ref;
    const double amp = std::exp(solver.ground_log_amplitude(o.t));
    for (std::size_t i = 0; i < mine.values.size(); ++i) {
      mine.values[i] = solver.reconstruct(state, mine.x(i)) * amp;
    }
    gap = bbmlab::relative_l2_gap(mine, ref);
    header.push_back("oracle_gap " + g17(gap));
  }
  std::string csv = bbmlab::comment_header(hash, 0, header);
  for (int n = 1; n <= solver.n_modes(); ++n) {
    csv += std::to_string(n) + "," + g17(state.c[n - 1]) + "\n";
  }
  const std::string path = out_dir + "/spectral_modes.csv";
  bbmlab::write_text_file(path, csv);

  if (!fields.empty()) {
    std::string head = "columns: x";
    for (const auto& [tj, f] : fields) head += ", W at t=" + g17(tj);
    std::string fcsv = bbmlab::comment_header(hash, 0, {head});
    const std::size_t npts = fields.front().second.values.size();
    for (std::size_t i = 0; i < npts; ++i) {
      fcsv += g17(fields.front().second.x(i));
      for (const auto& [tj, f] : fields) fcsv += "," + g17(f.values[i]);
      fcsv += "\n";
    }
    bbmlab::write_text_file(out_dir + "/spectral_field.csv", fcsv);
  }

  if (o.oracle) {
    std::printf("solve-airy: q=%s epsilon=%s t=%s modes=%d oracle_gap=%.3e -> %s\n",
                o.q.c_str(), g17(o.epsilon).c_str(), g17(o.t).c_str(),
                solver.n_modes(), gap, path.c_str());
  } else {
    std::printf("solve-airy: q=%s epsilon=%s t=%s modes=%d -> %s\n", o.q.c_str(),
                g17(o.epsilon).c_str(), g17(o.t).c_str(), solver.n_modes(),
                path.c_str());
  }
}

// ---------------------------------------------------------------------------
// solve-fkpp

struct SolveFkppOpts {
  std::string sigma;
  std::vector<double> T_list;
  std::string law = "binary";
  double dx = 0.05;
  double dt = 0.0;
};

void run_solve_fkpp(const SolveFkppOpts& o, const std::string& out_dir) {
  HashParts hp;
  hp.add("sigma", o.sigma);
  hp.add("T", o.T_list);
  hp.add("law", o.law);
  hp.add("dx", o.dx);
  hp.add("dt", o.dt);
  const std::uint64_t hash = config_hash("solve-fkpp", hp);

  const bbmlab::SigmaProfile profile = bbmlab::SigmaProfile::resolve(o.sigma);
  const bbmlab::OffspringLaw law = bbmlab::OffspringLaw::from_spec(o.law);
  const bbmlab::Predictor pred(profile);

  bbmlab::FkppConfig cfg;
  cfg.dx = o.dx;
  cfg.dt = o.dt;
  std::vector<std::pair<double, double>> fronts;
  std::string rows;
  for (double T : o.T_list) {
    const auto res = bbmlab::solve_fkpp(profile, law, T, cfg);
    const double mp = pred.prediction(T).m_prime;
    fronts.emplace_back(T, res.front_median);
    rows += g17(T) + "," + g17(res.front_median) + "," + g17(mp) + "," +
            g17(res.front_median - mp) + "\n";
    std::printf("solve-fkpp: T=%s front_median=%s m_prime=%s gap=%s\n",
                g17(T).c_str(), g17(res.front_median).c_str(), g17(mp).c_str(),
                g17(res.front_median - mp).c_str());
  }

  std::vector<std::string> header = {
      "columns: T, front_median, m_prime, gap (front_median - m_prime)",
      "sigma " + profile.name() + ", law " + o.law};
  bool fitted = false;
  bbmlab::ExpansionFit fit;
  try {
    fit = bbmlab::fit_expansion(fronts);
    fitted = true;
  } catch (const bbmlab::domain_error&) {
    header.push_back("expansion fit skipped: insufficient horizon spread");
  }
  bbmlab::write_text_file(out_dir + "/fkpp_fronts.csv",
                          bbmlab::comment_header(hash, 0, header) + rows);

  if (fitted) {
    std::string gp = bbmlab::comment_header(
        hash, 0,
        {"gnuplot script: front medians against the fitted expansion",
         "fit form: f(T) = c_T*T + c_T13*T^(1/3) + c_logT*log(T) + c_1"});
    gp += "c_T = " + g17(fit.c_T) + "\n";
    gp += "c_T13 = " + g17(fit.c_T13) + "\n";
    gp += "c_logT = " + g17(fit.c_logT) + "\n";
    gp += "c_1 = " + g17(fit.c_1) + "\n";
    gp += "f(x) = c_T*x + c_T13*x**(1.0/3.0) + c_logT*log(x) + c_1\n";
    gp += "set xlabel \"T\"\n";
    gp += "set ylabel \"front median\"\n";
    gp += "set datafile separator \",\"\n";
    gp += "plot \"fkpp_fronts.csv\" using 1:2 with points title \"measured\", "
          "f(x) with lines title \"fit\"\n";
    bbmlab::write_text_file(out_dir + "/fkpp_fit.gp", gp);
    std::printf("solve-fkpp: fit v1_hat=%s w1_hat=%s ell_hat=%s -> %s/fkpp_fit.gp\n",
                g17(fit.v1_hat()).c_str(), g17(fit.w1_hat()).c_str(),
                g17(fit.ell_hat()).c_str(), out_dir.c_str());
  }
}

// ---------------------------------------------------------------------------
// simulate-bbm

struct SimulateBbmOpts {
  std::string sigma = "linear2";
  double T = 40.0;
  std::size_t replicas = 100;
  double prune_depth = 10.0;
  std::vector<double> K_list;
  std::uint64_t seed = 1;
  std::string law = "binary";
  double dt = 0.01;
  int threads = 1;
  bool measure_nt = false;
  double barrier_K = 0.0;
  std::size_t population_cap = 10'000'000;
};

ordered_json decay_json(const bbmlab::DecayReport& rep, std::size_t replicas) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const auto& r : rep.rows) {
    ordered_json row;
    row["K"] = r.K;
    row["hits"] = r.hits;
    row["p_hat"] = r.ci.p_hat;
    row["ci_low"] = r.ci.lo;
    row["ci_high"] = r.ci.hi;
    row["ratio"] = r.ratio;
    row["in_fit"] = r.in_fit;
    rows.push_back(row);
  }
  j["replicas"] = replicas;
  j["rows"] = rows;
  j["slope"] = rep.slope;
  j["slope_stderr"] = rep.slope_stderr;
  j["slope_raw"] = rep.slope_raw;
  j["slope_raw_stderr"] = rep.slope_raw_stderr;
  j["slope_adjusted"] = rep.slope_adjusted;
  j["slope_adjusted_stderr"] = rep.slope_adjusted_stderr;
  j["ratio_band"] = rep.ratio_band;
  j["regime_flag"] = rep.regime_flag;
  return j;
}

void run_simulate_bbm(const SimulateBbmOpts& o, const std::string& out_dir) {
  HashParts hp;
  hp.add("sigma", o.sigma);
  hp.add("T", o.T);
  hp.add("replicas", static_cast<std::uint64_t>(o.replicas));
  hp.add("prune-depth", o.prune_depth);
  hp.add("K-list", o.K_list);
  hp.add("seed", o.seed);
  hp.add("law", o.law);
  hp.add("dt", o.dt);
  hp.add("measure-nt", o.measure_nt);
  hp.add("barrier-K", o.barrier_K);
  hp.add("population-cap", static_cast<std::uint64_t>(o.population_cap));
  const std::uint64_t hash = config_hash("simulate-bbm", hp);

  const bbmlab::SigmaProfile profile = bbmlab::SigmaProfile::resolve(o.sigma);
  const bbmlab::OffspringLaw law = bbmlab::OffspringLaw::from_spec(o.law);

  bbmlab::McConfig cfg;
  cfg.T = o.T;
  cfg.dt = o.dt;
  cfg.prune_depth = o.prune_depth;
  cfg.K_list = o.K_list;
  cfg.barrier_K = o.barrier_K;
  cfg.measure_NT = o.measure_nt;
  cfg.replicas = o.replicas;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.population_cap = o.population_cap;
  const bbmlab::BbmSimulator sim(profile, law, cfg);
  const bbmlab::RunStatistics st = sim.run();

  const double m_hat = bbmlab::stats::median(st.M_samples);
  const double mean_M = bbmlab::stats::mean(st.M_samples);
  const double sd_M = std::sqrt(bbmlab::stats::variance(st.M_samples));
  const std::size_t peak =
      *std::max_element(st.peak_population.begin(), st.peak_population.end());

  ordered_json j = json_preamble("simulate-bbm", hash, o.seed);
  j["sigma"] = profile.name();
  j["law"] = o.law;
  j["T"] = o.T;
  j["dt"] = o.dt;
  j["replicas"] = o.replicas;
  j["prune_depth"] = o.prune_depth;
  j["m_prime"] = sim.predictor().prediction(o.T).m_prime;
  j["m_hat"] = m_hat;
  j["mean_M"] = mean_M;
  j["sd_M"] = sd_M;
  j["mean_final_population"] = st.mean_final_population;
  j["peak_population"] = peak;
  if (!o.K_list.empty()) {
    j["crossing"] = decay_json(bbmlab::crossing_report(st, cfg, profile),
                               o.replicas);
    auto tail = bbmlab::tail_report(st, cfg, profile);
    ordered_json tj = decay_json(tail, o.replicas);
    tj["m_hat"] = tail.m_hat;
    j["tail"] = tj;
  }
  if (o.measure_nt) {
    double nt_mean = 0.0;
    std::size_t nonzero = 0;
    for (auto c : st.N_counts) {
      nt_mean += static_cast<double>(c);
      nonzero += c > 0 ? 1 : 0;
    }
    nt_mean /= static_cast<double>(st.N_counts.size());
    ordered_json nj;
    nj["barrier_K"] = o.barrier_K;
    nj["mean"] = nt_mean;
    nj["nonzero_fraction"] =
        static_cast<double>(nonzero) / static_cast<double>(st.N_counts.size());
    j["N_T"] = nj;
  }
  bbmlab::write_text_file(out_dir + "/bbm_summary.json", j.dump(2) + "\n");

  std::string csv = bbmlab::comment_header(
      hash, o.seed, {"columns: replica, M_T (final-time maximum)"});
  for (std::size_t r = 0; r < st.M_samples.size(); ++r) {
    csv += std::to_string(r) + "," + g17(st.M_samples[r]) + "\n";
  }
  bbmlab::write_text_file(out_dir + "/bbm_samples.csv", csv);

  std::printf("simulate-bbm: sigma=%s T=%s replicas=%zu m_hat=%s mean_M=%s -> %s\n",
              profile.name().c_str(), g17(o.T).c_str(), o.replicas,
              g17(m_hat).c_str(), g17(mean_M).c_str(), out_dir.c_str());
}

// ---------------------------------------------------------------------------
// gibbs

struct GibbsOpts {
  double t = 15.0;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  bool killed = false;
  double x = 1.0;
  double dt = 0.01;
  double floor = -5.0;
  int threads = 1;
};

void run_gibbs(const GibbsOpts& o, const std::string& out_dir) {
  HashParts hp;
  hp.add("t", o.t);
  hp.add("replicas", static_cast<std::uint64_t>(o.replicas));
  hp.add("seed", o.seed);
  hp.add("killed", o.killed);
  hp.add("x", o.x);
  hp.add("dt", o.dt);
  hp.add("floor", o.floor);
  const std::uint64_t hash = config_hash("gibbs", hp);

  bbmlab::GibbsConfig cfg;
  cfg.t = o.t;
  cfg.dt = o.dt;
  cfg.floor = o.floor;
  cfg.killed = o.killed;
  cfg.x0 = o.killed ? o.x : 0.0;
  cfg.replicas = o.replicas;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  const bbmlab::GibbsSimulator sim(bbmlab::OffspringLaw::binary(), cfg);
  const auto reps = sim.run();

  const bbmlab::BesselReference ref;
  std::size_t degenerate = 0;
  std::string rows;
  std::vector<double> Ds;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    double ks = std::numeric_limits<double>::quiet_NaN();
    try {
      ks = bbmlab::normalized_distance(reps[r].mu, ref);
    } catch (const bbmlab::numerical_error&) {
      ++degenerate;
    }
    Ds.push_back(reps[r].D);
    rows += std::to_string(r) + "," + g17(reps[r].D) + "," + g17(ks) + "\n";
  }

  const bbmlab::EmpiricalMeasure pooled = bbmlab::pool_measures(reps);
  double pooled_ks = std::numeric_limits<double>::quiet_NaN();
  try {
    pooled_ks = bbmlab::normalized_distance(pooled, ref);
  } catch (const bbmlab::numerical_error&) {
  }
  double neg = 0.0, tot = 0.0;
  for (const auto& [x, w] : pooled.atoms) {
    tot += std::fabs(w);
    if (w < 0.0) neg += -w;
  }
  const double neg_frac = tot > 0.0 ? neg / tot : 0.0;
  const double mean_D = bbmlab::stats::mean(Ds);

  std::vector<std::string> header = {
      "columns: replica, D_t, KS_contrib (per-replica KS distance to the "
      "Bessel reference; nan if degenerate)",
      std::string("mode: ") + (o.killed ? "killed (absorbed at 0)" : "free"),
      "pooled_ks " + g17(pooled_ks),
      "degenerate_replicas " + std::to_string(degenerate),
      "negative_mass_fraction " + g17(neg_frac),
      "mean_D " + g17(mean_D)};
  if (o.killed) {
    double m2 = 0.0;
    for (double d : Ds) m2 += d * d;
    m2 /= static_cast<double>(Ds.size());
    header.push_back("mean_D_expected " + g17(o.x * std::exp(-o.x)));
    header.push_back("second_moment_times_ex " + g17(m2 * std::exp(o.x)));
  }
  bbmlab::write_text_file(out_dir + "/gibbs_replicas.csv",
                          bbmlab::comment_header(hash, o.seed, header) + rows);

  // Pooled normalized histogram of atom locations against the Bessel density.
  const int n_bins = 80;
  const double x_lo = 0.0, x_hi = 4.0;
  const double bin_w = (x_hi - x_lo) / n_bins;
  std::vector<double> bins(n_bins, 0.0);
  double pooled_total = 0.0;
  for (const auto& [x, w] : pooled.atoms) {
    pooled_total += w;
    if (x >= x_lo && x < x_hi) {
      bins[static_cast<std::size_t>((x - x_lo) / bin_w)] += w;
    }
  }
  std::string hist = bbmlab::comment_header(
      hash, o.seed,
      {"columns: x_mid, empirical_density (pooled, normalized), "
       "bessel_density"});
  for (int b = 0; b < n_bins; ++b) {
    const double xm = x_lo + (b + 0.5) * bin_w;
    const double emp =
        pooled_total != 0.0 ? bins[b] / (pooled_total * bin_w) : 0.0;
    hist += g17(xm) + "," + g17(emp) + "," + g17(ref.density(xm)) + "\n";
  }
  bbmlab::write_text_file(out_dir + "/gibbs_histogram.csv", hist);

  std::printf("gibbs: t=%s replicas=%zu mode=%s pooled_ks=%s mean_D=%s -> %s\n",
              g17(o.t).c_str(), o.replicas, o.killed ? "killed" : "free",
              g17(pooled_ks).c_str(), g17(mean_D).c_str(), out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for branching Brownian motion with "
               "decreasing variance profile"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI configuration file ([subcommand] sections)");
  app.allow_config_extras(false);

  std::string output_dir;
  app.add_option("--output-dir", output_dir,
                 "Output directory (default: $BBMLAB_OUTPUT_DIR, else .)");

  ValidateAiryOpts va;
  auto* c_va = app.add_subcommand(
      "validate-airy", "Validate the Airy eigenbasis: zeros, normalizers, "
                       "orthonormality, eigen-relation residuals");
  c_va->add_option("--n-max", va.n_max, "Number of modes to validate")
      ->check(CLI::Range(1, 200))
      ->capture_default_str();

  PredictOpts pr;
  auto* c_pr = app.add_subcommand(
      "predict", "Front-location prediction and barrier curves for a "
                 "variance profile");
  c_pr->add_option("--sigma", pr.sigma,
                   "Variance profile: registry name or table file")
      ->required();
  c_pr->add_option("--T", pr.T, "Horizon")->required();
  c_pr->add_option("--K", pr.K, "Upper-curve offset")->capture_default_str();

  SolveAiryOpts sa;
  auto* c_sa = app.add_subcommand(
      "solve-airy", "Integrate the canonical Airy-type spectral evolution");
  c_sa->add_option("--q", sa.q, "Potential schedule registry name")->required();
  c_sa->add_option("--epsilon", sa.epsilon, "Small parameter")->required();
  c_sa->add_option("--t", sa.t, "Final canonical time in [0,1]")->required();
  c_sa->add_flag("--oracle", sa.oracle,
                 "Cross-check against the finite-difference oracle");
  c_sa->add_option("--snapshots", sa.snapshots,
                   "Also write this many evenly spaced field snapshots")
      ->check(CLI::Range(0, 64))
      ->capture_default_str();

  SolveFkppOpts sf;
  auto* c_sf = app.add_subcommand(
      "solve-fkpp", "Deterministic FKPP front tracking over a horizon sweep");
  c_sf->add_option("--sigma", sf.sigma,
                   "Variance profile: registry name or table file")
      ->required();
  c_sf->add_option("--T", sf.T_list, "Horizon list")->required()->expected(-1);
  c_sf->add_option("--law", sf.law, "Offspring law spec")->capture_default_str();
  c_sf->add_option("--dx", sf.dx, "Space step")->capture_default_str();
  c_sf->add_option("--dt", sf.dt, "Time step (0: derived dx^2/sigma(0)^2)")
      ->capture_default_str();

  SimulateBbmOpts sb;
  auto* c_sb = app.add_subcommand(
      "simulate-bbm", "Particle Monte Carlo of the branching process");
  c_sb->add_option("--sigma", sb.sigma,
                   "Variance profile: registry name or table file")
      ->capture_default_str();
  c_sb->add_option("--T", sb.T, "Horizon")->capture_default_str();
  c_sb->add_option("--replicas", sb.replicas, "Replica count")
      ->capture_default_str();
  c_sb->add_option("--prune-depth", sb.prune_depth,
                   "Removal depth below min(envelope, front); inf disables")
      ->capture_default_str();
  c_sb->add_option("--K-list", sb.K_list,
                   "Envelope offsets for crossing/tail statistics")
      ->expected(-1);
  c_sb->add_option("--seed", sb.seed, "Master seed")->capture_default_str();
  c_sb->add_option("--law", sb.law, "Offspring law spec")->capture_default_str();
  c_sb->add_option("--dt", sb.dt, "Step-boundary grid")->capture_default_str();
  c_sb->add_option("--threads", sb.threads, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  c_sb->add_flag("--measure-nt", sb.measure_nt,
                 "Count particles under the bent upper curve");
  c_sb->add_option("--barrier-K", sb.barrier_K,
                   "Upper-curve offset for the count")
      ->capture_default_str();
  c_sb->add_option("--population-cap", sb.population_cap,
                   "Abort a replica whose live population exceeds this")
      ->capture_default_str();

  GibbsOpts gi;
  auto* c_gi = app.add_subcommand(
      "gibbs", "Homogeneous-BBM derivative Gibbs measure experiments");
  c_gi->add_option("--t", gi.t, "Horizon (<= 25)")->capture_default_str();
  c_gi->add_option("--replicas", gi.replicas, "Replica count")
      ->capture_default_str();
  c_gi->add_option("--seed", gi.seed, "Master seed")->capture_default_str();
  c_gi->add_flag("--killed", gi.killed, "Absorb at the origin");
  c_gi->add_option("--x", gi.x, "Start position (killed mode)")
      ->capture_default_str();
  c_gi->add_option("--dt", gi.dt, "Step size")->capture_default_str();
  c_gi->add_option("--floor", gi.floor, "Pruning floor (free mode)")
      ->capture_default_str();
  c_gi->add_option("--threads", gi.threads, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  // Let the global options (--output-dir, --config) appear after the
  // subcommand name as well as before it.
  for (auto* sub : {c_va, c_pr, c_sa, c_sf, c_sb, c_gi}) sub->fallthrough();

  try {
    app.parse(argc, argv);
    const std::string out_dir = bbmlab::resolve_output_dir(output_dir);
    if (c_va->parsed()) run_validate_airy(va, out_dir);
    if (c_pr->parsed()) run_predict(pr, out_dir);
    if (c_sa->parsed()) run_solve_airy(sa, out_dir);
    if (c_sf->parsed()) run_solve_fkpp(sf, out_dir);
    if (c_sb->parsed()) run_simulate_bbm(sb, out_dir);
    if (c_gi->parsed()) run_gibbs(gi, out_dir);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const bbmlab::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const bbmlab::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const bbmlab::numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
