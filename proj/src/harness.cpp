#include "ctret/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ctret/quadrature.hpp"

namespace ctret {

namespace {

// Serial reference path for jobs <= 1; OpenMP otherwise. Bodies write to
// disjoint per-index slots, so both paths produce identical tables.
template <class F>
void parallel_for(int count, int jobs, F&& body) {
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) body(i);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int i = 0; i < count; ++i) body(i);
  }
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

constexpr std::uint64_t kQuadFixedStream = 0;
constexpr std::uint64_t kQuadProductStream = 100;
constexpr std::uint64_t kSweepStream = 1000;
constexpr std::uint64_t kCurveStream = 5000;

}  // namespace

const char* family_name(SignalFamily f) {
  return f == SignalFamily::kPeriodic ? "periodic" : "gaussian_mixture";
}

const char* pair_name(FamilyPair p) {
  switch (p) {
    case FamilyPair::kPeriodicPeriodic: return "periodic*periodic";
    case FamilyPair::kPeriodicMixture: return "periodic*gaussian_mixture";
    default: return "gaussian_mixture*gaussian_mixture";
  }
}

namespace {

void validate_quad(const QuadConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("quad trials must be >= 1");
  for (double g : cfg.gammas) (void)DiscountSpec(g);
  for (int n : cfg.interval_counts) {
    if (n < 1) throw std::invalid_argument("interval counts must be >= 1");
  }
  if (cfg.families.empty() || cfg.gammas.empty() || cfg.interval_counts.empty()) {
    throw std::invalid_argument("quad config lists must be non-empty");
  }
}

template <class Sampler>
void quad_family_trials(const QuadConfig& cfg, std::uint64_t stream, bool stochastic,
                        Sampler&& sampler, std::vector<double>& err_dtr,
                        std::vector<double>& err_rp, std::vector<std::uint64_t>& seeds) {
  const int ng = static_cast<int>(cfg.gammas.size());
  const int nn = static_cast<int>(cfg.interval_counts.size());
  const int trials = cfg.trials;

  std::vector<Partition> uniform_parts;
  if (!stochastic) {
    for (int n : cfg.interval_counts) {
      uniform_parts.push_back(Partition::uniform(cfg.domain, n));
    }
  }

  parallel_for(trials, cfg.jobs, [&](int t) {
    const std::uint64_t seed = derive_seed(cfg.base_seed, stream, t);
    seeds[t] = seed;
    Rng rng(seed);
    const auto sig = sampler(rng);

    std::vector<Partition> parts;
    parts.reserve(nn);
    if (stochastic) {
      for (int n : cfg.interval_counts) {
        parts.push_back(Partition::stochastic(cfg.domain, n, rng));
      }
    }
    const auto& use_parts = stochastic ? parts : uniform_parts;

    for (int gi = 0; gi < ng; ++gi) {
      const DiscountSpec d(cfg.gammas[gi]);
      const double ref = midpoint_reference(d, sig, cfg.domain);
      for (int ni = 0; ni < nn; ++ni) {
        const std::size_t idx =
            (static_cast<std::size_t>(gi) * nn + ni) * trials + t;
        err_dtr[idx] = std::abs(dtr_sum(d, sig, use_parts[ni]) - ref);
        err_rp[idx] = std::abs(rp_sum(d, sig, use_parts[ni]) - ref);
      }
    }
  });
}

QuadResult run_quad(const QuadConfig& cfg, bool stochastic) {
  validate_quad(cfg);
  const char* experiment = stochastic ? "quad_stochastic" : "quad_fixed";
  const int ng = static_cast<int>(cfg.gammas.size());
  const int nn = static_cast<int>(cfg.interval_counts.size());
  const int trials = cfg.trials;

  QuadResult out;
  for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
    std::vector<double> err_dtr(static_cast<std::size_t>(ng) * nn * trials);
    std::vector<double> err_rp(err_dtr.size());
    std::vector<std::uint64_t> seeds(trials);
    const std::uint64_t stream = kQuadFixedStream + fi;
    if (cfg.families[fi] == SignalFamily::kPeriodic) {
      quad_family_trials(cfg, stream, stochastic,
                         [](Rng& r) { return PeriodicSignal::sample(r); }, err_dtr,
                         err_rp, seeds);
    } else {
      quad_family_trials(cfg, stream, stochastic,
                         [](Rng& r) { return GaussianMixtureSignal::sample(r); },
                         err_dtr, err_rp, seeds);
    }

    for (int gi = 0; gi < ng; ++gi) {
      for (int ni = 0; ni < nn; ++ni) {
        const std::size_t base = (static_cast<std::size_t>(gi) * nn + ni) * trials;
        const std::span<const double> ds(err_dtr.data() + base, trials);
        const std::span<const double> rs(err_rp.data() + base, trials);
        const auto dstat = mean_se(ds);
        const auto rstat = mean_se(rs);
        std::vector<double> gaps(trials);
        for (int t = 0; t < trials; ++t) gaps[t] = ds[t] - rs[t];
        const auto gstat = mean_se(gaps);

        QuadCell cell;
        cell.family = family_name(cfg.families[fi]);
        cell.gamma = cfg.gammas[gi];
        cell.n = cfg.interval_counts[ni];
        cell.mean_dtr = dstat.mean;
        cell.se_dtr = dstat.se;
        cell.mean_rp = rstat.mean;
        cell.se_rp = rstat.se;
        cell.mean_gap = gstat.mean;
        cell.se_gap = gstat.se;
        cell.mean_delta = cfg.domain.length() / cfg.interval_counts[ni];
        out.cells.push_back(cell);

        auto cell_row = [&](const char* variant, const char* metric, double v) {
          ResultRow r;
          r.experiment = experiment;
          r.family = cell.family;
          r.gamma = cell.gamma;
          r.n = cell.n;
          r.variant = variant;
          r.seed = cfg.base_seed;
          r.metric = metric;
          r.value = v;
          out.rows.push_back(std::move(r));
        };
        cell_row("dtr", "mean_abs_err", dstat.mean);
        cell_row("dtr", "se_abs_err", dstat.se);
        cell_row("rp", "mean_abs_err", rstat.mean);
        cell_row("rp", "se_abs_err", rstat.se);
        cell_row("", "mean_err_gap", gstat.mean);
        cell_row("", "se_err_gap", gstat.se);
        cell_row("", "mean_delta", cell.mean_delta);

        if (cfg.emit_trials) {
          for (int t = 0; t < trials; ++t) {
            ResultRow r;
            r.experiment = experiment;
            r.family = cell.family;
            r.gamma = cell.gamma;
            r.n = cell.n;
            r.seed = seeds[t];
            r.metric = "abs_err";
            r.variant = "dtr";
            r.value = ds[t];
            out.rows.push_back(r);
            r.variant = "rp";
            r.value = rs[t];
            out.rows.push_back(std::move(r));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

QuadResult run_quad_fixed(const QuadConfig& cfg) { return run_quad(cfg, false); }

QuadResult run_quad_stochastic(const QuadConfig& cfg) { return run_quad(cfg, true); }

QuadResult run_quad_products(const QuadConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("quad trials must be >= 1");
  if (cfg.pairs.empty() || cfg.interval_counts.empty()) {
    throw std::invalid_argument("quad config lists must be non-empty");
  }
  const int nn = static_cast<int>(cfg.interval_counts.size());
  const int trials = cfg.trials;

  std::vector<Partition> parts;
  for (int n : cfg.interval_counts) parts.push_back(Partition::uniform(cfg.domain, n));

  QuadResult out;
  for (std::size_t pi = 0; pi < cfg.pairs.size(); ++pi) {
    std::vector<double> err_dtr(static_cast<std::size_t>(nn) * trials);
    std::vector<double> err_rp(err_dtr.size());
    std::vector<std::uint64_t> seeds(trials);

    auto run_pair = [&](auto&& sample_left, auto&& sample_right) {
      parallel_for(trials, cfg.jobs, [&](int t) {
        const std::uint64_t seed = derive_seed(cfg.base_seed, kQuadProductStream + pi, t);
        seeds[t] = seed;
        Rng rng(seed);
        const auto f = sample_left(rng);
        const auto g = sample_right(rng);
        const double ref = midpoint_reference(f, g, cfg.domain);
        for (int ni = 0; ni < nn; ++ni) {
          const std::size_t idx = static_cast<std::size_t>(ni) * trials + t;
          err_dtr[idx] = std::abs(generalized_dtr_sum(f, g, parts[ni]) - ref);
          err_rp[idx] = std::abs(generalized_rp_sum(f, g, parts[ni]) - ref);
        }
      });
    };

    auto periodic = [](Rng& r) { return PeriodicSignal::sample(r); };
    auto mixture = [](Rng& r) { return GaussianMixtureSignal::sample(r); };
    switch (cfg.pairs[pi]) {
      case FamilyPair::kPeriodicPeriodic: run_pair(periodic, periodic); break;
      case FamilyPair::kPeriodicMixture: run_pair(periodic, mixture); break;
      case FamilyPair::kMixtureMixture: run_pair(mixture, mixture); break;
    }

    for (int ni = 0; ni < nn; ++ni) {
      const std::size_t base = static_cast<std::size_t>(ni) * trials;
      const auto dstat = mean_se({err_dtr.data() + base, static_cast<std::size_t>(trials)});
      const auto rstat = mean_se({err_rp.data() + base, static_cast<std::size_t>(trials)});
      std::vector<double> gaps(trials);
      for (int t = 0; t < trials; ++t) gaps[t] = err_dtr[base + t] - err_rp[base + t];
      const auto gstat = mean_se(gaps);

      QuadCell cell;
      cell.family = pair_name(cfg.pairs[pi]);
      cell.gamma = std::numeric_limits<double>::quiet_NaN();
      cell.n = cfg.interval_counts[ni];
      cell.mean_dtr = dstat.mean;
      cell.se_dtr = dstat.se;
      cell.mean_rp = rstat.mean;
      cell.se_rp = rstat.se;
      cell.mean_gap = gstat.mean;
      cell.se_gap = gstat.se;
      cell.mean_delta = cfg.domain.length() / cfg.interval_counts[ni];
      out.cells.push_back(cell);

      auto cell_row = [&](const char* variant, const char* metric, double v) {
        ResultRow r;
        r.experiment = "quad_products";
        r.family = cell.family;
        r.n = cell.n;
        r.variant = variant;
        r.seed = cfg.base_seed;
        r.metric = metric;
        r.value = v;
        out.rows.push_back(std::move(r));
      };
      cell_row("dtr", "mean_abs_err", dstat.mean);
      cell_row("dtr", "se_abs_err", dstat.se);
      cell_row("rp", "mean_abs_err", rstat.mean);
      cell_row("rp", "se_abs_err", rstat.se);
      cell_row("", "mean_err_gap", gstat.mean);
      cell_row("", "se_err_gap", gstat.se);

      if (cfg.emit_trials) {
        for (int t = 0; t < trials; ++t) {
          ResultRow r;
          r.experiment = "quad_products";
          r.family = cell.family;
          r.n = cell.n;
          r.seed = seeds[t];
          r.metric = "abs_err";
          r.variant = "dtr";
          r.value = err_dtr[base + t];
          out.rows.push_back(r);
          r.variant = "rp";
          r.value = err_rp[base + t];
          out.rows.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

void dump_signal_records(const QuadConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open signal dump file: " + path);
  for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
    for (int t = 0; t < cfg.trials; ++t) {
      Rng rng(derive_seed(cfg.base_seed, kQuadFixedStream + fi, t));
      if (cfg.families[fi] == SignalFamily::kPeriodic) {
        out << to_record(PeriodicSignal::sample(rng)) << '\n';
      } else {
        out << to_record(GaussianMixtureSignal::sample(rng)) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<double> ServoExperimentConfig::alpha_grid() const {
  if (!alphas.empty()) return alphas;
  std::vector<double> grid;
  for (int e = -18; e <= -6; ++e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

IntervalNoiseModel ServoExperimentConfig::noise_for(double target_mean) const {
  IntervalNoiseModel m;
  m.target_mean = target_mean;
  m.jitter_std = jitter_std;
  m.min_interval = min_interval;
  m.catastrophe_prob = catastrophe_prob;
  m.catastrophe_mean = catastrophe_mean;
  m.catastrophe_std = catastrophe_std;
  return m;
}

RunOutcome train_run(std::uint64_t seed, const ServoExperimentConfig& cfg,
                     ReturnVariant variant, double alpha, double delta_mu,
                     bool record_curve) {
  Rng rng(seed);
  ServoEnv env(cfg.motor, cfg.sim, cfg.noise_for(delta_mu));
  PolicyNetwork net = PolicyNetwork::initialized(rng, 3, cfg.hidden1, cfg.hidden2);
  TraceVector trace(net.param_count());
  const UpdateRule rule(variant, alpha, cfg.sim.gamma);

  RunOutcome out;
  const int bins = record_curve
                       ? static_cast<int>(std::ceil(cfg.budget_seconds / 60.0))
                       : 0;
  std::vector<double> bin_sum(bins, 0.0);
  std::vector<int> bin_count(bins, 0);

  double total = 0.0;
  double final_sum = 0.0;
  int final_count = 0;
  double last_return = 0.0;
  const double final_start = (1.0 - cfg.final_fraction) * cfg.budget_seconds;

  while (total < cfg.budget_seconds) {
    auto obs = env.reset(rng);
    trace.zero();
    double episodic_return = 0.0;
    try {
      for (;;) {
        const auto nobs = normalize_observation(obs);
        const double action = net.sample_action(nobs, rng);
        const StepResult sr = env.step(action, rng);
        episodic_return += sr.integral_return_increment;
        agent_step(net, trace, rule, {nobs, action, sr.reward, sr.elapsed});
        total += sr.elapsed;
        obs = sr.observation;
        if (sr.terminated || sr.truncated) break;
      }
    } catch (const DivergenceFault&) {
      out.diverged = true;
      break;
    } catch (const SimulationFault&) {
      out.diverged = true;
      break;
    }
    last_return = episodic_return;
    if (total >= final_start) {
      final_sum += episodic_return;
      ++final_count;
    }
    if (record_curve) {
      const int b = std::min(static_cast<int>(total / 60.0), bins - 1);
      bin_sum[b] += episodic_return;
      ++bin_count[b];
    }
  }

  if (out.diverged) {
    out.final_return = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.final_return = final_count > 0 ? final_sum / final_count : last_return;
  }
  if (record_curve) {
    out.minute_mean.resize(bins);
    for (int b = 0; b < bins; ++b) {
      out.minute_mean[b] = bin_count[b] > 0
                               ? bin_sum[b] / bin_count[b]
                               : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

SweepResult run_servo_sweep(const ServoExperimentConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("servo runs must be >= 1");
  const auto alphas = cfg.alpha_grid();

  struct CellSpec {
    double delta_mu;
    double alpha;
    ReturnVariant variant;
  };
  std::vector<CellSpec> cells;
  for (double dm : cfg.delta_mu) {
    for (double a : alphas) {
      for (ReturnVariant v : cfg.variants) cells.push_back({dm, a, v});
    }
  }

  const int tasks = static_cast<int>(cells.size()) * cfg.runs;
  std::vector<RunOutcome> outcomes(tasks);
  std::vector<std::uint64_t> seeds(tasks);
  parallel_for(tasks, cfg.jobs, [&](int i) {
    const int ci = i / cfg.runs;
    const int run = i % cfg.runs;
    seeds[i] = derive_seed(cfg.base_seed, kSweepStream + ci, run);
    outcomes[i] = train_run(seeds[i], cfg, cells[ci].variant, cells[ci].alpha,
                            cells[ci].delta_mu, false);
  });

  SweepResult out;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<double> finals;
    int diverged = 0;
    for (int run = 0; run < cfg.runs; ++run) {
      const auto& o = outcomes[ci * cfg.runs + run];
      if (o.diverged) {
        ++diverged;
      } else {
        finals.push_back(o.final_return);
      }
    }
    const auto stat = mean_se(finals);

    SweepCell cell;
    cell.delta_mu = cells[ci].delta_mu;
    cell.alpha = cells[ci].alpha;
    cell.variant = cells[ci].variant;
    cell.mean_final = stat.mean;
    cell.se_final = stat.se;
    cell.diverged = diverged;
    cell.runs = cfg.runs;
    out.cells.push_back(cell);

    auto cell_row = [&](const char* metric, double v) {
      ResultRow r;
      r.experiment = "servo_sweep";
      r.delta_mu_ms = cell.delta_mu * 1000.0;
      r.alpha = cell.alpha;
      r.variant = variant_name(cell.variant);
      r.seed = cfg.base_seed;
      r.metric = metric;
      r.value = v;
      out.rows.push_back(std::move(r));
    };
    cell_row("mean_final_return", stat.mean);
    cell_row("se_final_return", stat.se);
    cell_row("diverged_runs", diverged);

    for (int run = 0; run < cfg.runs; ++run) {
      const auto& o = outcomes[ci * cfg.runs + run];
      ResultRow r;
      r.experiment = "servo_sweep";
      r.delta_mu_ms = cell.delta_mu * 1000.0;
      r.alpha = cell.alpha;
      r.variant = variant_name(cell.variant);
      r.seed = seeds[ci * cfg.runs + run];
      r.metric = o.diverged ? "diverged" : "final_return";
      r.value = o.diverged ? 1.0 : o.final_return;
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

CurvesResult run_servo_curves(const ServoExperimentConfig& cfg, double delta_mu) {
  if (cfg.runs < 1) throw std::invalid_argument("servo runs must be >= 1");
  if (!(cfg.alpha_dtr > 0.0) || !(cfg.alpha_rp > 0.0)) {
    throw std::invalid_argument(
        "servo-curves requires per-variant step sizes (alpha_dtr, alpha_rp)");
  }

  CurvesResult out;
  const int bins = static_cast<int>(std::ceil(cfg.budget_seconds / 60.0));
  const ReturnVariant variants[2] = {ReturnVariant::kDtr, ReturnVariant::kRp};
  for (int vi = 0; vi < 2; ++vi) {
    const ReturnVariant v = variants[vi];
    const double alpha = v == ReturnVariant::kDtr ? cfg.alpha_dtr : cfg.alpha_rp;
    std::vector<RunOutcome> outcomes(cfg.runs);
    parallel_for(cfg.runs, cfg.jobs, [&](int run) {
      const std::uint64_t seed = derive_seed(cfg.base_seed, kCurveStream + vi, run);
      outcomes[run] = train_run(seed, cfg, v, alpha, delta_mu, true);
    });

    int diverged = 0;
    for (int b = 0; b < bins; ++b) {
      std::vector<double> vals;
      for (const auto& o : outcomes) {
        if (!o.diverged && b < static_cast<int>(o.minute_mean.size()) &&
            std::isfinite(o.minute_mean[b])) {
          vals.push_back(o.minute_mean[b]);
        }
      }
      const auto stat = mean_se(vals);
      ResultRow r;
      r.experiment = "servo_curves";
      r.delta_mu_ms = delta_mu * 1000.0;
      r.alpha = alpha;
      r.variant = variant_name(v);
      r.seed = cfg.base_seed;
      r.metric = "min" + std::to_string(b) + "_mean_return";
      r.value = stat.mean;
      out.rows.push_back(r);
      r.metric = "min" + std::to_string(b) + "_se_return";
      r.value = stat.se;
      out.rows.push_back(std::move(r));
    }
    for (const auto& o : outcomes) diverged += o.diverged ? 1 : 0;
    ResultRow r;
    r.experiment = "servo_curves";
    r.delta_mu_ms = delta_mu * 1000.0;
    r.alpha = alpha;
    r.variant = variant_name(v);
    r.seed = cfg.base_seed;
    r.metric = "diverged_runs";
    r.value = diverged;
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace ctret
