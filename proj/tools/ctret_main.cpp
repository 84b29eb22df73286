// Experiment CLI: quadrature-error studies of return definitions and the
// servo-reacher control experiments, emitting deterministic CSV tables.

#include <cstdio>
#include <exception>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "ctret/config.hpp"
#include "ctret/harness.hpp"

namespace {

using namespace ctret;

constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;
constexpr int kExitSelftestFailure = 4;

const std::set<std::string> kKnownKeys = {
    "quad.trials", "quad.gammas", "quad.ns", "quad.families", "quad.emit_trials",
    "servo.runs", "servo.delta_mu_ms", "servo.alphas_log2", "servo.budget_minutes",
    "servo.gamma", "servo.alpha_dtr", "servo.alpha_rp", "servo.hidden1",
    "servo.hidden2", "servo.final_fraction",
    "env.armature_inductance", "env.armature_resistance", "env.rotor_inertia",
    "env.rotor_friction", "env.torque_constant", "env.gear_ratio",
    "env.gear_efficiency", "env.sim_step", "env.voltage_limit", "env.angle_limit",
    "env.position_tolerance", "env.velocity_tolerance", "env.time_limit",
    "env.jitter_std_ms", "env.min_interval_ms", "env.catastrophe_prob",
    "env.catastrophe_mean_ms", "env.catastrophe_std_ms",
    "env.literal_reward_sign", "env.zero_velocity_on_clamp"};

Config load_config(const std::string& path) {
  if (path.empty()) return Config{};
  Config cfg = Config::parse_file(path);
  for (const auto& [key, value] : cfg.entries()) {
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  return cfg;
}

QuadConfig build_quad_config(const Config& cfg) {
  QuadConfig q;
  q.trials = cfg.get_int("quad.trials", q.trials);
  q.gammas = cfg.get_double_list("quad.gammas", q.gammas);
  q.interval_counts = cfg.get_int_list("quad.ns", q.interval_counts);
  q.emit_trials = cfg.get_bool("quad.emit_trials", q.emit_trials);
  if (cfg.has("quad.families")) {
    q.families.clear();
    for (const auto& name : cfg.get_string_list("quad.families", {})) {
      if (name == "periodic") {
        q.families.push_back(SignalFamily::kPeriodic);
      } else if (name == "gaussian_mixture") {
        q.families.push_back(SignalFamily::kGaussianMixture);
      } else {
        throw ConfigError("unknown signal family '" + name + "'");
      }
    }
  }
  return q;
}

ServoExperimentConfig build_servo_config(const Config& cfg) {
  ServoExperimentConfig s;
  s.runs = cfg.get_int("servo.runs", s.runs);
  s.budget_seconds = cfg.get_double("servo.budget_minutes", 25.0) * 60.0;
  s.final_fraction = cfg.get_double("servo.final_fraction", s.final_fraction);
  s.hidden1 = cfg.get_int("servo.hidden1", s.hidden1);
  s.hidden2 = cfg.get_int("servo.hidden2", s.hidden2);
  s.alpha_dtr = cfg.get_double("servo.alpha_dtr", s.alpha_dtr);
  s.alpha_rp = cfg.get_double("servo.alpha_rp", s.alpha_rp);
  if (cfg.has("servo.delta_mu_ms")) {
    s.delta_mu.clear();
    for (double ms : cfg.get_double_list("servo.delta_mu_ms", {})) {
      s.delta_mu.push_back(ms / 1000.0);
    }
  }
  if (cfg.has("servo.alphas_log2")) {
    s.alphas.clear();
    for (double e : cfg.get_double_list("servo.alphas_log2", {})) {
      s.alphas.push_back(std::exp2(e));
    }
  }

  s.motor.armature_inductance =
      cfg.get_double("env.armature_inductance", s.motor.armature_inductance);
  s.motor.armature_resistance =
      cfg.get_double("env.armature_resistance", s.motor.armature_resistance);
  s.motor.rotor_inertia = cfg.get_double("env.rotor_inertia", s.motor.rotor_inertia);
  s.motor.rotor_friction = cfg.get_double("env.rotor_friction", s.motor.rotor_friction);
  s.motor.torque_constant =
      cfg.get_double("env.torque_constant", s.motor.torque_constant);
  s.motor.gear_ratio = cfg.get_double("env.gear_ratio", s.motor.gear_ratio);
  s.motor.gear_efficiency =
      cfg.get_double("env.gear_efficiency", s.motor.gear_efficiency);

  s.sim.sim_step = cfg.get_double("env.sim_step", s.sim.sim_step);
  s.sim.voltage_limit = cfg.get_double("env.voltage_limit", s.sim.voltage_limit);
  s.sim.angle_limit = cfg.get_double("env.angle_limit", s.sim.angle_limit);
  s.sim.position_tolerance =
      cfg.get_double("env.position_tolerance", s.sim.position_tolerance);
  s.sim.velocity_tolerance =
      cfg.get_double("env.velocity_tolerance", s.sim.velocity_tolerance);
  s.sim.time_limit = cfg.get_double("env.time_limit", s.sim.time_limit);
  s.sim.gamma = cfg.get_double("servo.gamma", s.sim.gamma);
  s.sim.literal_reward_sign =
      cfg.get_bool("env.literal_reward_sign", s.sim.literal_reward_sign);
  s.sim.zero_velocity_on_clamp =
      cfg.get_bool("env.zero_velocity_on_clamp", s.sim.zero_velocity_on_clamp);

  s.jitter_std = cfg.get_double("env.jitter_std_ms", s.jitter_std * 1000.0) / 1000.0;
  s.min_interval =
      cfg.get_double("env.min_interval_ms", s.min_interval * 1000.0) / 1000.0;
  s.catastrophe_prob = cfg.get_double("env.catastrophe_prob", s.catastrophe_prob);
  s.catastrophe_mean =
      cfg.get_double("env.catastrophe_mean_ms", s.catastrophe_mean * 1000.0) / 1000.0;
  s.catastrophe_std =
      cfg.get_double("env.catastrophe_std_ms", s.catastrophe_std * 1000.0) / 1000.0;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-time return experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, dump_signals_path;
  std::uint64_t seed = 1;
  int trials = -1, runs = -1, jobs = 1;
  bool emit_trials = false;
  double delta_mu_ms = 120.0, alpha_dtr = 0.0, alpha_rp = 0.0;

  app.add_option("--config", config_path, "structured text config file");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--jobs", jobs, "worker threads (1 = serial reference path)")
      ->check(CLI::PositiveNumber);

  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "output CSV path")->required();
  };

  auto* quad_fixed = app.add_subcommand("quad-fixed", "uniform-partition errors");
  auto* quad_stoch = app.add_subcommand("quad-stochastic", "stochastic-partition errors");
  auto* quad_prod = app.add_subcommand("quad-products", "undiscounted signal-product errors");
  for (auto* cmd : {quad_fixed, quad_stoch, quad_prod}) {
    add_out(cmd);
    cmd->add_option("--trials", trials, "trials per cell");
    cmd->add_flag("--emit-trials", emit_trials, "emit per-trial rows");
    cmd->add_option("--dump-signals", dump_signals_path,
                    "write sampled signal coefficient records");
  }

  auto* sweep = app.add_subcommand("servo-sweep", "step-size sensitivity sweep");
  auto* curves = app.add_subcommand("servo-curves", "learning curves at chosen step sizes");
  for (auto* cmd : {sweep, curves}) {
    add_out(cmd);
    cmd->add_option("--runs", runs, "independent runs per cell");
  }
  curves->add_option("--delta-mu-ms", delta_mu_ms, "target interval, ms");
  curves->add_option("--alpha-dtr", alpha_dtr, "DTR step size");
  curves->add_option("--alpha-rp", alpha_rp, "RP step size");

  auto* selftest = app.add_subcommand("selftest", "run the invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    const Config cfg = load_config(config_path);

    if (selftest->parsed()) {
      return run_selftest(seed) ? 0 : kExitSelftestFailure;
    }

    if (quad_fixed->parsed() || quad_stoch->parsed() || quad_prod->parsed()) {
      QuadConfig q = build_quad_config(cfg);
      q.base_seed = seed;
      q.jobs = jobs;
      if (trials > 0) q.trials = trials;
      if (emit_trials) q.emit_trials = true;
      if (quad_stoch->parsed() && !cfg.has("quad.gammas")) q.gammas = {0.75};
      QuadResult result = quad_fixed->parsed()  ? run_quad_fixed(q)
                          : quad_stoch->parsed() ? run_quad_stochastic(q)
                                                 : run_quad_products(q);
      write_rows(out_path, result.rows);
      if (!dump_signals_path.empty()) dump_signal_records(q, dump_signals_path);
      return 0;
    }

    ServoExperimentConfig s = build_servo_config(cfg);
    s.base_seed = seed;
    s.jobs = jobs;
    if (runs > 0) s.runs = runs;
    if (sweep->parsed()) {
      write_rows(out_path, run_servo_sweep(s).rows);
    } else {
      if (alpha_dtr > 0.0) s.alpha_dtr = alpha_dtr;
      if (alpha_rp > 0.0) s.alpha_rp = alpha_rp;
      write_rows(out_path, run_servo_curves(s, delta_mu_ms / 1000.0).rows);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIoError;
  }
}
