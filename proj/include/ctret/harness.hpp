#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctret/csv.hpp"
#include "ctret/reinforce.hpp"
#include "ctret/servo_env.hpp"
#include "ctret/signals.hpp"

namespace ctret {

// --- quadrature experiments -------------------------------------------------

enum class SignalFamily { kPeriodic, kGaussianMixture };
const char* family_name(SignalFamily f);

enum class FamilyPair { kPeriodicPeriodic, kPeriodicMixture, kMixtureMixture };
const char* pair_name(FamilyPair p);

struct QuadConfig {
  std::vector<SignalFamily> families{SignalFamily::kPeriodic,
                                     SignalFamily::kGaussianMixture};
  std::vector<FamilyPair> pairs{FamilyPair::kPeriodicPeriodic,
                                FamilyPair::kPeriodicMixture,
                                FamilyPair::kMixtureMixture};
  std::vector<double> gammas{0.5, 0.75, 0.875};
  std::vector<int> interval_counts{5, 10, 25, 50, 100};
  int trials = 10000;
  std::uint64_t base_seed = 1;
  SignalDomain domain{0.0, 3.0};
  bool emit_trials = false;
  int jobs = 1;
};

struct QuadCell {
  std::string family;  // family or pair tag
  double gamma;        // NaN for product cells
  int n;
  double mean_dtr;
  double se_dtr;
  double mean_rp;
  double se_rp;
  double mean_gap;    // paired per-trial dtr - rp error difference
  double se_gap;
  double mean_delta;  // average interval width
};

struct QuadResult {
  std::vector<QuadCell> cells;
  std::vector<ResultRow> rows;
};

// Uniform partitions over (family, gamma, n). One signal stream per family
// per trial, shared across gamma and n so cell comparisons are paired.
QuadResult run_quad_fixed(const QuadConfig& cfg);

// Stochastic partitions; defaults to gamma = 0.75 only.
QuadResult run_quad_stochastic(const QuadConfig& cfg);

// Undiscounted products of signal-family pairs.
QuadResult run_quad_products(const QuadConfig& cfg);

// Write sampled signal coefficient records, one per line, matching the
// trial streams of run_quad_fixed / run_quad_stochastic.
void dump_signal_records(const QuadConfig& cfg, const std::string& path);

// --- servo control experiments ----------------------------------------------

struct ServoExperimentConfig {
  std::vector<double> delta_mu{0.040, 0.080, 0.120};  // seconds
  std::vector<double> alphas;  // empty -> powers of two, 2^-18 .. 2^-6
  std::vector<ReturnVariant> variants{ReturnVariant::kDtr, ReturnVariant::kRp};
  int runs = 20;
  double budget_seconds = 25.0 * 60.0;
  double final_fraction = 0.2;  // trailing window for "final" performance
  std::uint64_t base_seed = 1;
  int jobs = 1;
  int hidden1 = 64;
  int hidden2 = 64;

  MotorParams motor{};
  SimConfig sim{};  // sim.gamma is the per-second discount (default 0.25)
  double jitter_std = 0.010;
  double min_interval = 0.001;
  double catastrophe_prob = 0.01;
  double catastrophe_mean = 1.000;
  double catastrophe_std = 0.010;

  // learning curves
  double alpha_dtr = 0.0;  // 0 -> required via config/flags
  double alpha_rp = 0.0;

  std::vector<double> alpha_grid() const;
  IntervalNoiseModel noise_for(double target_mean) const;
};

struct RunOutcome {
  double final_return = 0.0;  // mean episodic integral return, trailing window
  bool diverged = false;
  std::vector<double> minute_mean;  // mean episodic return per simulated minute
};

// One independent training run of online REINFORCE on the servo env.
RunOutcome train_run(std::uint64_t seed, const ServoExperimentConfig& cfg,
                     ReturnVariant variant, double alpha, double delta_mu,
                     bool record_curve);

struct SweepCell {
  double delta_mu;
  double alpha;
  ReturnVariant variant;
  double mean_final = 0.0;
  double se_final = 0.0;
  int diverged = 0;
  int runs = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<ResultRow> rows;
};

SweepResult run_servo_sweep(const ServoExperimentConfig& cfg);

struct CurvesResult {
  std::vector<ResultRow> rows;
};

// Learning curves at the configured per-variant step sizes, binned by
// simulated minute.
CurvesResult run_servo_curves(const ServoExperimentConfig& cfg, double delta_mu);

// --- selftest ----------------------------------------------------------------

// Quick invariant suite; prints one line per check. Returns true when all pass.
bool run_selftest(std::uint64_t base_seed);

}  // namespace ctret
