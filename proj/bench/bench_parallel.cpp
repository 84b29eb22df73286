// Compares the serial reference path against the OpenMP path on the
// quadrature and servo workloads: wall time plus a byte-equality check of
// the emitted tables.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "ctret/harness.hpp"

using namespace ctret;

namespace {

template <class F>
double time_seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

std::string serialize(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_rows(out, rows);
  return out.str();
}

}  // namespace

int main() {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int jobs = hw > 0 ? hw : 2;
  std::printf("parallel path uses %d threads\n", jobs);
  bool ok = true;

  {
    QuadConfig cfg;
    cfg.trials = 500;
    std::string serial_table, parallel_table;
    cfg.jobs = 1;
    const double ts = time_seconds([&] { serial_table = serialize(run_quad_fixed(cfg).rows); });
    cfg.jobs = jobs;
    const double tp = time_seconds([&] { parallel_table = serialize(run_quad_fixed(cfg).rows); });
    const bool same = serial_table == parallel_table;
    ok &= same;
    std::printf("quad-fixed   (500 trials): serial %.3fs, parallel %.3fs, speedup %.2fx, tables %s\n",
                ts, tp, ts / tp, same ? "identical" : "DIFFER");
  }

  {
    ServoExperimentConfig cfg;
    cfg.delta_mu = {0.120};
    cfg.alphas = {std::ldexp(1.0, -12)};
    cfg.runs = 4;
    cfg.budget_seconds = 120.0;
    std::string serial_table, parallel_table;
    cfg.jobs = 1;
    const double ts = time_seconds([&] { serial_table = serialize(run_servo_sweep(cfg).rows); });
    cfg.jobs = jobs;
    const double tp = time_seconds([&] { parallel_table = serialize(run_servo_sweep(cfg).rows); });
    const bool same = serial_table == parallel_table;
    ok &= same;
    std::printf("servo-sweep  (8 short runs): serial %.3fs, parallel %.3fs, speedup %.2fx, tables %s\n",
                ts, tp, ts / tp, same ? "identical" : "DIFFER");
  }

  return ok ? 0 : 1;
}
