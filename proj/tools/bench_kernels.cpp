// Benchmark comparing the serial reference kernels against the OpenMP
// variants on the two workloads the library actually runs them on: a
// frequency-response scan and a closed-loop offset sweep.  Also checks that
// both variants agree exactly, which is the contract the unit tests pin.

#include <chrono>
#include <cstdio>
#include <random>

#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/discretization.hpp"
#include "offsetctrl/kernels.hpp"
#include "offsetctrl/linalg.hpp"
#include "offsetctrl/synthesis.hpp"

namespace {

using namespace offsetctrl;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

ContinuousPlant reactor_benchmark() {
  ContinuousPlant plant;
  plant.A = Matrix(4, 4);
  plant.A << 1.38, -0.2077, 6.715, -5.676,  //
      -0.5814, -4.29, 0.0, 0.675,           //
      1.067, 4.273, -6.654, 5.893,          //
      0.048, 4.273, 1.343, -2.104;
  plant.B = Matrix(4, 2);
  plant.B << 0.0, 0.0,  //
      5.679, 0.0,       //
      1.136, -3.146,    //
      1.136, 0.0;
  plant.h = 1.0;
  return plant;
}

}  // namespace

int main() {
  // Workload 1: peak gain of a random stable system over a dense circle grid.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  const int n = 40;
  DiscreteSystem sys;
  sys.F = Matrix::NullaryExpr(n, n, [&]() { return dist(rng); });
  sys.F *= 0.9 / spectral_radius(sys.F);
  sys.G = Matrix::NullaryExpr(n, 4, [&]() { return dist(rng); });
  sys.H = Matrix::NullaryExpr(4, n, [&]() { return dist(rng); });
  sys.D = Matrix::Zero(4, 4);

  const std::size_t freq_points = 4000;
  auto gain_at_index = [&](std::size_t k) {
    const double w = 2.0 * 3.14159265358979323846 * static_cast<double>(k) /
                     static_cast<double>(freq_points);
    return sigma_max(evaluate(sys, Complex(std::cos(w), std::sin(w))));
  };

  auto t0 = std::chrono::steady_clock::now();
  const kernels::GridMax serial_peak =
      kernels::grid_max_serial(freq_points, gain_at_index);
  const double t_serial_freq = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const kernels::GridMax parallel_peak =
      kernels::grid_max_parallel(freq_points, gain_at_index);
  const double t_parallel_freq = seconds_since(t0);

  std::printf("frequency scan (%zu points, order %d):\n", freq_points, n);
  std::printf("  serial   %8.3f ms  peak %.12g @ %zu\n", 1e3 * t_serial_freq,
              serial_peak.value, serial_peak.index);
  std::printf("  parallel %8.3f ms  peak %.12g @ %zu  speedup %.2fx\n",
              1e3 * t_parallel_freq, parallel_peak.value, parallel_peak.index,
              t_serial_freq / t_parallel_freq);
  const bool freq_match = serial_peak.index == parallel_peak.index &&
                          serial_peak.value == parallel_peak.value;
  std::printf("  results identical: %s\n", freq_match ? "yes" : "NO");

  // Workload 2: closed-loop spectral radius over a dense offset grid.
  const ContinuousPlant plant = reactor_benchmark();
  const LqrBaseline baseline = lqr_baseline(plant);
  const std::size_t sweep_points = 600;
  auto radius_at_index = [&](std::size_t k) {
    const double delta = -0.9 + 1.8 * static_cast<double>(k) /
                                    static_cast<double>(sweep_points - 1);
    return spectral_radius(closed_loop_matrix(plant, delta, baseline.controller));
  };

  t0 = std::chrono::steady_clock::now();
  const std::vector<double> radii_serial =
      kernels::grid_map_serial<double>(sweep_points, radius_at_index);
  const double t_serial_sweep = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const std::vector<double> radii_parallel =
      kernels::grid_map_parallel<double>(sweep_points, radius_at_index);
  const double t_parallel_sweep = seconds_since(t0);

  bool sweep_match = radii_serial.size() == radii_parallel.size();
  for (std::size_t i = 0; sweep_match && i < radii_serial.size(); ++i) {
    sweep_match = radii_serial[i] == radii_parallel[i];
  }
  std::printf("offset sweep (%zu points):\n", sweep_points);
  std::printf("  serial   %8.3f ms\n", 1e3 * t_serial_sweep);
  std::printf("  parallel %8.3f ms  speedup %.2fx\n", 1e3 * t_parallel_sweep,
              t_serial_sweep / t_parallel_sweep);
  std::printf("  results identical: %s\n", sweep_match ? "yes" : "NO");

  return freq_match && sweep_match ? 0 : 1;
}
