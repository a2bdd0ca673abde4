#pragma once

#include "offsetctrl/analysis.hpp"
#include "offsetctrl/discretization.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace offsetctrl {

/// Plant description loaded from a JSON file: required keys "A" (n x n,
/// array of rows), "B" (n x m), "h" (seconds); optional observer pair "C"
/// (p x n) and "L" (n x p) for disturbance-aware simulation, and a free-form
/// "label".  Parse and shape errors throw std::runtime_error with a
/// file:line diagnostic.
struct PlantFile {
  ContinuousPlant plant;
  Matrix C;  // 0 x 0 when absent
  Matrix L;  // 0 x 0 when absent
  std::string label;
};

PlantFile load_plant(const std::string& path);
void save_plant(const std::string& path, const PlantFile& pf);

/// Controller state-space file: keys "Ac", "Bc", "Cc", "Dc" plus a "meta"
/// object carrying the synthesis record {gamma, norm, interval, seed} and,
/// when available, the full resolved run configuration under "config".
struct ControllerMeta {
  double gamma = 0.0;
  double norm = 0.0;
  OffsetInterval interval;
  std::uint64_t seed = 0;
  std::string config_json;  // resolved configuration, JSON text (may be empty)
};

struct ControllerFile {
  DiscreteSystem controller;
  ControllerMeta meta;
};

ControllerFile load_controller(const std::string& path);
void save_controller(const std::string& path, const ControllerFile& cf);

/// Rounds through a 12-significant-digit (or `digits`) decimal
/// representation so serialized artifacts are byte-comparable across
/// platforms within the documented tolerance.
double round_significant(double value, int digits = 12);
std::string format_significant(double value, int digits = 12);

/// Offset sweep as CSV with columns `delta,spectral_radius,stable`.
void write_sweep_csv(const std::string& path, const SweepReport& report);

/// Sampled trajectory as CSV with columns
/// `t,x_1..x_n,xhat_1..xhat_n,zeta_1..,u_1..u_m`; the input column holds the
/// value applied from each instant onward (the final row repeats the last
/// held input).
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Intersample trace as CSV with columns `t,x_1..x_n,xhat_1..xhat_n`.
void write_intersample_csv(const std::string& path, const Trajectory& traj);

/// Generic numeric CSV writer used by the figure datasets.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, int digits = 12);

}  // namespace offsetctrl
