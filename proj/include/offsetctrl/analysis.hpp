#pragma once

#include "offsetctrl/discretization.hpp"
#include "offsetctrl/synthesis.hpp"

#include <functional>
#include <vector>

namespace offsetctrl {

/// Maximal offset range over which the closed loop stays strictly stable;
/// endpoints refined by bisection.
struct StableRun {
  double lo = 0.0;
  double hi = 0.0;
};

struct SweepReport {
  std::vector<double> grid;         // offsets (seconds), ascending
  std::vector<double> radii;        // closed-loop spectral radius per offset
  std::vector<StableRun> runs;      // maximal runs with radius < 1 - margin
  double margin = 1e-9;             // strictness margin used for "stable"
  // Indices i where the radius jump between grid[i] and grid[i+1] is large
  // relative to the typical increment: the grid is too coarse there.
  std::vector<std::size_t> refine_hints;
};

/// Spectral radius of the closed loop on a uniform offset grid, with maximal
/// stable runs extracted and their endpoints sharpened by bisection to
/// `bisect_tol` seconds.
SweepReport sweep(const ContinuousPlant& plant, const DiscreteSystem& controller,
                  const OffsetInterval& range, int points,
                  double bisect_tol = 1e-6);

/// Maximal interval of offsets around zero, inside (-h, h), over which the
/// closed loop is strictly stable.  Scans outward from zero and bisects the
/// first crossing to `resolution` seconds.  Throws if the loop is already
/// unstable at zero offset.
OffsetInterval interval_search(const ContinuousPlant& plant,
                               const DiscreteSystem& controller,
                               double resolution = 1e-6);

/// Optional exogenous inputs for simulate().  When the observer pair (C, L)
/// is set, the run uses the disturbance-aware sampled model: process
/// disturbance d(t), measurement noise n(t), per-step quantization noise
/// w(k), initial observer error e0, and the in-window placement s_frac(k) of
/// each sampling instant (fraction of the admissible window, default 0).
struct SimulationSignals {
  Signal d;                           // dim n, may be empty for zero
  Signal n;                           // dim p, may be empty for zero
  std::function<Vector(int)> w;       // dim n per step, may be empty for zero
  Matrix C;                           // p x n observer output map (empty: clean run)
  Matrix L;                           // n x p observer gain
  Vector e0;                          // initial observer error (empty: zero)
  std::function<double(int)> s_frac;  // sampling placement in [0, 1)
};

struct Trajectory {
  std::vector<double> t;       // update instants t_k, size steps + 1
  std::vector<Vector> xi;      // extended state [x - xhat; xhat] at t_k
  std::vector<Vector> x;       // plant state x(t_k)
  std::vector<Vector> xhat;    // estimate xhat(t_k)
  std::vector<Vector> zeta;    // controller state at t_k
  std::vector<Vector> u;       // input held over [t_k, t_{k+1}), size steps
  std::vector<double> t_fine;  // intersample times
  std::vector<Vector> x_fine;  // continuous-time plant state at t_fine
  std::vector<Vector> xhat_fine;  // estimator's nominal forward propagation
  // First k with ||xi_k|| < 1e-6 ||xi_0|| on a clean run (-1 if not reached).
  int decay_horizon = -1;
};

/// Propagates the sampled closed loop for `steps` periods from plant state
/// x0 (dimension n, estimate starting at zero, or dimension 2n to set the
/// full extended state) and controller state zeta0.  Discrete samples follow
/// the exact closed-loop recursion; intersample states integrate the
/// continuous dynamics by matrix-exponential sub-stepping with `intersample`
/// sub-points per period (Gauss-Legendre quadrature for the disturbance
/// term).
Trajectory simulate(const ContinuousPlant& plant, const DiscreteSystem& controller,
                    double delta, int steps, const Vector& x0, const Vector& zeta0,
                    const SimulationSignals& signals = {}, int intersample = 20);

}  // namespace offsetctrl
