#include "offsetctrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "offsetctrl/kernels.hpp"

namespace offsetctrl {

namespace {

constexpr double kStableMargin = 1e-9;

bool stable_at(const ContinuousPlant& plant, const DiscreteSystem& controller,
               double delta) {
  return spectral_radius(closed_loop_matrix(plant, delta, controller)) <
         1.0 - kStableMargin;
}

// Bisects a stability boundary bracketed by a stable and an unstable offset
// and returns the stable-side endpoint to within `tol` seconds.
double refine_boundary(const ContinuousPlant& plant, const DiscreteSystem& controller,
                       double stable, double unstable, double tol) {
  while (std::abs(unstable - stable) > tol) {
    const double mid = 0.5 * (stable + unstable);
    if (stable_at(plant, controller, mid)) {
      stable = mid;
    } else {
      unstable = mid;
    }
  }
  return stable;
}

}  // namespace

SweepReport sweep(const ContinuousPlant& plant, const DiscreteSystem& controller,
                  const OffsetInterval& range, int points, double bisect_tol) {
  plant.validate();
  range.validate(plant.h);
  if (points < 2) throw std::invalid_argument("sweep needs at least 2 grid points");

  SweepReport report;
  report.margin = kStableMargin;
  report.grid.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    report.grid[static_cast<std::size_t>(i)] =
        range.lo + (range.hi - range.lo) * i / (points - 1.0);
  }
  report.radii = kernels::grid_map<double>(
      report.grid.size(), [&](std::size_t k) {
        return spectral_radius(closed_loop_matrix(plant, report.grid[k], controller));
      });

  // Maximal stable runs, with outer endpoints sharpened against the
  // neighbouring unstable grid point where one exists.
  const std::size_t n = report.grid.size();
  std::size_t i = 0;
  while (i < n) {
    if (report.radii[i] >= 1.0 - kStableMargin) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && report.radii[j + 1] < 1.0 - kStableMargin) ++j;
    StableRun run;
    run.lo = (i == 0) ? report.grid[0]
                      : refine_boundary(plant, controller, report.grid[i],
                                        report.grid[i - 1], bisect_tol);
    run.hi = (j + 1 == n) ? report.grid[n - 1]
                          : refine_boundary(plant, controller, report.grid[j],
                                            report.grid[j + 1], bisect_tol);
    report.runs.push_back(run);
    i = j + 1;
  }

  // Coarseness hint: flag neighbour pairs whose radius jump dwarfs the
  // typical increment (heuristic only; the caller may re-sweep finer there).
  if (n >= 3) {
    std::vector<double> jumps(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      jumps[k] = std::abs(report.radii[k + 1] - report.radii[k]);
    }
    const double mean_jump =
        std::accumulate(jumps.begin(), jumps.end(), 0.0) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (jumps[k] > 5.0 * mean_jump && jumps[k] > 1e-3) report.refine_hints.push_back(k);
    }
  }
  return report;
}

OffsetInterval interval_search(const ContinuousPlant& plant,
                               const DiscreteSystem& controller, double resolution) {
  plant.validate();
  if (!stable_at(plant, controller, 0.0)) {
    throw std::invalid_argument(
        "interval_search: closed loop is unstable at zero offset");
  }
  // Probes must stay strictly inside (-h, h) where the sampled model exists.
  const double cap = plant.h * (1.0 - 1e-9);
  const double step = plant.h / 200.0;

  auto scan = [&](double direction) {
    double last_stable = 0.0;
    double probe = step;
    while (probe < cap) {
      if (!stable_at(plant, controller, direction * probe)) {
        return direction * refine_boundary(plant, controller, last_stable, probe,
                                           resolution);
      }
      last_stable = probe;
      probe += step;
    }
    if (stable_at(plant, controller, direction * cap)) return direction * cap;
    return direction *
           refine_boundary(plant, controller, last_stable, cap, resolution);
  };

  OffsetInterval out;
  out.hi = scan(1.0);
  out.lo = scan(-1.0);
  return out;
}

Trajectory simulate(const ContinuousPlant& plant, const DiscreteSystem& controller,
                    double delta, int steps, const Vector& x0, const Vector& zeta0,
                    const SimulationSignals& signals, int intersample) {
  plant.validate();
  if (steps < 1) throw std::invalid_argument("simulate needs at least one step");
  if (intersample < 1) throw std::invalid_argument("intersample resolution must be >= 1");

  const int n = static_cast<int>(plant.n());
  const DiscreteSystem sys = discretize(plant, delta);
  if (controller.n_in() != sys.n_out() || controller.n_out() != sys.n_in()) {
    throw std::invalid_argument("controller dimensions do not match the plant");
  }
  const int nc = controller.n_states();

  Vector xi0;
  if (x0.size() == n) {
    // Plant state given; the estimate starts at zero.
    xi0 = Vector::Zero(2 * n);
    xi0.head(n) = x0;
  } else if (x0.size() == 2 * n) {
    xi0 = x0;
  } else {
    throw std::invalid_argument("initial state must have dimension n or 2n");
  }
  Vector zeta = zeta0.size() == 0 && nc == 0 ? Vector::Zero(0) : zeta0;
  if (zeta.size() != nc) {
    throw std::invalid_argument("controller initial state has wrong dimension");
  }

  // Optional disturbance-aware sampled model: a lumped per-step state
  // disturbance is added to the nominal recursion.
  const bool disturbed = signals.C.size() > 0;
  DisturbanceTrace trace;
  if (disturbed) {
    const DisturbanceModel model =
        disturbance_map(plant, delta, signals.C, signals.L);
    const Signal zero_sig = [n](double) { return Vector::Zero(n); };
    const int p = static_cast<int>(signals.C.rows());
    const Signal zero_noise = [p](double) { return Vector::Zero(p); };
    const std::function<Vector(int)> zero_w = [n](int) { return Vector::Zero(n); };
    const std::function<double(int)> zero_frac = [](int) { return 0.0; };
    const Vector e0 = signals.e0.size() == n ? signals.e0 : Vector::Zero(n);
    trace = evaluate_disturbances(model, signals.d ? signals.d : zero_sig,
                                  signals.n ? signals.n : zero_noise,
                                  signals.w ? signals.w : zero_w, e0, steps,
                                  signals.s_frac ? signals.s_frac : zero_frac);
  }

  Trajectory out;
  out.t.reserve(static_cast<std::size_t>(steps) + 1);
  out.xi.reserve(static_cast<std::size_t>(steps) + 1);

  // Sub-step propagators for the intersample trace.
  const double dt = plant.h / intersample;
  const Matrix e_sub = expm(plant.A, dt);
  const Matrix j_sub = exp_integral(plant.A, plant.B, dt);  // \int_0^dt e^{As} B ds
  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(8, gl_nodes, gl_weights);

  const double xi0_norm = xi0.norm();
  const bool clean = !disturbed;

  Vector xi = xi0;
  for (int k = 0; k <= steps; ++k) {
    out.t.push_back(k * plant.h);
    out.xi.push_back(xi);
    out.x.push_back(xi.head(n) + xi.tail(n));
    out.xhat.push_back(xi.tail(n));
    out.zeta.push_back(zeta);
    if (clean && out.decay_horizon < 0 && xi0_norm > 0.0 &&
        xi.norm() < 1e-6 * xi0_norm) {
      out.decay_horizon = k;
    }
    if (k == steps) break;

    const Vector y = sys.H * xi;
    const Vector uk = -(controller.D * y + (nc > 0 ? Vector(controller.H * zeta)
                                                   : Vector::Zero(sys.n_in())));
    out.u.push_back(uk);

    // Intersample: true plant state under the held input (and disturbance),
    // and the estimator's nominal forward propagation of the estimate.
    Vector xc = out.x.back();
    Vector xh = out.xhat.back();
    for (int j = 0; j < intersample; ++j) {
      const double tj = k * plant.h + j * dt;
      out.t_fine.push_back(tj);
      out.x_fine.push_back(xc);
      out.xhat_fine.push_back(xh);
      Vector next = e_sub * xc + j_sub * uk;
      if (disturbed && signals.d) {
        // \int_0^dt e^{A (dt - s)} d(tj + s) ds by 8-node quadrature.
        Vector acc = Vector::Zero(n);
        for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
          const double s = 0.5 * dt * (gl_nodes[q] + 1.0);
          acc += gl_weights[q] * 0.5 * dt *
                 (expm(plant.A, dt - s) * signals.d(tj + s));
        }
        next += acc;
      }
      xc = next;
      xh = e_sub * xh + j_sub * uk;
    }

    Vector xi_next = sys.F * xi + sys.G * uk;
    if (disturbed) xi_next += trace.d[static_cast<std::size_t>(k)];
    xi = xi_next;
    if (nc > 0) zeta = controller.F * zeta + controller.G * y;
  }
  // Close the intersample trace at the final instant.
  out.t_fine.push_back(steps * plant.h);
  out.x_fine.push_back(out.x.back());
  out.xhat_fine.push_back(out.xhat.back());
  return out;
}

}  // namespace offsetctrl
