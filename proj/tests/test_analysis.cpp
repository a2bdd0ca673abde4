#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "offsetctrl/analysis.hpp"
#include "offsetctrl/scalar_exact.hpp"
#include "test_util.hpp"

using namespace offsetctrl;

namespace {

// Open-loop stable scalar plant: a < 0, any offset in the window is fine
// with the zero controller.
ContinuousPlant stable_scalar() {
  ContinuousPlant plant;
  plant.A = Matrix::Constant(1, 1, -1.0);
  plant.B = Matrix::Constant(1, 1, 1.0);
  plant.h = 1.0;
  return plant;
}

DiscreteSystem zero_controller(Eigen::Index inputs) {
  return DiscreteSystem::constant(Matrix::Zero(1, inputs));
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("sweep of an open-loop stable plant is one full stable run") {
  const auto plant = stable_scalar();
  OffsetInterval range;
  range.lo = -0.9;
  range.hi = 0.9;
  const SweepReport report = sweep(plant, zero_controller(1), range, 101);
  REQUIRE(report.grid.size() == 101);
  REQUIRE(report.runs.size() == 1);
  CHECK(report.runs[0].lo == doctest::Approx(-0.9).epsilon(1e-9));
  CHECK(report.runs[0].hi == doctest::Approx(0.9).epsilon(1e-9));
  for (double r : report.radii) CHECK(r < 1.0 - report.margin);
  CHECK(report.refine_hints.empty());
}

TEST_CASE("sweep brackets the stability region of the regulator baseline") {
  const auto plant = testutil::reactor_plant();
  const LqrBaseline baseline = lqr_baseline(plant);
  OffsetInterval range;
  range.lo = -0.2;
  range.hi = 0.2;
  const SweepReport report = sweep(plant, baseline.controller, range, 201, 1e-7);
  REQUIRE(!report.runs.empty());
  // The run containing zero is the designed region.
  const StableRun* home = nullptr;
  for (const StableRun& run : report.runs) {
    if (run.lo <= 0.0 && 0.0 <= run.hi) home = &run;
  }
  REQUIRE(home != nullptr);
  CHECK(home->lo == doctest::Approx(-0.029).epsilon(0.12));
  CHECK(home->hi == doctest::Approx(0.062).epsilon(0.06));
}

TEST_CASE("interval search exhausts the window when nothing destabilizes") {
  const auto plant = stable_scalar();
  const OffsetInterval iv = interval_search(plant, zero_controller(1), 1e-7);
  CHECK(iv.lo == doctest::Approx(-plant.h).epsilon(1e-6));
  CHECK(iv.hi == doctest::Approx(plant.h).epsilon(1e-6));
}

TEST_CASE("interval search refuses a loop that is unstable at zero offset") {
  const auto plant = testutil::reactor_plant();
  CHECK_THROWS_AS((void)interval_search(plant, zero_controller(4)),
                  std::invalid_argument);
}

TEST_CASE("interval search reproduces the designed range of an exact design") {
  // First-order plant with a = h = 1 and the interval controller for
  // theta in [-0.4, 0.4]: the offset image is (-log 1.4, -log 0.6).
  const double a = 1.0, h = 1.0;
  const double lambda = std::exp(a * h);
  const ScalarController ctrl = scalar_controller(lambda, -0.4, 0.4);
  const auto plant = testutil::scalar_plant(a, a, h);  // unit b/a scaling
  const OffsetInterval iv = interval_search(plant, ctrl.realization, 1e-7);
  const double want_lo = -std::log(1.4) / a;
  const double want_hi = -std::log(0.6) / a;
  // The designed interval must be contained in the searched one.
  CHECK(iv.lo <= want_lo + 1e-3);
  CHECK(iv.hi >= want_hi - 1e-3);
}

TEST_CASE("simulation follows the exact closed-loop recursion") {
  const auto plant = testutil::reactor_plant();
  const LqrBaseline baseline = lqr_baseline(plant);
  const double delta = 0.02;
  const Matrix loop = closed_loop_matrix(plant, delta, baseline.controller);
  const double rho = spectral_radius(loop);
  REQUIRE(rho < 1.0);
  // Enough periods for three extra decades beyond the decay threshold.
  const int steps = std::clamp(
      static_cast<int>(std::ceil(std::log(1e-9) / std::log(rho))), 30, 400);
  Vector x0(4);
  x0 << 1.0, -0.5, 0.25, 0.75;
  const Trajectory traj =
      simulate(plant, baseline.controller, delta, steps, x0, Vector(), {}, 4);
  REQUIRE(traj.xi.size() == static_cast<std::size_t>(steps) + 1);
  REQUIRE(traj.u.size() == static_cast<std::size_t>(steps));
  // Static controller: the closed-loop state is just xi.
  Vector xi = traj.xi.front();
  for (int k = 1; k <= steps; ++k) {
    xi = loop * xi;
    CHECK((traj.xi[static_cast<std::size_t>(k)] - xi).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, xi.cwiseAbs().maxCoeff()));
  }
  // x0 of dimension n starts the estimate at zero: xi = [x; 0] shifted into
  // [x - xhat; xhat] coordinates with xhat = 0.
  CHECK((traj.x.front() - x0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.xhat.front().cwiseAbs().maxCoeff() == 0.0);
  // Decay horizon reported on a stable clean run.
  CHECK(traj.decay_horizon > 0);
  CHECK(traj.xi.back().norm() < 1e-6 * traj.xi.front().norm());
}

TEST_CASE("zero initial data stays identically zero") {
  const auto plant = testutil::reactor_plant();
  const LqrBaseline baseline = lqr_baseline(plant);
  const Trajectory traj = simulate(plant, baseline.controller, 0.01, 10,
                                   Vector::Zero(4), Vector(), {}, 6);
  for (const Vector& x : traj.x) CHECK(x.cwiseAbs().maxCoeff() == 0.0);
  for (const Vector& u : traj.u) CHECK(u.cwiseAbs().maxCoeff() == 0.0);
  for (const Vector& xf : traj.x_fine) CHECK(xf.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("intersample trace is consistent and physically bounded") {
  const auto plant = testutil::reactor_plant();
  const LqrBaseline baseline = lqr_baseline(plant);
  const double delta = -0.03;
  Vector x0(4);
  x0 << 0.5, 0.1, -0.4, 0.2;
  const int steps = 12, intersample = 10;
  const Trajectory traj = simulate(plant, baseline.controller, delta, steps, x0,
                                   Vector(), {}, intersample);
  REQUIRE(traj.t_fine.size() == traj.x_fine.size());
  REQUIRE(traj.t_fine.size() ==
          static_cast<std::size_t>(steps * intersample + 1));

  // At each update instant the fine trace must agree with the discrete state.
  for (int k = 0; k <= steps; ++k) {
    const std::size_t idx = static_cast<std::size_t>(k * intersample);
    CHECK(std::abs(traj.t_fine[idx] - traj.t[static_cast<std::size_t>(k)]) < 1e-12);
    CHECK((traj.x_fine[idx] - traj.x[static_cast<std::size_t>(k)])
              .cwiseAbs()
              .maxCoeff() < 1e-8 * std::max(1.0, traj.x[k].cwiseAbs().maxCoeff()));
  }

  // Crude growth bound per period: ||x(t)|| <= e^{||A|| h} (||x_k|| + h ||B|| ||u_k||).
  const double a_norm = plant.A.norm();
  const double b_norm = plant.B.norm();
  for (int k = 0; k < steps; ++k) {
    const double cap = std::exp(a_norm * plant.h) *
                       (traj.x[static_cast<std::size_t>(k)].norm() +
                        plant.h * b_norm * traj.u[static_cast<std::size_t>(k)].norm());
    for (int j = 0; j <= intersample; ++j) {
      const std::size_t idx = static_cast<std::size_t>(k * intersample + j);
      CHECK(traj.x_fine[idx].norm() <= cap * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("disturbed run stays within the geometric-series bound") {
  const auto plant = testutil::reactor_plant(0.5);
  const LqrBaseline baseline = lqr_baseline(plant);
  const double delta = 0.02;

  SimulationSignals signals;
  signals.C = Matrix::Identity(4, 4);
  signals.L = plant.A + 0.8 * Matrix::Identity(4, 4);  // A - LC = -0.8 I
  signals.d = [](double t) {
    Vector v = Vector::Zero(4);
    v(0) = 0.2 * std::sin(1.7 * t);
    return v;
  };
  signals.n = [](double t) {
    Vector v = Vector::Zero(4);
    v(2) = 0.1 * std::cos(0.9 * t);
    return v;
  };
  signals.w = [](int k) {
    Vector v = Vector::Zero(4);
    v(1) = (k % 2 == 0) ? 0.02 : -0.02;
    return v;
  };
  Vector e0(4);
  e0 << 0.3, -0.2, 0.1, 0.0;
  signals.e0 = e0;

  const int steps = 40;
  const Trajectory traj = simulate(plant, baseline.controller, delta, steps,
                                   Vector::Zero(4), Vector(), signals, 4);

  // Bound: sup_k ||xi_k|| <= sum_j ||M^j|| * sup ||d||  (zero initial state).
  const Matrix loop = closed_loop_matrix(plant, delta, baseline.controller);
  const DisturbanceModel model = disturbance_map(plant, delta, signals.C, signals.L);
  double e_max = e0.norm();
  {
    // Observer error can only decay under A - LC = -0.8 I, so e0 dominates.
    const auto trace = evaluate_disturbances(
        model, signals.d, signals.n, signals.w, e0, steps,
        [](int) { return 0.0; });
    for (const Vector& e : trace.e) e_max = std::max(e_max, e.norm());
  }
  const double d_sup = disturbance_bound(model, 0.2, 0.1, 0.02, e_max);
  double series_sum = 0.0;
  Matrix power = Matrix::Identity(loop.rows(), loop.cols());
  for (int j = 0; j < 400; ++j) {
    const double term = power.norm();
    series_sum += term;
    if (term < 1e-12) break;
    power = loop * power;
  }
  const double cap = series_sum * d_sup;
  for (const Vector& xi : traj.xi) CHECK(xi.norm() <= cap * (1.0 + 1e-9));
  // And the disturbance had a visible effect.
  double sup_xi = 0.0;
  for (const Vector& xi : traj.xi) sup_xi = std::max(sup_xi, xi.norm());
  CHECK(sup_xi > 0.0);
}

TEST_SUITE_END();
