// Command-line front end: offset-aware discretization, robust synthesis,
// scalar bounds tables, stability sweeps, simulation, and the benchmark
// figure datasets.  Exit codes: 0 success/feasible, 2 input error,
// 3 infeasible synthesis.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "offsetctrl/analysis.hpp"
#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/discretization.hpp"
#include "offsetctrl/factorization.hpp"
#include "offsetctrl/io.hpp"
#include "offsetctrl/linalg.hpp"
#include "offsetctrl/scalar_exact.hpp"
#include "offsetctrl/synthesis.hpp"

namespace {

using json = nlohmann::json;
using namespace offsetctrl;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

// Four-state stirred-tank reactor benchmark (two inputs), the standard
// open-loop-unstable example for sampled-data studies; used by the figure
// datasets when no plant file is given.
ContinuousPlant reactor_benchmark(double h) {
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
  plant.h = h;
  return plant;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(round_significant(m(r, c), 12));
    }
    rows.push_back(row);
  }
  return rows;
}

OffsetInterval parse_interval(const std::vector<double>& values, double h) {
  if (values.size() != 2) {
    throw std::runtime_error("--interval expects two comma-separated numbers lo,hi");
  }
  OffsetInterval interval{values[0], values[1]};
  interval.validate(h);
  return interval;
}

Vector parse_vector(const std::vector<double>& values, Eigen::Index expected,
                    const std::string& what) {
  if (values.empty()) return Vector();
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    std::ostringstream msg;
    msg << what << " expects " << expected << " comma-separated numbers, got "
        << values.size();
    throw std::runtime_error(msg.str());
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    v(i) = values[static_cast<std::size_t>(i)];
  }
  return v;
}

// Enforces the standing assumptions before any offset-aware computation.
void require_assumptions(const ContinuousPlant& plant) {
  const AssumptionReport report = check_assumptions(plant);
  for (const std::string& note : report.notes) std::cerr << "note: " << note << "\n";
  if (!report.ok()) {
    throw std::runtime_error("plant violates the standing assumptions");
  }
}

// ---------------------------------------------------------------------------
// discretize

int cmd_discretize(const std::string& plant_path, double delta,
                   const std::string& out_path) {
  const PlantFile pf = load_plant(plant_path);
  require_assumptions(pf.plant);
  const DiscreteSystem sys = discretize(pf.plant, delta);

  json j;
  j["F"] = matrix_json(sys.F);
  j["G"] = matrix_json(sys.G);
  j["H"] = matrix_json(sys.H);
  j["delta"] = round_significant(delta, 12);
  j["h"] = round_significant(pf.plant.h, 12);
  const std::string text = j.dump(2);
  std::cout << text << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    out << text << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synthesize

int cmd_synthesize(const std::string& plant_path, const std::vector<double>& interval_raw,
                   int q_order, int grid, int restarts, int iterations,
                   std::uint64_t seed, int sweep_points, const std::string& out_path) {
  const PlantFile pf = load_plant(plant_path);
  require_assumptions(pf.plant);
  const OffsetInterval interval = parse_interval(interval_raw, pf.plant.h);

  const GammaReport level = gamma_level(pf.plant, interval);
  const CoprimeBundle bundle = doubly_coprime(pf.plant);

  ModelMatchConfig config;
  config.q_order = q_order;
  config.grid_points = grid;
  config.restarts = restarts;
  config.max_iterations = iterations;
  config.seed = seed;
  if (level.unconstrained) {
    // Degenerate interval: any nominal stabilizer works; skip the search.
    config.restarts = 1;
    config.max_iterations = 0;
  }

  const double gamma = level.unconstrained
                           ? std::numeric_limits<double>::infinity()
                           : level.gamma;
  const SynthesisReport report =
      model_match(bundle, boundary_zero_weight(1), gamma, config);

  // Independent verification: spectral radius over the requested interval.
  bool sweep_ok = true;
  if (!level.unconstrained) {
    const SweepReport sw = sweep(pf.plant, report.controller, interval, sweep_points);
    for (double r : sw.radii) sweep_ok = sweep_ok && (r < 1.0 - 1e-9);
  }

  json config_json;
  config_json["command"] = "synthesize";
  config_json["plant"] = plant_path;
  config_json["interval"] = {round_significant(interval.lo, 12),
                             round_significant(interval.hi, 12)};
  config_json["q_order"] = q_order;
  config_json["grid_points"] = grid;
  config_json["restarts"] = restarts;
  config_json["iterations"] = iterations;
  config_json["seed"] = seed;
  config_json["sweep_points"] = sweep_points;

  if (!out_path.empty()) {
    ControllerFile cf;
    cf.controller = report.controller;
    cf.meta.gamma = gamma;
    cf.meta.norm = report.achieved_norm;
    cf.meta.interval = interval;
    cf.meta.seed = seed;
    cf.meta.config_json = config_json.dump();
    save_controller(out_path, cf);
  }

  json j;
  j["feasible"] = report.feasible;
  j["gamma"] = std::isfinite(gamma) ? json(round_significant(gamma, 12))
                                    : json("inf");
  j["achieved_norm"] = round_significant(report.achieved_norm, 12);
  j["grid_optimum"] = round_significant(report.grid_optimum, 12);
  j["max_offset_residual"] = round_significant(level.max_residual, 12);
  j["sweep_verified"] = sweep_ok;
  j["controller_order"] = report.controller.n_states();
  j["notes"] = report.notes;
  j["config"] = config_json;
  std::cout << j.dump(2) << "\n";

  return report.feasible ? kExitOk : kExitInfeasible;
}

// ---------------------------------------------------------------------------
// scalar-bounds

int cmd_scalar_bounds(double a, double h, const std::string& out_path) {
  if (a < 0.0) throw std::runtime_error("--a must be nonnegative");
  if (!(h > 0.0)) throw std::runtime_error("--h must be positive");

  std::vector<std::string> lines;
  lines.push_back("bound,theta_lo,theta_hi,delta_lo,delta_hi,delta_length,endpoints");

  auto fmt = [](double v) { return format_significant(v, 12); };
  auto add_row = [&](const std::string& name, const ThetaInterval& iv) {
    // theta = exp(-a delta) - 1 is decreasing, so the theta bounds map to
    // delta bounds in reversed order; clip to the modeling window (-h, h).
    const double dlo = std::max(-h, delta_of_theta(iv.hi, a));
    const double dhi = std::min(h, delta_of_theta(iv.lo, a));
    lines.push_back(name + "," + fmt(iv.lo) + "," + fmt(iv.hi) + "," + fmt(dlo) +
                    "," + fmt(dhi) + "," + fmt(delta_length_of(iv, a, h)) + ",open");
  };

  if (a == 0.0) {
    // Marginal pole: every offset in the modeling window is tolerated.
    const double len = max_offset_length_integrator(h);
    lines.push_back("lti,nan,nan," + fmt(-h) + "," + fmt(h) + "," + fmt(len) +
                    ",open");
  } else {
    const double lambda = std::exp(a * h);
    {
      // One maximal-length placement, centred; any placement of the same
      // length strictly inside (-h, h) is equally stabilizable.
      const double len = max_offset_length_lti(a, h);
      const ThetaInterval iv{theta_of_delta(len / 2.0, a),
                             theta_of_delta(-len / 2.0, a)};
      lines.push_back("lti," + fmt(iv.lo) + "," + fmt(iv.hi) + "," + fmt(-len / 2.0) +
                      "," + fmt(len / 2.0) + "," + fmt(len) + ",open");
    }
    add_row("static", static_bound(lambda));
    add_row("two_periodic", two_periodic_bound(lambda).bound);
    add_row("small_gain", small_gain_scalar_bound(lambda));
    {
      const AdditiveDecomposition ad = additive_uncertainty_scalar_bound(lambda);
      add_row("additive", ThetaInterval{-ad.bound, ad.bound});
    }
  }

  for (const std::string& line : lines) std::cout << line << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    for (const std::string& line : lines) out << line << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const std::string& plant_path, const std::string& controller_path,
              const std::vector<double>& interval_raw, int grid,
              const std::string& out_path) {
  const PlantFile pf = load_plant(plant_path);
  const ControllerFile cf = load_controller(controller_path);

  OffsetInterval interval;
  if (interval_raw.empty()) {
    interval.lo = -0.95 * pf.plant.h;
    interval.hi = 0.95 * pf.plant.h;
  } else {
    interval = parse_interval(interval_raw, pf.plant.h);
  }
  const SweepReport report = sweep(pf.plant, cf.controller, interval, grid);
  write_sweep_csv(out_path, report);

  json j;
  j["points"] = grid;
  j["interval"] = {round_significant(interval.lo, 12),
                   round_significant(interval.hi, 12)};
  json runs = json::array();
  for (const StableRun& run : report.runs) {
    runs.push_back({round_significant(run.lo, 12), round_significant(run.hi, 12)});
  }
  j["stable_runs"] = runs;
  j["out"] = out_path;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& plant_path, const std::string& controller_path,
                 double delta, int steps, const std::vector<double>& x0_raw,
                 const std::vector<double>& zeta0_raw, int intersample,
                 double d_amp, double n_amp, double w_amp,
                 const std::string& out_path, const std::string& fine_path) {
  const PlantFile pf = load_plant(plant_path);
  const ControllerFile cf = load_controller(controller_path);
  const Eigen::Index n = pf.plant.n();

  Vector x0 = parse_vector(x0_raw, x0_raw.size() == static_cast<std::size_t>(2 * n)
                                       ? 2 * n
                                       : n,
                           "--x0");
  if (x0.size() == 0) {
    x0 = Vector::Zero(n);
    x0(0) = 1.0;
  }
  const Vector zeta0 = zeta0_raw.empty()
                           ? Vector(Vector::Zero(cf.controller.n_states()))
                           : parse_vector(zeta0_raw, cf.controller.n_states(),
                                          "--zeta0");

  SimulationSignals signals;
  const bool disturbed = d_amp != 0.0 || n_amp != 0.0 || w_amp != 0.0;
  if (disturbed) {
    if (pf.C.size() == 0 || pf.L.size() == 0) {
      throw std::runtime_error(
          "disturbance amplitudes need an observer pair \"C\", \"L\" in the plant file");
    }
    signals.C = pf.C;
    signals.L = pf.L;
    const Eigen::Index p = pf.C.rows();
    signals.d = [n, d_amp](double t) {
      return Vector(d_amp * std::sin(t) * Vector::Ones(n));
    };
    signals.n = [p, n_amp](double t) {
      return Vector(n_amp * std::cos(t) * Vector::Ones(p));
    };
    signals.w = [n, w_amp](int k) {
      return Vector(w_amp * (k % 2 == 0 ? 1.0 : -1.0) * Vector::Ones(n));
    };
  }

  const Trajectory traj = simulate(pf.plant, cf.controller, delta, steps, x0, zeta0,
                                   signals, intersample);
  write_trajectory_csv(out_path, traj);
  if (!fine_path.empty()) write_intersample_csv(fine_path, traj);

  json j;
  j["steps"] = steps;
  j["delta"] = round_significant(delta, 12);
  j["decay_horizon"] = traj.decay_horizon;
  j["terminal_norm"] = round_significant(traj.xi.back().norm(), 12);
  j["out"] = out_path;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// figure datasets

// Largest contiguous offset range around zero on which the coprime-factor
// residual stays within the tolerance implied by the achieved norm.
double residual_sublevel_length(const ContinuousPlant& plant, double level) {
  const double cap = plant.h * (1.0 - 1e-9);
  auto reach = [&](double direction) {
    const int grid = 400;
    double prev = 0.0;
    for (int i = 1; i <= grid; ++i) {
      const double t = cap * i / grid;
      if (sigma_max(offset_residual(plant, direction * t)) > level) {
        double lo = prev, hi = t;  // ||R|| <= level at lo, > level at hi
        while (hi - lo > 1e-9 * plant.h) {
          const double mid = 0.5 * (lo + hi);
          if (sigma_max(offset_residual(plant, direction * mid)) > level) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        return lo;
      }
      prev = t;
    }
    return cap;
  };
  return reach(1.0) + reach(-1.0);
}

int cmd_figure(const std::string& which, const std::string& plant_path, double a,
               double h, int points, int q_order, int grid, int restarts,
               int iterations, std::uint64_t seed, const std::string& out_path) {
  if (out_path.empty()) throw std::runtime_error("--out is required for figure datasets");

  if (which == "fig4") {
    // Exact tolerable offset length for the first-order pole vs update
    // period, with the 2h modeling-window clip made explicit.
    if (!(a > 0.0)) throw std::runtime_error("fig4 needs --a > 0");
    std::vector<std::vector<double>> rows;
    const double h_max = 2.0;
    const double step = 5e-4;
    for (double hh = step; hh <= h_max + 1e-12; hh += step) {
      const double len = max_offset_length_lti(a, hh);
      const bool clipped = std::abs(len - 2.0 * hh) < 1e-12;
      rows.push_back({hh, len, clipped ? 1.0 : 0.0});
    }
    write_csv(out_path, {"h", "length", "clip_active"}, rows);
    std::cout << "{\"rows\": " << rows.size() << ", \"out\": \"" << out_path
              << "\"}\n";
    return kExitOk;
  }

  if (which == "fig6") {
    // Tolerable offset length vs pole location at fixed update period:
    // exact LTI bound, exact static bound, 2-periodic sufficient bound.
    if (!(h > 0.0)) throw std::runtime_error("fig6 needs --h > 0");
    std::vector<std::vector<double>> rows;
    for (int i = 1; i <= 60; ++i) {
      const double aa = 0.05 * i;
      const double lambda = std::exp(aa * h);
      const double lti = max_offset_length_lti(aa, h);
      const double stat = delta_length_of(static_bound(lambda), aa, h);
      const double two = delta_length_of(two_periodic_bound(lambda).bound, aa, h);
      rows.push_back({aa, lti, stat, two});
    }
    write_csv(out_path, {"a", "lti", "static", "two_periodic"}, rows);
    std::cout << "{\"rows\": " << rows.size() << ", \"out\": \"" << out_path
              << "\"}\n";
    return kExitOk;
  }

  if (which != "fig3") {
    throw std::runtime_error("unknown figure \"" + which + "\" (fig3|fig4|fig6)");
  }

  // fig3: tolerable offset length vs update period for the multi-input
  // reactor benchmark, comparing the coprime-factor condition against the
  // additive-envelope baseline.
  const double h_min = 0.2, h_max = 3.6;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < points; ++i) {
    const double hh = points == 1
                          ? h_min
                          : h_min + (h_max - h_min) * i / (points - 1.0);
    ContinuousPlant plant =
        plant_path.empty() ? reactor_benchmark(hh) : load_plant(plant_path).plant;
    plant.h = hh;

    // Coprime-factor condition: one norm minimization per period, then the
    // offsets tolerated at that level.
    ModelMatchConfig solid;
    solid.q_order = q_order;
    solid.grid_points = grid;
    solid.restarts = restarts;
    solid.max_iterations = iterations;
    solid.seed = seed;
    const CoprimeBundle bundle = doubly_coprime(plant);
    const SynthesisReport rep =
        model_match(bundle, boundary_zero_weight(1), 0.0, solid);
    const double condition_len =
        rep.achieved_norm > 0.0
            ? residual_sublevel_length(plant, 1.0 / rep.achieved_norm)
            : 2.0 * hh * (1.0 - 1e-9);

    // Envelope baseline: bisection on the symmetric interval length, one
    // envelope fit plus norm minimization per probe.
    ModelMatchConfig dashed;
    dashed.q_order = std::max(4, q_order * 2 / 3);
    dashed.grid_points = std::max(128, grid * 2 / 3);
    dashed.restarts = std::max(2, restarts / 2);
    dashed.max_iterations = std::max(50, iterations / 2);
    dashed.seed = seed;
    auto envelope_feasible = [&](double len) {
      const OffsetInterval iv{-len / 2.0, len / 2.0};
      return additive_uncertainty_design(plant, iv, dashed).feasible;
    };
    const double cap = 2.0 * hh * (1.0 - 1e-6);
    double feasible_len = 0.0;
    double probe = std::min(cap, 0.25 * hh);
    double infeasible_len = -1.0;
    while (probe > 1e-3 * hh) {
      if (envelope_feasible(probe)) {
        feasible_len = probe;
        break;
      }
      infeasible_len = probe;
      probe *= 0.5;
    }
    if (feasible_len > 0.0 && infeasible_len < 0.0) {
      while (feasible_len < cap) {
        const double next = std::min(cap, 2.0 * feasible_len);
        if (!envelope_feasible(next)) {
          infeasible_len = next;
          break;
        }
        feasible_len = next;
        if (next >= cap) break;
      }
    }
    double envelope_len = feasible_len;
    if (infeasible_len > feasible_len && feasible_len > 0.0) {
      double lo = feasible_len, hi = infeasible_len;
      while (hi - lo > 0.02 * lo) {
        const double mid = 0.5 * (lo + hi);
        if (envelope_feasible(mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      envelope_len = lo;
    }

    rows.push_back({hh, condition_len, envelope_len});
    std::cerr << "fig3: h=" << hh << " condition=" << condition_len
              << " envelope=" << envelope_len << "\n";
  }
  write_csv(out_path, {"h", "condition_length", "envelope_length"}, rows);
  std::cout << "{\"rows\": " << rows.size() << ", \"out\": \"" << out_path
            << "\"}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Synthesis and verification of sampled-data controllers robust to "
      "constant sensor clock offsets"};
  // Long-form help only: the default -h short flag would collide with the
  // --h period option used by several subcommands.
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  const auto add_sub = [&app](const std::string& name, const std::string& desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->set_help_flag("--help", "print help and exit");
    return cmd;
  };
  int status = kExitOk;

  // discretize
  {
    auto* cmd = add_sub(
        "discretize", "Offset-aware ZOH discretization of a plant file");
    auto plant = std::make_shared<std::string>();
    auto delta = std::make_shared<double>(0.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("plant", *plant, "plant JSON file")->required();
    cmd->add_option("--delta", *delta, "clock offset (seconds)")->required();
    cmd->add_option("--out", *out, "also write the matrices to this file");
    cmd->callback(
        [&status, plant, delta, out]() { status = cmd_discretize(*plant, *delta, *out); });
  }

  // synthesize
  {
    auto* cmd = add_sub(
        "synthesize", "Robust controller synthesis for an offset interval");
    auto plant = std::make_shared<std::string>();
    auto interval = std::make_shared<std::vector<double>>();
    auto q_order = std::make_shared<int>(20);
    auto grid = std::make_shared<int>(512);
    auto restarts = std::make_shared<int>(20);
    auto iterations = std::make_shared<int>(400);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto sweep_points = std::make_shared<int>(100);
    auto out = std::make_shared<std::string>();
    cmd->add_option("plant", *plant, "plant JSON file")->required();
    cmd->add_option("--interval", *interval, "offset interval lo,hi (seconds)")
        ->delimiter(',')
        ->required();
    cmd->add_option("--q-order", *q_order, "FIR order of the free parameter");
    cmd->add_option("--grid", *grid, "frequency grid size for the search");
    cmd->add_option("--restarts", *restarts, "optimizer restarts");
    cmd->add_option("--iterations", *iterations, "optimizer iterations per restart");
    cmd->add_option("--seed", *seed, "seed for optimizer restarts");
    cmd->add_option("--sweep-points", *sweep_points, "verification sweep grid");
    cmd->add_option("--out", *out, "controller JSON output path");
    cmd->callback([&status, plant, interval, q_order, grid, restarts, iterations,
                   seed, sweep_points, out]() {
      status = cmd_synthesize(*plant, *interval, *q_order, *grid, *restarts,
                              *iterations, *seed, *sweep_points, *out);
    });
  }

  // scalar-bounds
  {
    auto* cmd = add_sub(
        "scalar-bounds", "Tolerable-offset bounds table for the first-order plant");
    auto a = std::make_shared<double>(1.0);
    auto h = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--a", *a, "pole location (xdot = a x + u), a >= 0")->required();
    cmd->add_option("--h", *h, "ZOH update period")->required();
    cmd->add_option("--out", *out, "also write the CSV table to this file");
    cmd->callback([&status, a, h, out]() { status = cmd_scalar_bounds(*a, *h, *out); });
  }

  // sweep
  {
    auto* cmd = add_sub(
        "sweep", "Closed-loop spectral radius over an offset grid");
    auto plant = std::make_shared<std::string>();
    auto controller = std::make_shared<std::string>();
    auto interval = std::make_shared<std::vector<double>>();
    auto grid = std::make_shared<int>(201);
    auto out = std::make_shared<std::string>();
    cmd->add_option("plant", *plant, "plant JSON file")->required();
    cmd->add_option("controller", *controller, "controller JSON file")->required();
    cmd->add_option("--interval", *interval, "offset range lo,hi (default ±0.95h)")
        ->delimiter(',');
    cmd->add_option("--grid", *grid, "number of grid points");
    cmd->add_option("--out", *out, "CSV output path")->required();
    cmd->callback([&status, plant, controller, interval, grid, out]() {
      status = cmd_sweep(*plant, *controller, *interval, *grid, *out);
    });
  }

  // simulate
  {
    auto* cmd = add_sub(
        "simulate", "Sampled closed-loop trajectory at a fixed offset");
    auto plant = std::make_shared<std::string>();
    auto controller = std::make_shared<std::string>();
    auto delta = std::make_shared<double>(0.0);
    auto steps = std::make_shared<int>(40);
    auto x0 = std::make_shared<std::vector<double>>();
    auto zeta0 = std::make_shared<std::vector<double>>();
    auto intersample = std::make_shared<int>(20);
    auto d_amp = std::make_shared<double>(0.0);
    auto n_amp = std::make_shared<double>(0.0);
    auto w_amp = std::make_shared<double>(0.0);
    auto out = std::make_shared<std::string>();
    auto fine = std::make_shared<std::string>();
    cmd->add_option("plant", *plant, "plant JSON file")->required();
    cmd->add_option("controller", *controller, "controller JSON file")->required();
    cmd->add_option("--delta", *delta, "clock offset (seconds)")->required();
    cmd->add_option("--steps", *steps, "number of update periods");
    cmd->add_option("--x0", *x0, "initial plant state (n or 2n values)")
        ->delimiter(',');
    cmd->add_option("--zeta0", *zeta0, "initial controller state")->delimiter(',');
    cmd->add_option("--intersample", *intersample, "sub-points per period");
    cmd->add_option("--d-amp", *d_amp, "process disturbance amplitude");
    cmd->add_option("--n-amp", *n_amp, "measurement noise amplitude");
    cmd->add_option("--w-amp", *w_amp, "quantization noise amplitude");
    cmd->add_option("--out", *out, "trajectory CSV output path")->required();
    cmd->add_option("--fine-out", *fine, "intersample CSV output path");
    cmd->callback([&status, plant, controller, delta, steps, x0, zeta0, intersample,
                   d_amp, n_amp, w_amp, out, fine]() {
      status = cmd_simulate(*plant, *controller, *delta, *steps, *x0, *zeta0,
                            *intersample, *d_amp, *n_amp, *w_amp, *out, *fine);
    });
  }

  // figure
  {
    auto* cmd = add_sub(
        "figure", "Benchmark figure datasets (fig3 | fig4 | fig6) as CSV");
    auto which = std::make_shared<std::string>();
    auto plant = std::make_shared<std::string>();
    auto a = std::make_shared<double>(1.0);
    auto h = std::make_shared<double>(1.0);
    auto points = std::make_shared<int>(18);
    auto q_order = std::make_shared<int>(12);
    auto grid = std::make_shared<int>(384);
    auto restarts = std::make_shared<int>(6);
    auto iterations = std::make_shared<int>(300);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto out = std::make_shared<std::string>();
    cmd->add_option("name", *which, "fig3 | fig4 | fig6")->required();
    cmd->add_option("--plant", *plant, "override the built-in benchmark plant (fig3)");
    cmd->add_option("--a", *a, "pole location (fig4)");
    cmd->add_option("--h", *h, "update period (fig6)");
    cmd->add_option("--points", *points, "number of period samples (fig3)");
    cmd->add_option("--q-order", *q_order, "FIR order (fig3)");
    cmd->add_option("--grid", *grid, "frequency grid (fig3)");
    cmd->add_option("--restarts", *restarts, "optimizer restarts (fig3)");
    cmd->add_option("--iterations", *iterations, "optimizer iterations (fig3)");
    cmd->add_option("--seed", *seed, "optimizer seed (fig3)");
    cmd->add_option("--out", *out, "CSV output path")->required();
    cmd->callback([&status, which, plant, a, h, points, q_order, grid, restarts,
                   iterations, seed, out]() {
      status = cmd_figure(*which, *plant, *a, *h, *points, *q_order, *grid,
                          *restarts, *iterations, *seed, *out);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return status;
}
