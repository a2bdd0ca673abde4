// End-to-end acceptance checks for the offset-robust control toolkit.  Each
// criterion prints exactly one PASS/FAIL line; the process exits nonzero if
// any criterion fails.  argv[1] must be the path of the command-line tool.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "offsetctrl/analysis.hpp"
#include "offsetctrl/factorization.hpp"
#include "offsetctrl/io.hpp"
#include "offsetctrl/scalar_exact.hpp"
#include "offsetctrl/synthesis.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace offsetctrl;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_scratch;

// Accumulates failure details for one criterion; empty means pass.
struct Checker {
  std::vector<std::string> failures;
  std::string detail;  // shown on PASS

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  RunResult result;
  const std::string out_path = (g_scratch / "stdout.txt").string();
  const std::string err_path = (g_scratch / "stderr.txt").string();
  const std::string cmd = "\"" + g_cli + "\" " + args + " > \"" + out_path +
                          "\" 2> \"" + err_path + "\"";
  const int status = std::system(cmd.c_str());
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  return result;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(fields);
  }
  return rows;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

int run_criterion(int number, double time_limit_s,
                  const std::function<void(Checker&)>& body) {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& err) {
    check.failures.push_back(std::string("exception: ") + err.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed > time_limit_s) {
    check.failures.push_back("runtime " + fmt(elapsed) + " s exceeds limit " +
                             fmt(time_limit_s) + " s");
  }
  std::ostringstream line;
  line << "criterion " << number << ": ";
  if (check.failures.empty()) {
    line << "PASS";
    if (!check.detail.empty()) line << " - " << check.detail;
  } else {
    line << "FAIL - " << check.failures.front();
    if (check.failures.size() > 1) {
      line << " (+" << check.failures.size() - 1 << " more)";
    }
  }
  line << " (" << fmt(elapsed) << " s)";
  std::cout << line.str() << std::endl;
  return check.failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Criterion bodies.

// Exact first-order bounds through the command-line table.
void criterion_1(Checker& check) {
  const std::string out = (g_scratch / "bounds.csv").string();
  const RunResult r = run_cli("scalar-bounds --a 1.0 --h 1.0 --out \"" + out + "\"");
  check.require(r.exit_code == 0, "scalar-bounds exited " + fmt(r.exit_code));
  const auto rows = read_csv(out);
  double lti = 0.0, stat = 0.0;
  bool saw_lti = false, saw_static = false;
  for (const auto& row : rows) {
    if (row.size() < 6) continue;
    if (row[0] == "lti") {
      lti = std::stod(row[5]);
      saw_lti = true;
    }
    if (row[0] == "static") {
      stat = std::stod(row[5]);
      saw_static = true;
    }
  }
  check.require(saw_lti && saw_static, "bounds table missing lti/static rows");
  check.require(std::abs(lti - 1.5438) < 1e-3,
                "lti length " + fmt(lti) + " != 1.5438 +- 1e-3");
  check.require(std::abs(stat - 0.7719) < 1e-3,
                "static length " + fmt(stat) + " != 0.7719 +- 1e-3");
  check.detail = "lti " + fmt(lti) + ", static " + fmt(stat);
}

// Clip-to-formula crossover of the length-versus-period dataset.
void criterion_2(Checker& check) {
  const std::string out = (g_scratch / "fig4.csv").string();
  const RunResult r = run_cli("figure fig4 --out \"" + out + "\"");
  check.require(r.exit_code == 0, "figure fig4 exited " + fmt(r.exit_code));
  const auto rows = read_csv(out);
  check.require(rows.size() > 100, "fig4 dataset too short");
  double crossover = 0.0;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() >= 3 && rows[i][2] == "1") crossover = std::stod(rows[i][0]);
  }
  const double want = std::log(1.0 + std::sqrt(2.0));
  check.require(std::abs(crossover - want) <= 1e-3,
                "crossover " + fmt(crossover) + " != " + fmt(want) + " +- 1e-3");
  check.detail = "crossover " + fmt(crossover);
}

// Interpolation certificate against the closed-form interval test.
void criterion_3(Checker& check) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int disagreements = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double lambda = 10.0 - 9.0 * unif(rng);  // (1, 10]
    const double hi = (lambda - 1.0) * (1e-4 + 0.9997 * unif(rng));
    const double lo = (1.0 / lambda - 1.0) * (1e-4 + 0.9997 * unif(rng));
    if (pick_feasible(lambda, lo, hi) != lti_exact_condition(lambda, lo, hi)) {
      ++disagreements;
    }
  }
  check.require(disagreements == 0,
                fmt(disagreements) + " disagreements between the certificate "
                "and the closed form");
  check.detail = "1000 random intervals, 0 disagreements";
}

// Constructive interval controller on randomized feasible problems.
void criterion_4(Checker& check) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int built = 0;
  double worst_radius = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = 0.2 + 1.8 * unif(rng);
    const double h = 1.0;
    const double lambda = std::exp(a * h);
    const double lmax = max_offset_length_lti(a, h);
    // Keep at least a 1% margin from the feasibility boundary.
    const double length = (0.05 + 0.94 * unif(rng)) * 0.99 * lmax;
    const double lo_min = std::max(-0.999 * h, -length * (1.0 - 1e-3));
    const double lo_max = std::min(-1e-3 * length, 0.999 * h - length);
    if (!(lo_min < lo_max)) {
      check.require(false, "empty placement range (internal)");
      return;
    }
    const double dlo = lo_min + (lo_max - lo_min) * unif(rng);
    const double dhi = dlo + length;
    const double tlo = theta_of_delta(dhi, a);
    const double thi = theta_of_delta(dlo, a);
    const ScalarController ctrl = scalar_controller(lambda, tlo, thi);
    worst_radius = std::max(worst_radius, ctrl.max_sweep_radius);
    check.require(ctrl.max_sweep_radius < 1.0 - 1e-9,
                  "sweep radius " + fmt(ctrl.max_sweep_radius) + " at a=" +
                      fmt(a) + " interval [" + fmt(dlo) + "," + fmt(dhi) + "]");
    ++built;
    if (!check.failures.empty()) return;
  }
  check.detail = fmt(built) + " controllers, worst sweep radius " +
                 fmt(worst_radius);
}

// Static-gain inequality test versus the eigenvalue oracle, plus recovery of
// the symmetric bound as the gain approaches one.
void criterion_5(Checker& check) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int compared = 0, mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double lambda = 1.05 + 9.0 * unif(rng);
    const double theta = -0.98 + 1.96 * unif(rng);
    const double gain = -1.0 + 4.0 * unif(rng);
    const double radius =
        spectral_radius(scalar_static_closed_loop(lambda, theta, gain));
    if (std::abs(radius - 1.0) < 1e-6) continue;
    ++compared;
    if (jury_static(lambda, theta, gain) != (radius < 1.0)) ++mismatches;
  }
  check.require(mismatches == 0, fmt(mismatches) + " oracle mismatches");

  // As K -> 1+ the stable theta range must open up to (-1/lambda, 1/lambda).
  double worst_gap = 0.0;
  for (double lambda : {std::exp(1.0), 2.0, 6.0}) {
    const double gain = 1.0 + 1e-6;
    double lo = 0.0, hi = 2.0 / lambda;  // jury holds at 0, fails at 2/lambda
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (jury_static(lambda, mid, gain) ? lo : hi) = mid;
    }
    worst_gap = std::max(worst_gap, std::abs(lo - 1.0 / lambda));
    double nlo = -2.0 / lambda, nhi = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (nlo + nhi);
      (jury_static(lambda, mid, gain) ? nhi : nlo) = mid;
    }
    worst_gap = std::max(worst_gap, std::abs(nhi + 1.0 / lambda));
  }
  check.require(worst_gap <= 1e-4,
                "K->1 endpoint gap " + fmt(worst_gap) + " exceeds 1e-4");
  check.detail = fmt(compared) + " samples compared, endpoint gap " +
                 fmt(worst_gap);
}

// Ordering of the static, alternating-gain and hard bounds, with the shipped
// alternating design certified by its lifted two-step matrix.
void criterion_6(Checker& check) {
  int swept = 0;
  for (int i = 0; i < 200; ++i) {
    const double lambda = 1.01 + (100.0 - 1.01) * (i + 1) / 200.0;
    const TwoPeriodicDesign design = two_periodic_bound(lambda);
    const double hard = 2.0 * lambda / (lambda * lambda + 1.0);
    check.require(1.0 / lambda < design.bound.hi,
                  "static bound not improved at lambda=" + fmt(lambda));
    check.require(design.bound.hi < hard,
                  "alternating bound exceeds the hard bound at lambda=" +
                      fmt(lambda));
    if (!check.failures.empty()) return;
    const double radius = design.certified.hi;
    for (int k = 0; k <= 80; ++k) {
      const double theta = -0.9999 * radius + 2.0 * 0.9999 * radius * k / 80.0;
      const Matrix lifted =
          two_periodic_lifted(lambda, theta, design.K1, design.K2);
      if (spectral_radius(lifted) >= 1.0) {
        check.require(false, "lifted sweep unstable at lambda=" + fmt(lambda) +
                                 " theta=" + fmt(theta));
        return;
      }
      ++swept;
    }
  }
  check.detail = "200 lambda points, " + fmt(swept) + " lifted sweeps stable";
}

// Bezout identity residual of the factorization on the benchmark plant.
void criterion_7(Checker& check) {
  const auto plant = testutil::reactor_plant();
  const CoprimeBundle bundle = doubly_coprime(plant);
  const double residual = bezout_residual(bundle, 256);
  check.require(residual < 1e-8, "residual " + fmt(residual) + " >= 1e-8");
  check.detail = "residual " + fmt(residual);
}

// Offset perturbation decomposes through the left denominator and R(delta).
void criterion_8(Checker& check) {
  const auto plant = testutil::reactor_plant();
  const CoprimeBundle bundle = doubly_coprime(plant);
  const DiscreteSystem nominal = discretize(plant, 0.0);
  const DiscreteSystem dtilde_inv = inverse(bundle.Dtilde);
  double worst = 0.0;
  for (double delta : {-0.3, 0.02, 0.5}) {
    const DiscreteSystem shifted = discretize(plant, delta);
    const Matrix r = offset_residual(plant, delta);
    for (int k = 0; k < 128; ++k) {
      const double w = 2.0 * M_PI * k / 128.0;
      const Complex z(std::cos(w), std::sin(w));
      const ComplexMatrix gap = evaluate(shifted, z) - evaluate(nominal, z) -
                                z * (z - Complex(1.0)) *
                                    (evaluate(dtilde_inv, z) * r.cast<Complex>());
      worst = std::max(worst, gap.cwiseAbs().maxCoeff());
    }
  }
  check.require(worst < 1e-8, "decomposition residual " + fmt(worst) + " >= 1e-8");
  check.detail = "max residual " + fmt(worst) + " over 3 offsets x 128 points";
}

// Identity-weight regulator baseline reproduces its known offset interval.
void criterion_9(Checker& check) {
  const auto plant = testutil::reactor_plant();
  const LqrBaseline baseline = lqr_baseline(plant);
  const OffsetInterval iv = interval_search(plant, baseline.controller, 1e-6);
  check.require(std::abs(iv.lo - (-0.029)) <= 0.003,
                "lower endpoint " + fmt(iv.lo) + " != -0.029 +- 0.003");
  check.require(std::abs(iv.hi - 0.062) <= 0.003,
                "upper endpoint " + fmt(iv.hi) + " != 0.062 +- 0.003");
  check.detail = "interval [" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]";
}

// Multi-input synthesis end to end: feasibility, sweep soundness, order
// monotonicity, and the two feasible-length curves.
void criterion_10(Checker& check) {
  const auto plant = testutil::reactor_plant();
  const std::string plant_path = (g_scratch / "reactor.json").string();
  {
    PlantFile pf;
    pf.plant = plant;
    pf.label = "four-state stirred-tank reactor benchmark";
    save_plant(plant_path, pf);
  }

  // (a) command-line synthesis must report a feasible design.
  const std::string ctrl_path = (g_scratch / "reactor_controller.json").string();
  const RunResult syn =
      run_cli("synthesize \"" + plant_path +
              "\" --interval=-0.02,0.02 --sweep-points 100 --out \"" +
              ctrl_path + "\"");
  check.require(syn.exit_code == 0, "synthesize exited " + fmt(syn.exit_code));
  check.require(syn.out.find("\"feasible\": true") != std::string::npos,
                "synthesize report does not say feasible");
  check.require(syn.out.find("\"sweep_verified\": true") != std::string::npos,
                "synthesize report does not say sweep-verified");
  if (!check.failures.empty()) return;

  // (b) the shipped controller survives an independent 100-point sweep.
  const ControllerFile cf = load_controller(ctrl_path);
  for (int k = 0; k <= 99; ++k) {
    const double delta = -0.02 + 0.04 * k / 99.0;
    if (spectral_radius(closed_loop_matrix(plant, delta, cf.controller)) >=
        1.0 - 1e-9) {
      check.require(false, "loaded controller unstable at delta=" + fmt(delta));
      return;
    }
  }

  // (c) warm-started searches cannot get worse as the order grows.
  const CoprimeBundle bundle = doubly_coprime(plant);
  OffsetInterval iv;
  iv.lo = -0.02;
  iv.hi = 0.02;
  const double gamma = gamma_level(plant, iv).gamma;
  ModelMatchConfig config;
  config.grid_points = 512;
  config.restarts = 4;
  config.max_iterations = 200;
  config.seed = 1;
  std::vector<double> norms, grid_optima;
  QParameter warm;
  for (int order : {4, 8, 12}) {
    config.q_order = order;
    config.initial = warm;
    if (!config.initial.coeffs.empty()) {
      config.initial.coeffs.resize(order + 1, Matrix::Zero(2, 4));
    }
    const SynthesisReport report =
        model_match(bundle, boundary_zero_weight(1), gamma, config);
    norms.push_back(report.achieved_norm);
    grid_optima.push_back(report.grid_optimum);
    warm = report.q;
  }
  for (size_t i = 1; i < norms.size(); ++i) {
    // The warm start makes the grid optimum monotone by construction; the
    // certified norm inherits that up to the grid-versus-refined gap, so it
    // gets a small relative allowance.
    check.require(grid_optima[i] <= grid_optima[i - 1] * (1.0 + 1e-12),
                  "grid optimum increased with order " + fmt(grid_optima[i - 1]) +
                      " -> " + fmt(grid_optima[i]));
    check.require(norms[i] <= norms[i - 1] * (1.0 + 1e-4),
                  "norm increased from order step " + fmt(norms[i - 1]) + " -> " +
                      fmt(norms[i]));
  }

  // (d) feasible-length curves: the interval-condition curve dominates the
  // envelope baseline at every computed period.
  const std::string fig3_path = (g_scratch / "fig3.csv").string();
  const RunResult fig = run_cli("figure fig3 --out \"" + fig3_path + "\"");
  check.require(fig.exit_code == 0, "figure fig3 exited " + fmt(fig.exit_code));
  const auto rows = read_csv(fig3_path);
  check.require(rows.size() == 19, "fig3 dataset has " + fmt(rows.size() - 1.0) +
                                       " rows, expected 18");
  int dominated = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 3) continue;
    const double condition_len = std::stod(rows[i][1]);
    const double envelope_len = std::stod(rows[i][2]);
    if (condition_len >= envelope_len - 1e-9) ++dominated;
    check.require(condition_len >= envelope_len - 1e-9,
                  "envelope length exceeds condition length at h=" + rows[i][0]);
  }
  check.detail = "feasible + sweep-stable; norms " + fmt(norms[0]) + " >= " +
                 fmt(norms[1]) + " >= " + fmt(norms[2]) + "; " + fmt(dominated) +
                 "/18 periods dominated";
}

// First-order magnitude envelope: strict coverage and tightness.
void criterion_11(Checker& check) {
  const auto plant = testutil::reactor_plant();
  OffsetInterval iv;
  iv.lo = -0.02;
  iv.hi = 0.02;
  const int omega_points = 512, delta_points = 40;
  const EnvelopeFit fit = fit_envelope(plant, iv, omega_points, delta_points);
  check.require(fit.feasible, "envelope fit infeasible");

  const DiscreteSystem nominal = discretize(plant, 0.0);
  std::vector<double> data(omega_points, 0.0);
  for (int j = 0; j < delta_points; ++j) {
    const double delta = iv.lo + (iv.hi - iv.lo) * j / (delta_points - 1.0);
    const DiscreteSystem shifted = discretize(plant, delta);
    for (int k = 0; k < omega_points; ++k) {
      const double w = 2.0 * M_PI * k / omega_points;
      const Complex z(std::cos(w), std::sin(w));
      data[k] = std::max(
          data[k], sigma_max(ComplexMatrix(evaluate(shifted, z) - evaluate(nominal, z))));
    }
  }
  const double peak = *std::max_element(data.begin(), data.end());
  int strict = 0, considered = 0;
  for (int k = 0; k < omega_points; ++k) {
    if (data[k] <= 1e-10 * peak) continue;  // both sides vanish at z = 1
    ++considered;
    const Complex zc(std::cos(2.0 * M_PI * k / omega_points),
                     std::sin(2.0 * M_PI * k / omega_points));
    const double envelope =
        fit.gain * std::abs(zc - 1.0) / std::abs(zc - fit.pole);
    if (envelope > data[k]) ++strict;
  }
  check.require(strict == considered,
                fmt(considered - strict) + " grid points violate the strict "
                "envelope inequality");
  check.require(fit.gap <= 0.017,
                "gap " + fmt(fit.gap) + " exceeds twice the reference 8.5e-3");
  check.detail = "strict at " + fmt(strict) + "/" + fmt(considered) +
                 " points, gap " + fmt(fit.gap);
}

// Sampled map against the high-resolution hybrid-loop integration.
void criterion_12(Checker& check) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    ContinuousPlant plant;
    const Eigen::Index n = 1 + trial % 4;
    plant.A = testutil::random_matrix(rng, n, n);
    plant.B = testutil::random_matrix(rng, n, 1 + trial % 2);
    plant.h = 0.3 + 0.9 * unif(rng);
    for (int j = 0; j < 5; ++j) {
      const double delta = (-0.9 + 1.8 * unif(rng)) * plant.h;
      const double lo = std::max(0.0, -delta);
      const double hi = plant.h - std::max(0.0, delta);
      const double sigma = lo + unif(rng) * (hi - lo) * 0.999;

      const DiscreteSystem sys = discretize(plant, delta);
      Vector xi(2 * n);
      for (Eigen::Index i = 0; i < 2 * n; ++i) xi(i) = dist(rng);
      Vector u(plant.m());
      for (Eigen::Index i = 0; i < plant.m(); ++i) u(i) = dist(rng);
      const Vector x0 = xi.head(n) + xi.tail(n);
      const auto step =
          oracles::hybrid_step(plant.A, plant.B, plant.h, delta, sigma, x0, u);
      Vector xi_oracle(2 * n);
      xi_oracle.head(n) = step.x_next - step.xhat_next;
      xi_oracle.tail(n) = step.xhat_next;
      const Vector xi_formula = sys.F * xi + sys.G * u;
      const double scale = std::max(1.0, xi_oracle.cwiseAbs().maxCoeff());
      worst = std::max(worst,
                       (xi_formula - xi_oracle).cwiseAbs().maxCoeff() / scale);
    }
  }
  check.require(worst <= 1e-8, "worst relative gap " + fmt(worst) + " > 1e-8");
  check.detail = "10 plants x 5 offsets, worst relative gap " + fmt(worst);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli-binary>" << std::endl;
    return 2;
  }
  g_cli = argv[1];
  if (!fs::exists(g_cli)) {
    std::cerr << "cli binary not found: " << g_cli << std::endl;
    return 2;
  }
  g_scratch = fs::temp_directory_path() /
              ("offsetctrl-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(g_scratch);

  int failures = 0;
  failures += run_criterion(1, 1.0, criterion_1);
  failures += run_criterion(2, 1.0, criterion_2);
  failures += run_criterion(3, 5.0, criterion_3);
  failures += run_criterion(4, 30.0, criterion_4);
  failures += run_criterion(5, 30.0, criterion_5);
  failures += run_criterion(6, 10.0, criterion_6);
  failures += run_criterion(7, 2.0, criterion_7);
  failures += run_criterion(8, 5.0, criterion_8);
  failures += run_criterion(9, 10.0, criterion_9);
  failures += run_criterion(10, 600.0, criterion_10);
  failures += run_criterion(11, 60.0, criterion_11);
  failures += run_criterion(12, 60.0, criterion_12);

  fs::remove_all(g_scratch);
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
