#include "offsetctrl/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "offsetctrl/kernels.hpp"
#include "offsetctrl/polynomial.hpp"

namespace offsetctrl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

ComplexMatrix eval_fir(const std::vector<Matrix>& coeffs, const Complex& z) {
  ComplexMatrix acc = coeffs.back().cast<Complex>();
  for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k) {
    acc = (acc * z + coeffs[static_cast<std::size_t>(k)].cast<Complex>()).eval();
  }
  return acc;
}

DiscreteSystem negate_output(const DiscreteSystem& sys) {
  DiscreteSystem out = sys;
  out.H = -out.H;
  out.D = -out.D;
  return out;
}

// Block-diagonal stack of `copies` instances of a SISO weight, so the weight
// can multiply a matrix-valued transfer from the left.
DiscreteSystem diag_copies(const DiscreteSystem& w, int copies) {
  const int nw = w.n_states();
  DiscreteSystem out;
  out.F = Matrix::Zero(nw * copies, nw * copies);
  out.G = Matrix::Zero(nw * copies, copies);
  out.H = Matrix::Zero(copies, nw * copies);
  out.D = w.D(0, 0) * Matrix::Identity(copies, copies);
  for (int i = 0; i < copies; ++i) {
    out.F.block(i * nw, i * nw, nw, nw) = w.F;
    out.G.block(i * nw, i, nw, 1) = w.G;
    out.H.block(i, i * nw, 1, nw) = w.H;
  }
  return out;
}

// w(z) * T(z) for a SISO weight w and a p x q transfer T.
DiscreteSystem scalar_times(const DiscreteSystem& w, const DiscreteSystem& T) {
  if (w.n_in() != 1 || w.n_out() != 1) {
    throw std::invalid_argument("scalar weight must be single-input single-output");
  }
  return series(T, diag_copies(w, T.n_out()));
}

// Frequency samples of the three fixed blocks of the affine objective
// sigma_max(A(z) + B(z) Q(z) C(z)).
struct ObjectiveGrid {
  std::vector<Complex> z;
  std::vector<ComplexMatrix> A, B, C;
};

ObjectiveGrid sample_grid(const DiscreteSystem& Ta, const DiscreteSystem& Tb,
                          const DiscreteSystem& Tc, int points) {
  ObjectiveGrid g;
  g.z.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double w = 2.0 * kPi * k / points;
    g.z[static_cast<std::size_t>(k)] = Complex(std::cos(w), std::sin(w));
  }
  auto at = [&](const DiscreteSystem& sys) {
    return kernels::grid_map<ComplexMatrix>(
        static_cast<std::size_t>(points),
        [&](std::size_t k) { return evaluate(sys, g.z[k]); });
  };
  g.A = at(Ta);
  g.B = at(Tb);
  g.C = at(Tc);
  return g;
}

double objective_at(const ObjectiveGrid& g, const std::vector<Matrix>& q,
                    std::size_t k) {
  const ComplexMatrix qz = eval_fir(q, g.z[k]);
  return sigma_max(ComplexMatrix(g.A[k] + g.B[k] * qz * g.C[k]));
}

struct MinimizeResult {
  std::vector<Matrix> q;
  double value = kInf;
};

// Subgradient descent with Polyak-type steps on the (convex) gridded
// objective, restarted from several seeds; the best coefficient set wins,
// ties broken by restart order.
MinimizeResult minimize_affine(const ObjectiveGrid& grid, int q_rows, int q_cols,
                               const ModelMatchConfig& config, double early_target) {
  const std::size_t n_coeff = static_cast<std::size_t>(config.q_order) + 1;
  const std::size_t points = grid.z.size();

  MinimizeResult best;
  best.q.assign(n_coeff, Matrix::Zero(q_rows, q_cols));
  best.value = kInf;

  // Coefficient scale for random restarts, set by the fixed blocks so the
  // perturbations are neither invisible nor absurd.
  double scale = 0.1;
  {
    const double a0 = sigma_max(grid.A[0]);
    const double b0 = sigma_max(grid.B[0]);
    const double c0 = sigma_max(grid.C[0]);
    if (b0 > 1e-12 && c0 > 1e-12) scale = std::max(1e-3, 0.3 * a0 / (b0 * c0));
  }

  const bool warm = !config.initial.coeffs.empty();

  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    std::vector<Matrix> q(n_coeff, Matrix::Zero(q_rows, q_cols));
    if (restart == 0 && warm) {
      for (std::size_t i = 0; i < n_coeff && i < config.initial.coeffs.size(); ++i) {
        const Matrix& ci = config.initial.coeffs[i];
        if (ci.rows() != q_rows || ci.cols() != q_cols) {
          throw std::invalid_argument("warm-start coefficients have wrong shape");
        }
        q[i] = ci;
      }
    } else if (restart >= 2 || (restart == 1 && warm)) {
      std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(restart));
      std::normal_distribution<double> dist(0.0, scale);
      for (auto& c : q) {
        c = Matrix::NullaryExpr(q_rows, q_cols, [&]() { return dist(rng); });
      }
    }
    // restart 0 without warm start and restart 1 with one both use Q = 0.

    auto eval_all = [&](const std::vector<Matrix>& qq) {
      return kernels::grid_max(points,
                               [&](std::size_t k) { return objective_at(grid, qq, k); });
    };

    kernels::GridMax cur = eval_all(q);
    std::vector<Matrix> local_best_q = q;
    double local_best = cur.value;

    double level = std::max(0.25 * cur.value, 1e-3);
    int stall = 0;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
      // Subgradient of sigma_max at the active frequency: with the singular
      // pair (u, v) of M = A + B Q C, the derivative w.r.t. the i-th FIR
      // coefficient entry (a, b) is Re(z^i * conj(B^H u)_a * (C v)_b).
      const std::size_t k = cur.index;
      const ComplexMatrix qz = eval_fir(q, grid.z[k]);
      const ComplexMatrix M = grid.A[k] + grid.B[k] * qz * grid.C[k];
      Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXcd u = svd.matrixU().col(0);
      const Eigen::VectorXcd v = svd.matrixV().col(0);
      const Eigen::VectorXcd bu = grid.B[k].adjoint() * u;
      const Eigen::VectorXcd cv = grid.C[k] * v;

      std::vector<Matrix> grad(n_coeff);
      double grad_sq = 0.0;
      Complex zpow = 1.0;
      for (std::size_t i = 0; i < n_coeff; ++i) {
        grad[i] = (zpow * bu.conjugate() * cv.transpose()).real();
        grad_sq += grad[i].squaredNorm();
        zpow *= grid.z[k];
      }
      if (grad_sq < 1e-300) break;

      const double step = (cur.value - (local_best - level)) / grad_sq;
      for (std::size_t i = 0; i < n_coeff; ++i) q[i] -= step * grad[i];

      cur = eval_all(q);
      if (cur.value < local_best - 1e-12 * std::max(1.0, local_best)) {
        local_best = cur.value;
        local_best_q = q;
        stall = 0;
      } else if (++stall >= 20) {
        level *= 0.5;
        stall = 0;
        if (level < 1e-7 * std::max(1.0, local_best)) break;
      }
    }

    if (local_best < best.value) {
      best.value = local_best;
      best.q = local_best_q;
    }
    if (best.value < early_target * (1.0 - 1e-4)) break;
  }
  return best;
}

// Composed system W-form:  Ta + Tb * Qsys * Tc, for post-hoc certification.
DiscreteSystem compose_objective(const DiscreteSystem& Ta, const DiscreteSystem& Tb,
                                 const DiscreteSystem& Tc, const DiscreteSystem& Qsys) {
  const DiscreteSystem qc = series(Tc, Qsys);  // Q * Tc
  const DiscreteSystem bqc = series(qc, Tb);   // Tb * Q * Tc
  return add(Ta, bqc);
}

Matrix interconnect(const Matrix& F, const Matrix& G, const Matrix& H,
                    const DiscreteSystem& ctrl) {
  const int ns = static_cast<int>(F.rows());
  const int nc = ctrl.n_states();
  Matrix M = Matrix::Zero(ns + nc, ns + nc);
  M.topLeftCorner(ns, ns) = F - G * ctrl.D * H;
  if (nc > 0) {
    M.topRightCorner(ns, nc) = -G * ctrl.H;
    M.bottomLeftCorner(nc, ns) = ctrl.G * H;
    M.bottomRightCorner(nc, nc) = ctrl.F;
  }
  return M;
}

}  // namespace

ComplexMatrix QParameter::eval(const Complex& z) const {
  if (coeffs.empty()) {
    throw std::invalid_argument("empty FIR parameter");
  }
  return eval_fir(coeffs, z);
}

DiscreteSystem QParameter::to_system() const { return fir_system(coeffs); }

QParameter QParameter::zero(int rows, int cols, int order) {
  QParameter q;
  q.coeffs.assign(static_cast<std::size_t>(order) + 1, Matrix::Zero(rows, cols));
  return q;
}

SynthesisReport model_match(const CoprimeBundle& bundle, const DiscreteSystem& W,
                            double gamma, const ModelMatchConfig& config) {
  if (config.q_order < 0) throw std::invalid_argument("FIR order must be nonnegative");
  if (config.grid_points < 128) {
    throw std::invalid_argument("frequency grid too coarse (need at least 128 points)");
  }
  if (!is_stable(W)) throw std::invalid_argument("weight must be stable");

  const int m = bundle.D.n_in();
  const int n = bundle.Xtilde.n_in();

  const DiscreteSystem Ta = scalar_times(W, bundle.Xtilde);
  const DiscreteSystem Tb_pos = scalar_times(W, bundle.D);
  const DiscreteSystem Tc = DiscreteSystem::identity(n);

  // Search runs on the lower-LFT form, W*(Xtilde0 - D0*Qhat); the public Q
  // is its negation so the reported parameter satisfies the +Q condition.
  ModelMatchConfig search = config;
  if (!search.initial.coeffs.empty()) {
    for (Matrix& c : search.initial.coeffs) c = -c;
  }
  const ObjectiveGrid grid = sample_grid(Ta, negate_output(Tb_pos), Tc,
                                         config.grid_points);
  const MinimizeResult opt = minimize_affine(grid, m, n, search, gamma);

  SynthesisReport report;
  report.q.coeffs = opt.q;
  for (Matrix& c : report.q.coeffs) c = -c;
  report.grid_optimum = opt.value;
  report.gamma = gamma;
  report.q_order = config.q_order;
  report.seed = config.seed;

  const DiscreteSystem matched =
      compose_objective(Ta, Tb_pos, Tc, report.q.to_system());
  report.achieved_norm =
      hinf_norm(matched, 1e-6, std::max(512, config.grid_points));
  report.feasible = report.achieved_norm < gamma;

  std::string note;
  report.controller = assemble_controller(bundle, report.q, &note);
  report.notes = note;
  return report;
}

DiscreteSystem assemble_controller(const CoprimeBundle& bundle, const QParameter& q,
                                   std::string* sign_note) {
  const DiscreteSystem Qsys = q.to_system();
  if (Qsys.n_out() != bundle.D.n_in() || Qsys.n_in() != bundle.N.n_out()) {
    throw std::invalid_argument("free parameter has wrong dimensions");
  }

  const DiscreteSystem S1 = add(bundle.Xtilde, series(Qsys, bundle.D));
  const DiscreteSystem S2 = subtract(bundle.Ytilde, series(Qsys, bundle.N));
  const DiscreteSystem C = series(inverse(S2), S1);

  // Fix the loop sign by nominal stability: the parameterization guarantees
  // the Delta = 0 loop is stable for every stable Q, so exactly one wiring
  // can be right and failure of both is an interconnection bug.
  const DiscreteSystem& base = bundle.base.sys;
  const double rho_neg =
      spectral_radius(interconnect(base.F, base.G, base.H, C));
  if (rho_neg < 1.0 - 1e-9) {
    if (sign_note != nullptr) *sign_note = "loop sign: u = -C y (nominal radius " +
                                           std::to_string(rho_neg) + ")";
    return C;
  }
  const DiscreteSystem Cneg = negate_output(C);
  const double rho_pos =
      spectral_radius(interconnect(base.F, base.G, base.H, Cneg));
  if (rho_pos < 1.0 - 1e-9) {
    if (sign_note != nullptr) {
      *sign_note = "loop sign: flipped controller output (nominal radius " +
                   std::to_string(rho_pos) + ")";
    }
    return Cneg;
  }
  std::ostringstream msg;
  msg << "assemble_controller: nominal closed loop unstable with both signs "
         "(radii "
      << rho_neg << ", " << rho_pos << ")";
  throw std::runtime_error(msg.str());
}

Matrix closed_loop_matrix(const ContinuousPlant& plant, double delta,
                          const DiscreteSystem& controller) {
  const DiscreteSystem sys = discretize(plant, delta);
  if (controller.n_in() != sys.n_out() || controller.n_out() != sys.n_in()) {
    throw std::invalid_argument("controller dimensions do not match the plant");
  }
  return interconnect(sys.F, sys.G, sys.H, controller);
}

DiscreteSystem closed_loop(const ContinuousPlant& plant, double delta,
                           const DiscreteSystem& controller) {
  const Matrix M = closed_loop_matrix(plant, delta, controller);
  DiscreteSystem out;
  out.F = M;
  out.G = Matrix::Zero(M.rows(), 0);
  out.H = Matrix::Zero(0, M.rows());
  out.D = Matrix::Zero(0, 0);
  return out;
}

EnvelopeFit fit_envelope(const ContinuousPlant& plant, const OffsetInterval& interval,
                         int omega_points, int delta_points) {
  plant.validate();
  interval.validate(plant.h);
  if (omega_points < 16 || delta_points < 2) {
    throw std::invalid_argument("envelope fit grids too coarse");
  }

  EnvelopeFit fit;
  if (interval.lo == 0.0 && interval.hi == 0.0) {
    fit.feasible = true;
    fit.gain = 0.0;
    fit.pole = 0.5;
    fit.gap = 0.0;
    fit.r = DiscreteSystem::constant(Matrix::Zero(1, 1));
    fit.notes = "degenerate offset interval; zero envelope";
    return fit;
  }

  const std::size_t K = static_cast<std::size_t>(omega_points);
  std::vector<Complex> zs(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(K);
    zs[k] = Complex(std::cos(w), std::sin(w));
  }

  const DiscreteSystem nominal = discretize(plant, 0.0);
  const std::vector<ComplexMatrix> p0 = kernels::grid_map<ComplexMatrix>(
      K, [&](std::size_t k) { return evaluate(nominal, zs[k]); });

  // Upper data curve: worst perturbation magnitude over the offset samples.
  std::vector<double> upper(K, 0.0);
  for (int j = 0; j < delta_points; ++j) {
    const double delta =
        interval.lo + (interval.hi - interval.lo) * j / (delta_points - 1.0);
    const DiscreteSystem pd = discretize(plant, delta);
    const std::vector<double> mags = kernels::grid_map<double>(K, [&](std::size_t k) {
      return sigma_max(ComplexMatrix(evaluate(pd, zs[k]) - p0[k]));
    });
    for (std::size_t k = 0; k < K; ++k) upper[k] = std::max(upper[k], mags[k]);
  }

  const double data_peak = *std::max_element(upper.begin(), upper.end());
  if (data_peak == 0.0) {
    fit.feasible = true;
    fit.gain = 0.0;
    fit.pole = 0.5;
    fit.gap = 0.0;
    fit.r = DiscreteSystem::constant(Matrix::Zero(1, 1));
    fit.notes = "perturbation identically zero on the grid; zero envelope";
    return fit;
  }

  // For pole p, the smallest admissible gain makes |r| = k|z-1|/|z-p| clear
  // the data at every grid point; z = 1 is skipped (both sides vanish there).
  auto gain_for = [&](double p) {
    double k_req = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double dz1 = std::abs(zs[k] - Complex(1.0, 0.0));
      if (dz1 < 1e-12) continue;
      k_req = std::max(k_req, upper[k] * std::abs(zs[k] - Complex(p, 0.0)) / dz1);
    }
    return (1.0 + 1e-8) * k_req;
  };
  auto gap_for = [&](double p) {
    const double kk = gain_for(p);
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double mag =
          kk * std::abs(zs[k] - Complex(1.0, 0.0)) / std::abs(zs[k] - Complex(p, 0.0));
      acc += mag - upper[k];
    }
    return acc / static_cast<double>(K);
  };

  double best_p = 0.5;
  double best_gap = kInf;
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    const double gap = gap_for(p);
    if (gap < best_gap) {
      best_gap = gap;
      best_p = p;
    }
  }
  const double lo = std::max(1e-4, best_p - 0.01);
  const double hi = std::min(1.0 - 1e-6, best_p + 0.01);
  maximize_scalar([&](double p) { return -gap_for(p); }, lo, hi, 1e-10, &best_p);
  best_gap = gap_for(best_p);

  fit.feasible = true;
  fit.gain = gain_for(best_p);
  fit.pole = best_p;
  fit.gap = best_gap;
  // Realized with the same magnitude on the circle and a stable state
  // matrix: k(1-z)/(1-pz) has its pole at 1/p, outside the closed disc.
  fit.r = rational_to_system(
      RationalFn{Polynomial({fit.gain, -fit.gain}), Polynomial({1.0, -best_p})});
  return fit;
}

SynthesisReport additive_uncertainty_design(const ContinuousPlant& plant,
                                            const OffsetInterval& interval,
                                            const ModelMatchConfig& config) {
  const CoprimeBundle bundle = doubly_coprime(plant);
  const EnvelopeFit fit = fit_envelope(plant, interval);

  SynthesisReport report;
  report.gamma = 1.0;
  report.q_order = config.q_order;
  report.seed = config.seed;
  report.envelope_gain = fit.gain;
  report.envelope_pole = fit.pole;
  report.envelope_gap = fit.gap;

  const int m = bundle.D.n_in();
  const int n = bundle.Xtilde.n_in();

  if (fit.gain == 0.0) {
    // No perturbation to cover; any stable parameter works, use Q = 0.
    report.q = QParameter::zero(m, n, config.q_order);
    report.grid_optimum = 0.0;
    report.achieved_norm = 0.0;
    report.feasible = true;
    std::string note;
    report.controller = assemble_controller(bundle, report.q, &note);
    report.notes = fit.notes + "; " + note;
    return report;
  }

  // Smallness condition: || r * (Xtilde0 + D0*Q) * Dtilde0 ||_inf <= 1.
  const DiscreteSystem Ta =
      scalar_times(fit.r, series(bundle.Dtilde, bundle.Xtilde));
  const DiscreteSystem Tb_pos = scalar_times(fit.r, bundle.D);
  const DiscreteSystem& Tc = bundle.Dtilde;

  ModelMatchConfig search = config;
  if (!search.initial.coeffs.empty()) {
    for (Matrix& c : search.initial.coeffs) c = -c;
  }
  const ObjectiveGrid grid =
      sample_grid(Ta, negate_output(Tb_pos), Tc, config.grid_points);
  const MinimizeResult opt = minimize_affine(grid, m, n, search, 1.0);

  report.q.coeffs = opt.q;
  for (Matrix& c : report.q.coeffs) c = -c;
  report.grid_optimum = opt.value;

  const DiscreteSystem matched =
      compose_objective(Ta, Tb_pos, Tc, report.q.to_system());
  report.achieved_norm =
      hinf_norm(matched, 1e-6, std::max(512, config.grid_points));
  report.feasible = report.achieved_norm <= 1.0;

  std::string note;
  report.controller = assemble_controller(bundle, report.q, &note);
  report.notes = note;
  return report;
}

LqrBaseline lqr_baseline(const ContinuousPlant& plant) {
  const TransformedRealization trans = discretize_transformed(plant, 0.0);
  const Matrix& lambda = trans.Lambda;
  const Matrix& b_red = trans.reduced_input;
  if (!pbh_stabilizable(lambda, b_red, /*continuous_time=*/false)) {
    throw std::invalid_argument("lqr_baseline: discretized pair is not stabilizable");
  }
  const int n = static_cast<int>(lambda.rows());
  const int m = static_cast<int>(b_red.cols());

  LqrBaseline out;
  double residual = 0.0;
  solve_dare(lambda, b_red, Matrix::Identity(n, n), Matrix::Identity(m, m), &residual);
  out.gain = dlqr_gain(lambda, b_red, Matrix::Identity(n, n), Matrix::Identity(m, m));
  out.dare_residual = residual;
  out.controller = DiscreteSystem::constant(out.gain);
  return out;
}

TruncationReport balanced_truncate(const DiscreteSystem& sys, int order) {
  sys.validate();
  if (order < 0) throw std::invalid_argument("target order must be nonnegative");
  const int n = sys.n_states();

  TruncationReport report;
  if (order >= n) {
    report.reduced = sys;
    report.abs_error = 0.0;
    report.rel_error = is_stable(sys) ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    report.notes = "requested order not below current order; system unchanged";
    return report;
  }

  // Split off any unstable modes through the real modal form; they are
  // carried over exactly and only the stable subsystem is truncated.
  DiscreteSystem stable_part = sys;
  DiscreteSystem unstable_part;
  int n_unstable = 0;

  const bool all_stable = spectral_radius(sys.F) < 1.0 - 1e-9;
  if (!all_stable) {
    Eigen::EigenSolver<Matrix> es(sys.F);
    const Matrix P = es.pseudoEigenvectors();
    const Matrix Dm = es.pseudoEigenvalueMatrix();

    // Column order: stable blocks first, keeping 2x2 rotation blocks intact.
    std::vector<int> stable_cols, unstable_cols;
    int i = 0;
    while (i < n) {
      const bool pair = (i + 1 < n) && (Dm(i, i + 1) != 0.0 || Dm(i + 1, i) != 0.0);
      const double mag = pair ? std::hypot(Dm(i, i), Dm(i, i + 1))
                              : std::abs(Dm(i, i));
      auto& dest = (mag < 1.0 - 1e-9) ? stable_cols : unstable_cols;
      dest.push_back(i);
      if (pair) dest.push_back(i + 1);
      i += pair ? 2 : 1;
    }
    n_unstable = static_cast<int>(unstable_cols.size());

    Matrix T(n, n);
    int col = 0;
    for (int c : stable_cols) T.col(col++) = P.col(c);
    for (int c : unstable_cols) T.col(col++) = P.col(c);

    Eigen::FullPivLU<Matrix> lu(T);
    if (!lu.isInvertible()) {
      throw std::runtime_error("balanced_truncate: modal basis is singular");
    }
    const Matrix Fm = lu.solve(sys.F * T);
    const Matrix Gm = lu.solve(sys.G);
    const Matrix Hm = sys.H * T;

    // Verify the split really is block diagonal (ill-conditioned bases leak).
    const int ns = n - n_unstable;
    const double leak = ns > 0 && n_unstable > 0
                            ? std::max(Fm.topRightCorner(ns, n_unstable).cwiseAbs().maxCoeff(),
                                       Fm.bottomLeftCorner(n_unstable, ns).cwiseAbs().maxCoeff())
                            : 0.0;
    if (leak > 1e-6 * std::max(1.0, sys.F.cwiseAbs().maxCoeff())) {
      throw std::runtime_error("balanced_truncate: modal split is ill-conditioned");
    }

    stable_part = DiscreteSystem{Fm.topLeftCorner(ns, ns), Gm.topRows(ns),
                                 Hm.leftCols(ns), sys.D};
    unstable_part = DiscreteSystem{Fm.bottomRightCorner(n_unstable, n_unstable),
                                   Gm.bottomRows(n_unstable), Hm.rightCols(n_unstable),
                                   Matrix::Zero(sys.D.rows(), sys.D.cols())};
    report.split_used = true;
    report.notes = "unstable modes preserved exactly (" +
                   std::to_string(n_unstable) + " states); stable part truncated";
  }

  if (order < n_unstable) {
    throw std::invalid_argument(
        "balanced_truncate: target order cannot hold the unstable subsystem");
  }
  const int target_stable = order - n_unstable;

  // Square-root balanced truncation of the stable part.
  const Matrix P = solve_dlyap(stable_part.F, stable_part.G * stable_part.G.transpose());
  const Matrix Q = solve_dlyap(stable_part.F.transpose(),
                               stable_part.H.transpose() * stable_part.H);

  auto half_factor = [](const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    Vector vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Matrix(eig.eigenvectors() * vals.asDiagonal());
  };
  const Matrix Lc = half_factor(P);
  const Matrix Lo = half_factor(Q);

  Eigen::JacobiSVD<Matrix> svd(Lo.transpose() * Lc,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  report.hankel.assign(sv.data(), sv.data() + sv.size());

  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-12 * std::max(sv(0), 1e-300)) ++rank;
  }
  const int r_eff = std::min(target_stable, rank);
  if (r_eff < target_stable) {
    report.notes += (report.notes.empty() ? "" : "; ");
    report.notes += "balanced rank " + std::to_string(rank) +
                    " below requested stable order " + std::to_string(target_stable);
  }

  DiscreteSystem reduced_stable;
  if (r_eff > 0) {
    const Matrix Ur = svd.matrixU().leftCols(r_eff);
    const Matrix Vr = svd.matrixV().leftCols(r_eff);
    const Vector si = sv.head(r_eff).cwiseSqrt().cwiseInverse();
    const Matrix T1 = Lc * Vr * si.asDiagonal();
    const Matrix T2 = Lo * Ur * si.asDiagonal();
    reduced_stable = DiscreteSystem{T2.transpose() * stable_part.F * T1,
                                    T2.transpose() * stable_part.G,
                                    stable_part.H * T1, stable_part.D};
  } else {
    reduced_stable = DiscreteSystem::constant(stable_part.D);
    reduced_stable.G = Matrix::Zero(0, stable_part.n_in());
    reduced_stable.H = Matrix::Zero(stable_part.n_out(), 0);
  }

  // Reassemble (parallel sum with the untouched unstable part).
  if (report.split_used && n_unstable > 0) {
    report.reduced = add(reduced_stable, unstable_part);
  } else {
    report.reduced = reduced_stable;
  }

  // The truncation error lives entirely in the stable part, so its norm is
  // well defined even when the original system is not stable.
  report.abs_error = hinf_norm(subtract(stable_part, reduced_stable));
  if (all_stable) {
    report.rel_error = report.abs_error / std::max(hinf_norm(sys), 1e-300);
  } else {
    report.rel_error = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace offsetctrl
