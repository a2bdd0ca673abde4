#include "offsetctrl/factorization.hpp"

#include "offsetctrl/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace offsetctrl {

CoprimeBundle doubly_coprime(const ContinuousPlant& plant, double input_weight) {
  const AssumptionReport assumptions = check_assumptions(plant);
  if (!assumptions.ok()) {
    throw std::invalid_argument(
        "doubly_coprime: plant must be stabilizable with a non-pathological period");
  }
  if (!(input_weight > 0.0)) {
    throw std::invalid_argument("doubly_coprime: input weight must be positive");
  }
  const Eigen::Index n = plant.n();
  const Eigen::Index m = plant.m();

  CoprimeBundle bundle;
  bundle.base = discretize_transformed(plant, 0.0);
  const DiscreteSystem& sys = bundle.base.sys;

  // Stabilizing feedback: the dynamics split into the plant block exp(Ah)
  // (input \int exp(As)B ds) and a deadbeat block, so a regulator on the
  // reduced pair, padded with zeros, stabilizes the full realization.
  const Matrix k_red =
      dlqr_gain(bundle.base.Lambda, bundle.base.reduced_input, Matrix::Identity(n, n),
                input_weight * Matrix::Identity(m, m));
  bundle.K0 = Matrix::Zero(m, 2 * n);
  bundle.K0.leftCols(n) = k_red;
  bundle.L0 = bundle.base.L;  // deadbeat output injection at zero offset

  bundle.Phi = sys.F - sys.G * bundle.K0;
  bundle.PhiL = sys.F - bundle.L0 * sys.H;

  const Matrix Im = Matrix::Identity(m, m);
  const Matrix In = Matrix::Identity(n, n);

  // Right factors and left complements share the state-feedback realization.
  bundle.D = DiscreteSystem{bundle.Phi, sys.G, -bundle.K0, Im};
  bundle.N = DiscreteSystem{bundle.Phi, sys.G, sys.H, Matrix::Zero(n, m)};
  bundle.Xtilde = DiscreteSystem{bundle.Phi, bundle.L0, bundle.K0, Matrix::Zero(m, n)};
  bundle.Ytilde = DiscreteSystem{bundle.Phi, bundle.L0, sys.H, In};

  // Left factors and right complements share the output-injection realization.
  bundle.Dtilde = DiscreteSystem{bundle.PhiL, bundle.L0, -sys.H, In};
  bundle.Ntilde = DiscreteSystem{bundle.PhiL, sys.G, sys.H, Matrix::Zero(n, m)};
  bundle.X = DiscreteSystem{bundle.PhiL, bundle.L0, bundle.K0, Matrix::Zero(m, n)};
  bundle.Y = DiscreteSystem{bundle.PhiL, sys.G, bundle.K0, Im};
  return bundle;
}

double bezout_residual(const CoprimeBundle& bundle, int circle_points) {
  const Eigen::Index m = bundle.D.n_in();
  const Eigen::Index n = bundle.Ntilde.n_out();
  double worst = 0.0;
  for (int i = 0; i < circle_points; ++i) {
    const Complex z =
        std::polar(1.0, 2.0 * std::numbers::pi * i / static_cast<double>(circle_points));
    ComplexMatrix left(m + n, m + n);
    left.topLeftCorner(m, m) = evaluate(bundle.Y, z);
    left.topRightCorner(m, n) = evaluate(bundle.X, z);
    left.bottomLeftCorner(n, m) = -evaluate(bundle.Ntilde, z);
    left.bottomRightCorner(n, n) = evaluate(bundle.Dtilde, z);
    ComplexMatrix right(m + n, m + n);
    right.topLeftCorner(m, m) = evaluate(bundle.D, z);
    right.topRightCorner(m, n) = -evaluate(bundle.Xtilde, z);
    right.bottomLeftCorner(n, m) = evaluate(bundle.N, z);
    right.bottomRightCorner(n, n) = evaluate(bundle.Ytilde, z);
    const ComplexMatrix prod = left * right - ComplexMatrix::Identity(m + n, m + n);
    worst = std::max(worst, prod.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::pair<DiscreteSystem, DiscreteSystem> left_factors(const ContinuousPlant& plant,
                                                       double delta) {
  const TransformedRealization trans = discretize_transformed(plant, delta);
  const Eigen::Index n = plant.n();
  const Matrix PhiL = trans.sys.F - trans.L * trans.sys.H;
  DiscreteSystem Ntilde{PhiL, trans.sys.G, trans.sys.H, Matrix::Zero(n, plant.m())};
  DiscreteSystem Dtilde{PhiL, trans.L, -trans.sys.H, Matrix::Identity(n, n)};
  return {Ntilde, Dtilde};
}

Matrix offset_residual(const ContinuousPlant& plant, double delta) {
  plant.validate();
  if (!(std::abs(delta) < plant.h)) {
    throw std::invalid_argument(
        "offset_residual: offset magnitude must be below the update period");
  }
  // \int_0^delta exp(A(h - tau)) B dtau = \int_{h-delta}^{h} exp(As) B ds,
  // grouped so the exponential factor and the integral both stay at the scale
  // of the result (exp(Ah) times an integral of exp(-A tau) cancels through
  // huge intermediates once exp(|eig(A)| h) approaches 1/eps).
  if (delta >= 0.0) {
    return expm(plant.A, plant.h - delta) * exp_integral(plant.A, plant.B, delta);
  }
  return -expm(plant.A, plant.h) * exp_integral(plant.A, plant.B, -delta);
}

GammaReport gamma_level(const ContinuousPlant& plant, const OffsetInterval& interval,
                        int grid_points) {
  plant.validate();
  interval.validate(plant.h);
  if (grid_points < 2) {
    throw std::invalid_argument("gamma_level: need at least two grid points");
  }
  GammaReport report;
  if (interval.lo == 0.0 && interval.hi == 0.0) {
    report.unconstrained = true;
    report.gamma = std::numeric_limits<double>::infinity();
    return report;
  }
  const auto norm_at = [&](double delta) {
    return sigma_max(offset_residual(plant, delta));
  };
  const std::size_t count = static_cast<std::size_t>(grid_points);
  const double span = interval.hi - interval.lo;
  const kernels::GridMax grid_best = kernels::grid_max(count, [&](std::size_t i) {
    const double delta =
        interval.lo + span * static_cast<double>(i) / static_cast<double>(count - 1);
    return norm_at(delta);
  });
  const double step = span / static_cast<double>(count - 1);
  const double at = interval.lo + step * static_cast<double>(grid_best.index);
  double best = grid_best.value;
  if (span > 0.0) {
    best = std::max(best, maximize_scalar(norm_at, std::max(interval.lo, at - step),
                                          std::min(interval.hi, at + step), 1e-12));
  }
  report.max_residual = best;
  report.argmax_offset = at;
  report.gamma = 1.0 / best;
  return report;
}

}  // namespace offsetctrl
