#include "offsetctrl/scalar_exact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace offsetctrl {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_lambda(double lambda) {
  if (!(lambda > 1.0)) {
    throw std::invalid_argument("scalar bounds require lambda > 1 (unstable pole)");
  }
}

void check_interval(double lambda, double theta_lo, double theta_hi) {
  check_lambda(lambda);
  if (!(theta_lo < 0.0 && 0.0 < theta_hi)) {
    throw std::invalid_argument("theta interval must straddle zero");
  }
  if (!(theta_lo > 1.0 / lambda - 1.0 && theta_hi < lambda - 1.0)) {
    throw std::invalid_argument(
        "theta interval must lie inside (1/lambda - 1, lambda - 1)");
  }
}

void check_straddle(double theta_lo, double theta_hi) {
  if (!(theta_lo < 0.0 && 0.0 < theta_hi)) {
    throw std::invalid_argument("theta interval must straddle zero");
  }
}

// phi(-1) is real: the square-root argument is (1 + theta_hi)/(1 + theta_lo) > 1.
// Written as (1 - ratio) / (1 + root)^2 with 1 - ratio taken straight from the
// endpoints, so short intervals keep full relative precision (the naive
// (1 - root)/(1 + root) cancels catastrophically when ratio is near 1).
double phi_at_minus_one(double theta_lo, double theta_hi) {
  const double ratio = (1.0 + theta_hi) / (1.0 + theta_lo);
  const double root = std::sqrt(ratio);
  const double one_minus_ratio = (theta_lo - theta_hi) / (1.0 + theta_lo);
  return one_minus_ratio / ((1.0 + root) * (1.0 + root));
}

}  // namespace

double theta_of_delta(double delta, double a) { return std::expm1(-a * delta); }

double delta_of_theta(double theta, double a) {
  if (a == 0.0) throw std::invalid_argument("theta/Delta map is degenerate at a = 0");
  return -std::log1p(theta) / a;
}

double delta_length_of(const ThetaInterval& iv, double a, double h) {
  if (!(a > 0.0)) throw std::invalid_argument("delta_length_of requires a > 0");
  if (!(iv.lo < iv.hi)) throw std::invalid_argument("empty theta interval");
  // theta is decreasing in Delta, so iv.lo maps to the upper Delta endpoint.
  const double d_hi = std::min(h, delta_of_theta(iv.lo, a));
  const double d_lo = std::max(-h, delta_of_theta(iv.hi, a));
  return std::max(0.0, d_hi - d_lo);
}

Matrix scalar_extended_F(double lambda, double theta) {
  Matrix F(2, 2);
  F << -lambda * theta, -lambda * theta,  //
      lambda * (1.0 + theta), lambda * (1.0 + theta);
  return F;
}

Matrix scalar_extended_G(double lambda, double theta) {
  Matrix G(2, 1);
  G << -lambda * theta, lambda * (1.0 + theta) - 1.0;
  return G;
}

Matrix scalar_extended_H() {
  Matrix H(1, 2);
  H << 0.0, 1.0;
  return H;
}

Complex scalar_transfer(double lambda, double theta, const Complex& z) {
  const Complex den = 1.0 - lambda * z;
  return (lambda - 1.0) * z / den - theta * lambda * z * (z - 1.0) / den;
}

Matrix scalar_static_closed_loop(double lambda, double theta, double K) {
  const Matrix F = scalar_extended_F(lambda, theta);
  const Matrix G = scalar_extended_G(lambda, theta);
  const Matrix H = scalar_extended_H();
  return F - G * K * H;
}

bool lti_exact_condition(double lambda, double theta_lo, double theta_hi) {
  check_interval(lambda, theta_lo, theta_hi);
  const double lm = lambda - 1.0;
  const double lp = lambda + 1.0;
  return lm * lm * theta_hi - lp * lp * theta_lo < 4.0 * lambda;
}

double max_offset_length_lti(double a, double h) {
  if (!(a > 0.0)) throw std::invalid_argument("max_offset_length_lti requires a > 0");
  if (!(h > 0.0)) throw std::invalid_argument("max_offset_length_lti requires h > 0");
  // log((lambda+1)/(lambda-1)) written via expm1/log1p so large a*h stays
  // accurate instead of overflowing exp.
  const double lam_minus_1 = std::expm1(a * h);
  const double formula = 2.0 * std::log1p(2.0 / lam_minus_1) / a;
  return std::min(formula, 2.0 * h);
}

double max_offset_length_integrator(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("period must be positive");
  return 2.0 * h;
}

Complex integrator_transfer(double h, double delta, const Complex& z) {
  return h * z / (1.0 - z) - delta * z;
}

Complex conformal_map(const Complex& s, double theta_lo, double theta_hi) {
  check_straddle(theta_lo, theta_hi);
  if (s.imag() == 0.0) {
    const double x = s.real();
    if (x <= 1.0 / theta_lo || x >= 1.0 / theta_hi) {
      throw std::domain_error("conformal_map: point lies on an excluded real ray");
    }
  }
  const Complex ratio = (1.0 - theta_hi * s) / (1.0 - theta_lo * s);
  const Complex root = std::sqrt(ratio);  // principal branch
  // Same cancellation-free regrouping as phi_at_minus_one.
  const Complex one_minus_ratio = (theta_hi - theta_lo) * s / (1.0 - theta_lo * s);
  return one_minus_ratio / ((1.0 + root) * (1.0 + root));
}

Complex conformal_inverse(const Complex& w, double theta_lo, double theta_hi) {
  check_straddle(theta_lo, theta_hi);
  const Complex sp = w + 1.0;
  const Complex sm = w - 1.0;
  return 4.0 * w / (theta_hi * sp * sp - theta_lo * sm * sm);
}

Matrix pick_matrix(double lambda, double theta_lo, double theta_hi) {
  check_interval(lambda, theta_lo, theta_hi);
  const double w = phi_at_minus_one(theta_lo, theta_hi);
  Matrix M(2, 2);
  M << 1.0, 1.0,  //
      1.0, (1.0 - w * w) / (1.0 - 1.0 / (lambda * lambda));
  return M;
}

bool pick_feasible(double lambda, double theta_lo, double theta_hi) {
  const Matrix M = pick_matrix(lambda, theta_lo, theta_hi);
  // Positive definiteness of a symmetric 2x2 via leading principal minors.
  return M(0, 0) > 0.0 && M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0) > 0.0;
}

Interpolant construct_interpolant(double lambda, double theta_lo, double theta_hi) {
  if (!lti_exact_condition(lambda, theta_lo, theta_hi)) {
    throw std::domain_error(
        "construct_interpolant: no LTI controller tolerates this offset interval");
  }
  const double w = phi_at_minus_one(theta_lo, theta_hi);
  const double wp = lambda * w;
  if (!(std::abs(wp) < 1.0)) {
    // Equivalent to Pick feasibility, which the exact condition guarantees.
    throw std::logic_error("construct_interpolant: |lambda * phi(-1)| >= 1");
  }

  // Halve the pole offset until the exact supremum (attained at z = -1)
  // drops below 1.  As d -> 1+ the supremum tends to |wp| < 1, so the loop
  // terminates for every feasible problem.
  double delta = 1.0;
  double d = 2.0;
  double sup = 0.0;
  bool found = false;
  for (int iter = 0; iter < 2000; ++iter) {
    d = 1.0 + delta;
    sup = std::abs(wp) * 2.0 * (lambda * d - 1.0) / ((lambda - 1.0) * (d + 1.0));
    if (sup < 1.0 - 1e-12) {
      found = true;
      break;
    }
    delta *= 0.5;
  }
  if (!found) {
    throw std::logic_error("construct_interpolant: pole search did not converge");
  }

  const double beta = wp * (lambda * d - 1.0) / (lambda - 1.0);
  Interpolant out;
  out.g.num = Polynomial({0.0, -beta, beta});  // beta * z * (z - 1)
  out.g.den = Polynomial({-d, 1.0});
  out.pole = d;
  out.gain = beta;
  out.sup_bound = sup;

  // Certify: the grid cannot exceed the closed-form supremum, and the
  // interpolation value at 1/lambda is exact by construction.
  double grid_max = 0.0;
  for (int k = 0; k < 4096; ++k) {
    const double wk = 2.0 * kPi * k / 4096.0;
    const Complex z(std::cos(wk), std::sin(wk));
    grid_max = std::max(grid_max, std::abs(out.g.eval(z)));
  }
  if (grid_max > sup + 1e-9) {
    throw std::logic_error("construct_interpolant: supremum certificate violated");
  }
  const double itp_err = std::abs(out.g.eval(Complex(1.0 / lambda, 0.0)) - w);
  if (itp_err > 1e-10 * std::max(1.0, std::abs(w))) {
    throw std::logic_error("construct_interpolant: interpolation condition violated");
  }
  return out;
}

Matrix scalar_closed_loop(double lambda, double theta, const DiscreteSystem& controller) {
  if (controller.n_in() != 1 || controller.n_out() != 1) {
    throw std::invalid_argument("scalar_closed_loop requires a SISO controller");
  }
  const Matrix F = scalar_extended_F(lambda, theta);
  const Matrix G = scalar_extended_G(lambda, theta);
  const Matrix H = scalar_extended_H();
  const int nc = controller.n_states();
  const double dc = controller.D(0, 0);

  Matrix M = Matrix::Zero(2 + nc, 2 + nc);
  M.topLeftCorner(2, 2) = F - G * dc * H;
  if (nc > 0) {
    M.topRightCorner(2, nc) = -G * controller.H;
    M.bottomLeftCorner(nc, 2) = controller.G * H;
    M.bottomRightCorner(nc, nc) = controller.F;
  }
  return M;
}

ScalarController scalar_controller(double lambda, double theta_lo, double theta_hi,
                                   double c) {
  if (!lti_exact_condition(lambda, theta_lo, theta_hi)) {
    throw std::domain_error(
        "scalar_controller: no LTI controller tolerates this offset interval");
  }
  if (!(std::abs(c) > 1.0)) {
    throw std::invalid_argument("scalar_controller: pole parameter needs |c| > 1");
  }

  const Interpolant itp = construct_interpolant(lambda, theta_lo, theta_hi);
  const double beta = itp.gain;
  const double d = itp.pole;

  // The interpolant g = p/q, with both factors kept in constructed form.
  const Polynomial p({0.0, -beta, beta});
  const Polynomial q({-d, 1.0});
  // Denominator of the composed map: theta_hi*(p+q)^2 - theta_lo*(p-q)^2,
  // regrouped so short intervals do not cancel the endpoint difference away.
  const Polynomial df = (theta_hi - theta_lo) * (p * p + q * q) +
                        (2.0 * (theta_hi + theta_lo)) * (p * q);

  const std::vector<double> candidates = {c, 1.5 * c, c + 1.0, 2.0 * c, c + 2.0, -c};
  std::ostringstream diagnostics;

  for (double cc : candidates) {
    if (!(std::abs(cc) > 1.0)) continue;
    const double x0 = (1.0 - cc * lambda) / (lambda - 1.0);

    // Numerator of (f - T1)*(z-c)^2*(z-d)/(z(z-1)): shares the constructed
    // zero at z = 1/lambda with the remaining factor of T2, which is removed
    // by deflation below.
    const Polynomial zc_zd({cc * d, -(cc + d), 1.0});  // (z - d)(z - c)
    const Polynomial E = 4.0 * beta * zc_zd - lambda * x0 * df;

    double rem = 0.0;
    const Polynomial e3 = deflate(E, 1.0 / lambda, &rem);
    const double rel_rem = std::abs(rem) / std::max(E.max_abs_coeff(), 1e-300);
    if (rel_rem > 1e-8) {
      diagnostics << " [c=" << cc << ": cancellation residual " << rel_rem << "]";
      continue;
    }

    // (z - 1/lambda)/(1 - lambda z) = -1/lambda, applied as a constant factor.
    const double lam2 = lambda * lambda;
    RationalFn Q;
    Q.num = -1.0 * (e3 * Polynomial({-cc, 1.0}));
    Q.den = lam2 * df;

    RationalFn C;
    C.num = (x0 * lam2) * df - Polynomial({1.0, -lambda}) * e3;
    C.den = (-cc * lam2) * df + (lambda - 1.0) * (Polynomial({0.0, 1.0}) * e3);

    const DiscreteSystem realization = rational_to_system(C);

    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double theta = theta_lo + (theta_hi - theta_lo) * k / 199.0;
      worst = std::max(worst,
                       spectral_radius(scalar_closed_loop(lambda, theta, realization)));
    }
    if (worst < 1.0 - 1e-9) {
      ScalarController out;
      out.C = C;
      out.Q = Q;
      out.realization = realization;
      out.c = cc;
      out.cancellation_residual = rel_rem;
      out.max_sweep_radius = worst;
      return out;
    }
    diagnostics << " [c=" << cc << ": worst closed-loop radius " << worst << "]";
  }

  throw std::runtime_error("scalar_controller: verification failed for all pole "
                           "parameters:" +
                           diagnostics.str());
}

ThetaInterval static_bound(double lambda) {
  check_lambda(lambda);
  return {-1.0 / lambda, 1.0 / lambda};
}

bool jury_static(double lambda, double theta, double K) {
  check_lambda(lambda);
  const bool c1 = (lambda - 1.0) * (K - 1.0) > 0.0;
  const bool c2 = lambda * theta * K + 1.0 > 0.0;
  const bool c3 = 2.0 * lambda * theta * K + (lambda - 1.0) * K - lambda - 1.0 < 0.0;
  return c1 && c2 && c3;
}

double two_periodic_eta(double lambda, double zeta) {
  check_lambda(lambda);
  if (!(zeta > 0.0)) throw std::invalid_argument("gain product must be positive");
  const double sz = std::sqrt(zeta);
  if (!(sz * lambda > 1.0)) {
    throw std::invalid_argument("gain schedule requires sqrt(zeta)*lambda > 1");
  }
  return sz * ((lambda - 1.0) * zeta - 2.0 * sz + lambda + 1.0) / (sz * lambda - 1.0);
}

TwoPeriodicDesign two_periodic_bound(double lambda) {
  check_lambda(lambda);
  const double sqrt2 = std::sqrt(2.0);
  const double kappa = (std::sqrt(lambda * lambda + 1.0) *
                            std::sqrt(lambda * lambda - 4.0 * sqrt2 + 5.0) -
                        2.0 * (sqrt2 - 1.0) * lambda) /
                       (lambda * lambda - 1.0);

  TwoPeriodicDesign out;
  out.kappa = kappa;
  out.bound = {-1.0 / (lambda * kappa), 1.0 / (lambda * kappa)};

  // One certified design from the feasible schedule: the midpoint of the
  // gain-product range, with the gain sum pinned by the schedule equation.
  out.zeta = 0.5 * (kappa * kappa + 1.0);
  out.eta = two_periodic_eta(lambda, out.zeta);
  const double disc = out.eta * out.eta - 4.0 * out.zeta;
  if (!(disc > 0.0)) {
    throw std::logic_error("two_periodic_bound: gain discriminant not positive");
  }
  out.K1 = 0.5 * (out.eta + std::sqrt(disc));
  out.K2 = 0.5 * (out.eta - std::sqrt(disc));
  const double sz = std::sqrt(out.zeta);
  out.certified = {-1.0 / (sz * lambda), 1.0 / (sz * lambda)};
  return out;
}

Matrix two_periodic_lifted(double lambda, double theta, double K1, double K2) {
  const Matrix F = scalar_extended_F(lambda, theta);
  const Matrix G = scalar_extended_G(lambda, theta);
  const Matrix H = scalar_extended_H();

  // Two steps of u_k = -K1*y_k, u_{k+1} = -K2*y_{k+1}; the second input sees
  // the state already moved by the first, hence the correction term below.
  Matrix inputs(2, 2);
  inputs.col(0) = F * G;
  inputs.col(1) = G;
  Matrix correction = Matrix::Identity(2, 2);
  correction(1, 0) = -K2 * (H * G)(0, 0);
  Matrix gains = Matrix::Zero(2, 2);
  gains(0, 0) = K1;
  gains(1, 1) = K2;
  Matrix outputs(2, 2);
  outputs.row(0) = H;
  outputs.row(1) = H * F;

  return F * F - inputs * correction * gains * outputs;
}

ThetaInterval small_gain_scalar_bound(double lambda) {
  check_lambda(lambda);
  // The loop-shaping construction L(z) = lambda*z*(z-1)/(z-c) forces the
  // shaped transfer to vanish at z = 0 and z = 1 while hitting -1 at
  // z = 1/lambda; the minimal achievable sup-norm over stable completions is
  // exactly lambda, so the guaranteed radius is 1/lambda -- identical to the
  // static-gain bound.
  return {-1.0 / lambda, 1.0 / lambda};
}

AdditiveDecomposition additive_uncertainty_scalar_bound(double lambda) {
  check_lambda(lambda);
  AdditiveDecomposition out;
  out.bound = 1.0 / lambda;
  out.allpass.num = Polynomial({0.0, lambda, -1.0});  // z*(lambda - z)
  out.allpass.den = Polynomial({1.0, -lambda});
  return out;
}

RationalFn additive_residual(double lambda, double theta) {
  check_lambda(lambda);
  RationalFn r;
  r.num = Polynomial({-theta * lambda, theta * lambda});  // theta*lambda*(z - 1)
  r.den = Polynomial({lambda, -1.0});
  return r;
}

}  // namespace offsetctrl
