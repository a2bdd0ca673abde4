#pragma once

// Exact offset-robustness results for first-order plants x' = a*x + b*u
// sampled with ZOH period h under an unknown constant sensor-clock offset.
//
// Everything is phrased in the offset parameter theta = exp(-a*Delta) - 1,
// which maps the offset window (-h, h) onto S_max = (exp(-a*h)-1, exp(a*h)-1)
// monotonically (decreasing).  lambda = exp(a*h) is the unstable discrete
// pole.  The module provides:
//   - the exact LTI stabilizability test over a theta interval, and its
//     consequence for the maximal Delta-interval length;
//   - a constructive stabilizing controller via conformal mapping and disc
//     interpolation, with all pole/zero cancellations done on constructed
//     roots (never by numerical division);
//   - exact static-gain bounds (Jury test), a sufficient 2-periodic bound
//     with a certified gain schedule, and the small-gain / additive
//     uncertainty comparisons that those bounds are measured against.

#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/linalg.hpp"
#include "offsetctrl/polynomial.hpp"

namespace offsetctrl {

struct ThetaInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Change of variables theta = exp(-a*Delta) - 1 (decreasing in Delta).
double theta_of_delta(double delta, double a);
double delta_of_theta(double theta, double a);

// Length in Delta units of the offset set whose theta image is `iv`, with
// each endpoint clipped to the admissible window (-h, h).
double delta_length_of(const ThetaInterval& iv, double a, double h);

// Extended sampled system in theta coordinates (unit b/a ratio): state is
// [estimation error; estimator state] at the update instants.
Matrix scalar_extended_F(double lambda, double theta);
Matrix scalar_extended_G(double lambda, double theta);
Matrix scalar_extended_H();
// Transfer function of that system in the delay variable.
Complex scalar_transfer(double lambda, double theta, const Complex& z);
// Closed loop under static output feedback u = -K*y.
Matrix scalar_static_closed_loop(double lambda, double theta, double K);

// Exact LTI stabilizability of the whole family theta in [lo, hi]:
// (lambda-1)^2*hi - (lambda+1)^2*lo < 4*lambda.  Requires lo < 0 < hi and
// [lo, hi] inside S_max; throws std::invalid_argument otherwise.
bool lti_exact_condition(double lambda, double theta_lo, double theta_hi);

// Supremum of Delta-interval lengths tolerated by a single LTI controller:
// min( 2*(log(lambda+1) - log(lambda-1))/a , 2h ), the second term being the
// sampling-order restriction |Delta| < h.  Requires a > 0.
double max_offset_length_lti(double a, double h);

// Marginally stable pole (a = 0): every interval inside (-h, h) is
// tolerated, so the supremum is 2h.
double max_offset_length_integrator(double h);

// Transfer of the a = 0 extended system, h*z/(1-z) - Delta*z, used by tests
// to cross-check the general discretization at a = 0.
Complex integrator_transfer(double h, double delta, const Complex& z);

// Conformal bijection from G = C minus the two real rays (-inf, 1/lo] and
// [1/hi, inf) onto the unit disc, and its rational inverse.  Throws
// std::domain_error for s on the excluded rays.
Complex conformal_map(const Complex& s, double theta_lo, double theta_hi);
Complex conformal_inverse(const Complex& w, double theta_lo, double theta_hi);

// Interpolation feasibility certificate: positive definiteness of the 2x2
// Pick matrix for the data {0 -> 0, 1/lambda -> phi(-1)}.  Algebraically
// equivalent to lti_exact_condition.
Matrix pick_matrix(double lambda, double theta_lo, double theta_hi);
bool pick_feasible(double lambda, double theta_lo, double theta_hi);

// Disc-valued interpolant g with g(0) = 0, g(1) = 0 (factored zeros) and
// g(1/lambda) = phi(-1) exactly: g(z) = beta * z * (z-1) / (z-d), where
// d = 1 + delta is found by halving delta until the closed-form supremum
// bound |beta| * 2/(d+1) (attained at z = -1) certifies sup |g| < 1.
struct Interpolant {
  RationalFn g;
  double pole = 0.0;       // d > 1
  double gain = 0.0;       // beta
  double sup_bound = 0.0;  // exact supremum of |g| over the closed disc
};
Interpolant construct_interpolant(double lambda, double theta_lo, double theta_hi);

// Constructive stabilizing controller for the whole interval family.  The
// free parameter c (|c| > 1) places the factor poles; the result is
// c-invariant up to numerical tolerance.  Cancellations at z in {0, 1,
// 1/lambda} are performed by removing constructed factors; the single
// numerically deflated root (at 1/lambda) must leave a relative remainder
// below 1e-8, otherwise the construction is retried with a different c.
// The returned controller is verified by a 200-point spectral-radius sweep
// over [theta_lo, theta_hi]; failure throws std::runtime_error.
struct ScalarController {
  RationalFn C;                       // controller transfer, u = -C(z) y
  RationalFn Q;                       // stable free parameter actually used
  DiscreteSystem realization;         // state-space form of C
  double c = 0.0;                     // pole parameter that succeeded
  double cancellation_residual = 0.0; // relative remainder of the deflation
  double max_sweep_radius = 0.0;      // worst closed-loop spectral radius seen
};
ScalarController scalar_controller(double lambda, double theta_lo, double theta_hi,
                                   double c = 2.0);

// Closed-loop update matrix of the extended system with a dynamic
// controller in the loop (u = -C y), for sweep verification.
Matrix scalar_closed_loop(double lambda, double theta, const DiscreteSystem& controller);

// Exact bound for time-invariant static gains: theta in (-1/lambda, 1/lambda).
ThetaInterval static_bound(double lambda);

// Three-inequality stability test for the static closed loop; agrees with
// the eigenvalue test away from the stability boundary.
bool jury_static(double lambda, double theta, double K);

// Sufficient bound for 2-periodic static gains (u alternates between -K1*y
// and -K2*y), together with one certified design from the feasible gain
// schedule: zeta = K1*K2 in (kappa^2, 1), eta = K1+K2 fixed by zeta, and the
// design's own guaranteed interval |theta| < 1/(sqrt(zeta)*lambda).
struct TwoPeriodicDesign {
  double kappa = 0.0;
  ThetaInterval bound;      // (-1/(lambda*kappa), 1/(lambda*kappa))
  double zeta = 0.0;
  double eta = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  ThetaInterval certified;  // interval covered by this particular design
};
TwoPeriodicDesign two_periodic_bound(double lambda);
double two_periodic_eta(double lambda, double zeta);
// Two-step transition matrix of the extended system under the alternating
// gains; stability of the 2-periodic loop is Schur stability of this matrix.
Matrix two_periodic_lifted(double lambda, double theta, double K1, double K2);

// Small-gain analysis of the offset loop collapses to the static bound: the
// optimal loop-shaping value equals lambda, giving theta in (-1/lambda,
// 1/lambda) -- as conservative as static control.
ThetaInterval small_gain_scalar_bound(double lambda);

// Additive-uncertainty view: P_theta differs from the nominal transfer by
// m(z) * r_theta(z) up to sign, with |m| = 1 on the unit circle, so the
// perturbation magnitude is |r_theta|.  The resulting tolerance is again
// theta_bar < 1/lambda.
struct AdditiveDecomposition {
  double bound = 0.0;   // largest symmetric theta radius
  RationalFn allpass;   // m(z) = z*(lambda - z)/(1 - lambda*z)
};
AdditiveDecomposition additive_uncertainty_scalar_bound(double lambda);
RationalFn additive_residual(double lambda, double theta);  // r_theta

}  // namespace offsetctrl
