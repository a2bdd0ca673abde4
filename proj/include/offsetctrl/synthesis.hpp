#pragma once

// Controller synthesis for the offset-robust stabilization problem.
//
// The design condition is a model-matching problem over the stable free
// parameter Q of the controller parameterization: make the weighted transfer
// W*(Xtilde0 + D0*Q) small enough that the offset-induced coprime-factor
// perturbation cannot destabilize the loop.  The objective is convex in the
// FIR coefficients of Q, so a subgradient method with restarts finds the
// (near-)optimal Q on a frequency grid; the winner is then re-certified with
// the adaptive H-infinity norm on the full composed system, never the grid
// alone.  Baselines used for comparison live here too: a robust design
// driven by a fitted first-order additive-uncertainty envelope, an
// identity-weight LQR, and balanced truncation for controller order
// reduction.

#include <cstdint>
#include <string>
#include <vector>

#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/discretization.hpp"
#include "offsetctrl/factorization.hpp"
#include "offsetctrl/linalg.hpp"

namespace offsetctrl {

// FIR matrix polynomial Q(z) = sum_i coeffs[i] * z^i.  Stable by
// construction (finite impulse response).
struct QParameter {
  std::vector<Matrix> coeffs;

  int order() const { return static_cast<int>(coeffs.size()) - 1; }
  ComplexMatrix eval(const Complex& z) const;
  DiscreteSystem to_system() const;
  static QParameter zero(int rows, int cols, int order);
};

struct ModelMatchConfig {
  int q_order = 20;
  int grid_points = 512;
  int max_iterations = 400;
  int restarts = 20;
  std::uint64_t seed = 1;
  // Optional warm start (e.g. the optimum from a lower order, zero-padded);
  // used as the first restart when nonempty.
  QParameter initial;
};

struct SynthesisReport {
  bool feasible = false;
  double gamma = 0.0;           // target level; +inf means "no robustness constraint"
  double achieved_norm = 0.0;   // certified H-infinity norm of the matched transfer
  double grid_optimum = 0.0;    // best gridded objective (a lower bound on the sup)
  QParameter q;                 // free parameter in the +Q convention
  DiscreteSystem controller;    // assembled controller, wired as u = -C(z) y
  int q_order = 0;
  std::uint64_t seed = 0;
  // Envelope-baseline extras (set by additive_uncertainty_design only).
  double envelope_gain = 0.0;
  double envelope_pole = 0.0;
  double envelope_gap = 0.0;
  std::string notes;
};

// Minimize max_w sigma_max(W(e^{jw}) * (Xtilde0 + D0*Q)(e^{jw})) over FIR Q
// and certify the winner; feasible iff the certified norm is below gamma.
// W must be a stable single-input single-output weight.  Internally the
// search runs on the lower-fractional-transformation form, whose free
// parameter is the negation of Q; the reported Q uses the +Q convention
// throughout the public interface.
SynthesisReport model_match(const CoprimeBundle& bundle, const DiscreteSystem& W,
                            double gamma, const ModelMatchConfig& config = {});

// State-space realization of C = (Xtilde0 + D0*Q) * (Ytilde0 - N0*Q)^{-1}.
// The returned controller is meant to be wired with negative feedback
// (u = -C y); the sign is validated by requiring the nominal (Delta = 0)
// closed loop to be Schur stable, trying both signs and keeping the stable
// one.  Failure of both signs indicates an interconnection bug and throws.
DiscreteSystem assemble_controller(const CoprimeBundle& bundle, const QParameter& q,
                                   std::string* sign_note = nullptr);

// Autonomous closed loop of the sampled plant at offset delta with a
// dynamic controller in negative feedback.  The returned system carries the
// state matrix only (no exogenous inputs); use closed_loop_matrix for the
// raw matrix.
Matrix closed_loop_matrix(const ContinuousPlant& plant, double delta,
                          const DiscreteSystem& controller);
DiscreteSystem closed_loop(const ContinuousPlant& plant, double delta,
                           const DiscreteSystem& controller);

// First-order magnitude envelope r covering the offset-induced additive
// perturbation: |r| strictly dominates max_Delta sigma_max(P_Delta - P_0) on
// the frequency grid, with the zero pinned at z = 1 where the perturbation
// vanishes.  The pole in (0, 1) minimizes the mean envelope-minus-data gap
// (the tightness figure of merit).
struct EnvelopeFit {
  bool feasible = false;
  double gain = 0.0;          // k in k(z-1)/(z-p), classical forward-shift writing
  double pole = 0.0;          // p in (0, 1)
  double gap = 0.0;           // mean over the grid of |r| - max_Delta ||P_Delta - P0||
  DiscreteSystem r;           // realization with the same circle magnitude
  std::string notes;
};
EnvelopeFit fit_envelope(const ContinuousPlant& plant, const OffsetInterval& interval,
                         int omega_points = 512, int delta_points = 40);

// Robust-control baseline: fit the envelope, then search for Q making
// ||r * (Xtilde0 + D0*Q) * Dtilde0||_inf <= 1 (the closed-loop smallness
// condition that guarantees stabilization of the whole family under the
// strict envelope).  Reports the envelope parameters and gap alongside the
// usual synthesis fields.
SynthesisReport additive_uncertainty_design(const ContinuousPlant& plant,
                                            const OffsetInterval& interval,
                                            const ModelMatchConfig& config = {});

// Identity-weight LQR on the nominal reduced pair (e^{Ah}, int_0^h e^{As}B ds),
// returned as a static controller for the estimator state (u = -K xhat).
struct LqrBaseline {
  Matrix gain;                  // m x n
  DiscreteSystem controller;    // constant system wrapping the gain
  double dare_residual = 0.0;   // fixed-point residual of the Riccati solve
};
LqrBaseline lqr_baseline(const ContinuousPlant& plant);

// Balanced truncation to the requested order.  Stable systems are balanced
// and truncated directly; an unstable system is first split into stable and
// unstable parts through a real modal form, only the stable part is
// truncated, and the unstable part is carried over exactly.  The truncation
// error system is stable either way, so the absolute error norm is always
// reported; the relative error only when the original is stable.
struct TruncationReport {
  DiscreteSystem reduced;
  std::vector<double> hankel;   // singular values of the (stable part's) Hankel operator
  double abs_error = 0.0;       // ||C - C_reduced||_inf
  double rel_error = 0.0;       // abs_error / ||C||_inf, NaN when C is unstable
  bool split_used = false;      // stable/unstable decomposition path taken
  std::string notes;
};
TruncationReport balanced_truncate(const DiscreteSystem& sys, int order);

}  // namespace offsetctrl
