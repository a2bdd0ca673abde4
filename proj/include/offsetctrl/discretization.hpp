#pragma once

#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace offsetctrl {

/// Continuous-time plant xdot = A x + B u under zero-order hold with update
/// period h (seconds).  The control input is recomputed once per period from
/// a time-stamped state estimate whose clock may be offset from the plant's.
struct ContinuousPlant {
  Matrix A;  // n x n
  Matrix B;  // n x m
  double h = 0.0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  void validate() const;
};

/// Range [lo, hi] of admissible constant clock offsets (seconds); both
/// endpoints must lie strictly inside (-h, h).
struct OffsetInterval {
  double lo = 0.0;
  double hi = 0.0;
  void validate(double h) const;
};

struct AssumptionReport {
  bool stabilizable = false;        // PBH on (A, B) over Re(s) >= 0
  bool pathological_update = false; // eigenvalue pair resonates with h
  bool near_pathological = false;   // within the warning band
  std::vector<std::string> notes;
  bool ok() const { return stabilizable && !pathological_update; }
};

/// Checks standing assumptions on the continuous plant: stabilizability of
/// (A, B) and non-pathological update period h (no eigenvalue pair with
/// (s_p - s_q) h = 2*pi*i*l for nonzero integer l).  Hard failures set the
/// flags; a near-miss of the pathology test (within 1e-6 instead of 1e-9)
/// only sets near_pathological and appends a note.
AssumptionReport check_assumptions(const ContinuousPlant& plant);

/// Offset-aware ZOH discretization.  State is [x - xhat; xhat] sampled at the
/// update instants, input is the held control value, output is the estimate
/// xhat handed to the controller.  The offset delta (seconds, |delta| < h) is
/// the constant error of the sensor time stamps: the estimator rolls the
/// received sample forward by the wrong amount, which enters the model only
/// through Theta = exp(-A delta) - I.
DiscreteSystem discretize(const ContinuousPlant& plant, double delta);

/// discretize() after the similarity transform that decouples the dynamics
/// into the plant-state block (matrix exp(A h)) and a deadbeat estimator
/// block (zero matrix).  Also carries the output-injection gain that
/// certifies detectability: F - L H has spectral radius 0 for every offset.
struct TransformedRealization {
  DiscreteSystem sys;    // (Fbar, Gbar, Hbar, 0), state dim 2n
  Matrix L;              // deadbeat output-injection gain, 2n x n
  Matrix Lambda;         // exp(A h)
  Matrix reduced_input;  // \int_0^h exp(A s) B ds, input matrix of the Lambda block
  double delta = 0.0;
};
TransformedRealization discretize_transformed(const ContinuousPlant& plant, double delta);

struct StabDetectReport {
  bool stabilizable = false;
  bool detectable = false;
  double deadbeat_radius = 0.0;  // spectral radius of F - L H, ~0 by construction
};

/// Stabilizability (PBH on the reduced block [zI - exp(Ah), \int exp(As)B ds])
/// and constructive detectability of the discretized system.
StabDetectReport check_discrete_stab_detect(const TransformedRealization& trans);

/// Continuous-time signal (disturbance or noise) as a callback.
using Signal = std::function<Vector(double)>;

/// Discretization of the output-feedback setup: plant with process
/// disturbance d(t) and measurement noise n(t), a co-located Luenberger
/// observer (gain L, output map C) feeding the sampler, and quantization
/// noise w_k on the transmitted estimate.  The sampled dynamics are the
/// nominal (F, G, H) plus an additive per-step state disturbance d_k.
struct DisturbanceModel {
  ContinuousPlant plant;
  double delta = 0.0;
  Matrix C;  // p x n observer output map
  Matrix L;  // n x p observer gain, A - L C Hurwitz
  DiscreteSystem base;  // nominal discretization at this offset
};

/// Validates that A - L C is Hurwitz and assembles the model.
DisturbanceModel disturbance_map(const ContinuousPlant& plant, double delta,
                                 const Matrix& C, const Matrix& L);

struct DisturbanceTrace {
  std::vector<Vector> d;  // lumped state disturbance per step (dim 2n)
  std::vector<Vector> e;  // observer error at update instants (dim n), size steps+1
};

/// Evaluates the per-step disturbances d_k and the observer error recursion
/// e_{k+1} over `steps` periods.  d_sig / n_sig are the continuous signals,
/// w(k) the quantization noise, e0 the initial observer error, and s_frac(k)
/// in [0,1) places the sampling instant inside the admissible window of
/// period k (the window keeps both the sample time and its offset image
/// inside the period).  Integrals use 32-node Gauss-Legendre per period.
DisturbanceTrace evaluate_disturbances(const DisturbanceModel& model,
                                       const Signal& d_sig, const Signal& n_sig,
                                       const std::function<Vector(int)>& w,
                                       const Vector& e0, int steps,
                                       const std::function<double(int)>& s_frac);

/// Conservative bound on ||d_k|| from sup norms of the inputs, by the
/// triangle inequality over the terms of the disturbance map.
double disturbance_bound(const DisturbanceModel& model, double d_max, double n_max,
                         double w_max, double e_max);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace offsetctrl
