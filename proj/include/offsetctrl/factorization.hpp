#pragma once

#include "offsetctrl/discrete_system.hpp"
#include "offsetctrl/discretization.hpp"

#include <utility>

namespace offsetctrl {

/// Doubly coprime factorization of the zero-offset discretized plant
/// P0 = N D^{-1} = Dtilde^{-1} Ntilde over the stable proper transfers,
/// with Bezout complements satisfying
///   [[Y, X], [-Ntilde, Dtilde]] * [[D, -Xtilde], [N, Ytilde]] = I.
/// All eight factors are stable state-space systems sharing the two closed
/// realizations F - G K0 (state feedback) and F - L0 H (output injection).
struct CoprimeBundle {
  DiscreteSystem N, D;              // right factors
  DiscreteSystem Ntilde, Dtilde;    // left factors
  DiscreteSystem X, Y;              // right Bezout complements
  DiscreteSystem Xtilde, Ytilde;    // left Bezout complements
  Matrix K0;                        // stabilizing feedback, m x 2n
  Matrix L0;                        // deadbeat output injection, 2n x n
  Matrix Phi;                       // F - G K0 (Schur)
  Matrix PhiL;                      // F - L0 H (nilpotent)
  TransformedRealization base;      // zero-offset realization the factors live on
};

/// Builds the bundle at zero offset.  K0 is a regulator gain on the reduced
/// pair (exp(Ah), \int_0^h exp(As)B ds) with identity state weight and
/// input weight `input_weight` * I; any positive weight yields a valid
/// bundle, the knob only moves the achievable model-matching norm.
/// Throws when the plant assumptions fail (not stabilizable / pathological h).
CoprimeBundle doubly_coprime(const ContinuousPlant& plant, double input_weight = 1.0);

/// Max-norm residual of the doubly coprime identity sampled on the circle.
double bezout_residual(const CoprimeBundle& bundle, int circle_points = 256);

/// Left factorization (Ntilde, Dtilde) of the plant discretized at a given
/// offset, using the deadbeat injection gain.  Dtilde is offset-independent:
/// Dtilde(z) = I - z exp(Ah) for every offset.
std::pair<DiscreteSystem, DiscreteSystem> left_factors(const ContinuousPlant& plant,
                                                       double delta);

/// Sensitivity of the left numerator to the clock offset:
///   R(delta) = \int_0^delta exp(A(h - tau)) B dtau,
/// so that Ntilde_delta(z) - Ntilde_0(z) = R(delta) z(z-1).
Matrix offset_residual(const ContinuousPlant& plant, double delta);

struct GammaReport {
  double gamma = 0.0;          // 1 / max ||R(delta)|| over the interval
  double max_residual = 0.0;   // the achieved maximum of ||R(delta)||
  double argmax_offset = 0.0;
  bool unconstrained = false;  // interval degenerate to {0}: gamma = +inf
};

/// Robustness level for an offset interval: gamma = 1 / max ||R(delta)||,
/// maximized on a uniform grid (endpoints included) with golden-section
/// refinement around the grid argmax.
GammaReport gamma_level(const ContinuousPlant& plant, const OffsetInterval& interval,
                        int grid_points = 1000);

}  // namespace offsetctrl
