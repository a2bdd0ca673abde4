#pragma once

#include "offsetctrl/linalg.hpp"

#include <vector>

namespace offsetctrl {

/// State-space quadruple for the recursion
///   x_{k+1} = F x_k + G u_k,   y_k = H x_k + D u_k.
///
/// Transfer functions are written in the delay variable: with q the one-step
/// delay, y = T(q) u where T(z) = D + z H (I - z F)^{-1} G.  A transfer is
/// stable (bounded and holomorphic on the open unit disc of the delay
/// variable) iff F is Schur; T(0) = D, and the H-infinity norm is the maximum
/// of sigma_max(T(e^{i w})) over the unit circle.
struct DiscreteSystem {
  Matrix F;  // n x n
  Matrix G;  // n x m
  Matrix H;  // p x n
  Matrix D;  // p x m

  Eigen::Index n_states() const { return F.rows(); }
  Eigen::Index n_in() const { return D.cols(); }
  Eigen::Index n_out() const { return D.rows(); }

  /// Static (memoryless) system y = D u.
  static DiscreteSystem constant(const Matrix& D);
  /// Identity passthrough on p channels.
  static DiscreteSystem identity(Eigen::Index p);

  /// Throws std::invalid_argument when the four blocks are dimensionally
  /// inconsistent.
  void validate() const;
};

/// Point evaluation T(z) = D + z H (I - z F)^{-1} G.
ComplexMatrix evaluate(const DiscreteSystem& sys, const Complex& z);

/// True iff every eigenvalue of F lies strictly inside the unit circle.
bool is_stable(const DiscreteSystem& sys, double margin = 0.0);

/// Series interconnection u -> inner -> outer -> y, i.e. the transfer
/// product outer(z) * inner(z).
DiscreteSystem series(const DiscreteSystem& inner, const DiscreteSystem& outer);

/// Parallel sum T1(z) + T2(z).
DiscreteSystem add(const DiscreteSystem& T1, const DiscreteSystem& T2);

/// Difference T1(z) - T2(z).
DiscreteSystem subtract(const DiscreteSystem& T1, const DiscreteSystem& T2);

/// Scalar multiple a * T(z).
DiscreteSystem scale(const DiscreteSystem& T, double a);

/// Inverse system: requires D square and invertible (then T(z)^{-1} is again
/// a proper system).  Throws std::invalid_argument otherwise.
DiscreteSystem inverse(const DiscreteSystem& T);

/// Finite impulse response in the delay variable:
///   T(z) = coeffs[0] + coeffs[1] z + ... + coeffs[N] z^N,
/// realized as a shift register of the input.  All coefficient blocks must
/// share one shape.
DiscreteSystem fir_system(const std::vector<Matrix>& coeffs);

/// Diagonal weight W(z) I_p with the double boundary zero W(z) = z(z-1),
/// which annihilates constants (z = 1) and enforces strict causality margin
/// at z = 0.
DiscreteSystem boundary_zero_weight(Eigen::Index p);

/// H-infinity norm of a stable transfer: adaptive maximization of
/// sigma_max(T(e^{i w})) over the unit circle.  Starts from a uniform grid
/// (grid_points samples), then refines every local maximum by golden-section
/// search until the relative improvement falls below rel_tol.  Throws
/// std::invalid_argument when F is not Schur stable.
double hinf_norm(const DiscreteSystem& sys, double rel_tol = 1e-6,
                 int grid_points = 512);

/// sigma_max(T(e^{i w})) at a single angle.
double gain_at(const DiscreteSystem& sys, double w);

}  // namespace offsetctrl
