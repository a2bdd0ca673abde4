#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace offsetctrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Matrix exponential exp(A*t).
Matrix expm(const Matrix& A, double t = 1.0);

/// Convolution integral \int_0^t exp(A*s) B ds, computed exactly via the
/// exponential of the augmented block matrix [[A, B], [0, 0]].  Valid for
/// negative t as well (the block identity holds for all t).
Matrix exp_integral(const Matrix& A, const Matrix& B, double t);

/// Largest eigenvalue magnitude.
double spectral_radius(const Matrix& F);

/// Largest singular value (induced 2-norm).
double sigma_max(const Matrix& M);
double sigma_max(const ComplexMatrix& M);

/// Fixed-point (value-iteration) solution of the discrete Riccati equation
///   P = Q + F'PF - F'PG (R + G'PG)^{-1} G'PF.
/// Iterates from P = Q until the update falls below 1e-12 (relative); throws
/// if the iteration diverges, which happens iff (F,G) is not stabilizable.
Matrix solve_dare(const Matrix& F, const Matrix& G, const Matrix& Q, const Matrix& R,
                  double* residual_out = nullptr);

/// State-feedback gain K = (R + G'PG)^{-1} G'PF from solve_dare, so that
/// x+ = (F - G K) x is Schur stable.
Matrix dlqr_gain(const Matrix& F, const Matrix& G, const Matrix& Q, const Matrix& R,
                 double* residual_out = nullptr);

/// Solution X of the discrete Lyapunov equation X = A X A' + Q, by doubling.
/// Requires spectral_radius(A) < 1.
Matrix solve_dlyap(const Matrix& A, const Matrix& Q);

/// PBH test: (A, B) stabilizable, i.e. rank [sI - A, B] = n for every
/// eigenvalue s of A in the indicated unstable region.
/// continuous_time == true  -> unstable region Re(s) >= 0
/// continuous_time == false -> unstable region |s| >= 1
bool pbh_stabilizable(const Matrix& A, const Matrix& B, bool continuous_time,
                      double rel_tol = 1e-9);

/// PBH test for detectability of (A, C): stabilizability of (A', C').
bool pbh_detectable(const Matrix& A, const Matrix& C, bool continuous_time,
                    double rel_tol = 1e-9);

/// Eigenvalues of A.
std::vector<Complex> eigenvalues(const Matrix& A);

/// Golden-section maximization of f over [lo, hi].  Intended for the local
/// refinement step after a grid scan, where f is smooth and unimodal on the
/// bracket.  Returns the best value seen (and the point where it was seen in
/// *argmax when non-null); stops once further improvement falls below
/// rel_tol (relative) with the bracket already narrow.
double maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                       double rel_tol = 1e-10, double* argmax = nullptr);

}  // namespace offsetctrl
