#include "offsetctrl/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace offsetctrl {

Matrix expm(const Matrix& A, double t) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("expm: matrix must be square");
  }
  return (A * t).exp();
}

Matrix exp_integral(const Matrix& A, const Matrix& B, double t) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("exp_integral: A must be square");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument("exp_integral: B must have as many rows as A");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, m) = B;
  // exp(aug * t) = [[exp(At), \int_0^t exp(As)B ds], [0, I]].
  return expm(aug, t).topRightCorner(n, m);
}

double spectral_radius(const Matrix& F) {
  if (F.rows() != F.cols()) {
    throw std::invalid_argument("spectral_radius: matrix must be square");
  }
  if (F.rows() == 0) {
    return 0.0;
  }
  return F.eigenvalues().cwiseAbs().maxCoeff();
}

double sigma_max(const Matrix& M) {
  if (M.rows() == 0 || M.cols() == 0) {
    return 0.0;
  }
  return M.jacobiSvd().singularValues()(0);
}

double sigma_max(const ComplexMatrix& M) {
  if (M.rows() == 0 || M.cols() == 0) {
    return 0.0;
  }
  return M.jacobiSvd().singularValues()(0);
}

Matrix solve_dare(const Matrix& F, const Matrix& G, const Matrix& Q, const Matrix& R,
                  double* residual_out) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || Q.rows() != n || Q.cols() != n || G.rows() != n ||
      R.rows() != G.cols() || R.cols() != G.cols()) {
    throw std::invalid_argument("solve_dare: inconsistent dimensions");
  }
  // Structure-preserving doubling: with A_0 = F, G_0 = G R^{-1} G', H_0 = Q,
  //   A_{k+1} = A_k W^{-1} A_k,  G_{k+1} = G_k + A_k W^{-1} G_k A_k',
  //   H_{k+1} = H_k + A_k' H_k W^{-1} A_k,    W = I + G_k H_k,
  // H_k converges quadratically to the stabilizing solution.  The Riccati
  // difference recursion is hopeless here: one sampling period of a strongly
  // unstable plant amplifies roundoff by ||F||^2 per step.
  Matrix Ak = F;
  Matrix Gk = G * R.ldlt().solve(Matrix(G.transpose()));
  Matrix Hk = Q;
  const Matrix eye = Matrix::Identity(n, n);
  bool converged = false;
  for (int it = 0; it < 120; ++it) {
    const Matrix W = eye + Gk * Hk;
    Eigen::FullPivLU<Matrix> lu(W);
    if (!lu.isInvertible()) {
      throw std::runtime_error(
          "solve_dare: doubling step singular (pair not stabilizable?)");
    }
    const Matrix WinvA = lu.solve(Ak);
    const Matrix WinvG = lu.solve(Gk);
    const Matrix An = Ak * WinvA;
    const Matrix Gn = Gk + Ak * WinvG * Ak.transpose();
    Matrix Hn = Hk + Ak.transpose() * (Hk * WinvA);
    Hn = 0.5 * (Hn + Hn.transpose());
    const double delta = (Hn - Hk).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, Hn.cwiseAbs().maxCoeff());
    Ak = An;
    Gk = 0.5 * (Gn + Gn.transpose());
    Hk = Hn;
    if (!Ak.allFinite() || !Gk.allFinite() || !Hk.allFinite()) {
      throw std::runtime_error("solve_dare: iteration diverged (pair not stabilizable?)");
    }
    if (delta < 1e-14 * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw std::runtime_error("solve_dare: no convergence within iteration budget");
  }
  const Matrix P = Hk;
  // Fixed-point residual ||P - f(P)||_max, reported for diagnostics.
  Matrix GtP = G.transpose() * P;
  Matrix S = R + GtP * G;
  Matrix K = S.ldlt().solve(GtP * F);
  Matrix res = P - (Q + F.transpose() * P * F - F.transpose() * P * G * K);
  if (residual_out != nullptr) {
    *residual_out = res.cwiseAbs().maxCoeff();
  }
  return P;
}

Matrix dlqr_gain(const Matrix& F, const Matrix& G, const Matrix& Q, const Matrix& R,
                 double* residual_out) {
  Matrix P = solve_dare(F, G, Q, R, residual_out);
  Matrix GtP = G.transpose() * P;
  return (R + GtP * G).ldlt().solve(GtP * F);
}

Matrix solve_dlyap(const Matrix& A, const Matrix& Q) {
  if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw std::invalid_argument("solve_dlyap: inconsistent dimensions");
  }
  if (spectral_radius(A) >= 1.0) {
    throw std::invalid_argument("solve_dlyap: A must be Schur stable");
  }
  // Doubling: X_{k+1} = X_k + A_k X_k A_k', A_{k+1} = A_k^2 accumulates
  // sum_j A^j Q (A')^j with quadratically shrinking tail.
  Matrix X = Q;
  Matrix Ak = A;
  for (int it = 0; it < 200; ++it) {
    Matrix term = Ak * X * Ak.transpose();
    X += term;
    if (term.cwiseAbs().maxCoeff() < 1e-16 * std::max(1.0, X.cwiseAbs().maxCoeff())) {
      break;
    }
    Ak = Ak * Ak;
  }
  return 0.5 * (X + X.transpose());
}

namespace {

bool pbh_rank_ok(const Matrix& A, const Matrix& B, const Complex& s, double rel_tol) {
  const Eigen::Index n = A.rows();
  ComplexMatrix pencil(n, n + B.cols());
  pencil.leftCols(n) = s * ComplexMatrix::Identity(n, n) - A.cast<Complex>();
  pencil.rightCols(B.cols()) = B.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(pencil);
  const auto& sv = svd.singularValues();
  return sv(n - 1) > rel_tol * std::max(sv(0), 1.0);
}

}  // namespace

bool pbh_stabilizable(const Matrix& A, const Matrix& B, bool continuous_time,
                      double rel_tol) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw std::invalid_argument("pbh_stabilizable: inconsistent dimensions");
  }
  for (const Complex& s : eigenvalues(A)) {
    const bool unstable = continuous_time ? (s.real() >= 0.0) : (std::abs(s) >= 1.0);
    if (unstable && !pbh_rank_ok(A, B, s, rel_tol)) {
      return false;
    }
  }
  return true;
}

bool pbh_detectable(const Matrix& A, const Matrix& C, bool continuous_time,
                    double rel_tol) {
  return pbh_stabilizable(A.transpose(), C.transpose(), continuous_time, rel_tol);
}

double maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                       double rel_tol, double* argmax) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  double best = f1;
  double best_x = x1;
  if (f2 > best) {
    best = f2;
    best_x = x2;
  }
  const double span = b - a;
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
    const double cur = std::max(f1, f2);
    const double cur_x = (f1 >= f2) ? x1 : x2;
    const bool narrow = (b - a) < 1e-6 * std::max(span, 1.0);
    const bool stalled = cur - best <= rel_tol * std::max(best, 1e-300);
    if (cur > best) {
      best = cur;
      best_x = cur_x;
    }
    if (stalled && narrow) break;
  }
  if (argmax != nullptr) *argmax = best_x;
  return best;
}

std::vector<Complex> eigenvalues(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("eigenvalues: matrix must be square");
  }
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  std::vector<Complex> out(static_cast<size_t>(A.rows()));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    out[static_cast<size_t>(i)] = es.eigenvalues()(i);
  }
  return out;
}

}  // namespace offsetctrl
