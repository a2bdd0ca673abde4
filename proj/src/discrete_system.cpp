#include "offsetctrl/discrete_system.hpp"

#include "offsetctrl/kernels.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace offsetctrl {

DiscreteSystem DiscreteSystem::constant(const Matrix& D) {
  DiscreteSystem sys;
  sys.F = Matrix::Zero(0, 0);
  sys.G = Matrix::Zero(0, D.cols());
  sys.H = Matrix::Zero(D.rows(), 0);
  sys.D = D;
  return sys;
}

DiscreteSystem DiscreteSystem::identity(Eigen::Index p) {
  return constant(Matrix::Identity(p, p));
}

void DiscreteSystem::validate() const {
  const Eigen::Index n = F.rows();
  if (F.cols() != n) {
    throw std::invalid_argument("DiscreteSystem: F must be square");
  }
  if (G.rows() != n || H.cols() != n) {
    throw std::invalid_argument("DiscreteSystem: state dimension mismatch");
  }
  if (D.rows() != H.rows() || D.cols() != G.cols()) {
    throw std::invalid_argument("DiscreteSystem: input/output dimension mismatch");
  }
}

ComplexMatrix evaluate(const DiscreteSystem& sys, const Complex& z) {
  sys.validate();
  if (sys.n_states() == 0) {
    return sys.D.cast<Complex>();
  }
  const Eigen::Index n = sys.n_states();
  ComplexMatrix lhs = ComplexMatrix::Identity(n, n) - z * sys.F.cast<Complex>();
  Eigen::PartialPivLU<ComplexMatrix> lu(lhs);
  ComplexMatrix X = lu.solve(sys.G.cast<Complex>());
  return sys.D.cast<Complex>() + z * sys.H.cast<Complex>() * X;
}

bool is_stable(const DiscreteSystem& sys, double margin) {
  sys.validate();
  if (sys.n_states() == 0) {
    return true;
  }
  return spectral_radius(sys.F) < 1.0 - margin;
}

DiscreteSystem series(const DiscreteSystem& inner, const DiscreteSystem& outer) {
  inner.validate();
  outer.validate();
  if (outer.n_in() != inner.n_out()) {
    throw std::invalid_argument("series: outer input width must match inner output width");
  }
  const Eigen::Index ni = inner.n_states();
  const Eigen::Index no = outer.n_states();
  DiscreteSystem sys;
  sys.F = Matrix::Zero(ni + no, ni + no);
  sys.F.topLeftCorner(ni, ni) = inner.F;
  sys.F.bottomLeftCorner(no, ni) = outer.G * inner.H;
  sys.F.bottomRightCorner(no, no) = outer.F;
  sys.G = Matrix::Zero(ni + no, inner.n_in());
  sys.G.topRows(ni) = inner.G;
  sys.G.bottomRows(no) = outer.G * inner.D;
  sys.H = Matrix::Zero(outer.n_out(), ni + no);
  sys.H.leftCols(ni) = outer.D * inner.H;
  sys.H.rightCols(no) = outer.H;
  sys.D = outer.D * inner.D;
  return sys;
}

DiscreteSystem add(const DiscreteSystem& T1, const DiscreteSystem& T2) {
  T1.validate();
  T2.validate();
  if (T1.n_in() != T2.n_in() || T1.n_out() != T2.n_out()) {
    throw std::invalid_argument("add: operands must share input/output dimensions");
  }
  const Eigen::Index n1 = T1.n_states();
  const Eigen::Index n2 = T2.n_states();
  DiscreteSystem sys;
  sys.F = Matrix::Zero(n1 + n2, n1 + n2);
  sys.F.topLeftCorner(n1, n1) = T1.F;
  sys.F.bottomRightCorner(n2, n2) = T2.F;
  sys.G = Matrix::Zero(n1 + n2, T1.n_in());
  sys.G.topRows(n1) = T1.G;
  sys.G.bottomRows(n2) = T2.G;
  sys.H = Matrix::Zero(T1.n_out(), n1 + n2);
  sys.H.leftCols(n1) = T1.H;
  sys.H.rightCols(n2) = T2.H;
  sys.D = T1.D + T2.D;
  return sys;
}

DiscreteSystem subtract(const DiscreteSystem& T1, const DiscreteSystem& T2) {
  return add(T1, scale(T2, -1.0));
}

DiscreteSystem scale(const DiscreteSystem& T, double a) {
  DiscreteSystem sys = T;
  sys.H *= a;
  sys.D *= a;
  return sys;
}

DiscreteSystem inverse(const DiscreteSystem& T) {
  T.validate();
  if (T.n_in() != T.n_out()) {
    throw std::invalid_argument("inverse: system must be square");
  }
  Eigen::FullPivLU<Matrix> lu(T.D);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("inverse: feedthrough D is singular, inverse is not proper");
  }
  Matrix Dinv = lu.inverse();
  DiscreteSystem sys;
  sys.F = T.F - T.G * Dinv * T.H;
  sys.G = T.G * Dinv;
  sys.H = -Dinv * T.H;
  sys.D = Dinv;
  return sys;
}

DiscreteSystem fir_system(const std::vector<Matrix>& coeffs) {
  if (coeffs.empty()) {
    throw std::invalid_argument("fir_system: need at least the constant coefficient");
  }
  const Eigen::Index p = coeffs[0].rows();
  const Eigen::Index m = coeffs[0].cols();
  for (const Matrix& c : coeffs) {
    if (c.rows() != p || c.cols() != m) {
      throw std::invalid_argument("fir_system: all coefficient blocks must share one shape");
    }
  }
  const Eigen::Index N = static_cast<Eigen::Index>(coeffs.size()) - 1;
  DiscreteSystem sys;
  sys.F = Matrix::Zero(N * m, N * m);
  for (Eigen::Index k = 1; k < N; ++k) {
    sys.F.block(k * m, (k - 1) * m, m, m) = Matrix::Identity(m, m);
  }
  sys.G = Matrix::Zero(N * m, m);
  if (N > 0) {
    sys.G.topRows(m) = Matrix::Identity(m, m);
  }
  sys.H = Matrix::Zero(p, N * m);
  for (Eigen::Index k = 1; k <= N; ++k) {
    sys.H.middleCols((k - 1) * m, m) = coeffs[static_cast<size_t>(k)];
  }
  sys.D = coeffs[0];
  return sys;
}

DiscreteSystem boundary_zero_weight(Eigen::Index p) {
  // W(z) = z(z - 1) = -z + z^2 as a two-tap FIR on each channel.
  std::vector<Matrix> coeffs(3);
  coeffs[0] = Matrix::Zero(p, p);
  coeffs[1] = -Matrix::Identity(p, p);
  coeffs[2] = Matrix::Identity(p, p);
  return fir_system(coeffs);
}

double gain_at(const DiscreteSystem& sys, double w) {
  return sigma_max(evaluate(sys, std::polar(1.0, w)));
}

double hinf_norm(const DiscreteSystem& sys, double rel_tol, int grid_points) {
  sys.validate();
  if (sys.n_states() > 0 && spectral_radius(sys.F) >= 1.0) {
    throw std::invalid_argument("hinf_norm: transfer is not stable");
  }
  if (sys.n_states() == 0) {
    return sigma_max(sys.D);
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t n = static_cast<std::size_t>(grid_points);
  std::vector<double> gains = kernels::grid_map<double>(n, [&](std::size_t i) {
    return gain_at(sys, two_pi * static_cast<double>(i) / static_cast<double>(n));
  });
  double best = 0.0;
  for (double g : gains) {
    best = std::max(best, g);
  }
  // Refine every grid-local maximum; the frequency response is smooth between
  // singular-value crossings, so golden-section around each candidate closes
  // the gap between grid max and true max.
  const std::function<double(double)> f = [&](double w) { return gain_at(sys, w); };
  const double step = two_pi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = gains[(i + n - 1) % n];
    const double next = gains[(i + 1) % n];
    if (gains[i] >= prev && gains[i] >= next) {
      const double w = two_pi * static_cast<double>(i) / static_cast<double>(n);
      best = std::max(best, maximize_scalar(f, w - step, w + step, rel_tol));
    }
  }
  return best;
}

}  // namespace offsetctrl
