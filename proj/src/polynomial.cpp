#include "offsetctrl/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offsetctrl {

Polynomial Polynomial::constant(double value) { return Polynomial({value}); }

Polynomial Polynomial::linear(double c0, double c1) { return Polynomial({c0, c1}); }

int Polynomial::degree() const {
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
    if (c[static_cast<std::size_t>(k)] != 0.0) return k;
  }
  return -1;
}

double Polynomial::eval(double x) const {
  double acc = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
    acc = acc * x + c[static_cast<std::size_t>(k)];
  }
  return acc;
}

Complex Polynomial::eval(const Complex& z) const {
  Complex acc = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
    acc = acc * z + c[static_cast<std::size_t>(k)];
  }
  return acc;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  out.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
  for (std::size_t k = 0; k < a.c.size(); ++k) out.c[k] += a.c[k];
  for (std::size_t k = 0; k < b.c.size(); ++k) out.c[k] += b.c[k];
  return out;
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  out.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
  for (std::size_t k = 0; k < a.c.size(); ++k) out.c[k] += a.c[k];
  for (std::size_t k = 0; k < b.c.size(); ++k) out.c[k] -= b.c[k];
  return out;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c.empty() || b.c.empty()) return Polynomial{};
  Polynomial out;
  out.c.assign(a.c.size() + b.c.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    for (std::size_t j = 0; j < b.c.size(); ++j) {
      out.c[i + j] += a.c[i] * b.c[j];
    }
  }
  return out;
}

Polynomial operator*(double s, const Polynomial& p) {
  Polynomial out = p;
  for (double& v : out.c) v *= s;
  return out;
}

Polynomial trim(const Polynomial& p, double rel_tol) {
  const double scale = p.max_abs_coeff();
  if (scale == 0.0) return Polynomial{};
  Polynomial out = p;
  while (!out.c.empty() && std::abs(out.c.back()) < rel_tol * scale) {
    out.c.pop_back();
  }
  return out;
}

std::vector<Complex> poly_roots(const Polynomial& p) {
  const Polynomial q = trim(p);
  const int n = q.degree();
  if (n < 1) {
    throw std::invalid_argument("poly_roots: polynomial must have degree >= 1");
  }
  // Companion matrix of the monic normalization; its eigenvalues are the roots.
  const double lead = q.c[static_cast<std::size_t>(n)];
  Matrix comp = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    comp(i, n - 1) = -q.c[static_cast<std::size_t>(i)] / lead;
  }
  Eigen::EigenSolver<Matrix> es(comp, /*computeEigenvectors=*/false);
  std::vector<Complex> roots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

Polynomial deflate(const Polynomial& p, double root, double* remainder) {
  const Polynomial q = trim(p);
  const int n = q.degree();
  if (n < 1) {
    throw std::invalid_argument("deflate: polynomial must have degree >= 1");
  }
  Polynomial out;
  out.c.assign(static_cast<std::size_t>(n), 0.0);
  double carry = q.c[static_cast<std::size_t>(n)];
  for (int k = n - 1; k >= 0; --k) {
    out.c[static_cast<std::size_t>(k)] = carry;
    carry = q.c[static_cast<std::size_t>(k)] + root * carry;
  }
  if (remainder != nullptr) *remainder = carry;
  return out;
}

Complex RationalFn::eval(const Complex& z) const { return num.eval(z) / den.eval(z); }

double RationalFn::eval(double x) const { return num.eval(x) / den.eval(x); }

DiscreteSystem rational_to_system(const RationalFn& r) {
  const Polynomial num = trim(r.num);
  const Polynomial den = trim(r.den);
  if (den.degree() < 0) {
    throw std::invalid_argument("rational_to_system: zero denominator");
  }
  if (std::abs(den.c[0]) < 1e-12 * den.max_abs_coeff()) {
    throw std::invalid_argument(
        "rational_to_system: denominator vanishes at z = 0 (not realizable as a "
        "causal system)");
  }
  const int order = std::max(std::max(num.degree(), den.degree()), 0);

  // Rewrite both polynomials in the reciprocal variable w = 1/z by reversing
  // (zero-padded) coefficient lists; the shared power of w cancels in the
  // ratio.  The resulting classical transfer in w has a nonzero leading
  // denominator coefficient exactly when den(0) != 0, checked above.
  std::vector<double> bw(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<double> aw(static_cast<std::size_t>(order) + 1, 0.0);
  for (int k = 0; k <= order; ++k) {
    const int src = order - k;
    if (src < static_cast<int>(num.c.size())) {
      bw[static_cast<std::size_t>(k)] = num.c[static_cast<std::size_t>(src)];
    }
    if (src < static_cast<int>(den.c.size())) {
      aw[static_cast<std::size_t>(k)] = den.c[static_cast<std::size_t>(src)];
    }
  }
  const double lead = aw[static_cast<std::size_t>(order)];
  for (double& v : bw) v /= lead;
  for (double& v : aw) v /= lead;

  const double feedthrough = bw[static_cast<std::size_t>(order)];

  DiscreteSystem sys;
  sys.F = Matrix::Zero(order, order);
  sys.G = Matrix::Zero(order, 1);
  sys.H = Matrix::Zero(1, order);
  sys.D = Matrix::Constant(1, 1, feedthrough);
  if (order == 0) return sys;

  // Controller-companion ("controllable canonical") form in w.
  for (int j = 0; j < order; ++j) {
    sys.F(0, j) = -aw[static_cast<std::size_t>(order - 1 - j)];
  }
  for (int i = 1; i < order; ++i) sys.F(i, i - 1) = 1.0;
  sys.G(0, 0) = 1.0;
  for (int j = 0; j < order; ++j) {
    const std::size_t k = static_cast<std::size_t>(order - 1 - j);
    sys.H(0, j) = bw[k] - feedthrough * aw[k];
  }
  return sys;
}

}  // namespace offsetctrl
