#include "offsetctrl/discretization.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace offsetctrl {

void ContinuousPlant::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw std::invalid_argument("ContinuousPlant: A must be square and nonempty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw std::invalid_argument("ContinuousPlant: B must have as many rows as A");
  }
  if (!A.allFinite() || !B.allFinite()) {
    throw std::invalid_argument("ContinuousPlant: A and B must be finite");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("ContinuousPlant: update period h must be positive");
  }
}

void OffsetInterval::validate(double h) const {
  if (!(lo <= hi)) {
    throw std::invalid_argument("OffsetInterval: lo must not exceed hi");
  }
  if (!(lo > -h) || !(hi < h)) {
    throw std::invalid_argument(
        "OffsetInterval: offsets must lie strictly inside (-h, h)");
  }
}

AssumptionReport check_assumptions(const ContinuousPlant& plant) {
  plant.validate();
  AssumptionReport report;
  report.stabilizable = pbh_stabilizable(plant.A, plant.B, /*continuous_time=*/true);
  if (!report.stabilizable) {
    report.notes.push_back("(A, B) fails the PBH stabilizability test");
  }

  // The sampled plant loses rank when two eigenvalues of A map to the same
  // point of exp(A h): (s_p - s_q) h = 2*pi*i*l for some nonzero integer l.
  const auto eigs = eigenvalues(plant.A);
  const double two_pi = 2.0 * std::numbers::pi;
  for (size_t p = 0; p < eigs.size(); ++p) {
    for (size_t q = p + 1; q < eigs.size(); ++q) {
      const Complex d = (eigs[p] - eigs[q]) * plant.h;
      const double l = std::round(d.imag() / two_pi);
      if (l == 0.0) {
        continue;
      }
      const double miss = std::abs(d - Complex(0.0, two_pi * l));
      const double scale = std::max(1.0, std::abs(d));
      if (miss <= 1e-9 * scale) {
        report.pathological_update = true;
        std::ostringstream msg;
        msg << "update period is pathological: eigenvalue pair separated by "
            << "2*pi*" << l << "*i/h";
        report.notes.push_back(msg.str());
      } else if (miss <= 1e-6 * scale) {
        report.near_pathological = true;
        report.notes.push_back(
            "update period is within 1e-6 of a pathological resonance");
      }
    }
  }
  return report;
}

namespace {

void check_offset(const ContinuousPlant& plant, double delta) {
  if (!(std::abs(delta) < plant.h)) {
    throw std::invalid_argument(
        "offset magnitude must be strictly below the update period");
  }
}

}  // namespace

DiscreteSystem discretize(const ContinuousPlant& plant, double delta) {
  plant.validate();
  check_offset(plant, delta);
  const Eigen::Index n = plant.n();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Lambda = expm(plant.A, plant.h);
  // All blocks are assembled from exponentials and input integrals taken over
  // non-negative horizons only: products like exp(Ah) * \int exp(-A tau) dtau
  // pair a huge factor with a tiny one and lose the result in roundoff once
  // exp(|eig(A)| h) approaches 1/eps, so every formula below is regrouped so
  // intermediate norms match the norm of the value.
  //   Lambda (I + Theta)            = exp(A (h - delta))
  //   -Lambda Theta                 = Lambda - exp(A (h - delta))
  //   Lambda (I + Theta) J2 B       = \int_0^{h-delta} exp(As) B ds
  //   Lambda (J1 - (I+Theta) J2) B  = \int_{h-delta}^{h} exp(As) B ds
  const Matrix step_rest = expm(plant.A, plant.h - delta);
  const Matrix minus_lambda_theta = Lambda - step_rest;
  const Matrix g_tail = exp_integral(plant.A, plant.B, plant.h - delta);
  const Matrix g_head =
      delta >= 0.0 ? Matrix(step_rest * exp_integral(plant.A, plant.B, delta))
                   : Matrix(-Lambda * exp_integral(plant.A, plant.B, -delta));

  // State [x - xhat; xhat]: the estimator re-synchronizes once per period
  // from a sample whose time stamp is off by delta, so the estimate picks up
  // the factor (I + Theta) = exp(-A delta) relative to the true state.
  DiscreteSystem sys;
  sys.F = Matrix::Zero(2 * n, 2 * n);
  sys.F.topLeftCorner(n, n) = minus_lambda_theta;
  sys.F.topRightCorner(n, n) = minus_lambda_theta;
  sys.F.bottomLeftCorner(n, n) = step_rest;
  sys.F.bottomRightCorner(n, n) = step_rest;
  sys.G = Matrix::Zero(2 * n, plant.m());
  sys.G.topRows(n) = g_head;
  sys.G.bottomRows(n) = g_tail;
  sys.H = Matrix::Zero(n, 2 * n);
  sys.H.rightCols(n) = I;
  sys.D = Matrix::Zero(n, plant.m());
  return sys;
}

TransformedRealization discretize_transformed(const ContinuousPlant& plant,
                                              double delta) {
  plant.validate();
  check_offset(plant, delta);
  const Eigen::Index n = plant.n();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Lambda = expm(plant.A, plant.h);

  TransformedRealization trans;
  trans.delta = delta;
  trans.Lambda = Lambda;
  trans.reduced_input = exp_integral(plant.A, plant.B, plant.h);

  // Change of coordinates that isolates the plant-state block: the remaining
  // estimator block becomes deadbeat (zero dynamics matrix).  Same regrouping
  // as in discretize(): the input block of the plant state is exactly the
  // one-period integral (so the reduced regulator argument holds bit-for-bit)
  // and the estimator input block collapses to
  //   -Lambda (I+Theta) (J1 - J2) B = -\int_0^{delta} exp(-As) B ds.
  trans.sys.F = Matrix::Zero(2 * n, 2 * n);
  trans.sys.F.topLeftCorner(n, n) = Lambda;
  trans.sys.G = Matrix::Zero(2 * n, plant.m());
  trans.sys.G.topRows(n) = trans.reduced_input;
  trans.sys.G.bottomRows(n) = -exp_integral(-plant.A, plant.B, delta);
  trans.sys.H = Matrix::Zero(n, 2 * n);
  trans.sys.H.leftCols(n) = expm(plant.A, -delta);  // I + Theta
  trans.sys.H.rightCols(n) = I;
  trans.sys.D = Matrix::Zero(n, plant.m());

  // Output injection with this gain zeroes the whole spectrum: exp(-A delta)
  // is always invertible, so the gain exists for every offset.
  trans.L = Matrix::Zero(2 * n, n);
  trans.L.topRows(n) = expm(plant.A, plant.h + delta);  // Lambda exp(A delta)
  return trans;
}

StabDetectReport check_discrete_stab_detect(const TransformedRealization& trans) {
  StabDetectReport report;
  report.stabilizable =
      pbh_stabilizable(trans.Lambda, trans.reduced_input, /*continuous_time=*/false);
  const Matrix closed = trans.sys.F - trans.L * trans.sys.H;
  report.deadbeat_radius = spectral_radius(closed);
  report.detectable = report.deadbeat_radius < 1.0;
  return report;
}

DisturbanceModel disturbance_map(const ContinuousPlant& plant, double delta,
                                 const Matrix& C, const Matrix& L) {
  plant.validate();
  check_offset(plant, delta);
  const Eigen::Index n = plant.n();
  if (C.cols() != n || L.rows() != n || L.cols() != C.rows()) {
    throw std::invalid_argument("disturbance_map: C must be p x n and L must be n x p");
  }
  const Matrix Aobs = plant.A - L * C;
  double max_re = -1.0 / 0.0;
  for (const Complex& s : eigenvalues(Aobs)) {
    max_re = std::max(max_re, s.real());
  }
  if (!(max_re < 0.0)) {
    throw std::invalid_argument("disturbance_map: A - L C must be Hurwitz");
  }
  DisturbanceModel model;
  model.plant = plant;
  model.delta = delta;
  model.C = C;
  model.L = L;
  model.base = discretize(plant, delta);
  return model;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) {
    throw std::invalid_argument("gauss_legendre: need at least one node");
  }
  nodes.assign(static_cast<size_t>(n), 0.0);
  weights.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-based initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) {
        break;
      }
    }
    nodes[static_cast<size_t>(i)] = -x;
    nodes[static_cast<size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<size_t>(i)] = w;
    weights[static_cast<size_t>(n - 1 - i)] = w;
  }
}

namespace {

/// \int_a^b f(t) dt with a 32-node Gauss-Legendre rule (one panel; the
/// integrands here are analytic inside a single update period).
Vector integrate_gl32(const std::function<Vector(double)>& f, double a, double b,
                      Eigen::Index dim) {
  static std::vector<double> nodes;
  static std::vector<double> weights;
  if (nodes.empty()) {
    gauss_legendre(32, nodes, weights);
  }
  Vector acc = Vector::Zero(dim);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (size_t i = 0; i < nodes.size(); ++i) {
    acc += weights[i] * f(mid + half * nodes[i]);
  }
  return half * acc;
}

}  // namespace

DisturbanceTrace evaluate_disturbances(const DisturbanceModel& model,
                                       const Signal& d_sig, const Signal& n_sig,
                                       const std::function<Vector(int)>& w,
                                       const Vector& e0, int steps,
                                       const std::function<double(int)>& s_frac) {
  const ContinuousPlant& plant = model.plant;
  const Eigen::Index n = plant.n();
  const double h = plant.h;
  const double delta = model.delta;
  if (e0.size() != n) {
    throw std::invalid_argument("evaluate_disturbances: e0 must have plant dimension");
  }
  const Matrix Aobs = plant.A - model.L * model.C;
  const Matrix obs_step = expm(Aobs, h);

  DisturbanceTrace trace;
  trace.d.reserve(static_cast<size_t>(steps));
  trace.e.reserve(static_cast<size_t>(steps) + 1);
  trace.e.push_back(e0);

  // Admissible window for the sampling instant: both the sample time s_k and
  // its offset image s_k + delta must fall inside the current period.
  const double window_lo = std::max(0.0, -delta);
  const double window_len = h - std::abs(delta);

  Vector e = e0;
  for (int k = 0; k < steps; ++k) {
    const double t_k = h * static_cast<double>(k);
    double frac = s_frac ? s_frac(k) : 0.5;
    frac = std::min(std::max(frac, 0.0), 1.0 - 1e-12);
    const double s_off = window_lo + frac * window_len;     // s_k - t_k
    const double shat_off = s_off + delta;                  // shat_k - t_k

    // Mismatch accumulated between the observer state sent at s_k and the
    // true state, rolled forward to the end of the period.
    Vector inner = expm(Aobs, s_off) * e - w(k);
    inner += integrate_gl32(
        [&](double tau) -> Vector {
          const double t_abs = t_k + tau;
          return expm(Aobs, s_off - tau) * (d_sig(t_abs) - model.L * n_sig(t_abs)) -
                 expm(plant.A, s_off - tau) * d_sig(t_abs);
        },
        0.0, s_off, n);
    const Vector d2 = -expm(plant.A, h - shat_off) * inner;

    Vector d1 = integrate_gl32(
        [&](double tau) -> Vector {
          return expm(plant.A, h - tau) * d_sig(t_k + tau);
        },
        0.0, h, n);
    d1 -= d2;

    Vector dk(2 * n);
    dk.head(n) = d1;
    dk.tail(n) = d2;
    trace.d.push_back(dk);

    // Observer error over one full period.
    e = obs_step * e + integrate_gl32(
                           [&](double tau) -> Vector {
                             const double t_abs = t_k + tau;
                             return expm(Aobs, h - tau) *
                                    (d_sig(t_abs) - model.L * n_sig(t_abs));
                           },
                           0.0, h, n);
    trace.e.push_back(e);
  }
  return trace;
}

double disturbance_bound(const DisturbanceModel& model, double d_max, double n_max,
                         double w_max, double e_max) {
  const ContinuousPlant& plant = model.plant;
  const double h = plant.h;
  const Matrix Aobs = plant.A - model.L * model.C;
  double m_plant = 0.0;
  double m_obs = 0.0;
  const int grid = 200;
  for (int i = 0; i <= grid; ++i) {
    const double t = h * static_cast<double>(i) / grid;
    m_plant = std::max(m_plant, sigma_max(expm(plant.A, t)));
    m_obs = std::max(m_obs, sigma_max(expm(Aobs, t)));
  }
  const double l_norm = sigma_max(model.L);
  const double integral_bound = h * (m_obs * (d_max + l_norm * n_max) + m_plant * d_max);
  const double b2 = m_plant * (m_obs * e_max + w_max + integral_bound);
  const double b1 = h * m_plant * d_max + b2;
  return std::sqrt(b1 * b1 + b2 * b2);
}

}  // namespace offsetctrl
