#include "emk/epgauge.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace emk {

namespace {
constexpr Complex kI(0.0, 1.0);

void check_distinct(const std::vector<Complex>& lam, double tol) {
  for (size_t i = 0; i < lam.size(); ++i)
    for (size_t j = i + 1; j < lam.size(); ++j)
      if (std::abs(lam[i] - lam[j]) < tol)
        raise(errc::DegenerateLambdas, "eigenvalues coincide to tolerance");
}
}  // namespace

ComplexMatrix build_stilde(const std::vector<Complex>& lambdas, Complex c, double tol) {
  const size_t n = lambdas.size();
  if (n == 0) raise(errc::InvalidArgument, "empty eigenvalue list");
  if (std::abs(c) == 0.0) raise(errc::InvalidArgument, "c must be nonzero");
  check_distinct(lambdas, tol);
  ComplexMatrix S = ComplexMatrix::Zero(n, n);
  Complex cpow = 1.0;
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i <= k; ++i) {
      Complex denom = 1.0;
      for (size_t j = 0; j <= k; ++j)
        if (j != i) denom *= lambdas[i] - lambdas[j];
      S(i, k) = cpow / denom;
    }
    cpow *= c;
  }
  return S;
}

ComplexMatrix build_wtilde(const std::vector<Complex>& lambdas, Complex c, double t, double tol) {
  const size_t n = lambdas.size();
  if (n == 0 || n > 3)
    raise(errc::InvalidArgument, "triangular propagator supports sizes 1 to 3");
  check_distinct(lambdas, tol);
  std::vector<Complex> e(n);
  for (size_t i = 0; i < n; ++i) e[i] = std::exp(kI * lambdas[i] * t);
  ComplexMatrix W = ComplexMatrix::Zero(n, n);
  for (size_t i = 0; i < n; ++i) W(i, i) = e[i];
  for (size_t i = 0; i + 1 < n; ++i)
    W(i, i + 1) = c * (e[i] - e[i + 1]) / (lambdas[i] - lambdas[i + 1]);
  if (n == 3) {
    Complex l01 = lambdas[0] - lambdas[1];
    Complex l02 = lambdas[0] - lambdas[2];
    Complex l12 = lambdas[1] - lambdas[2];
    W(0, 2) = (c * c / l01) * ((e[0] - e[2]) / l02 - (e[1] - e[2]) / l12);
  }
  return W;
}

ComplexMatrix w_ep(int n, Complex lambda, Complex c, double t) {
  if (n < 1 || n > 3) raise(errc::InvalidArgument, "confluent propagator supports sizes 1 to 3");
  Complex e = std::exp(kI * lambda * t);
  Complex ict = kI * c * t;
  ComplexMatrix W = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) W(i, i) = e;
  for (int i = 0; i + 1 < n; ++i) W(i, i + 1) = e * ict;
  if (n == 3) W(0, 2) = e * ict * ict * 0.5;
  return W;
}

double wep_check(const ComplexMatrix& J_ep, Complex lambda, Complex c,
                 const std::vector<double>& t_grid, double h) {
  if (J_ep.rows() != J_ep.cols() || J_ep.rows() < 1 || J_ep.rows() > 3)
    raise(errc::InvalidArgument, "J must be square of size 1 to 3");
  if (!(h > 0)) raise(errc::InvalidArgument, "h must be positive");
  const int n = static_cast<int>(J_ep.rows());
  double worst = 0.0;
  for (double t : t_grid) {
    ComplexMatrix dW = (w_ep(n, lambda, c, t + h) - w_ep(n, lambda, c, t - h)) / (2.0 * h);
    worst = std::max(worst, max_abs(w_ep(n, lambda, c, t).inverse() * dW - kI * J_ep));
  }
  return worst;
}

ComplexMatrix rescale_columns(const ComplexMatrix& Ptilde, int anchor_row, double tol) {
  if (anchor_row < 0 || anchor_row >= Ptilde.rows())
    raise(errc::InvalidArgument, "anchor row out of range");
  ComplexMatrix out = Ptilde;
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    Complex a = out(anchor_row, k);
    if (std::abs(a) < tol)
      raise(errc::ZeroAnchor, "column " + std::to_string(k) + " vanishes on the anchor row");
    out.col(k) /= a;
  }
  return out;
}

EPVicinityGauge make_ep_vicinity_gauge(const HamiltonianFamily& fam, double q_ep, Complex c) {
  if (fam.dim > 3)
    raise(errc::InvalidArgument, "EP-vicinity gauge supports dimensions 2 and 3");
  JordanBlockData chain;
  try {
    chain = jordanize_single_block(fam.H(q_ep), c);
  } catch (const Error& e) {
    if (e.code() == errc::NotDefective || e.code() == errc::MultiBlock)
      raise(errc::NotSingleBlock, e.what());
    throw;
  }
  Eigen::Index anchor = 0;
  chain.Q.col(0).cwiseAbs().maxCoeff(&anchor);

  EPVicinityGauge g;
  g.c = c;
  g.q_ep = q_ep;
  g.anchor_row = static_cast<int>(anchor);
  g.Q_ep = chain.Q;
  g.J_ep = chain.lambda * ComplexMatrix::Identity(chain.size, chain.size);
  for (int i = 0; i + 1 < chain.size; ++i) g.J_ep(i, i + 1) = c;

  const int size = chain.size;
  const Complex lam_ep = chain.lambda;
  auto Hq = fam.H;
  g.Qtilde = [Hq, q_ep, c, anchor, Q_ep = chain.Q](double q) -> ComplexMatrix {
    if (q == q_ep) return Q_ep;
    Spectrum spec = eigendecompose(Hq(q));
    ComplexMatrix Pr = rescale_columns(spec.P, static_cast<int>(anchor));
    return Pr * build_stilde(spec.eigenvalues, c);
  };
  g.Wtilde = [Hq, q_ep, c, size, lam_ep](double q, double t) -> ComplexMatrix {
    if (q == q_ep) return w_ep(size, lam_ep, c, t);
    Spectrum spec = eigendecompose(Hq(q));
    return build_wtilde(spec.eigenvalues, c, t);
  };
  return g;
}

TimeK continuous_k_near_ep(const HamiltonianFamily& fam, double q_ep, double q,
                           const std::vector<double>& t_grid, const ComplexMatrix& K_at_t0,
                           double t0, double radius, Complex c) {
  if (std::abs(q - q_ep) > radius)
    raise(errc::NeighborhoodTooWide,
          "q is outside the configured neighborhood of the coalescence point");
  if (t_grid.empty()) raise(errc::InvalidArgument, "t_grid must be nonempty");

  EPVicinityGauge g = make_ep_vicinity_gauge(fam, q_ep, c);
  ComplexMatrix Q = g.Qtilde(q);
  ComplexMatrix Qinv = Q.inverse();
  ComplexMatrix B = Qinv * fam.dH(q) * Q;
  const Eigen::Index n = Q.rows();
  if (K_at_t0.rows() != n || K_at_t0.cols() != n)
    raise(errc::DimensionMismatch, "boundary K dimension mismatch");

  double lo = t0, hi = t0;
  for (double t : t_grid) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  const double margin = 0.02;
  const double glo = lo - margin, ghi = hi + margin;
  const double scale = std::max(1.0, fam.H(q).norm());
  const size_t npanels =
      static_cast<size_t>(std::ceil((ghi - glo) / (1e-3 / scale))) + 1;
  const double hs = (ghi - glo) / static_cast<double>(npanels);

  auto W = [g, q](double t) { return g.Wtilde(q, t); };
  auto integrand = [W, B](double t) -> ComplexMatrix {
    ComplexMatrix Wt = W(t);
    return Wt * B * Wt.inverse();
  };

  // cumulative Simpson prefix table over the master grid
  auto table = std::make_shared<std::vector<ComplexMatrix>>();
  table->reserve(npanels + 1);
  table->push_back(ComplexMatrix::Zero(n, n));
  ComplexMatrix f_left = integrand(glo);
  for (size_t k = 0; k < npanels; ++k) {
    double a = glo + k * hs, b = glo + (k + 1) * hs;
    ComplexMatrix f_mid = integrand(0.5 * (a + b));
    ComplexMatrix f_right = integrand(b);
    table->push_back(table->back() + (hs / 6.0) * (f_left + 4.0 * f_mid + f_right));
    f_left = f_right;
  }

  auto integral_to = [table, integrand, glo, hs, npanels](double t) -> ComplexMatrix {
    double x = (t - glo) / hs;
    size_t k = std::min(static_cast<size_t>(std::max(x, 0.0)),
                        npanels - 1);
    double a = glo + k * hs;
    if (t <= a) return (*table)[k];
    ComplexMatrix fa = integrand(a);
    ComplexMatrix fm = integrand(0.5 * (a + t));
    ComplexMatrix fb = integrand(t);
    return (*table)[k] + ((t - a) / 6.0) * (fa + 4.0 * fm + fb);
  };

  ComplexMatrix I_t0 = integral_to(t0);
  ComplexMatrix W_t0 = W(t0);
  ComplexMatrix C = W_t0 * Qinv * K_at_t0 * Q * W_t0.inverse();

  TimeK out;
  out.gauge = GaugeTag::RegularEP;
  out.t_domain = {lo, hi};
  out.eval = [Q, Qinv, W, integral_to, I_t0, C](double t) -> ComplexMatrix {
    ComplexMatrix Wt = W(t);
    return Q * Wt.inverse() * (integral_to(t) - I_t0 + C) * Wt * Qinv;
  };
  return out;
}

}  // namespace emk
