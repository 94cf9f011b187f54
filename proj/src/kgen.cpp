#include "emk/kgen.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace emk {

namespace {
constexpr Complex kI(0.0, 1.0);
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) raise(errc::InvalidArgument, "linspace needs at least one point");
  std::vector<double> v(static_cast<size_t>(n));
  if (n == 1) {
    v[0] = a;
    return v;
  }
  double step = (b - a) / (n - 1);
  for (int k = 0; k < n; ++k) v[static_cast<size_t>(k)] = a + k * step;
  v.back() = b;
  return v;
}

double family_fd_mismatch(const HamiltonianFamily& fam, const std::vector<double>& q_grid,
                          double h) {
  if (!(h > 0)) raise(errc::InvalidArgument, "h must be positive");
  double worst = 0.0;
  for (double q : q_grid) {
    ComplexMatrix fd = (fam.H(q + h) - fam.H(q - h)) / (2.0 * h);
    worst = std::max(worst, max_abs(fam.dH(q) - fd));
  }
  return worst;
}

ComplexMatrix eigenbasis_m(const Spectrum& spec, const ComplexMatrix& dH) {
  if (spec.classification == PointClass::EP)
    raise(errc::EPInput, "eigenbasis representation is not defined at an EP");
  const Eigen::Index n = spec.P.rows();
  if (dH.rows() != n || dH.cols() != n)
    raise(errc::DimensionMismatch, "dH dimension does not match the spectrum");
  ComplexMatrix resid = spec.P * spec.P_inv - ComplexMatrix::Identity(n, n);
  if (max_abs(resid) > 1e-8)
    raise(errc::SingularP, "eigenvector matrix is not invertible to tolerance");
  return spec.P_inv * dH * spec.P;
}

LinearK solve_adiabatic(const HamiltonianFamily& fam, double q, const std::vector<Complex>& alpha) {
  ComplexMatrix H = fam.H(q);
  ComplexMatrix dH = fam.dH(q);
  Spectrum spec = eigendecompose(H);
  ComplexMatrix M = eigenbasis_m(spec, dH);
  const Eigen::Index n = H.rows();
  const double gtol = gap_tolerance(H);

  ComplexMatrix K1t = ComplexMatrix::Zero(n, n);
  ComplexMatrix K0t = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K1t(i, i) = M(i, i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Complex de = spec.eigenvalues[i] - spec.eigenvalues[j];
      if (std::abs(de) < gtol) {
        if (std::abs(M(i, j)) > 1e-10)
          raise(errc::AdiabaticSingular,
                "degenerate pair with nonzero coupling; the adiabatic gauge diverges here");
        K1t(i, j) = M(i, j);  // 0/0 resolved to the secular t-term
      } else {
        K0t(i, j) = -kI * M(i, j) / de;
      }
    }
  }

  LinearK out;
  out.K1 = spec.P * K1t * spec.P_inv;
  out.K0 = spec.P * K0t * spec.P_inv;
  if (!alpha.empty()) {
    if (static_cast<Eigen::Index>(alpha.size()) != n)
      raise(errc::InvalidArgument, "alpha must have one coefficient per eigenvalue");
    std::vector<ComplexMatrix> basis = residual_gauge_basis(spec);
    for (Eigen::Index k = 0; k < n; ++k) out.K0 += alpha[static_cast<size_t>(k)] * basis[static_cast<size_t>(k)];
  }
  return out;
}

TimeK regular_dp_k(const HamiltonianFamily& fam, double q) {
  ComplexMatrix H = fam.H(q);
  ComplexMatrix dH = fam.dH(q);
  Spectrum spec = eigendecompose(H);
  if (spec.classification == PointClass::EP)
    raise(errc::EPInput, "the DP-regular gauge requires a diagonalizable point");
  ComplexMatrix M = eigenbasis_m(spec, dH);
  const double gtol = gap_tolerance(H);
  const Eigen::Index n = H.rows();
  ComplexMatrix P = spec.P, Pinv = spec.P_inv;
  std::vector<Complex> lam = spec.eigenvalues;

  TimeK out;
  out.gauge = GaugeTag::RegularDP;
  out.t_domain = {-1e300, 1e300};
  out.eval = [=](double t) {
    ComplexMatrix Kt(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        Complex d = lam[static_cast<size_t>(j)] - lam[static_cast<size_t>(i)];
        if (std::abs(d) < gtol)
          Kt(i, j) = M(i, j) * t;
        else
          Kt(i, j) = kI * M(i, j) / d * (1.0 - std::exp(kI * d * t));
      }
    return ComplexMatrix(P * Kt * Pinv);
  };
  return out;
}

std::vector<ComplexMatrix> residual_gauge_basis(const Spectrum& spec) {
  if (spec.classification != PointClass::Regular)
    raise(errc::DegenerateSpectrum,
          "commutant basis is only the diagonal algebra for distinct eigenvalues");
  const Eigen::Index n = spec.P.rows();
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    ComplexMatrix E = ComplexMatrix::Zero(n, n);
    E(k, k) = 1.0;
    basis.push_back(spec.P * E * spec.P_inv);
  }
  return basis;
}

namespace {

double clamp_probe(double t, const Interval& dom, double h) {
  double lo = dom.lo + h, hi = dom.hi - h;
  if (lo > hi) raise(errc::InvalidArgument, "t_domain too narrow for the finite-difference step");
  return std::min(std::max(t, lo), hi);
}

}  // namespace

double pde_residual(const TimeK& k, const ComplexMatrix& H, const ComplexMatrix& dH,
                    const std::vector<double>& t_grid, double h) {
  if (!(h > 0)) raise(errc::InvalidArgument, "h must be positive");
  double worst = 0.0;
  for (double t0 : t_grid) {
    double t = clamp_probe(t0, k.t_domain, h);
    ComplexMatrix dK = (k.eval(t + h) - k.eval(t - h)) / (2.0 * h);
    worst = std::max(worst, max_abs(dK - kI * commutator(k.eval(t), H) - dH));
  }
  return worst;
}

double pde_residual(const LinearK& k, const ComplexMatrix& H, const ComplexMatrix& dH,
                    const std::vector<double>& t_grid) {
  double worst = 0.0;
  for (double t : t_grid)
    worst = std::max(worst, max_abs(k.K1 - kI * commutator(k.eval(t), H) - dH));
  return worst;
}

double gauge_residual(const TimeK& dk, const ComplexMatrix& H, const std::vector<double>& t_grid,
                      double h) {
  if (!(h > 0)) raise(errc::InvalidArgument, "h must be positive");
  double worst = 0.0;
  for (double t0 : t_grid) {
    double t = clamp_probe(t0, dk.t_domain, h);
    ComplexMatrix dK = (dk.eval(t + h) - dk.eval(t - h)) / (2.0 * h);
    worst = std::max(worst, max_abs(dK - kI * commutator(dk.eval(t), H)));
  }
  return worst;
}

TimeK brute_force_k(const HamiltonianFamily& fam, double q, const std::vector<double>& t_grid,
                    const ComplexMatrix& K_at_0) {
  ComplexMatrix H = fam.H(q);
  ComplexMatrix dH = fam.dH(q);
  const Eigen::Index n = H.rows();
  if (K_at_0.rows() != n || K_at_0.cols() != n)
    raise(errc::DimensionMismatch, "K_at_0 dimension does not match the family");
  if (t_grid.empty()) raise(errc::InvalidArgument, "t_grid must be nonempty");
  Spectrum spec = eigendecompose(H);
  if (spec.classification == PointClass::EP)
    raise(errc::EPInput, "oracle integration expects a diagonalizable point");

  double T = 0.0;
  for (double t : t_grid) {
    if (t < 0) raise(errc::InvalidArgument, "oracle integrates forward from t = 0");
    T = std::max(T, t);
  }
  T = std::max(T, 1e-9);

  const double target = 2.5e-4 / std::max(1.0, H.norm());
  const size_t nsteps = static_cast<size_t>(std::ceil(T / target));
  const double hs = T / static_cast<double>(nsteps);

  auto rk4_r = [&](const ComplexMatrix& R, double step) {
    ComplexMatrix k1 = kI * (R * H);
    ComplexMatrix k2 = kI * ((R + 0.5 * step * k1) * H);
    ComplexMatrix k3 = kI * ((R + 0.5 * step * k2) * H);
    ComplexMatrix k4 = kI * ((R + step * k3) * H);
    return ComplexMatrix(R + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };
  auto rk4_s = [&](const ComplexMatrix& S, double step) {
    ComplexMatrix k1 = -kI * (H * S);
    ComplexMatrix k2 = -kI * (H * (S + 0.5 * step * k1));
    ComplexMatrix k3 = -kI * (H * (S + 0.5 * step * k2));
    ComplexMatrix k4 = -kI * (H * (S + step * k3));
    return ComplexMatrix(S + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  ComplexMatrix R = ComplexMatrix::Identity(n, n);
  ComplexMatrix S = R;
  ComplexMatrix F = K_at_0;

  auto table = std::make_shared<std::vector<ComplexMatrix>>();
  table->reserve(nsteps + 1);
  table->push_back(K_at_0);

  for (size_t k = 0; k < nsteps; ++k) {
    if (k % 32 == 0) {
      ComplexMatrix full = rk4_r(R, hs);
      ComplexMatrix halves = rk4_r(rk4_r(R, 0.5 * hs), 0.5 * hs);
      double est = max_abs(full - halves) / 15.0;
      if (est > 1e-12 * std::max(1.0, max_abs(R)))
        raise(errc::StepSizeTooLarge, "local error estimate " + std::to_string(est) +
                                          " exceeds the fixed-step tolerance");
    }
    // One RK4 step of the coupled system (R, S, F) so the accumulated
    // integral keeps the same order as the propagators.
    ComplexMatrix r1 = kI * (R * H);
    ComplexMatrix s1 = -kI * (H * S);
    ComplexMatrix f1 = R * dH * S;
    ComplexMatrix R2 = R + 0.5 * hs * r1, S2 = S + 0.5 * hs * s1;
    ComplexMatrix r2 = kI * (R2 * H);
    ComplexMatrix s2 = -kI * (H * S2);
    ComplexMatrix f2 = R2 * dH * S2;
    ComplexMatrix R3 = R + 0.5 * hs * r2, S3 = S + 0.5 * hs * s2;
    ComplexMatrix r3 = kI * (R3 * H);
    ComplexMatrix s3 = -kI * (H * S3);
    ComplexMatrix f3 = R3 * dH * S3;
    ComplexMatrix R4 = R + hs * r3, S4 = S + hs * s3;
    ComplexMatrix r4 = kI * (R4 * H);
    ComplexMatrix s4 = -kI * (H * S4);
    ComplexMatrix f4 = R4 * dH * S4;
    R += (hs / 6.0) * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    S += (hs / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
    F += (hs / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    table->push_back(S * F * R);
  }

  TimeK out;
  out.gauge = GaugeTag::Oracle;
  out.t_domain = {0.0, T};
  out.eval = [table, hs, T](double t) {
    if (t < -1e-12 || t > T + 1e-9) raise(errc::InvalidArgument, "t outside the oracle domain");
    double x = std::min(std::max(t, 0.0), T) / hs;
    size_t k = std::min(static_cast<size_t>(x), table->size() - 2);
    double w = x - static_cast<double>(k);
    return ComplexMatrix((1.0 - w) * (*table)[k] + w * (*table)[k + 1]);
  };
  return out;
}

}  // namespace emk
