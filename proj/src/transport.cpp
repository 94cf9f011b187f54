#include "emk/transport.hpp"

#include <algorithm>
#include <cmath>

namespace emk {

namespace {
constexpr Complex kI(0.0, 1.0);
}

std::vector<EigenPair> biorthogonal_pairs(const Spectrum& spec) {
  if (spec.classification == PointClass::EP)
    raise(errc::EPInput, "no biorthogonal system at a coalescence point");
  std::vector<EigenPair> pairs;
  const Eigen::Index n = spec.P.rows();
  pairs.reserve(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    EigenPair p;
    p.n = static_cast<int>(k);
    p.eigenvalue = spec.eigenvalues[k];
    p.right = spec.P.col(k);
    p.left = spec.P_inv.row(k).transpose();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<ComplexVector> transport_state_q(const KField& k, const ComplexVector& psi0,
                                             const std::vector<double>& q_grid, double t,
                                             int substeps) {
  if (q_grid.size() < 1) raise(errc::InvalidArgument, "empty q grid");
  if (substeps < 1) raise(errc::InvalidArgument, "substeps must be positive");
  std::vector<ComplexVector> out;
  out.reserve(q_grid.size());
  ComplexVector psi = psi0;
  out.push_back(psi);
  auto rhs = [&k, t](double q, const ComplexVector& v) -> ComplexVector {
    return -kI * (k(q, t) * v);
  };
  for (size_t i = 1; i < q_grid.size(); ++i) {
    double h = (q_grid[i] - q_grid[i - 1]) / substeps;
    double q = q_grid[i - 1];
    for (int s = 0; s < substeps; ++s) {
      ComplexVector k1 = rhs(q, psi);
      ComplexVector k2 = rhs(q + 0.5 * h, psi + 0.5 * h * k1);
      ComplexVector k3 = rhs(q + 0.5 * h, psi + 0.5 * h * k2);
      ComplexVector k4 = rhs(q + h, psi + h * k3);
      psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      q += h;
    }
    out.push_back(psi);
  }
  return out;
}

std::vector<MetricState> evolve_metric_q(const KField& k, const MetricState& g0,
                                         const std::vector<double>& q_grid, double t,
                                         int substeps) {
  if (q_grid.size() < 1) raise(errc::InvalidArgument, "empty q grid");
  if (substeps < 1) raise(errc::InvalidArgument, "substeps must be positive");
  const ComplexMatrix& G0 = g0.G;
  if (G0.rows() != G0.cols()) raise(errc::DimensionMismatch, "metric must be square");
  if (max_abs(G0 - G0.adjoint()) > 1e-8 * std::max(1.0, max_abs(G0)))
    raise(errc::InvalidArgument, "initial metric must be Hermitian");
  {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (G0 + ComplexMatrix(G0.adjoint())));
    if (es.eigenvalues().minCoeff() <= 0.0)
      raise(errc::InvalidArgument, "initial metric must be positive definite");
  }

  std::vector<MetricState> out;
  out.reserve(q_grid.size());
  ComplexMatrix G = 0.5 * (G0 + ComplexMatrix(G0.adjoint()));
  double drift = g0.herm_drift;
  auto rhs = [&k, t](double q, const ComplexMatrix& g) -> ComplexMatrix {
    ComplexMatrix Kq = k(q, t);
    return kI * (g * Kq - Kq.adjoint() * g);
  };
  auto record = [&](double q) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(G);
    if (es.eigenvalues().minCoeff() <= 0.0)
      raise(errc::PositivityLost,
            "metric lost positivity at q = " + std::to_string(q));
    out.push_back({G, q, t, drift});
  };
  record(q_grid[0]);
  for (size_t i = 1; i < q_grid.size(); ++i) {
    double h = (q_grid[i] - q_grid[i - 1]) / substeps;
    double q = q_grid[i - 1];
    for (int s = 0; s < substeps; ++s) {
      ComplexMatrix k1 = rhs(q, G);
      ComplexMatrix k2 = rhs(q + 0.5 * h, G + 0.5 * h * k1);
      ComplexMatrix k3 = rhs(q + 0.5 * h, G + 0.5 * h * k2);
      ComplexMatrix k4 = rhs(q + h, G + h * k3);
      G += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      drift = std::max(drift, max_abs(G - G.adjoint()));
      G = 0.5 * (G + ComplexMatrix(G.adjoint()));
      q += h;
    }
    record(q_grid[i]);
  }
  return out;
}

FidelityResult eigenstate_fidelity(const HamiltonianFamily& fam, int n, double q, double eps) {
  if (eps == 0.0) raise(errc::InvalidArgument, "eps must be nonzero");
  Spectrum s1 = eigendecompose(fam.H(q));
  Spectrum s2 = eigendecompose(fam.H(q + eps));
  if (s1.classification != PointClass::Regular || s2.classification != PointClass::Regular)
    raise(errc::InvalidArgument, "fidelity needs nondegenerate spectra at both points");
  const Eigen::Index dim = s1.P.rows();
  if (n < 0 || n >= dim) raise(errc::InvalidArgument, "state index out of range");

  ComplexVector L1n = s1.P_inv.row(n).transpose();
  // match the branch at q + eps by maximal left-right overlap
  Eigen::Index best = 0;
  double b1 = -1.0, b2 = -1.0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    double o = std::abs((L1n.transpose() * s2.P.col(j)).value());
    if (o > b1) {
      b2 = b1;
      b1 = o;
      best = j;
    } else if (o > b2) {
      b2 = o;
    }
  }
  if (b2 > 0.0 && b1 < 2.0 * b2)
    raise(errc::BranchMismatch, "eigenstate continuation is ambiguous across the step");

  ComplexVector L2m = s2.P_inv.row(best).transpose();
  Complex f = (L1n.transpose() * s2.P.col(best)).value() *
              (L2m.transpose() * s1.P.col(n)).value();
  FidelityResult r;
  r.value = f.real();
  r.imag = f.imag();
  r.matched_index = static_cast<int>(best);
  return r;
}

Complex susceptibility_from_k(const LinearK& k, const EigenPair& pair, double t) {
  ComplexMatrix K = k.eval(t);
  if (K.rows() != K.cols() || K.rows() != pair.right.size())
    raise(errc::DimensionMismatch, "operator and state dimensions differ");
  Complex first = (pair.left.transpose() * K * pair.right).value();
  Complex second = (pair.left.transpose() * K * K * pair.right).value();
  return second - first * first;
}

Complex susceptibility_oracle(const HamiltonianFamily& fam, int n, double q) {
  Spectrum spec = eigendecompose(fam.H(q));
  if (spec.classification != PointClass::Regular)
    raise(errc::DegenerateDenominator, "susceptibility sum needs a nondegenerate spectrum");
  const Eigen::Index dim = spec.P.rows();
  if (n < 0 || n >= dim) raise(errc::InvalidArgument, "state index out of range");
  ComplexMatrix M = spec.P_inv * fam.dH(q) * spec.P;
  Complex chi = 0.0;
  for (Eigen::Index m = 0; m < dim; ++m) {
    if (m == n) continue;
    Complex d = spec.eigenvalues[n] - spec.eigenvalues[m];
    chi += M(n, m) * M(m, n) / (d * d);
  }
  return chi;
}

}  // namespace emk
