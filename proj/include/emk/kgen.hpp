#pragma once

#include <functional>
#include <vector>

#include "emk/linalg.hpp"

namespace emk {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double slack = 1e-12) const { return x >= lo - slack && x <= hi + slack; }
};

struct HamiltonianFamily {
  int dim = 0;
  std::function<ComplexMatrix(double)> H;
  std::function<ComplexMatrix(double)> dH;  // analytic d/dq H
  Interval q_domain{-1e30, 1e30};
  std::vector<double> critical_points;
};

// Max over q_grid of |dH(q) - central difference of H| (entrywise max norm).
double family_fd_mismatch(const HamiltonianFamily& fam, const std::vector<double>& q_grid,
                          double h = 1e-5);

enum class GaugeTag { Adiabatic, RegularDP, RegularEP, ClosedForm, Oracle };

// K(t) = K1 t + K0
struct LinearK {
  ComplexMatrix K1;
  ComplexMatrix K0;
  ComplexMatrix eval(double t) const { return K1 * t + K0; }
};

struct TimeK {
  GaugeTag gauge = GaugeTag::ClosedForm;
  Interval t_domain{0.0, 0.0};
  std::function<ComplexMatrix(double)> eval;
};

std::vector<double> linspace(double a, double b, int n);

// M = P^{-1} (dH) P in the sorted eigenbasis.
ComplexMatrix eigenbasis_m(const Spectrum& spec, const ComplexMatrix& dH);

// Adiabatic gauge: eigenbasis K1 diagonal = m_ii, K0 off-diagonal = -i m_ij / (l_i - l_j),
// plus residual-gauge term sum_k alpha_k C_k from residual_gauge_basis.
LinearK solve_adiabatic(const HamiltonianFamily& fam, double q,
                        const std::vector<Complex>& alpha = {});

// DP-regular gauge: eigenbasis entry m_ij t on (near-)degenerate pairs, else
// i m_ij / (l_j - l_i) [1 - exp(i (l_j - l_i) t)].
TimeK regular_dp_k(const HamiltonianFamily& fam, double q);

// Commutant basis {P E_kk P^{-1}} for nondegenerate spectra.
std::vector<ComplexMatrix> residual_gauge_basis(const Spectrum& spec);

// Max over t_grid of |dK/dt - i[K,H] - dH| (entrywise max norm); central difference in t.
double pde_residual(const TimeK& k, const ComplexMatrix& H, const ComplexMatrix& dH,
                    const std::vector<double>& t_grid, double h = 1e-4);
double pde_residual(const LinearK& k, const ComplexMatrix& H, const ComplexMatrix& dH,
                    const std::vector<double>& t_grid = {0.0, 1.0});

// Homogeneous version: |dK/dt - i[K,H]|.
double gauge_residual(const TimeK& dk, const ComplexMatrix& H, const std::vector<double>& t_grid,
                      double h = 1e-4);

// Fixed-step RK4 on the coupled system dR/dt = i R H, dS/dt = -i H S,
// dF/dt = R dH S from R(0) = S(0) = I, F(0) = K_at_0; K = S F R.
TimeK brute_force_k(const HamiltonianFamily& fam, double q, const std::vector<double>& t_grid,
                    const ComplexMatrix& K_at_0);

}  // namespace emk
