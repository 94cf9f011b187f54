#pragma once

#include "emk/kgen.hpp"

namespace emk {

// Upper-triangular S with S(i,k) = c^{k-1} / prod_{j<=k, j!=i} (l_i - l_j) for i <= k.
// Diagonalizes away the eigenvector ambiguity: Lambda S = S J with J bidiagonal (l_i; c).
ComplexMatrix build_stilde(const std::vector<Complex>& lambdas, Complex c, double tol = 1e-12);

// Upper-triangular propagator W with diagonal exp(i l_i t), first superdiagonal
// c E_{i,i+1} / l_{i,i+1}, and the 3x3 second superdiagonal divided-difference entry;
// E_ij = exp(i l_i t) - exp(i l_j t), l_ij = l_i - l_j. Sizes 1..3.
ComplexMatrix build_wtilde(const std::vector<Complex>& lambdas, Complex c, double t,
                           double tol = 1e-12);

// Confluent limit: exp(i lambda t) (I + diag_1(i c t) + diag_2(-c^2 t^2 / 2)), sizes 1..3.
ComplexMatrix w_ep(int n, Complex lambda, Complex c, double t);

// Max over t_grid of |W^{-1} dW/dt - i J_ep| with dW/dt by central difference.
double wep_check(const ComplexMatrix& J_ep, Complex lambda, Complex c,
                 const std::vector<double>& t_grid, double h = 1e-4);

// Divide each column by its anchor_row entry.
ComplexMatrix rescale_columns(const ComplexMatrix& Ptilde, int anchor_row, double tol = 1e-12);

struct EPVicinityGauge {
  Complex c{};
  double q_ep = 0.0;
  int anchor_row = 0;
  ComplexMatrix Q_ep;  // generalized-eigenvector chain at the EP, anchor-normalized
  ComplexMatrix J_ep;
  std::function<ComplexMatrix(double)> Qtilde;          // q -> rescaled P(q) S(q)
  std::function<ComplexMatrix(double, double)> Wtilde;  // (q, t) -> W; limit form at q_ep
};

EPVicinityGauge make_ep_vicinity_gauge(const HamiltonianFamily& fam, double q_ep,
                                       Complex c = Complex(1.0, 0.0));

// K(t) = Q W(t)^{-1} [I(t) - I(t0) + C] W(t) Q^{-1} with dI/dt = W B W^{-1},
// B = Q^{-1} dH Q, C fixed so K(t0) = K_at_t0. Continuous through q_ep.
TimeK continuous_k_near_ep(const HamiltonianFamily& fam, double q_ep, double q,
                           const std::vector<double>& t_grid, const ComplexMatrix& K_at_t0,
                           double t0 = 0.0, double radius = 0.5, Complex c = Complex(1.0, 0.0));

}  // namespace emk
