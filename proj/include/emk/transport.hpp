#pragma once

#include "emk/kgen.hpp"

namespace emk {

struct EigenPair {
  int n = 0;
  Complex eigenvalue{};
  ComplexVector right;  // H right = eigenvalue right
  ComplexVector left;   // row of P^{-1}: left . right' = delta
};

std::vector<EigenPair> biorthogonal_pairs(const Spectrum& spec);

// K as a field over (q, t).
using KField = std::function<ComplexMatrix(double q, double t)>;

// Integrates d psi / dq = -i K(q, t) psi along q_grid at fixed t (RK4, `substeps`
// steps between grid nodes). Returns psi at every grid node.
std::vector<ComplexVector> transport_state_q(const KField& k, const ComplexVector& psi0,
                                             const std::vector<double>& q_grid, double t,
                                             int substeps = 8);

struct MetricState {
  ComplexMatrix G;  // Hermitian positive definite
  double q = 0.0;
  double t = 0.0;
  double herm_drift = 0.0;  // max Hermiticity deviation removed by symmetrization so far
};

// Integrates dG/dq = i G K - i K^dag G; G symmetrized each step, positivity checked
// at grid nodes.
std::vector<MetricState> evolve_metric_q(const KField& k, const MetricState& g0,
                                         const std::vector<double>& q_grid, double t,
                                         int substeps = 8);

struct FidelityResult {
  double value = 0.0;  // Re of the double-bracket product
  double imag = 0.0;
  int matched_index = 0;  // branch at q + eps matched to state n at q
};

// F = [L_n(q) . R_m(q+eps)] [L_m(q+eps) . R_n(q)] with m chosen by maximal overlap.
FidelityResult eigenstate_fidelity(const HamiltonianFamily& fam, int n, double q, double eps);

// <K^2>_n - <K>_n^2 in the biorthogonal inner product.
Complex susceptibility_from_k(const LinearK& k, const EigenPair& pair, double t);

// Perturbation sum over intermediate states: sum_{m != n} M_nm M_mn / (l_n - l_m)^2.
Complex susceptibility_oracle(const HamiltonianFamily& fam, int n, double q);

}  // namespace emk
