#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "emk/errors.hpp"

namespace emk {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kDefaultGapTolRel = 1e-8;
inline constexpr double kDefaultEpTol = 1e-6;

enum class PointClass { Regular, DP, EP };

const char* to_string(PointClass c);

struct Spectrum {
  std::vector<Complex> eigenvalues;  // sorted by (re, im)
  ComplexMatrix P;                   // unit-norm right eigenvector columns, phase-fixed
  ComplexMatrix P_inv;
  double min_sv = 0.0;   // smallest singular value of P (columns already unit norm)
  double min_gap = 0.0;  // min_{i<j} |lambda_i - lambda_j|
  PointClass classification = PointClass::Regular;
};

struct JordanBlockData {
  int size = 0;
  Complex lambda{};
  Complex c{};
  ComplexMatrix Q;  // generalized-eigenvector chain, (H - lambda) Q[:,k+1] = c Q[:,k]
};

// Absolute gap threshold for a given H: rel * max(|H|_F, 1).
double gap_tolerance(const ComplexMatrix& H, double rel = kDefaultGapTolRel);

Spectrum eigendecompose(const ComplexMatrix& H, double gap_tol_rel = kDefaultGapTolRel,
                        double ep_tol = kDefaultEpTol);

PointClass classify_point(const Spectrum& spec, double gap_tol, double ep_tol);

JordanBlockData jordanize_single_block(const ComplexMatrix& H, Complex c = Complex(1.0, 0.0),
                                       double tol = 1e-7);

ComplexMatrix commutator(const ComplexMatrix& A, const ComplexMatrix& B);

double max_abs(const ComplexMatrix& A);
bool all_finite(const ComplexMatrix& A);

}  // namespace emk
