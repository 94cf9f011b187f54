#include "emk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace emk {

const char* errc_name(errc c) {
  switch (c) {
    case errc::NonConvergence: return "NonConvergence";
    case errc::NotDefective: return "NotDefective";
    case errc::MultiBlock: return "MultiBlock";
    case errc::SingularP: return "SingularP";
    case errc::AdiabaticSingular: return "AdiabaticSingular";
    case errc::EPInput: return "EPInput";
    case errc::EPParam: return "EPParam";
    case errc::DPParam: return "DPParam";
    case errc::DegenerateSpectrum: return "DegenerateSpectrum";
    case errc::DegenerateLambdas: return "DegenerateLambdas";
    case errc::ZeroAnchor: return "ZeroAnchor";
    case errc::NotSingleBlock: return "NotSingleBlock";
    case errc::NeighborhoodTooWide: return "NeighborhoodTooWide";
    case errc::BranchMismatch: return "BranchMismatch";
    case errc::PositivityLost: return "PositivityLost";
    case errc::StepSizeTooLarge: return "StepSizeTooLarge";
    case errc::DegenerateDenominator: return "DegenerateDenominator";
    case errc::InsufficientData: return "InsufficientData";
    case errc::DimensionMismatch: return "DimensionMismatch";
    case errc::InvalidArgument: return "InvalidArgument";
    case errc::UnknownModel: return "UnknownModel";
    case errc::IoError: return "IoError";
  }
  return "UnknownError";
}

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::Regular: return "Regular";
    case PointClass::DP: return "DP";
    case PointClass::EP: return "EP";
  }
  return "?";
}

double max_abs(const ComplexMatrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

bool all_finite(const ComplexMatrix& A) { return A.allFinite(); }

double gap_tolerance(const ComplexMatrix& H, double rel) {
  return rel * std::max(H.norm(), 1.0);
}

namespace {

void check_square(const ComplexMatrix& H, const char* who) {
  if (H.rows() == 0 || H.rows() != H.cols())
    raise(errc::InvalidArgument, std::string(who) + ": matrix must be square and nonempty");
  if (!all_finite(H)) raise(errc::InvalidArgument, std::string(who) + ": non-finite entries");
}

// Unit-normalize each column and rotate its largest-magnitude entry to the
// positive real axis; the reproducible representative of the eigenvector ray.
void normalize_columns(ComplexMatrix& P) {
  for (Eigen::Index k = 0; k < P.cols(); ++k) {
    double nrm = P.col(k).norm();
    if (nrm > 0) P.col(k) /= nrm;
    Eigen::Index imax = 0;
    P.col(k).cwiseAbs().maxCoeff(&imax);
    Complex piv = P(imax, k);
    if (std::abs(piv) > 0) P.col(k) *= std::conj(piv) / std::abs(piv);
  }
}

bool column_less(const ComplexMatrix& P, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index r = 0; r < P.rows(); ++r) {
    const Complex &x = P(r, a), &y = P(r, b);
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

}  // namespace

PointClass classify_point(const Spectrum& spec, double gap_tol, double ep_tol) {
  if (spec.min_sv < ep_tol) return PointClass::EP;
  if (spec.min_gap < gap_tol) return PointClass::DP;
  return PointClass::Regular;
}

Spectrum eigendecompose(const ComplexMatrix& H, double gap_tol_rel, double ep_tol) {
  check_square(H, "eigendecompose");
  const Eigen::Index n = H.rows();

  Eigen::ComplexEigenSolver<ComplexMatrix> es(H, true);
  if (es.info() != Eigen::Success)
    raise(errc::NonConvergence, "complex eigen-solver did not converge (dim " +
                                    std::to_string(n) + ")");

  ComplexMatrix P = es.eigenvectors();
  ComplexVector lam = es.eigenvalues();
  normalize_columns(P);

  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (lam[a].real() != lam[b].real()) return lam[a].real() < lam[b].real();
    if (lam[a].imag() != lam[b].imag()) return lam[a].imag() < lam[b].imag();
    return column_less(P, a, b);
  });

  Spectrum s;
  s.eigenvalues.resize(n);
  s.P.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.eigenvalues[k] = lam[idx[k]];
    s.P.col(k) = P.col(idx[k]);
  }
  s.P_inv = s.P.partialPivLu().inverse();

  Eigen::JacobiSVD<ComplexMatrix> svd(s.P);
  s.min_sv = svd.singularValues().minCoeff();

  s.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      s.min_gap = std::min(s.min_gap, std::abs(s.eigenvalues[i] - s.eigenvalues[j]));

  s.classification = classify_point(s, gap_tolerance(H, gap_tol_rel), ep_tol);
  return s;
}

JordanBlockData jordanize_single_block(const ComplexMatrix& H, Complex c, double tol) {
  check_square(H, "jordanize_single_block");
  if (std::abs(c) == 0.0) raise(errc::InvalidArgument, "superdiagonal constant c must be nonzero");
  if (!(tol > 0)) raise(errc::InvalidArgument, "tol must be positive");
  const Eigen::Index n = H.rows();
  const double scale = std::max(H.norm(), 1.0);

  Eigen::ComplexEigenSolver<ComplexMatrix> es(H, false);
  if (es.info() != Eigen::Success) raise(errc::NonConvergence, "eigen-solver failed");
  Complex lambda = es.eigenvalues().mean();
  double spread = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    spread = std::max(spread, std::abs(es.eigenvalues()[i] - lambda));
  if (spread > tol * scale)
    raise(errc::MultiBlock, "eigenvalues do not form a single cluster (spread " +
                                std::to_string(spread) + ")");

  ComplexMatrix A = H - lambda * ComplexMatrix::Identity(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thr = tol * scale;
  Eigen::Index kdim = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (sv[i] < thr) ++kdim;
  if (kdim == n) raise(errc::NotDefective, "matrix is a scalar multiple of the identity");
  if (kdim == 0) raise(errc::MultiBlock, "no kernel direction at tolerance");
  if (kdim > 1) raise(errc::MultiBlock, "geometric multiplicity exceeds one");

  ComplexVector v1 = svd.matrixV().col(n - 1);
  Eigen::Index anchor = 0;
  v1.cwiseAbs().maxCoeff(&anchor);
  v1 /= v1[anchor];

  // Thresholded pseudo-inverse of A for the chain solves.
  ComplexVector svinv(n);
  for (Eigen::Index i = 0; i < n; ++i) svinv[i] = sv[i] >= thr ? Complex(1.0 / sv[i]) : Complex(0);
  auto pinv_apply = [&](const ComplexVector& b) -> ComplexVector {
    return svd.matrixV() * svinv.asDiagonal() * (svd.matrixU().adjoint() * b);
  };

  ComplexMatrix Q(n, n);
  Q.col(0) = v1;
  for (Eigen::Index k = 1; k < n; ++k) {
    ComplexVector b = c * Q.col(k - 1);
    ComplexVector x = pinv_apply(b);
    x -= x[anchor] * v1;  // kernel freedom fixed by zero anchor entry
    double resid = (A * x - b).norm();
    if (resid > 10.0 * tol * scale * std::max(1.0, x.norm()))
      raise(errc::MultiBlock, "generalized-eigenvector chain terminates early");
    Q.col(k) = x;
  }

  ComplexMatrix J = lambda * ComplexMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) J(i, i + 1) = c;
  double verr = max_abs(Q.partialPivLu().solve(H * Q) - J);
  if (!(verr < 1e4 * tol * scale))
    raise(errc::MultiBlock, "chain does not reduce the matrix to a single block");

  JordanBlockData out;
  out.size = static_cast<int>(n);
  out.lambda = lambda;
  out.c = c;
  out.Q = Q;
  return out;
}

ComplexMatrix commutator(const ComplexMatrix& A, const ComplexMatrix& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    raise(errc::DimensionMismatch, "commutator requires equal square dimensions");
  return A * B - B * A;
}

}  // namespace emk
