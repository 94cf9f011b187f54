#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "emk/epgauge.hpp"
#include "emk/models.hpp"
#include "helpers.hpp"

using namespace emk;
using emk::testing::thrown_code;

namespace {
const Complex I1(0.0, 1.0);
const std::vector<Complex> kLam3 = {Complex(0.3, 0.1), Complex(-1.2, 0.4), Complex(0.9, -0.7)};
const Complex kC3(0.7, 0.2);

ComplexMatrix bidiagonal_j(const std::vector<Complex>& lam, Complex c) {
  const Eigen::Index n = static_cast<Eigen::Index>(lam.size());
  ComplexMatrix J = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) J(i, i) = lam[i];
  for (Eigen::Index i = 0; i + 1 < n; ++i) J(i, i + 1) = c;
  return J;
}
}  // namespace

TEST_CASE("build_stilde: frozen 2x2 entries") {
  ComplexMatrix S = build_stilde({Complex(1.0), Complex(-1.0)}, Complex(1.0));
  CHECK(std::abs(S(0, 0) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(S(0, 1) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(S(1, 0)) == 0.0);
  CHECK(std::abs(S(1, 1) - Complex(-0.5)) < 1e-15);
}

TEST_CASE("build_stilde: Lambda S = S J with bidiagonal J") {
  ComplexMatrix S = build_stilde(kLam3, kC3);
  // upper triangular by construction
  CHECK(std::abs(S(1, 0)) == 0.0);
  CHECK(std::abs(S(2, 0)) == 0.0);
  CHECK(std::abs(S(2, 1)) == 0.0);
  ComplexMatrix L = ComplexMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) L(i, i) = kLam3[i];
  CHECK(max_abs(L * S - S * bidiagonal_j(kLam3, kC3)) < 1e-12);
}

TEST_CASE("build_stilde: input guards") {
  CHECK(thrown_code([] {
          build_stilde({Complex(0.5), Complex(0.5, 1e-13)}, Complex(1.0));
        }) == errc::DegenerateLambdas);
  CHECK(thrown_code([] { build_stilde({Complex(1.0), Complex(2.0)}, Complex(0.0)); }) ==
        errc::InvalidArgument);
  CHECK(thrown_code([] { build_stilde({}, Complex(1.0)); }) == errc::InvalidArgument);
}

TEST_CASE("build_wtilde: identity at t = 0 and frozen value at t = pi") {
  CHECK(max_abs(build_wtilde(kLam3, kC3, 0.0) - ComplexMatrix::Identity(3, 3)) < 1e-15);
  // lambda = {1,-1}: e0 = e1 = -1 at t = pi and the coupling entry cancels
  ComplexMatrix W = build_wtilde({Complex(1.0), Complex(-1.0)}, Complex(1.0), M_PI);
  CHECK(max_abs(W + ComplexMatrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("build_wtilde: equals the similarity-transformed diagonal propagator") {
  ComplexMatrix S = build_stilde(kLam3, kC3);
  for (double t : {0.8, 2.3}) {
    ComplexMatrix E = ComplexMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) E(i, i) = std::exp(I1 * kLam3[i] * t);
    CHECK(max_abs(build_wtilde(kLam3, kC3, t) - S.inverse() * E * S) < 1e-12);
  }
}

TEST_CASE("build_wtilde: generator is i J to second order") {
  const double h = 1e-4;
  ComplexMatrix J = bidiagonal_j(kLam3, kC3);
  for (double t : {0.0, 0.9, 2.1}) {
    ComplexMatrix dW = (build_wtilde(kLam3, kC3, t + h) - build_wtilde(kLam3, kC3, t - h)) / (2.0 * h);
    CHECK(max_abs(build_wtilde(kLam3, kC3, t).inverse() * dW - I1 * J) < 100.0 * h * h);
  }
}

TEST_CASE("build_wtilde: input guards") {
  std::vector<Complex> four = {Complex(1.0), Complex(2.0), Complex(3.0), Complex(4.0)};
  CHECK(thrown_code([&] { build_wtilde(four, Complex(1.0), 0.5); }) == errc::InvalidArgument);
  CHECK(thrown_code([] {
          build_wtilde({Complex(0.5), Complex(0.5, 1e-13)}, Complex(1.0), 0.5);
        }) == errc::DegenerateLambdas);
}

TEST_CASE("w_ep: frozen confluent entries") {
  Complex lam(0.4, -0.3), c(0.7, 0.2);
  double t = 1.3;
  Complex e = std::exp(I1 * lam * t);
  Complex ict = I1 * c * t;
  ComplexMatrix W = w_ep(3, lam, c, t);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(W(i, i) - e) < 1e-15);
  CHECK(std::abs(W(0, 1) - e * ict) < 1e-15);
  CHECK(std::abs(W(1, 2) - e * ict) < 1e-15);
  CHECK(std::abs(W(0, 2) - e * ict * ict * 0.5) < 1e-15);
  CHECK(std::abs(W(1, 0)) == 0.0);
  CHECK(thrown_code([&] { w_ep(0, lam, c, t); }) == errc::InvalidArgument);
  CHECK(thrown_code([&] { w_ep(4, lam, c, t); }) == errc::InvalidArgument);
}

TEST_CASE("w_ep is the confluent limit of build_wtilde") {
  Complex lam0(0.4, -0.3), c(0.7, 0.2);
  double t = 1.3;
  ComplexMatrix Wep = w_ep(3, lam0, c, t);
  double prev = 1e9;
  for (double eps : {1e-4, 1e-5}) {
    ComplexMatrix W = build_wtilde({lam0, lam0 + eps, lam0 + 2.0 * eps}, c, t);
    double d = max_abs(W - Wep);
    CHECK(d < 5.0 * eps);  // deviation is linear in the splitting
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("wep_check: confluent propagator solves dW/dt = i W J") {
  const double h = 1e-4;
  std::vector<double> ts = {0.0, 0.5, 1.7, 3.0};
  ComplexMatrix J2 = ComplexMatrix::Zero(2, 2);
  J2(0, 1) = Complex(1.0);
  CHECK(wep_check(J2, Complex(0.0), Complex(1.0), ts, h) < 100.0 * h * h);
  ComplexMatrix J3 = bidiagonal_j({Complex(0.4, -0.3), Complex(0.4, -0.3), Complex(0.4, -0.3)},
                                  Complex(0.7, 0.2));
  CHECK(wep_check(J3, Complex(0.4, -0.3), Complex(0.7, 0.2), ts, h) < 100.0 * h * h);
  // a mismatched generator is flagged loudly
  ComplexMatrix Jwrong = J3;
  Jwrong(0, 0) += Complex(0.5);
  CHECK(wep_check(Jwrong, Complex(0.4, -0.3), Complex(0.7, 0.2), ts, h) > 0.1);
  CHECK(thrown_code([&] { wep_check(J3, Complex(0.0), Complex(1.0), ts, -1.0); }) ==
        errc::InvalidArgument);
  CHECK(thrown_code([&] {
          wep_check(ComplexMatrix::Zero(4, 4), Complex(0.0), Complex(1.0), ts, h);
        }) == errc::InvalidArgument);
}

TEST_CASE("rescale_columns: anchor row normalised to one") {
  ComplexMatrix P(2, 2);
  P << Complex(2.0), Complex(0.5), Complex(1.0), Complex(1.0);
  ComplexMatrix R = rescale_columns(P, 0);
  CHECK(std::abs(R(0, 0) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(R(0, 1) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(R(1, 0) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(R(1, 1) - Complex(2.0)) < 1e-15);
  ComplexMatrix Z = P;
  Z(0, 1) = Complex(0.0);
  CHECK(thrown_code([&] { rescale_columns(Z, 0); }) == errc::ZeroAnchor);
  CHECK(thrown_code([&] { rescale_columns(P, 5); }) == errc::InvalidArgument);
}

TEST_CASE("make_ep_vicinity_gauge: chain data at the coalescence point") {
  EPVicinityGauge g = make_ep_vicinity_gauge(ep_family(), 1.0);
  CHECK(g.anchor_row == 0);
  CHECK(std::abs(g.c - Complex(1.0)) == 0.0);
  ComplexMatrix Qexp(2, 2);
  Qexp << Complex(1.0), Complex(0.0), -I1, Complex(1.0);
  CHECK(max_abs(g.Q_ep - Qexp) < 1e-10);
  ComplexMatrix Jexp = ComplexMatrix::Zero(2, 2);
  Jexp(0, 1) = Complex(1.0);
  CHECK(max_abs(g.J_ep - Jexp) < 1e-10);
  // confluent propagator branch at the exact parameter value
  ComplexMatrix W = g.Wtilde(1.0, 0.7);
  CHECK(std::abs(W(0, 0) - Complex(1.0)) < 1e-12);
  CHECK(std::abs(W(0, 1) - Complex(0.0, 0.7)) < 1e-12);
  CHECK(std::abs(W(1, 0)) < 1e-12);
}

TEST_CASE("make_ep_vicinity_gauge: frame is continuous into the coalescence point") {
  EPVicinityGauge g = make_ep_vicinity_gauge(ep_family(), 1.0);
  // distance of the rescaled frame from the chain is sqrt(2(1-gamma))
  double prev = 1e9;
  for (double gamma : {0.99, 0.999, 0.9999}) {
    double d = max_abs(g.Qtilde(gamma) - g.Q_ep);
    CHECK(d < prev);
    CHECK(d == doctest::Approx(std::sqrt(2.0 * (1.0 - gamma))).epsilon(1e-3));
    prev = d;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("make_ep_vicinity_gauge: rejects unusable inputs") {
  CHECK(thrown_code([] { make_ep_vicinity_gauge(ep_family(), 0.5); }) == errc::NotSingleBlock);
  HamiltonianFamily big;
  big.dim = 4;
  big.H = [](double) { return ComplexMatrix::Zero(4, 4); };
  big.dH = [](double) { return ComplexMatrix::Zero(4, 4); };
  CHECK(thrown_code([&] { make_ep_vicinity_gauge(big, 0.0); }) == errc::InvalidArgument);
}

TEST_CASE("continuous_k_near_ep: reproduces the closed regular form at the coalescence point") {
  std::vector<double> ts = linspace(0.0, 3.0, 16);
  TimeK k = continuous_k_near_ep(ep_family(), 1.0, 1.0, ts, ComplexMatrix::Zero(2, 2));
  CHECK(k.gauge == GaugeTag::RegularEP);
  CHECK(k.t_domain.lo == doctest::Approx(0.0));
  CHECK(k.t_domain.hi == doctest::Approx(3.0));
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, max_abs(k.eval(t) - k_ep_regular(1.0, t)));
  CHECK(worst < 1e-5);
  // frozen cross-check at t = 1: (1/3) [[i, -5], [1, -i]]
  ComplexMatrix ref(2, 2);
  ref << I1 / 3.0, Complex(-5.0 / 3.0), Complex(1.0 / 3.0), -I1 / 3.0;
  CHECK(max_abs(k.eval(1.0) - ref) < 1e-5);
}

TEST_CASE("continuous_k_near_ep: agrees with the regular gauge on the diagonalizable side") {
  std::vector<double> ts = linspace(0.0, 2.0, 9);
  TimeK k = continuous_k_near_ep(ep_family(), 1.0, 0.95, ts, ComplexMatrix::Zero(2, 2));
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, max_abs(k.eval(t) - k_ep_regular(0.95, t)));
  CHECK(worst < 1e-8);
}

TEST_CASE("continuous_k_near_ep: honors a boundary value away from t = 0") {
  std::vector<double> ts = linspace(0.0, 2.0, 9);
  ComplexMatrix K_half = k_ep_regular(0.95, 0.5);
  TimeK k = continuous_k_near_ep(ep_family(), 1.0, 0.95, ts, K_half, 0.5);
  CHECK(max_abs(k.eval(0.5) - K_half) < 1e-12);
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, max_abs(k.eval(t) - k_ep_regular(0.95, t)));
  CHECK(worst < 1e-8);
}

TEST_CASE("continuous_k_near_ep: input guards") {
  CHECK(thrown_code([] {
          continuous_k_near_ep(ep_family(), 1.0, 1.6, {0.0, 1.0}, ComplexMatrix::Zero(2, 2));
        }) == errc::NeighborhoodTooWide);
  CHECK(thrown_code([] {
          continuous_k_near_ep(ep_family(), 1.0, 1.0, {}, ComplexMatrix::Zero(2, 2));
        }) == errc::InvalidArgument);
  CHECK(thrown_code([] {
          continuous_k_near_ep(ep_family(), 1.0, 1.0, {0.0, 1.0}, ComplexMatrix::Zero(3, 3));
        }) == errc::DimensionMismatch);
}

TEST_CASE("continuous_k_near_ep: defective 3x3 block satisfies the defining equation") {
  ComplexMatrix H = ComplexMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) H(i, i) = Complex(0.3);
  H(0, 1) = H(1, 2) = Complex(1.0);
  ComplexMatrix D(3, 3);
  D << Complex(0.2, 0.1), Complex(-0.4), Complex(0.0, 0.3),
       Complex(1.0), Complex(-0.2, -0.5), Complex(0.7),
       Complex(0.0, -1.1), Complex(0.3), Complex(0.9, 0.2);
  HamiltonianFamily fam;
  fam.dim = 3;
  fam.H = [H](double) { return H; };
  fam.dH = [D](double) { return D; };

  EPVicinityGauge g = make_ep_vicinity_gauge(fam, 0.0);
  CHECK(max_abs(g.Q_ep - ComplexMatrix::Identity(3, 3)) < 1e-10);

  const double h = 1e-4;
  TimeK k = continuous_k_near_ep(fam, 0.0, 0.0, {0.0, 2.0}, ComplexMatrix::Zero(3, 3));
  CHECK(max_abs(k.eval(0.0)) < 1e-10);
  CHECK(pde_residual(k, H, D, {0.3, 1.0, 2.0}, h) < 100.0 * h * h);
}
