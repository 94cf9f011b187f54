#pragma once

#include "emk/kgen.hpp"

#include <cstdint>
#include <memory>
#include <random>

namespace emk::testing {

inline double uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform(gen);
}

inline Complex crand(std::mt19937_64& gen, double scale = 1.0) {
  return scale * Complex(2.0 * uniform(gen) - 1.0, 2.0 * uniform(gen) - 1.0);
}

inline ComplexMatrix random_matrix(std::mt19937_64& gen, int n, double scale = 1.0) {
  ComplexMatrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = crand(gen, scale);
  return M;
}

// H(q) = A + q B with random A, B; generically diagonalizable with simple spectrum.
inline HamiltonianFamily random_linear_family(std::mt19937_64& gen, int n, double scale = 1.0) {
  auto A = std::make_shared<ComplexMatrix>(random_matrix(gen, n, scale));
  auto B = std::make_shared<ComplexMatrix>(random_matrix(gen, n, 0.5 * scale));
  HamiltonianFamily fam;
  fam.dim = n;
  fam.H = [A, B](double q) { return *A + q * (*B); };
  fam.dH = [B](double) { return *B; };
  return fam;
}

template <class F>
errc thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  } catch (...) {
    return static_cast<errc>(254);
  }
  return static_cast<errc>(255);  // nothing thrown
}

}  // namespace emk::testing
