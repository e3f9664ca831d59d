#pragma once

#include <random>

#include "ymh/linalg.hpp"

namespace ymh::test {

inline Mat random_complex(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

inline Mat random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  return herm_part(random_complex(n, rng, scale));
}

inline Mat random_unitary(int n, std::mt19937_64& rng, double scale = 1.0) {
  return expm_antihermitian(antiherm_part(random_complex(n, rng, scale)));
}

}  // namespace ymh::test
