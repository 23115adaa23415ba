#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fdi2d/model.hpp"

namespace testing_support {

using fdi2d::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// Small integers keep the exact-rational oracle cheap and exact.
inline Matrix random_int_matrix(std::mt19937_64& rng, int r, int c, int lo = -2, int hi = 2, double zero_prob = 0.4) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::bernoulli_distribution z(zero_prob);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = z(rng) ? 0.0 : d(rng);
  return m;
}

// Random integer model; `faults` single-column signatures.
inline fdi2d::FmiiModel random_int_model(std::mt19937_64& rng, int n, int q, int k, int faults = 0) {
  fdi2d::FmiiModel m;
  for (int i = 0; i < k; ++i) {
    m.shift_ops.push_back(random_int_matrix(rng, n, n));
    m.input_maps.push_back(Matrix::Zero(n, 0));
  }
  m.output_map = random_int_matrix(rng, q, n, -2, 2, 0.5);
  for (int f = 0; f < faults; ++f) {
    std::vector<Matrix> maps;
    for (int i = 0; i < k; ++i) maps.push_back(random_int_matrix(rng, n, 1, -1, 1, 0.5));
    m.faults.push_back({"f" + std::to_string(f + 1), maps});
  }
  return m;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
