#pragma once

#include <random>

#include "lindsim/linalg.hpp"

namespace testing {

using lindsim::Complex;
using lindsim::Index;
using lindsim::Matrix;
using lindsim::Vector;

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = n(rng);
      m(i, j) = Complex(re, n(rng));
    }
  return m;
}

inline Matrix random_hermitian(Index d, std::mt19937_64& rng) {
  const Matrix g = random_matrix(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

inline Matrix random_density(Index d, std::mt19937_64& rng, Index rank = -1) {
  const Matrix g = random_matrix(d, rank < 0 ? d : rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline Vector random_state(Index d, std::mt19937_64& rng) {
  return random_matrix(d, 1, rng).col(0).normalized();
}

inline Matrix random_unitary(Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(d, d, rng));
  return qr.householderQ() * Matrix::Identity(d, d);
}

/// exp(-i s h) by truncated Taylor series, independent of the eigensolver.
inline Matrix taylor_expm(const Matrix& h, double s, int terms) {
  const Index d = h.rows();
  Matrix term = Matrix::Identity(d, d), sum = term;
  for (int n = 1; n < terms; ++n) {
    term = term * (Complex(0.0, -s) * h) / static_cast<double>(n);
    sum += term;
  }
  return sum;
}

/// exp(m) for a general matrix by scaling and squaring of a Taylor series.
inline Matrix general_expm(const Matrix& m) {
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) norm /= 2, ++squarings;
  const Matrix a = m / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols()), sum = term;
  for (int n = 1; n < 30; ++n) {
    term = term * a / static_cast<double>(n);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Column-stacking vectorization: vec(A X B) = (B^T (x) A) vec(X).
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}
inline Matrix unvec(const Vector& v, Index d) {
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

}  // namespace testing
