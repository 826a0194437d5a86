#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lindsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when a matrix that must be Hermitian by construction is not.
/// Usually signals a broken dilation or a non-trace-preserving Kraus table.
class NonHermitianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical tolerances used by the validating constructors and kernels.
/// Defaults follow the library contract; callers may pass their own.
struct Tolerances {
  double hermitian_rel = 1e-12;     // density matrices, ||M - M^+|| <= tol * ||M||
  double trace = 1e-10;             // |Tr rho - 1|
  double min_eigenvalue = -1e-10;   // PSD slack
  double expm_hermitian_rel = 1e-10;  // generator Hermiticity for expm
};

/// Frobenius norm of M - M^+.
double hermiticity_defect(const Matrix& m);

bool is_hermitian(const Matrix& m, double rel_tol);

/// (M + M^+)/2
Matrix hermitize(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);

/// Traces out the leading (ancilla) tensor factor of an
/// (ancilla_dim * sys_dim) square matrix.
Matrix partial_trace_ancilla(const Matrix& m, Index ancilla_dim, Index sys_dim);

/// Spectral data of a Hermitian matrix, reusable across exponentials.
struct HermitianEigen {
  RealVector values;
  Matrix vectors;
};

HermitianEigen hermitian_eigen(const Matrix& h, const Tolerances& tol = {});

/// exp(-i * scale * h) for Hermitian h, via eigendecomposition.
/// Throws NonHermitianError if h is not Hermitian within tolerance.
Matrix expm_hermitian(const Matrix& h, double scale, const Tolerances& tol = {});
Matrix expm_hermitian(const HermitianEigen& eig, double scale);

/// Leading `ncols` columns of exp(-i * scale * h). This is all a Stinespring
/// step needs when the ancilla starts in |0>.
Matrix expm_hermitian_leading_columns(const HermitianEigen& eig, double scale, Index ncols);

/// Schatten-1 norm (sum of singular values).
double trace_norm(const Matrix& m);

/// Largest singular value.
double operator_norm(const Matrix& m);

/// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const Matrix& m);

/// Density matrix: Hermitian, PSD, unit trace. The constructor validates.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m, const Tolerances& tol = {});

  static DensityMatrix pure(const Vector& psi, const Tolerances& tol = {});

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

Matrix identity(Index d);

}  // namespace lindsim
