#include "lindsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace lindsim {

double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermiticity_defect: matrix is not square");
  }
  return (m - m.adjoint()).norm();
}

bool is_hermitian(const Matrix& m, double rel_tol) {
  return hermiticity_defect(m) <= rel_tol * std::max(m.norm(), 1e-300);
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix identity(Index d) { return Matrix::Identity(d, d); }

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Matrix partial_trace_ancilla(const Matrix& m, Index ancilla_dim, Index sys_dim) {
  if (ancilla_dim <= 0 || sys_dim <= 0 || m.rows() != ancilla_dim * sys_dim ||
      m.cols() != ancilla_dim * sys_dim) {
    std::ostringstream msg;
    msg << "partial_trace_ancilla: expected a " << ancilla_dim * sys_dim << " square matrix, got "
        << m.rows() << "x" << m.cols();
    throw std::invalid_argument(msg.str());
  }
  Matrix out = Matrix::Zero(sys_dim, sys_dim);
  for (Index j = 0; j < ancilla_dim; ++j) {
    out += m.block(j * sys_dim, j * sys_dim, sys_dim, sys_dim);
  }
  return out;
}

HermitianEigen hermitian_eigen(const Matrix& h, const Tolerances& tol) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("hermitian_eigen: matrix is not square");
  }
  const double defect = hermiticity_defect(h);
  if (defect > tol.expm_hermitian_rel * std::max(h.norm(), 1e-300) && defect > 0.0) {
    std::ostringstream msg;
    msg << "generator is not Hermitian (||H - H^+||_F = " << defect << ", ||H||_F = " << h.norm()
        << ")";
    throw NonHermitianError(msg.str());
  }

  const Index n = h.rows();
  HermitianEigen eig;
  eig.vectors = hermitize(h);
  eig.values.resize(n);
  if (n == 0) {
    return eig;
  }
  // zheevd reads the lower triangle and overwrites it with the eigenvectors.
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), eig.vectors.data(),
                     static_cast<lapack_int>(n), eig.values.data());
  if (info != 0) {
    throw std::runtime_error("hermitian_eigen: zheevd failed with info=" + std::to_string(info));
  }
  return eig;
}

namespace {

Vector phases(const RealVector& values, double scale) {
  Vector out(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    out(i) = std::exp(Complex(0.0, -scale * values(i)));
  }
  return out;
}

}  // namespace

Matrix expm_hermitian(const HermitianEigen& eig, double scale) {
  const Vector ph = phases(eig.values, scale);
  return eig.vectors * ph.asDiagonal() * eig.vectors.adjoint();
}

Matrix expm_hermitian(const Matrix& h, double scale, const Tolerances& tol) {
  if (scale == 0.0) {
    if (h.rows() != h.cols()) {
      throw std::invalid_argument("expm_hermitian: matrix is not square");
    }
    return identity(h.rows());
  }
  return expm_hermitian(hermitian_eigen(h, tol), scale);
}

Matrix expm_hermitian_leading_columns(const HermitianEigen& eig, double scale, Index ncols) {
  if (ncols > eig.vectors.rows()) {
    throw std::invalid_argument("expm_hermitian_leading_columns: too many columns requested");
  }
  const Vector ph = phases(eig.values, scale);
  return eig.vectors * (ph.asDiagonal() * eig.vectors.topRows(ncols).adjoint());
}

double trace_norm(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("trace_norm: matrix is not square");
  }
  if (m.size() == 0) {
    return 0.0;
  }
  // Hermitian inputs (the common case: differences of density matrices) have
  // singular values |lambda_i|.
  if (hermiticity_defect(m) <= 1e-14 * std::max(m.norm(), 1e-300)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

DensityMatrix::DensityMatrix(Matrix m, const Tolerances& tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
  }
  if (!m_.allFinite()) {
    throw std::invalid_argument("DensityMatrix: non-finite entries");
  }
  if (!is_hermitian(m_, tol.hermitian_rel)) {
    std::ostringstream msg;
    msg << "DensityMatrix: not Hermitian (defect " << hermiticity_defect(m_) << ")";
    throw std::invalid_argument(msg.str());
  }
  m_ = hermitize(m_);
  const Complex tr = m_.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > tol.trace) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "DensityMatrix: trace " << tr.real() << " differs from 1";
    throw std::invalid_argument(msg.str());
  }
  const double lmin = min_eigenvalue(m_);
  if (lmin < tol.min_eigenvalue) {
    std::ostringstream msg;
    msg << "DensityMatrix: negative eigenvalue " << lmin;
    throw std::invalid_argument(msg.str());
  }
}

DensityMatrix DensityMatrix::pure(const Vector& psi, const Tolerances& tol) {
  const double n = psi.norm();
  if (n == 0.0) {
    throw std::invalid_argument("DensityMatrix::pure: zero vector");
  }
  const Vector u = psi / n;
  return DensityMatrix(u * u.adjoint(), tol);
}

}  // namespace lindsim
