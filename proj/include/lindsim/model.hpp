#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lindsim/linalg.hpp"

namespace lindsim {

using MatrixFn = std::function<Matrix(double)>;
using JumpFn = std::function<Matrix(std::size_t, double)>;

/// Callables describing H(t), V_j(t) and their time derivatives.
/// Derivative entries may be left empty when not available.
struct ModelCallables {
  MatrixFn hamiltonian;
  MatrixFn ham_dot;
  MatrixFn ham_ddot;
  JumpFn jump;
  JumpFn jump_dot;
  JumpFn jump_ddot;
};

/// A Lindblad generator with Hamiltonian H(t) and jump operators V_j(t),
/// j = 0..num_jumps-1. Immutable after construction.
///
/// For time-independent models every derivative is identically zero and
/// derivative_order_available() reports 2.
class LindbladModel {
 public:
  LindbladModel(std::string identity, Index dim, std::size_t num_jumps, ModelCallables fns,
                bool time_dependent, int derivative_order_available);

  /// Time-independent model from fixed matrices.
  static LindbladModel constant(std::string identity, Matrix hamiltonian, std::vector<Matrix> jumps);

  /// Stable description of the model and its parameters (used as a cache key).
  const std::string& identity() const { return identity_; }
  Index dim() const { return dim_; }
  std::size_t num_jumps() const { return num_jumps_; }
  bool time_dependent() const { return time_dependent_; }
  int derivative_order_available() const { return derivative_order_; }

  Matrix hamiltonian(double t) const;
  Matrix ham_dot(double t) const;
  Matrix ham_ddot(double t) const;
  Matrix jump(std::size_t j, double t) const;
  Matrix jump_dot(std::size_t j, double t) const;
  Matrix jump_ddot(std::size_t j, double t) const;

 private:
  void require_derivative(int order, const char* what) const;
  Matrix checked(Matrix m, const char* what) const;

  std::string identity_;
  Index dim_;
  std::size_t num_jumps_;
  ModelCallables fns_;
  bool time_dependent_;
  int derivative_order_;
};

/// H, V_j and derivatives evaluated at a single time.
struct ModelSnapshot {
  double t = 0.0;
  Matrix H, H_dot, H_ddot;
  std::vector<Matrix> V, V_dot, V_ddot;

  Index dim() const { return H.rows(); }
  std::size_t num_jumps() const { return V.size(); }
};

/// Evaluates the model at t, including derivatives up to `derivative_order`.
/// Throws std::invalid_argument if the model cannot supply them.
ModelSnapshot snapshot(const LindbladModel& model, double t, int derivative_order);

/// Wraps a time-dependent model without analytic derivatives with central
/// finite differences, step h = 1e-5 * max(1, |t|).
LindbladModel with_finite_difference_derivatives(const LindbladModel& model);

/// V_0 = -iH - 1/2 sum_j V_j^+ V_j
Matrix effective_drift(const LindbladModel& model, double t);
Matrix effective_drift(const ModelSnapshot& s);

/// 1 + ||H(t)|| + sum_j ||V_j(t)||^2
double be_norm(const LindbladModel& model, double t);

namespace pauli {
Matrix x();
Matrix y();
Matrix z();
/// |0><1|, maps |1> to |0>. sigma_minus^+ sigma_minus = |1><1|.
Matrix sigma_minus();
Matrix sigma_plus();
/// `op` acting on site `site` (0-based, site 0 is the leftmost tensor factor)
/// of an m-qubit register.
Matrix on_site(const Matrix& op, int site, int num_sites);
}  // namespace pauli

/// -(sum_i Z_i Z_{i+1} + Z_m Z_1) - g sum_i X_i on m sites.
Matrix tfim_hamiltonian(int m, double g);

/// Damped transverse-field Ising chain: m lowering jumps sqrt(gamma) sigma_-.
LindbladModel tfim_damping(int m, double g, double gamma);

/// Linearly driven TFIM with two jumps:
///   H(t) = H + t H',  V_j(t) = sqrt(gamma) sigma_-^{(j)} + t V_{j,2}
/// with H' = (G+G^+)/||G+G^+|| and V_{j,2} = G_j/||G_j|| for seeded complex
/// Gaussian G (real and imaginary parts independent standard normal).
LindbladModel tfim_driven(int m, double g, double gamma, std::uint64_t seed);

/// Single qubit with periodic drive:
///   H(t) = -(sqrt2/2)(1 - cos t) sigma_z
///   V_1 = (2 + 0.5 sin t) sigma_+,  V_2 = (3 - 0.5 sin t) sigma_-
LindbladModel periodic_qubit();

/// H = omega sigma_z, single jump sqrt(gamma) sigma_-.
LindbladModel damped_qubit(double omega, double gamma);

}  // namespace lindsim
