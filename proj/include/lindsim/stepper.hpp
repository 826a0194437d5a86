#pragma once

#include <vector>

#include "lindsim/dilation.hpp"
#include "lindsim/linalg.hpp"
#include "lindsim/model.hpp"

namespace lindsim {

/// How exp(-i sqrt(dt) H~) restricted to the |0>-ancilla columns is computed.
///  Full:    Hermitian eigendecomposition of the assembled 2^a d matrix.
///  Reduced: the same exponential on the 2d-dimensional invariant subspace
///           spanned by the |0> block and the range of the block column
///           (thin QR), then mapped back. Exact, much cheaper for many blocks.
enum class ExpmMethod { Full, Reduced };

/// One dilation step rho -> sum_j W_j rho W_j^+ with W_j = <j| e^{-i sqrt(dt) H~} |0>,
/// i.e. Tr_A(U (|0><0| (x) rho) U^+). The exponential is computed once at
/// construction and reused for every step.
class StinespringStep {
 public:
  explicit StinespringStep(const DilatedHamiltonian& dh, ExpmMethod method = ExpmMethod::Full);

  Index sys_dim() const { return d_; }
  const std::vector<Matrix>& column_blocks() const { return w_; }

  Matrix apply(const Matrix& rho) const;
  DensityMatrix apply(const DensityMatrix& rho) const;

 private:
  Index d_;
  std::vector<Matrix> w_;
};

/// Single step; builds the exponential on the fly.
DensityMatrix step(const DilatedHamiltonian& dh, const DensityMatrix& rho,
                   ExpmMethod method = ExpmMethod::Full);

enum class DilationRoute { Explicit, Generic, Compact };

struct EvolveOptions {
  DilationRoute route = DilationRoute::Explicit;
  ExpmMethod method = ExpmMethod::Full;
  /// Stability guard: dt * be_norm(t_n) must not exceed this at any step start.
  double dt_guard = 2.5;
  double t0 = 0.0;
  bool keep_states = true;
};

struct TrajectoryDiagnostics {
  double max_generator_hermiticity_defect = 0.0;  // ||H~ - H~^+||_F / ||H~||_F
  double max_h0_hermiticity_defect = 0.0;         // before symmetrization
  double max_trace_drift = 0.0;                   // max_n |Tr rho_{n+1} - Tr rho_n|
  double min_eigenvalue = 1.0;                    // over every rho_n
  std::size_t dilated_dim = 0;
  std::size_t num_blocks = 0;
  std::size_t expm_builds = 0;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Matrix> states;  // rho_0..rho_N (only the last when keep_states is false)
  TrajectoryDiagnostics diagnostics;

  const Matrix& final_matrix() const { return states.back(); }
  DensityMatrix final_state() const { return DensityMatrix(states.back()); }
};

/// Builds the dilated Hamiltonian of order k for the model at time t.
DilatedHamiltonian build_dilation(const LindbladModel& model, int order, double t, double dt,
                                  DilationRoute route);

/// N steps of size dt = T/N from t0 to t0 + T. Time-independent models build
/// and diagonalize the dilation once; time-dependent models rebuild at each
/// left endpoint t_n = t0 + n dt.
Trajectory evolve(const LindbladModel& model, int order, const DensityMatrix& rho0, double T,
                  std::size_t N, const EvolveOptions& opts = {});

}  // namespace lindsim
