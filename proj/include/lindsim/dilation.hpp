#pragma once

#include <string>
#include <vector>

#include "lindsim/kraus.hpp"
#include "lindsim/linalg.hpp"
#include "lindsim/model.hpp"
#include "lindsim/series.hpp"

namespace lindsim {

/// Dilated Hamiltonian: a block row/column {H_0, ..., H_S} acting on
/// ancilla (2^a levels, leading factor) x system (d levels):
///   H~ = |0><0| (x) H_0 + sum_{j>=1} (|j><0| (x) H_j + |0><j| (x) H_j^+),
/// padded with zero blocks up to 2^a. One step is exp(-i sqrt(dt) H~).
struct DilatedHamiltonian {
  Index sys_dim = 0;
  int order = 0;
  double dt = 0.0;
  std::vector<Matrix> blocks;
  /// Per-block series in dt^(1/2) when the construction is analytic in dt;
  /// blocks == evaluate(block_series[j], dt).
  std::vector<HalfPowerSeries> block_series;
  /// Largest relative Hermiticity defect of the H_0 coefficients before
  /// symmetrization (a trace-preservation diagnostic of the input Kraus set).
  double h0_hermiticity_defect = 0.0;

  std::size_t num_blocks() const { return blocks.size(); }
  int ancilla_qubits() const;
  Index full_dim() const { return (Index{1} << ancilla_qubits()) * sys_dim; }
  /// Dense (2^a d) x (2^a d) Hermitian matrix.
  Matrix assembled() const;
};

/// ceil(log2(num_blocks)), at least 0.
int ancilla_qubits_for(std::size_t num_blocks);

/// Bordered first-order form: H_0 = sqrt(dt) H, H_j = V_j.
DilatedHamiltonian dilate_order1(const LindbladModel& model, double t, double dt);
/// Explicit second- and third-order constructions (full block layout).
DilatedHamiltonian dilate_order2(const LindbladModel& model, double t, double dt);
DilatedHamiltonian dilate_order3(const LindbladModel& model, double t, double dt);
/// Second-order construction for time-independent models with J^2 + J + 1 blocks.
DilatedHamiltonian dilate_order2_compact(const LindbladModel& model, double dt);

/// Closed-form coefficient recursions applied to any order 1-3 Kraus set
/// (full or compact layout). Used by the explicit constructors above.
DilatedHamiltonian dilate_explicit(const KrausSeriesSet& set, double dt);

/// Order-by-order matcher: solves <j| exp(-i sqrt(dt) H~) |0> = F_j (up to the
/// -i phase of the non-leading blocks) one half-power at a time using the
/// block-level series exponential. Throws NonHermitianError if a solved H_0
/// coefficient is not Hermitian within 1e-10 (a non-trace-preserving input).
DilatedHamiltonian dilate_generic(const KrausSeriesSet& set, double dt,
                                  double hermitian_tol = 1e-10);

/// Leading d columns of exp(-i sqrt(dt) H~) split into d x d blocks
/// W_0..W_{S} (padding blocks omitted).
std::vector<Matrix> first_column_blocks(const DilatedHamiltonian& dh);

/// max_j || W_j - G_j(dt) || with G_0 = F_0 and G_j = -i F_j.
double first_column_residual(const DilatedHamiltonian& dh, const KrausSeriesSet& set, double dt);

/// Distance between the induced channel and the Kraus map, measured as the
/// operator norm of the difference of their d^2 x d^2 transfer matrices.
double channel_residual(const DilatedHamiltonian& dh, const KrausSeriesSet& set, double dt);

/// JSON: {"sys_dim", "ancilla_qubits", "num_blocks", "order", "dt",
///        "blocks": [ [[re,im],...] row-major per block ]}. Round trip is bit-exact.
std::string dump_dilated_json(const DilatedHamiltonian& dh);
DilatedHamiltonian load_dilated_json(const std::string& text);

}  // namespace lindsim
