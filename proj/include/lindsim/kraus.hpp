#pragma once

#include <string>
#include <vector>

#include "lindsim/linalg.hpp"
#include "lindsim/model.hpp"
#include "lindsim/series.hpp"

namespace lindsim {

/// Kraus operator families of the order-k expansion. Compact2 is the
/// combined pair block V_j V_k of the time-independent second-order scheme.
enum class KrausFamily { F0, F1, F2, F3, F4, Compact2 };

std::string to_string(KrausFamily f);

struct KrausBlock {
  std::size_t index = 0;
  KrausFamily family = KrausFamily::F0;
  std::vector<std::size_t> labels;  // 0-based jump indices (j), (j,k) or (j,k,l)
  HalfPowerSeries series{0, 0};
};

/// Indexed family {F_j} of Kraus operator series. Blocks are stored in index
/// order and blocks[i].index == i. Kraus operators are stored without the
/// overall -i phase carried by the non-leading blocks; Kraus maps are
/// invariant under per-block phases.
struct KrausSeriesSet {
  Index sys_dim = 0;
  int order = 0;
  std::size_t num_jumps = 0;
  bool compact = false;
  std::vector<KrausBlock> blocks;

  std::size_t num_blocks() const { return blocks.size(); }
  /// Number of blocks expanded in odd half-powers (F1, F2, F3).
  std::size_t num_half_power_blocks() const;
  /// Largest truncation across blocks.
  int max_half_power() const;
};

// Block-index layout, 0-based jump labels, J jumps.
std::size_t f1_index(std::size_t j);
std::size_t f2_index(std::size_t j, std::size_t J);
std::size_t f3_index(std::size_t j, std::size_t k, std::size_t l, std::size_t J);
std::size_t f4_index(std::size_t j, std::size_t k, std::size_t J);
std::size_t compact_pair_index(std::size_t j, std::size_t k, std::size_t J);
/// 1 + J for k = 1, otherwise J^3 + J^2 + 2J + 1.
std::size_t kraus_block_count(int order, std::size_t J);

/// Order-k (k in {1,2,3}) Kraus series at time t, from H, V_j and their
/// derivatives at t. Truncation in half-powers: F0 at 2k, F1/F2/F3 at 2k-1,
/// F4 at 2k-2.
KrausSeriesSet kraus_series(const LindbladModel& model, double t, int order);
KrausSeriesSet kraus_series(const ModelSnapshot& s, int order);

/// Compact second-order set for time-independent models: J^2 + J + 1 blocks.
KrausSeriesSet kraus_series_compact_order2(const LindbladModel& model);

/// F_j(dt) for every block.
std::vector<Matrix> evaluate_blocks(const KrausSeriesSet& set, double dt);

/// sum_j F_j(dt) rho F_j(dt)^+
Matrix apply_kraus(const KrausSeriesSet& set, double dt, const Matrix& rho);
Matrix apply_kraus(const KrausSeriesSet& set, double dt, const DensityMatrix& rho);

/// || sum_j F_j(dt)^+ F_j(dt) - I ||
double trace_residual(const KrausSeriesSet& set, double dt);

/// Real symmetric PSD covariance C = Q L Q^T factored as coeff * coeff^T with
/// coeff = Q L^{1/2}; directions with eigenvalue <= 1e-12 are inactive and
/// their columns are zero.
struct CovarianceFactor {
  RealMatrix coeff;
  std::vector<bool> active;
  RealVector eigenvalues;

  std::size_t num_active() const;
};

CovarianceFactor orthogonalize_covariance(const RealMatrix& cov, double negative_tol = 1e-12,
                                          double active_tol = 1e-12);

using MultiIndex = std::vector<int>;

struct MultiIndexSets {
  std::vector<MultiIndex> all;      // tuples over {0..J}, length 1..k
  std::vector<MultiIndex> nonzero;  // all-zero tuples removed
};

/// Tuples over {0..J} of length 1..k in lexicographic order, together with the
/// subset that is not identically zero.
MultiIndexSets enumerate_multi_indices(int k, int J);

}  // namespace lindsim
