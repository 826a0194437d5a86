#include "lindsim/kraus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindsim {

std::string to_string(KrausFamily f) {
  switch (f) {
    case KrausFamily::F0: return "F0";
    case KrausFamily::F1: return "F1";
    case KrausFamily::F2: return "F2";
    case KrausFamily::F3: return "F3";
    case KrausFamily::F4: return "F4";
    case KrausFamily::Compact2: return "Compact2";
  }
  return "?";
}

std::size_t KrausSeriesSet::num_half_power_blocks() const {
  return static_cast<std::size_t>(std::count_if(blocks.begin(), blocks.end(), [](const KrausBlock& b) {
    return b.family == KrausFamily::F1 || b.family == KrausFamily::F2 ||
           b.family == KrausFamily::F3;
  }));
}

int KrausSeriesSet::max_half_power() const {
  int m = 0;
  for (const auto& b : blocks) m = std::max(m, b.series.max_half_power());
  return m;
}

std::size_t f1_index(std::size_t j) { return j + 1; }
std::size_t f2_index(std::size_t j, std::size_t J) { return J + j + 1; }
std::size_t f3_index(std::size_t j, std::size_t k, std::size_t l, std::size_t J) {
  return 2 * J + 1 + j + k * J + l * J * J;
}
std::size_t f4_index(std::size_t j, std::size_t k, std::size_t J) {
  return J * J * J + 2 * J + 1 + j + k * J;
}
std::size_t compact_pair_index(std::size_t j, std::size_t k, std::size_t J) {
  return J + 1 + j + k * J;
}
std::size_t kraus_block_count(int order, std::size_t J) {
  return order == 1 ? J + 1 : J * J * J + J * J + 2 * J + 1;
}

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt6 = std::sqrt(6.0);
const double kSqrt12 = std::sqrt(12.0);

struct Drift {
  Matrix v0, v0_dot, v0_ddot;
};

Drift drift_with_derivatives(const ModelSnapshot& s) {
  const Index d = s.dim();
  Matrix decay = Matrix::Zero(d, d), decay_dot = Matrix::Zero(d, d), decay_ddot = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < s.num_jumps(); ++j) {
    const Matrix& v = s.V[j];
    const Matrix& vd = s.V_dot[j];
    const Matrix& vdd = s.V_ddot[j];
    decay.noalias() += v.adjoint() * v;
    decay_dot.noalias() += vd.adjoint() * v + v.adjoint() * vd;
    decay_ddot.noalias() += vdd.adjoint() * v + 2.0 * vd.adjoint() * vd + v.adjoint() * vdd;
  }
  return {-kI * s.H - 0.5 * decay, -kI * s.H_dot - 0.5 * decay_dot,
          -kI * s.H_ddot - 0.5 * decay_ddot};
}

KrausBlock make_block(std::size_t index, KrausFamily family, std::vector<std::size_t> labels,
                      HalfPowerSeries series) {
  KrausBlock b;
  b.index = index;
  b.family = family;
  b.labels = std::move(labels);
  b.series = std::move(series);
  return b;
}

void check_layout(const KrausSeriesSet& set) {
  for (std::size_t i = 0; i < set.blocks.size(); ++i) {
    if (set.blocks[i].index != i) {
      throw std::logic_error("Kraus block layout is not contiguous");
    }
  }
}

}  // namespace

KrausSeriesSet kraus_series(const ModelSnapshot& s, int k) {
  if (k < 1 || k > 3) {
    throw std::invalid_argument("kraus_series: order must be 1, 2 or 3, got " + std::to_string(k));
  }
  const Index d = s.dim();
  const std::size_t J = s.num_jumps();
  const Drift dr = drift_with_derivatives(s);
  const Matrix& V0 = dr.v0;
  const Matrix& V0d = dr.v0_dot;
  const Matrix& V0dd = dr.v0_ddot;
  const auto& V = s.V;
  const auto& Vd = s.V_dot;
  const auto& Vdd = s.V_ddot;

  KrausSeriesSet set;
  set.sys_dim = d;
  set.order = k;
  set.num_jumps = J;
  set.blocks.resize(kraus_block_count(k, J));

  // F0 = I + V0 dt + 1/2 (V0^2 + V0') dt^2 + 1/6 (...) dt^3
  HalfPowerSeries f0(d, 2 * k);
  f0.coeff(0) = identity(d);
  f0.coeff(2) = V0;
  if (k >= 2) f0.coeff(4) = 0.5 * (V0 * V0 + V0d);
  if (k >= 3) f0.coeff(6) = (V0 * V0 * V0 + 2.0 * V0d * V0 + V0 * V0d + V0dd) / 6.0;
  set.blocks[0] = make_block(0, KrausFamily::F0, {}, std::move(f0));

  for (std::size_t j = 0; j < J; ++j) {
    HalfPowerSeries f(d, 2 * k - 1);
    f.coeff(1) = V[j];
    if (k >= 2) f.coeff(3) = 0.5 * (Vd[j] + V[j] * V0 + V0 * V[j]);
    if (k >= 3) {
      f.coeff(5) = (V0 * V0 * V[j] + V0d * V[j] + V0 * V[j] * V0 + (V0d * V[j] + V0 * Vd[j]) +
                    V[j] * V0 * V0 + Vd[j] * V0 + (Vd[j] * V0 + V[j] * V0d) + Vdd[j]) /
                   6.0;
    }
    set.blocks[f1_index(j)] = make_block(f1_index(j), KrausFamily::F1, {j}, std::move(f));
  }
  if (k == 1) {
    return set;
  }

  for (std::size_t j = 0; j < J; ++j) {
    HalfPowerSeries f(d, 2 * k - 1);
    f.coeff(3) = (V0 * V[j] - V[j] * V0 - Vd[j]) / kSqrt12;
    set.blocks[f2_index(j, J)] = make_block(f2_index(j, J), KrausFamily::F2, {j}, std::move(f));
  }
  for (std::size_t l = 0; l < J; ++l) {
    for (std::size_t kk = 0; kk < J; ++kk) {
      for (std::size_t j = 0; j < J; ++j) {
        HalfPowerSeries f(d, 2 * k - 1);
        f.coeff(3) = V[j] * V[kk] * V[l] / kSqrt6;
        const std::size_t idx = f3_index(j, kk, l, J);
        set.blocks[idx] = make_block(idx, KrausFamily::F3, {j, kk, l}, std::move(f));
      }
    }
  }
  for (std::size_t kk = 0; kk < J; ++kk) {
    for (std::size_t j = 0; j < J; ++j) {
      HalfPowerSeries f(d, 2 * k - 2);
      f.coeff(2) = V[j] * V[kk] / kSqrt2;
      if (k >= 3) {
        f.coeff(4) = (kSqrt2 / 6.0) * (V0 * V[j] * V[kk] + V[j] * V0 * V[kk] + Vd[j] * V[kk] +
                                       V[j] * V[kk] * V0 + (Vd[j] * V[kk] + V[j] * Vd[kk]));
      }
      const std::size_t idx = f4_index(j, kk, J);
      set.blocks[idx] = make_block(idx, KrausFamily::F4, {j, kk}, std::move(f));
    }
  }
  check_layout(set);
  return set;
}

KrausSeriesSet kraus_series(const LindbladModel& model, double t, int k) {
  if (k < 1 || k > 3) {
    throw std::invalid_argument("kraus_series: order must be 1, 2 or 3, got " + std::to_string(k));
  }
  return kraus_series(snapshot(model, t, k - 1), k);
}

KrausSeriesSet kraus_series_compact_order2(const LindbladModel& model) {
  if (model.time_dependent()) {
    throw std::invalid_argument("kraus_series_compact_order2: model '" + model.identity() +
                                "' is time-dependent");
  }
  const ModelSnapshot s = snapshot(model, 0.0, 0);
  const Index d = s.dim();
  const std::size_t J = s.num_jumps();
  const Matrix V0 = effective_drift(s);

  KrausSeriesSet set;
  set.sys_dim = d;
  set.order = 2;
  set.num_jumps = J;
  set.compact = true;
  set.blocks.resize(J * J + J + 1);

  HalfPowerSeries f0(d, 4);
  f0.coeff(0) = identity(d);
  f0.coeff(2) = V0;
  f0.coeff(4) = 0.5 * V0 * V0;
  set.blocks[0] = make_block(0, KrausFamily::F0, {}, std::move(f0));

  for (std::size_t j = 0; j < J; ++j) {
    HalfPowerSeries f(d, 3);
    f.coeff(1) = s.V[j];
    f.coeff(3) = 0.5 * (s.V[j] * V0 + V0 * s.V[j]);
    set.blocks[f1_index(j)] = make_block(f1_index(j), KrausFamily::F1, {j}, std::move(f));
  }
  // Integer-power pair blocks; the zero dt^2 slot keeps their next dilation
  // coefficient in the matching.
  for (std::size_t kk = 0; kk < J; ++kk) {
    for (std::size_t j = 0; j < J; ++j) {
      HalfPowerSeries f(d, 4);
      f.coeff(2) = s.V[j] * s.V[kk] / kSqrt2;
      const std::size_t idx = compact_pair_index(j, kk, J);
      set.blocks[idx] = make_block(idx, KrausFamily::Compact2, {j, kk}, std::move(f));
    }
  }
  check_layout(set);
  return set;
}

std::vector<Matrix> evaluate_blocks(const KrausSeriesSet& set, double dt) {
  std::vector<Matrix> out;
  out.reserve(set.blocks.size());
  for (const auto& b : set.blocks) {
    out.push_back(evaluate(b.series, dt));
  }
  return out;
}

Matrix apply_kraus(const KrausSeriesSet& set, double dt, const Matrix& rho) {
  if (dt <= 0.0) {
    throw std::invalid_argument("apply_kraus: dt must be positive");
  }
  if (rho.rows() != set.sys_dim || rho.cols() != set.sys_dim) {
    throw std::invalid_argument("apply_kraus: state dimension mismatch");
  }
  Matrix out = Matrix::Zero(set.sys_dim, set.sys_dim);
  for (const auto& f : evaluate_blocks(set, dt)) {
    if (f.isZero(0.0)) continue;
    out.noalias() += f * rho * f.adjoint();
  }
  return hermitize(out);
}

Matrix apply_kraus(const KrausSeriesSet& set, double dt, const DensityMatrix& rho) {
  return apply_kraus(set, dt, rho.matrix());
}

double trace_residual(const KrausSeriesSet& set, double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("trace_residual: dt must be positive");
  }
  Matrix acc = -identity(set.sys_dim);
  for (const auto& f : evaluate_blocks(set, dt)) {
    acc.noalias() += f.adjoint() * f;
  }
  return operator_norm(acc);
}

std::size_t CovarianceFactor::num_active() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

CovarianceFactor orthogonalize_covariance(const RealMatrix& cov, double negative_tol,
                                          double active_tol) {
  if (cov.rows() != cov.cols()) {
    throw std::invalid_argument("orthogonalize_covariance: matrix is not square");
  }
  if ((cov - cov.transpose()).norm() > 1e-12 * std::max(1.0, cov.norm())) {
    throw std::invalid_argument("orthogonalize_covariance: matrix is not symmetric");
  }
  const Index n = cov.rows();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (cov + cov.transpose()));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("orthogonalize_covariance: eigensolver failed");
  }
  CovarianceFactor out;
  out.eigenvalues = es.eigenvalues();
  out.coeff = RealMatrix::Zero(n, n);
  out.active.assign(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    const double lambda = out.eigenvalues(i);
    if (lambda < -negative_tol) {
      std::ostringstream msg;
      msg << "orthogonalize_covariance: covariance is indefinite (eigenvalue " << lambda << ")";
      throw std::invalid_argument(msg.str());
    }
    if (lambda > active_tol) {
      out.active[static_cast<std::size_t>(i)] = true;
      out.coeff.col(i) = es.eigenvectors().col(i) * std::sqrt(lambda);
    }
  }
  return out;
}

MultiIndexSets enumerate_multi_indices(int k, int J) {
  if (k < 1 || J < 0) {
    throw std::invalid_argument("enumerate_multi_indices: need k >= 1 and J >= 0");
  }
  MultiIndexSets out;
  std::vector<MultiIndex> frontier{{}};
  for (int len = 1; len <= k; ++len) {
    std::vector<MultiIndex> next;
    next.reserve(frontier.size() * static_cast<std::size_t>(J + 1));
    for (const auto& prefix : frontier) {
      for (int a = 0; a <= J; ++a) {
        MultiIndex m = prefix;
        m.push_back(a);
        next.push_back(std::move(m));
      }
    }
    out.all.insert(out.all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(out.all.begin(), out.all.end());
  for (const auto& m : out.all) {
    if (std::any_of(m.begin(), m.end(), [](int a) { return a != 0; })) {
      out.nonzero.push_back(m);
    }
  }
  return out;
}

}  // namespace lindsim
