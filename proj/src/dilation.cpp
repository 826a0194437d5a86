#include "lindsim/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace lindsim {

int ancilla_qubits_for(std::size_t num_blocks) {
  int a = 0;
  while ((std::size_t{1} << a) < num_blocks) ++a;
  return a;
}

int DilatedHamiltonian::ancilla_qubits() const { return ancilla_qubits_for(blocks.size()); }

Matrix DilatedHamiltonian::assembled() const {
  const Index d = sys_dim;
  const Index n = full_dim();
  Matrix h = Matrix::Zero(n, n);
  if (blocks.empty()) return h;
  h.topLeftCorner(d, d) = blocks[0];
  for (std::size_t j = 1; j < blocks.size(); ++j) {
    const Index r = static_cast<Index>(j) * d;
    h.block(r, 0, d, d) = blocks[j];
    h.block(0, r, d, d) = blocks[j].adjoint();
  }
  return h;
}

namespace {

/// Relative Hermiticity defect, measured against max(1, ||x||).
double rel_defect(const Matrix& x) { return hermiticity_defect(x) / std::max(1.0, x.norm()); }

void finalize(DilatedHamiltonian& dh) {
  dh.blocks.clear();
  dh.blocks.reserve(dh.block_series.size());
  for (const auto& s : dh.block_series) dh.blocks.push_back(evaluate(s, dh.dt));
}

void require_dt(double dt, const char* what) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument(std::string(what) + ": dt must be positive");
  }
}

void require_unit_leading(const KrausSeriesSet& set, const char* what) {
  if (set.blocks.empty() || set.blocks[0].family != KrausFamily::F0) {
    throw std::invalid_argument(std::string(what) + ": block 0 must be F0");
  }
  const Matrix& c = set.blocks[0].series.coeff(0);
  if ((c - identity(set.sys_dim)).norm() > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": constant coefficient of F0 is not I");
  }
  for (std::size_t j = 1; j < set.blocks.size(); ++j) {
    if (!set.blocks[j].series.coeff(0).isZero(1e-14)) {
      throw std::invalid_argument(std::string(what) + ": block " + std::to_string(j) +
                                  " has a constant term");
    }
  }
}

/// Stores the Hermitian part of an H_0 coefficient after checking the defect.
void set_h0_coeff(DilatedHamiltonian& dh, int p, const Matrix& x, double tol, const char* what) {
  const double defect = rel_defect(x);
  dh.h0_hermiticity_defect = std::max(dh.h0_hermiticity_defect, defect);
  if (defect > tol) {
    std::ostringstream msg;
    msg << what << ": H_0 coefficient of dt^(" << p << "/2) is not Hermitian (relative defect "
        << defect << "); the Kraus set is not trace preserving to the requested order";
    throw NonHermitianError(msg.str());
  }
  dh.block_series[0].coeff(p) = hermitize(x);
}

Matrix anti(const Matrix& a, const Matrix& b) { return a * b + b * a; }

}  // namespace

DilatedHamiltonian dilate_explicit(const KrausSeriesSet& set, double dt) {
  require_dt(dt, "dilate_explicit");
  require_unit_leading(set, "dilate_explicit");
  const int k = set.order;
  if (k < 1 || k > 3 || (set.compact && k != 2)) {
    throw std::invalid_argument("dilate_explicit: unsupported order " + std::to_string(k));
  }
  const Index d = set.sys_dim;
  const Matrix zero = Matrix::Zero(d, d);

  DilatedHamiltonian dh;
  dh.sys_dim = d;
  dh.order = k;
  dh.dt = dt;
  for (const auto& b : set.blocks) {
    dh.block_series.emplace_back(d, b.series.max_half_power() - 1);
  }
  auto& h = dh.block_series;
  const auto& F0 = set.blocks[0].series;
  auto is = [&](std::size_t j, KrausFamily f) { return set.blocks[j].family == f; };
  auto integer_block = [&](std::size_t j) {
    return is(j, KrausFamily::F4) || is(j, KrausFamily::Compact2);
  };
  auto odd_block = [&](std::size_t j) { return is(j, KrausFamily::F2) || is(j, KrausFamily::F3); };
  const std::size_t n = set.blocks.size();

  // Leading coefficients.
  Matrix Q0 = zero;
  for (std::size_t j = 1; j < n; ++j) {
    const auto& Y = set.blocks[j].series;
    if (is(j, KrausFamily::F1)) {
      h[j].coeff(0) = Y.coeff(1);
      Q0.noalias() += Y.coeff(1).adjoint() * Y.coeff(1);
    } else if (integer_block(j)) {
      h[j].coeff(1) = Y.coeff(2);
    }
  }
  const Matrix X00 = kI * F0.coeff(2) + 0.5 * kI * Q0;
  set_h0_coeff(dh, 1, X00, 1e-10, "dilate_explicit");
  const Matrix& X0 = h[0].coeff(1);
  if (k == 1) {
    finalize(dh);
    return dh;
  }

  const Matrix Z1 = -0.5 * kI * X0 - Q0 / 6.0;
  for (std::size_t j = 1; j < n; ++j) {
    const auto& Y = set.blocks[j].series;
    if (is(j, KrausFamily::F1)) {
      h[j].coeff(2) = Y.coeff(3) - h[j].coeff(0) * Z1;
    } else if (odd_block(j)) {
      h[j].coeff(2) = Y.coeff(3);
    } else if (integer_block(j) && h[j].max_half_power() >= 3) {
      h[j].coeff(3) = Y.coeff_or_zero(4) - h[j].coeff(1) * Z1;
    }
  }
  Matrix Q1 = zero;
  for (std::size_t j = 1; j < n; ++j) {
    if (is(j, KrausFamily::F1)) {
      const Matrix m = h[j].coeff(0).adjoint() * h[j].coeff(2);
      Q1 += m + m.adjoint();
    } else if (integer_block(j)) {
      Q1.noalias() += h[j].coeff(1).adjoint() * h[j].coeff(1);
    }
  }
  const Matrix X01 = kI * F0.coeff(4) + 0.5 * kI * (Q1 + X0 * X0) - (kI / 24.0) * Q0 * Q0 +
                     anti(Q0, X0) / 6.0;
  set_h0_coeff(dh, 3, X01, 1e-10, "dilate_explicit");
  const Matrix& X1 = h[0].coeff(3);
  if (k == 2) {
    finalize(dh);
    return dh;
  }

  const Matrix Z2 = -0.5 * kI * X1 - X0 * X0 / 6.0 - Q1 / 6.0 + (kI / 24.0) * anti(Q0, X0) +
                    Q0 * Q0 / 120.0;
  for (std::size_t j = 1; j < n; ++j) {
    const auto& Y = set.blocks[j].series;
    if (is(j, KrausFamily::F1)) {
      h[j].coeff(4) = Y.coeff(5) - h[j].coeff(2) * Z1 - h[j].coeff(0) * Z2;
    } else if (odd_block(j)) {
      h[j].coeff(4) = -h[j].coeff(2) * Z1;
    }
  }
  Matrix Q2 = zero;
  for (std::size_t j = 1; j < n; ++j) {
    if (is(j, KrausFamily::F1)) {
      const Matrix m = h[j].coeff(0).adjoint() * h[j].coeff(4);
      Q2 += m + m.adjoint() + h[j].coeff(2).adjoint() * h[j].coeff(2);
    } else if (odd_block(j)) {
      Q2.noalias() += h[j].coeff(2).adjoint() * h[j].coeff(2);
    } else if (integer_block(j)) {
      const Matrix m = h[j].coeff(3).adjoint() * h[j].coeff(1);
      Q2 += m + m.adjoint();
    }
  }
  const Matrix X02 = kI * F0.coeff(6) + 0.5 * kI * (anti(X0, X1) + Q2) +
                     (X0 * X0 * X0 + anti(Q0, X1) + anti(Q1, X0)) / 6.0 -
                     (kI / 24.0) * (Q0 * X0 * X0 + X0 * Q0 * X0 + X0 * X0 * Q0 + anti(Q0, Q1)) -
                     (Q0 * X0 * Q0 + Q0 * Q0 * X0 + X0 * Q0 * Q0) / 120.0 +
                     (kI / 720.0) * Q0 * Q0 * Q0;
  set_h0_coeff(dh, 5, X02, 1e-10, "dilate_explicit");
  finalize(dh);
  return dh;
}

DilatedHamiltonian dilate_order1(const LindbladModel& model, double t, double dt) {
  require_dt(dt, "dilate_order1");
  const ModelSnapshot s = snapshot(model, t, 0);
  const Index d = s.dim();
  DilatedHamiltonian dh;
  dh.sys_dim = d;
  dh.order = 1;
  dh.dt = dt;
  dh.block_series.push_back(HalfPowerSeries::monomial(s.H, 1, 1));
  for (const auto& v : s.V) dh.block_series.push_back(HalfPowerSeries::constant(v, 0));
  finalize(dh);
  return dh;
}

DilatedHamiltonian dilate_order2(const LindbladModel& model, double t, double dt) {
  require_dt(dt, "dilate_order2");
  return dilate_explicit(kraus_series(model, t, 2), dt);
}

DilatedHamiltonian dilate_order3(const LindbladModel& model, double t, double dt) {
  require_dt(dt, "dilate_order3");
  return dilate_explicit(kraus_series(model, t, 3), dt);
}

DilatedHamiltonian dilate_order2_compact(const LindbladModel& model, double dt) {
  require_dt(dt, "dilate_order2_compact");
  return dilate_explicit(kraus_series_compact_order2(model), dt);
}

namespace {

/// Column U|0> of exp(A) with A = -i dt^(1/2) H~, as block series truncated at m.
std::vector<HalfPowerSeries> first_column_series(const std::vector<HalfPowerSeries>& h, int m,
                                                 Index d) {
  const std::size_t n = h.size();
  std::vector<HalfPowerSeries> down, up;  // -i dt^(1/2) H_j and -i dt^(1/2) H_j^+
  down.reserve(n);
  up.reserve(n);
  for (const auto& hj : h) {
    HalfPowerSeries s = hj.truncated(m).shifted(1) * (-kI);
    up.push_back(s.adjoint() * Complex(-1.0, 0.0));  // (-i X)^+ = i X^+, want -i X^+
    down.push_back(std::move(s));
  }
  std::vector<HalfPowerSeries> cur(n, HalfPowerSeries::zero(d, m));
  cur[0] = HalfPowerSeries::constant(identity(d), m);
  std::vector<HalfPowerSeries> total = cur;
  for (int k = 1; k <= m; ++k) {
    std::vector<HalfPowerSeries> next(n, HalfPowerSeries::zero(d, m));
    next[0] = series_mul(down[0], cur[0]);
    for (std::size_t j = 1; j < n; ++j) {
      if (cur[j].leading_half_power() <= m) next[0] += series_mul(up[j], cur[j]);
      next[j] = series_mul(down[j], cur[0]);
    }
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] *= Complex(1.0 / k, 0.0);
      total[j] += next[j];
      any = any || next[j].leading_half_power() <= m;
    }
    if (!any) break;
    cur = std::move(next);
  }
  return total;
}

}  // namespace

DilatedHamiltonian dilate_generic(const KrausSeriesSet& set, double dt, double hermitian_tol) {
  require_dt(dt, "dilate_generic");
  require_unit_leading(set, "dilate_generic");
  const Index d = set.sys_dim;
  const std::size_t n = set.blocks.size();

  // Targets: F_0 for the leading block, -i F_j elsewhere.
  std::vector<HalfPowerSeries> target;
  target.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    target.push_back(j == 0 ? set.blocks[j].series : set.blocks[j].series * (-kI));
  }

  DilatedHamiltonian dh;
  dh.sys_dim = d;
  dh.order = set.order;
  dh.dt = dt;
  for (const auto& b : set.blocks) {
    dh.block_series.emplace_back(d, std::max(0, b.series.max_half_power() - 1));
  }

  // The coefficient of dt^(p/2) in <j|U|0> depends on H_j's dt^((p-1)/2)
  // coefficient only through the linear term -i H_j[p-1]; everything else
  // involves lower coefficients. So each p is solved for all blocks at once.
  const int P = set.max_half_power();
  for (int p = 1; p <= P; ++p) {
    const auto col = first_column_series(dh.block_series, p, d);
    for (std::size_t j = 0; j < n; ++j) {
      if (p > set.blocks[j].series.max_half_power()) continue;
      const Matrix x = kI * (target[j].coeff(p) - col[j].coeff(p));
      if (j == 0) {
        set_h0_coeff(dh, p - 1, x, hermitian_tol, "dilate_generic");
      } else {
        dh.block_series[j].coeff(p - 1) = x;
      }
    }
  }
  finalize(dh);
  return dh;
}

std::vector<Matrix> first_column_blocks(const DilatedHamiltonian& dh) {
  const Index d = dh.sys_dim;
  const HermitianEigen eig = hermitian_eigen(dh.assembled());
  const Matrix w = expm_hermitian_leading_columns(eig, std::sqrt(dh.dt), d);
  std::vector<Matrix> out;
  out.reserve(dh.num_blocks());
  for (std::size_t j = 0; j < dh.num_blocks(); ++j) {
    out.push_back(w.block(static_cast<Index>(j) * d, 0, d, d));
  }
  return out;
}

namespace {

void require_matching(const DilatedHamiltonian& dh, const KrausSeriesSet& set, double dt,
                      const char* what) {
  if (dh.sys_dim != set.sys_dim || dh.num_blocks() != set.num_blocks()) {
    throw std::invalid_argument(std::string(what) + ": dilation and Kraus set are inconsistent");
  }
  if (std::abs(dh.dt - dt) > 1e-14 * std::max(1.0, dt)) {
    throw std::invalid_argument(std::string(what) + ": dilation was built for a different dt");
  }
}

Matrix transfer_matrix(const std::vector<Matrix>& ops) {
  const Index d = ops.front().rows();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& f : ops) s += kron(f, f.conjugate());
  return s;
}

}  // namespace

double first_column_residual(const DilatedHamiltonian& dh, const KrausSeriesSet& set, double dt) {
  require_matching(dh, set, dt, "first_column_residual");
  const auto w = first_column_blocks(dh);
  const auto f = evaluate_blocks(set, dt);
  double worst = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const Matrix target = j == 0 ? f[j] : Matrix(-kI * f[j]);
    worst = std::max(worst, operator_norm(w[j] - target));
  }
  return worst;
}

double channel_residual(const DilatedHamiltonian& dh, const KrausSeriesSet& set, double dt) {
  require_matching(dh, set, dt, "channel_residual");
  return operator_norm(transfer_matrix(first_column_blocks(dh)) -
                       transfer_matrix(evaluate_blocks(set, dt)));
}

std::string dump_dilated_json(const DilatedHamiltonian& dh) {
  nlohmann::json j;
  j["sys_dim"] = dh.sys_dim;
  j["ancilla_qubits"] = dh.ancilla_qubits();
  j["num_blocks"] = dh.num_blocks();
  j["order"] = dh.order;
  j["dt"] = dh.dt;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : dh.blocks) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < b.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < b.cols(); ++c) row.push_back({b(r, c).real(), b(r, c).imag()});
      rows.push_back(std::move(row));
    }
    blocks.push_back(std::move(rows));
  }
  j["blocks"] = std::move(blocks);
  return j.dump();
}

DilatedHamiltonian load_dilated_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DilatedHamiltonian dh;
  dh.sys_dim = j.at("sys_dim").get<Index>();
  dh.order = j.value("order", 0);
  dh.dt = j.at("dt").get<double>();
  for (const auto& rows : j.at("blocks")) {
    if (static_cast<Index>(rows.size()) != dh.sys_dim) {
      throw std::invalid_argument("load_dilated_json: block row count mismatch");
    }
    Matrix b(dh.sys_dim, dh.sys_dim);
    for (Index r = 0; r < dh.sys_dim; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (static_cast<Index>(row.size()) != dh.sys_dim) {
        throw std::invalid_argument("load_dilated_json: block column count mismatch");
      }
      for (Index c = 0; c < dh.sys_dim; ++c) {
        const auto& e = row.at(static_cast<std::size_t>(c));
        b(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
      }
    }
    dh.blocks.push_back(std::move(b));
  }
  if (j.contains("num_blocks") && j.at("num_blocks").get<std::size_t>() != dh.blocks.size()) {
    throw std::invalid_argument("load_dilated_json: num_blocks does not match blocks");
  }
  if (j.contains("ancilla_qubits") && j.at("ancilla_qubits").get<int>() != dh.ancilla_qubits()) {
    throw std::invalid_argument("load_dilated_json: ancilla_qubits does not match num_blocks");
  }
  return dh;
}

}  // namespace lindsim
