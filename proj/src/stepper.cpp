#include "lindsim/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "lindsim/kraus.hpp"

namespace lindsim {

namespace {

std::vector<Matrix> split_rows(const Matrix& stacked, Index d, std::size_t count) {
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    out.push_back(stacked.block(static_cast<Index>(j) * d, 0, d, d));
  }
  return out;
}

std::vector<Matrix> column_full(const DilatedHamiltonian& dh) {
  const HermitianEigen eig = hermitian_eigen(dh.assembled());
  const Matrix w = expm_hermitian_leading_columns(eig, std::sqrt(dh.dt), dh.sys_dim);
  return split_rows(w, dh.sys_dim, dh.num_blocks());
}

std::vector<Matrix> column_reduced(const DilatedHamiltonian& dh) {
  const Index d = dh.sys_dim;
  const std::size_t nb = dh.num_blocks();
  const double s = std::sqrt(dh.dt);
  if (nb == 1) {
    return {expm_hermitian(dh.blocks[0], s)};
  }
  Matrix b(static_cast<Index>(nb - 1) * d, d);
  for (std::size_t j = 1; j < nb; ++j) {
    b.block(static_cast<Index>(j - 1) * d, 0, d, d) = dh.blocks[j];
  }
  // H~ maps span{|0> x C^d, Q} into itself, where B = Q R is the thin QR of
  // the stacked off-diagonal blocks: H~ (x, Q y) = (H0 x + R^+ y, Q R x).
  Eigen::HouseholderQR<Matrix> qr(b);
  const Matrix q = qr.householderQ() * Matrix::Identity(b.rows(), d);
  const Matrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  Matrix small = Matrix::Zero(2 * d, 2 * d);
  small.topLeftCorner(d, d) = dh.blocks[0];
  small.topRightCorner(d, d) = r.adjoint();
  small.bottomLeftCorner(d, d) = r;
  const Matrix e = expm_hermitian_leading_columns(hermitian_eigen(small), s, d);
  Matrix w(static_cast<Index>(nb) * d, d);
  w.topRows(d) = e.topRows(d);
  w.bottomRows(b.rows()) = q * e.bottomRows(d);
  return split_rows(w, d, nb);
}

}  // namespace

StinespringStep::StinespringStep(const DilatedHamiltonian& dh, ExpmMethod method)
    : d_(dh.sys_dim) {
  if (dh.blocks.empty() || !(dh.dt > 0.0)) {
    throw std::invalid_argument("StinespringStep: empty dilation or nonpositive dt");
  }
  w_ = method == ExpmMethod::Full ? column_full(dh) : column_reduced(dh);
  // Padding blocks are zero, so their rows of U|0> vanish; drop exact zeros.
  w_.erase(std::remove_if(w_.begin() + 1, w_.end(), [](const Matrix& m) { return m.isZero(0.0); }),
           w_.end());
}

Matrix StinespringStep::apply(const Matrix& rho) const {
  if (rho.rows() != d_ || rho.cols() != d_) {
    std::ostringstream msg;
    msg << "StinespringStep: state is " << rho.rows() << "x" << rho.cols() << ", dilation acts on "
        << d_;
    throw std::invalid_argument(msg.str());
  }
  Matrix out = Matrix::Zero(d_, d_);
  for (const auto& w : w_) {
    out.noalias() += w * rho * w.adjoint();
  }
  return hermitize(out);
}

DensityMatrix StinespringStep::apply(const DensityMatrix& rho) const {
  return DensityMatrix(apply(rho.matrix()));
}

DensityMatrix step(const DilatedHamiltonian& dh, const DensityMatrix& rho, ExpmMethod method) {
  if (dh.sys_dim != rho.dim()) {
    throw std::invalid_argument("step: dilation and state dimensions differ");
  }
  return StinespringStep(dh, method).apply(rho);
}

DilatedHamiltonian build_dilation(const LindbladModel& model, int order, double t, double dt,
                                  DilationRoute route) {
  if (order < 1 || order > 3) {
    throw std::invalid_argument("order must be 1, 2 or 3, got " + std::to_string(order));
  }
  switch (route) {
    case DilationRoute::Explicit:
      if (order == 1) return dilate_order1(model, t, dt);
      if (order == 2) return dilate_order2(model, t, dt);
      return dilate_order3(model, t, dt);
    case DilationRoute::Generic:
      return dilate_generic(kraus_series(model, t, order), dt);
    case DilationRoute::Compact:
      if (order != 2) {
        throw std::invalid_argument("the compact construction is second order only");
      }
      return dilate_order2_compact(model, dt);
  }
  throw std::invalid_argument("unknown dilation route");
}

namespace {

double relative_defect(const Matrix& h) {
  const double n = h.norm();
  return n == 0.0 ? 0.0 : hermiticity_defect(h) / n;
}

void check_guard(const LindbladModel& model, double t, double dt, double T, double guard) {
  const double be = be_norm(model, t);
  if (dt * be > guard) {
    const auto suggested = static_cast<long long>(std::ceil(std::abs(T) * be / guard));
    std::ostringstream msg;
    msg << "step size dt=" << dt << " violates the stability guard dt*be_norm <= " << guard
        << " (be_norm=" << be << " at t=" << t << "); use N >= " << suggested;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Trajectory evolve(const LindbladModel& model, int order, const DensityMatrix& rho0, double T,
                  std::size_t N, const EvolveOptions& opts) {
  if (N == 0) throw std::invalid_argument("evolve: N must be at least 1");
  if (!(T > 0.0)) throw std::invalid_argument("evolve: T must be positive");
  if (rho0.dim() != model.dim()) {
    throw std::invalid_argument("evolve: state dimension does not match the model");
  }
  const double dt = T / static_cast<double>(N);

  Trajectory traj;
  traj.dt = dt;
  auto& diag = traj.diagnostics;
  Matrix rho = rho0.matrix();
  diag.min_eigenvalue = min_eigenvalue(rho);
  if (opts.keep_states) {
    traj.states.reserve(N + 1);
    traj.times.reserve(N + 1);
    traj.states.push_back(rho);
    traj.times.push_back(opts.t0);
  }

  auto build = [&](double t) {
    const DilatedHamiltonian dh = build_dilation(model, order, t, dt, opts.route);
    const Matrix full = dh.assembled();
    diag.max_generator_hermiticity_defect =
        std::max(diag.max_generator_hermiticity_defect, relative_defect(full));
    diag.max_h0_hermiticity_defect = std::max(diag.max_h0_hermiticity_defect, dh.h0_hermiticity_defect);
    diag.dilated_dim = static_cast<std::size_t>(dh.full_dim());
    diag.num_blocks = dh.num_blocks();
    ++diag.expm_builds;
    return StinespringStep(dh, opts.method);
  };

  std::optional<StinespringStep> cached;
  if (!model.time_dependent()) {
    check_guard(model, opts.t0, dt, T, opts.dt_guard);
    cached.emplace(build(opts.t0));
  }
  for (std::size_t n = 0; n < N; ++n) {
    const double t = opts.t0 + static_cast<double>(n) * dt;
    Matrix next;
    if (cached) {
      next = cached->apply(rho);
    } else {
      check_guard(model, t, dt, T, opts.dt_guard);
      next = build(t).apply(rho);
    }
    diag.max_trace_drift = std::max(diag.max_trace_drift, std::abs(next.trace() - rho.trace()));
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, min_eigenvalue(next));
    rho = std::move(next);
    if (opts.keep_states) {
      traj.states.push_back(rho);
      traj.times.push_back(opts.t0 + static_cast<double>(n + 1) * dt);
    }
  }
  if (!opts.keep_states) {
    traj.states.push_back(rho);
    traj.times.push_back(opts.t0 + T);
  }
  return traj;
}

}  // namespace lindsim
