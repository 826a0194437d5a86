#include "lindsim/reference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindsim {

Matrix apply_lindbladian(const ModelSnapshot& s, const Matrix& rho) {
  Matrix out = -kI * (s.H * rho - rho * s.H);
  for (const auto& v : s.V) {
    const Matrix vv = v.adjoint() * v;
    out += v * rho * v.adjoint() - 0.5 * (vv * rho + rho * vv);
  }
  return out;
}

Matrix apply_lindbladian(const LindbladModel& model, double t, const Matrix& rho) {
  return apply_lindbladian(snapshot(model, t, 0), rho);
}

Matrix apply_lindbladian(const LindbladModel& model, double t, const DensityMatrix& rho) {
  return apply_lindbladian(model, t, rho.matrix());
}

namespace {

Matrix rk4_raw(const LindbladModel& model, Matrix rho, double t0, double t_end, std::size_t n) {
  const double h = (t_end - t0) / static_cast<double>(n);
  if (!model.time_dependent()) {
    const ModelSnapshot s = snapshot(model, t0, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix k1 = apply_lindbladian(s, rho);
      const Matrix k2 = apply_lindbladian(s, rho + 0.5 * h * k1);
      const Matrix k3 = apply_lindbladian(s, rho + 0.5 * h * k2);
      const Matrix k4 = apply_lindbladian(s, rho + h * k3);
      rho = hermitize(rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    return rho;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const ModelSnapshot s0 = snapshot(model, t, 0);
    const ModelSnapshot sm = snapshot(model, t + 0.5 * h, 0);
    const ModelSnapshot s1 = snapshot(model, t + h, 0);
    const Matrix k1 = apply_lindbladian(s0, rho);
    const Matrix k2 = apply_lindbladian(sm, rho + 0.5 * h * k1);
    const Matrix k3 = apply_lindbladian(sm, rho + 0.5 * h * k2);
    const Matrix k4 = apply_lindbladian(s1, rho + h * k3);
    rho = hermitize(rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  }
  return rho;
}

}  // namespace

DensityMatrix rk4_evolve(const LindbladModel& model, const DensityMatrix& rho0, double t0,
                         double t_end, std::size_t n_steps) {
  if (n_steps == 0) {
    throw std::invalid_argument("rk4_evolve: n_steps must be at least 1");
  }
  if (rho0.dim() != model.dim()) {
    throw std::invalid_argument("rk4_evolve: state dimension does not match the model");
  }
  return DensityMatrix(rk4_raw(model, rho0.matrix(), t0, t_end, n_steps));
}

DensityMatrix reference_solution(const LindbladModel& model, const DensityMatrix& rho0, double t0,
                                 double t_end, const ReferenceOptions& opts) {
  if (rho0.dim() != model.dim()) {
    throw std::invalid_argument("reference_solution: state dimension does not match the model");
  }
  const double span = t_end - t0;
  if (span == 0.0) {
    return rho0;
  }
  // Starting resolution: keep h * ||L|| around 1/2 using be_norm sampled on the interval.
  double scale = 0.0;
  for (int i = 0; i <= 8; ++i) {
    scale = std::max(scale, be_norm(model, t0 + span * i / 8.0));
  }
  std::size_t n = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(2.0 * std::abs(span) * scale)));

  Matrix prev = rk4_raw(model, rho0.matrix(), t0, t_end, n);
  while (2 * n <= opts.max_steps) {
    n *= 2;
    Matrix cur = rk4_raw(model, rho0.matrix(), t0, t_end, n);
    const double change = trace_norm(cur - prev);
    if (change < opts.tolerance) {
      return DensityMatrix(std::move(cur));
    }
    prev = std::move(cur);
  }
  std::ostringstream msg;
  msg << "reference_solution: RK4 did not converge to " << opts.tolerance << " within "
      << opts.max_steps << " steps";
  throw std::runtime_error(msg.str());
}

}  // namespace lindsim
