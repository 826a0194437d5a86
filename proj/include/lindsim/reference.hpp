#pragma once

#include <cstddef>

#include "lindsim/linalg.hpp"
#include "lindsim/model.hpp"

namespace lindsim {

/// L_t(rho) = -i[H(t), rho] + sum_j (V_j rho V_j^+ - 1/2 {V_j^+ V_j, rho})
Matrix apply_lindbladian(const LindbladModel& model, double t, const Matrix& rho);
Matrix apply_lindbladian(const ModelSnapshot& s, const Matrix& rho);
Matrix apply_lindbladian(const LindbladModel& model, double t, const DensityMatrix& rho);

/// Classic RK4 on d rho/dt = L_t(rho) from t0 to t_end with n_steps equal steps.
/// The state is re-Hermitized after every step.
DensityMatrix rk4_evolve(const LindbladModel& model, const DensityMatrix& rho0, double t0,
                         double t_end, std::size_t n_steps);

struct ReferenceOptions {
  double tolerance = 1e-10;          // trace-norm change between successive doublings
  std::size_t max_steps = std::size_t{1} << 20;
};

/// RK4 with the step count doubled until successive results agree within
/// `tolerance` in trace norm. Throws std::runtime_error past max_steps.
DensityMatrix reference_solution(const LindbladModel& model, const DensityMatrix& rho0, double t0,
                                 double t_end, const ReferenceOptions& opts = {});

}  // namespace lindsim
