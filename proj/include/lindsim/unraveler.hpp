#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lindsim/linalg.hpp"
#include "lindsim/model.hpp"

namespace lindsim {

/// Euler-Maruyama step of the linear stochastic Schroedinger equation:
///   psi + V0 psi dt + sum_j V_j psi sqrt(dt) w_j,   w_j ~ N(0,1).
/// No normalization: E[psi psi^+] follows the Lindblad flow.
Vector em_step(const ModelSnapshot& s, const Vector& psi, double dt, const std::vector<double>& noise);
Vector em_step(const LindbladModel& model, double t, const Vector& psi, double dt,
               const std::vector<double>& noise);

/// Weak order 2.0 step. `gaussians` are dW_j ~ N(0, dt); `twopoints` holds
/// dZ_{j1,j2} = +-dt for j1 < j2 in lexicographic pair order, with
/// dZ_{j2,j1} = -dZ_{j1,j2}.
///   psi + V0 psi dt + 1/2 V0^2 psi dt^2
///       + sum_j (V_j + dt/2 {V_j, V0}) psi dW_j
///       + 1/2 sum_j V_j^2 psi (dW_j^2 - dt)
///       + 1/2 sum_{j1 != j2} V_{j2} V_{j1} psi (dW_{j1} dW_{j2} - dZ_{j1,j2})
Vector weak2_step(const ModelSnapshot& s, const Vector& psi, double dt,
                  const std::vector<double>& gaussians, const std::vector<double>& twopoints);
Vector weak2_step(const LindbladModel& model, double t, const Vector& psi, double dt,
                  const std::vector<double>& gaussians, const std::vector<double>& twopoints);

enum class SdeScheme { EulerMaruyama, Weak2 };

/// Deterministic per-trajectory seed: splitmix64 of base_seed mixed with the index.
std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index);

/// Noise for one step: J Gaussians (N(0,1) for EM, N(0,dt) for weak 2.0) and,
/// for weak 2.0, J(J-1)/2 two-point variables +-dt.
struct StepNoise {
  std::vector<double> gaussians;
  std::vector<double> twopoints;
};
StepNoise draw_noise(std::mt19937_64& rng, SdeScheme scheme, std::size_t num_jumps, double dt);

struct TrajectoryBatch {
  std::size_t num_traj = 0;
  std::uint64_t base_seed = 0;
  std::vector<Vector> states;  // unnormalized final states
};

/// M independent trajectories of n_steps steps from psi0 starting at t0.
/// Trajectory i uses mt19937_64(split_seed(base_seed, i)), so the batch is
/// independent of thread scheduling.
TrajectoryBatch simulate_batch(const LindbladModel& model, SdeScheme scheme, const Vector& psi0,
                               double t0, double dt, std::size_t n_steps, std::size_t num_traj,
                               std::uint64_t base_seed);

struct McEstimate {
  Matrix mean;
  double stderr_frobenius = 0.0;
};

/// Mean of psi psi^+ over the batch (pairwise summation in index order) and the
/// Frobenius norm of the elementwise standard error of that mean.
McEstimate mc_density(const TrajectoryBatch& batch);

}  // namespace lindsim
