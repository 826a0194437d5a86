#include "lindsim/unraveler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace lindsim {

namespace {

void require_noise(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": expected " << want << " noise values, got " << got;
    throw std::invalid_argument(msg.str());
  }
}

/// Operators for a step, precomputed once per time.
struct SdeOperators {
  Matrix v0;
  std::vector<Matrix> v;
  // weak 2.0 only
  Matrix drift2;                  // V0 dt + 1/2 V0^2 dt^2 (dt folded in)
  std::vector<Matrix> diffusion;  // V_j + dt/2 {V_j, V0}
  std::vector<Matrix> vv;         // V_{j2} V_{j1} at [j1 * J + j2]
};

SdeOperators operators(const ModelSnapshot& s, SdeScheme scheme, double dt) {
  SdeOperators op;
  op.v0 = effective_drift(s);
  op.v = s.V;
  if (scheme == SdeScheme::Weak2) {
    const std::size_t J = s.num_jumps();
    op.drift2 = op.v0 * dt + 0.5 * dt * dt * op.v0 * op.v0;
    for (const auto& v : s.V) op.diffusion.push_back(v + 0.5 * dt * (v * op.v0 + op.v0 * v));
    op.vv.resize(J * J);
    for (std::size_t j1 = 0; j1 < J; ++j1) {
      for (std::size_t j2 = 0; j2 < J; ++j2) op.vv[j1 * J + j2] = s.V[j2] * s.V[j1];
    }
  }
  return op;
}

Vector em_apply(const SdeOperators& op, const Vector& psi, double dt, const std::vector<double>& w) {
  require_noise(w.size(), op.v.size(), "em_step");
  Vector out = psi + dt * (op.v0 * psi);
  const double s = std::sqrt(dt);
  for (std::size_t j = 0; j < op.v.size(); ++j) out.noalias() += (s * w[j]) * (op.v[j] * psi);
  return out;
}

double dz(const std::vector<double>& twopoints, std::size_t j1, std::size_t j2, std::size_t J) {
  // Pair (a, b) with a < b has lexicographic position a*J - a(a+1)/2 + (b - a - 1).
  const std::size_t a = std::min(j1, j2), b = std::max(j1, j2);
  const double v = twopoints[a * J - a * (a + 1) / 2 + (b - a - 1)];
  return j1 < j2 ? v : -v;
}

Vector weak2_apply(const SdeOperators& op, const Vector& psi, double dt,
                   const std::vector<double>& dw, const std::vector<double>& twopoints) {
  const std::size_t J = op.v.size();
  require_noise(dw.size(), J, "weak2_step (gaussians)");
  require_noise(twopoints.size(), J * (J - (J > 0 ? 1 : 0)) / 2, "weak2_step (two-point)");
  Vector out = psi + op.drift2 * psi;
  for (std::size_t j = 0; j < J; ++j) {
    out.noalias() += dw[j] * (op.diffusion[j] * psi);
    out.noalias() += (0.5 * (dw[j] * dw[j] - dt)) * (op.vv[j * J + j] * psi);
  }
  for (std::size_t j1 = 0; j1 < J; ++j1) {
    for (std::size_t j2 = 0; j2 < J; ++j2) {
      if (j1 == j2) continue;
      const double c = 0.5 * (dw[j1] * dw[j2] - dz(twopoints, j1, j2, J));
      out.noalias() += c * (op.vv[j1 * J + j2] * psi);
    }
  }
  return out;
}

}  // namespace

Vector em_step(const ModelSnapshot& s, const Vector& psi, double dt, const std::vector<double>& noise) {
  return em_apply(operators(s, SdeScheme::EulerMaruyama, dt), psi, dt, noise);
}

Vector em_step(const LindbladModel& model, double t, const Vector& psi, double dt,
               const std::vector<double>& noise) {
  return em_step(snapshot(model, t, 0), psi, dt, noise);
}

Vector weak2_step(const ModelSnapshot& s, const Vector& psi, double dt,
                  const std::vector<double>& gaussians, const std::vector<double>& twopoints) {
  return weak2_apply(operators(s, SdeScheme::Weak2, dt), psi, dt, gaussians, twopoints);
}

Vector weak2_step(const LindbladModel& model, double t, const Vector& psi, double dt,
                  const std::vector<double>& gaussians, const std::vector<double>& twopoints) {
  return weak2_step(snapshot(model, t, 0), psi, dt, gaussians, twopoints);
}

std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index) {
  // splitmix64 finalizer applied to base + (index + 1) * golden gamma.
  std::uint64_t z = base_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StepNoise draw_noise(std::mt19937_64& rng, SdeScheme scheme, std::size_t num_jumps, double dt) {
  StepNoise n;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = scheme == SdeScheme::Weak2 ? std::sqrt(dt) : 1.0;
  n.gaussians.resize(num_jumps);
  for (auto& g : n.gaussians) g = scale * normal(rng);
  if (scheme == SdeScheme::Weak2 && num_jumps > 1) {
    n.twopoints.resize(num_jumps * (num_jumps - 1) / 2);
    for (auto& z : n.twopoints) z = (rng() >> 63) ? dt : -dt;
  }
  return n;
}

TrajectoryBatch simulate_batch(const LindbladModel& model, SdeScheme scheme, const Vector& psi0,
                               double t0, double dt, std::size_t n_steps, std::size_t num_traj,
                               std::uint64_t base_seed) {
  if (psi0.size() != model.dim()) {
    throw std::invalid_argument("simulate_batch: state dimension does not match the model");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_batch: dt must be positive");

  std::vector<SdeOperators> ops;
  const std::size_t distinct = model.time_dependent() ? n_steps : std::min<std::size_t>(n_steps, 1);
  ops.reserve(distinct);
  for (std::size_t n = 0; n < distinct; ++n) {
    ops.push_back(operators(snapshot(model, t0 + static_cast<double>(n) * dt, 0), scheme, dt));
  }
  const std::size_t J = model.num_jumps();

  TrajectoryBatch batch;
  batch.num_traj = num_traj;
  batch.base_seed = base_seed;
  batch.states.assign(num_traj, Vector());
  const auto count = static_cast<long long>(num_traj);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    std::mt19937_64 rng(split_seed(base_seed, static_cast<std::uint64_t>(i)));
    Vector psi = psi0;
    for (std::size_t n = 0; n < n_steps; ++n) {
      const SdeOperators& op = ops[model.time_dependent() ? n : 0];
      const StepNoise noise = draw_noise(rng, scheme, J, dt);
      psi = scheme == SdeScheme::EulerMaruyama ? em_apply(op, psi, dt, noise.gaussians)
                                               : weak2_apply(op, psi, dt, noise.gaussians, noise.twopoints);
    }
    batch.states[static_cast<std::size_t>(i)] = std::move(psi);
  }
  return batch;
}

namespace {

template <typename T, typename F>
T pairwise_sum(std::size_t lo, std::size_t hi, const F& term) {
  if (hi - lo <= 8) {
    T acc = term(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  T left = pairwise_sum<T>(lo, mid, term);
  left += pairwise_sum<T>(mid, hi, term);
  return left;
}

}  // namespace

McEstimate mc_density(const TrajectoryBatch& batch) {
  const std::size_t m = batch.states.size();
  if (m == 0) throw std::invalid_argument("mc_density: empty batch");
  const auto outer = [&](std::size_t i) -> Matrix {
    const Vector& psi = batch.states[i];
    return psi * psi.adjoint();
  };
  McEstimate est;
  est.mean = pairwise_sum<Matrix>(0, m, outer) / static_cast<double>(m);
  if (m > 1) {
    const auto sq = [&](std::size_t i) -> RealMatrix { return (outer(i) - est.mean).cwiseAbs2(); };
    const RealMatrix var = pairwise_sum<RealMatrix>(0, m, sq) / static_cast<double>(m - 1);
    est.stderr_frobenius = std::sqrt(var.sum() / static_cast<double>(m));
  }
  return est;
}

}  // namespace lindsim
