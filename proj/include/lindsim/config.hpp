#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lindsim/linalg.hpp"
#include "lindsim/model.hpp"
#include "lindsim/stepper.hpp"

namespace lindsim {

/// Builtin model by name with its parameters:
///   tfim_damping   {m, g, gamma}
///   tfim_driven    {m, g, gamma, seed}
///   periodic_qubit {}
///   damped_qubit   {omega, gamma}
struct ModelSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

LindbladModel build_model(const ModelSpec& spec);

enum class InitialKind { GroundState, Random, Basis };

struct InitialStateSpec {
  InitialKind kind = InitialKind::GroundState;
  std::uint64_t seed = 0;
  Index index = 0;
};

enum class Observable { OverlapWithInitial, PauliZExpectation };

struct ExperimentConfig {
  ModelSpec model;
  std::vector<int> orders;
  std::vector<double> dt_list;
  double T = 1.0;
  InitialStateSpec initial_state;
  Observable observable = Observable::OverlapWithInitial;
  std::uint64_t base_seed = 0;
  std::string output_dir = "out";

  // Optional keys.
  double t0 = 0.0;
  double dt_guard = 2.5;
  DilationRoute route = DilationRoute::Explicit;
  ExpmMethod expm = ExpmMethod::Full;
  bool record_wall_time = false;
  bool plots = false;
  bool use_reference_cache = true;
  std::string fault_injection;  // "" or "corrupt_kraus"

  /// Steps per dt: round(T / dt).
  std::size_t steps_for(double dt) const;
};

/// Parses and validates; unknown keys anywhere in the document are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// |psi0><psi0| for the configured initial state (ground state of H(t0),
/// a seeded Haar-like random pure state, or a computational basis state).
Vector initial_vector(const InitialStateSpec& spec, const LindbladModel& model, double t0);
DensityMatrix initial_density(const InitialStateSpec& spec, const LindbladModel& model, double t0);

std::string to_string(DilationRoute r);
std::string to_string(Observable o);

}  // namespace lindsim
