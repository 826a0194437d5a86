#include "lindsim/config.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "lindsim/report.hpp"

namespace lindsim {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

void require_keys(const nlohmann::json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T get_required(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail("missing key '" + std::string(key) + "' in " + where);
  return get_or<T>(j, key, T{});
}

}  // namespace

LindbladModel build_model(const ModelSpec& spec) {
  const auto& p = spec.params;
  const std::string where = "model.params (" + spec.name + ")";
  if (spec.name == "tfim_damping") {
    require_keys(p, where, {"m", "g", "gamma"});
    return tfim_damping(get_or<int>(p, "m", 4), get_or<double>(p, "g", 1.0),
                        get_or<double>(p, "gamma", 0.1));
  }
  if (spec.name == "tfim_driven") {
    require_keys(p, where, {"m", "g", "gamma", "seed"});
    return tfim_driven(get_or<int>(p, "m", 4), get_or<double>(p, "g", 1.0),
                       get_or<double>(p, "gamma", 0.1), get_or<std::uint64_t>(p, "seed", 7));
  }
  if (spec.name == "periodic_qubit") {
    require_keys(p, where, {});
    return periodic_qubit();
  }
  if (spec.name == "damped_qubit") {
    require_keys(p, where, {"omega", "gamma"});
    return damped_qubit(get_or<double>(p, "omega", 1.0), get_or<double>(p, "gamma", 1.0));
  }
  fail("unknown model '" + spec.name +
       "' (expected tfim_damping, tfim_driven, periodic_qubit or damped_qubit)");
}

std::size_t ExperimentConfig::steps_for(double dt) const {
  return static_cast<std::size_t>(std::llround(T / dt));
}

std::string to_string(DilationRoute r) {
  switch (r) {
    case DilationRoute::Explicit: return "explicit";
    case DilationRoute::Generic: return "generic";
    case DilationRoute::Compact: return "compact";
  }
  return "?";
}

std::string to_string(Observable o) {
  return o == Observable::OverlapWithInitial ? "overlap_with_initial" : "pauli_z_expectation";
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  require_keys(j, "config",
               {"model", "orders", "dt_list", "T", "initial_state", "observable", "base_seed",
                "output_dir", "t0", "dt_guard", "route", "expm", "record_wall_time", "plots",
                "use_reference_cache", "fault_injection"});
  ExperimentConfig cfg;

  const auto& m = j.contains("model") ? j.at("model") : nlohmann::json();
  if (!j.contains("model")) fail("missing key 'model'");
  require_keys(m, "model", {"name", "params"});
  cfg.model.name = get_required<std::string>(m, "name", "model");
  if (m.contains("params")) cfg.model.params = m.at("params");
  build_model(cfg.model);  // validates name and parameter keys

  cfg.orders = get_required<std::vector<int>>(j, "orders", "config");
  if (cfg.orders.empty()) fail("orders must be nonempty");
  for (int k : cfg.orders) {
    if (k < 1 || k > 3) fail("orders must be drawn from {1, 2, 3}, got " + std::to_string(k));
  }
  cfg.T = get_required<double>(j, "T", "config");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) fail("T must be positive");
  cfg.dt_list = get_required<std::vector<double>>(j, "dt_list", "config");
  if (cfg.dt_list.empty()) fail("dt_list must be nonempty");
  for (std::size_t i = 0; i < cfg.dt_list.size(); ++i) {
    const double dt = cfg.dt_list[i];
    if (!(dt > 0.0)) fail("dt_list entries must be positive");
    if (i > 0 && !(dt < cfg.dt_list[i - 1])) fail("dt_list must be strictly decreasing");
    const double n = std::round(cfg.T / dt);
    if (n < 1.0 || std::abs(n * dt - cfg.T) > 1e-12 * std::max(1.0, cfg.T)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "dt " << dt << " does not divide T = " << cfg.T;
      fail(msg.str());
    }
  }

  if (j.contains("initial_state")) {
    const auto& s = j.at("initial_state");
    require_keys(s, "initial_state", {"kind", "seed", "index"});
    const auto kind = get_required<std::string>(s, "kind", "initial_state");
    if (kind == "ground_state") {
      cfg.initial_state.kind = InitialKind::GroundState;
    } else if (kind == "random") {
      cfg.initial_state.kind = InitialKind::Random;
      cfg.initial_state.seed = get_required<std::uint64_t>(s, "seed", "initial_state");
    } else if (kind == "basis") {
      cfg.initial_state.kind = InitialKind::Basis;
      cfg.initial_state.index = get_required<Index>(s, "index", "initial_state");
    } else {
      fail("initial_state.kind must be ground_state, random or basis");
    }
  }
  if (j.contains("observable")) {
    const auto o = get_or<std::string>(j, "observable", "");
    if (o == "overlap_with_initial") {
      cfg.observable = Observable::OverlapWithInitial;
    } else if (o == "pauli_z_expectation") {
      cfg.observable = Observable::PauliZExpectation;
    } else {
      fail("observable must be overlap_with_initial or pauli_z_expectation");
    }
  }
  cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", 0);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
  cfg.t0 = get_or<double>(j, "t0", 0.0);
  cfg.dt_guard = get_or<double>(j, "dt_guard", 2.5);
  if (!(cfg.dt_guard > 0.0)) fail("dt_guard must be positive");
  const auto route = get_or<std::string>(j, "route", "explicit");
  if (route == "explicit") {
    cfg.route = DilationRoute::Explicit;
  } else if (route == "generic") {
    cfg.route = DilationRoute::Generic;
  } else if (route == "compact") {
    cfg.route = DilationRoute::Compact;
  } else {
    fail("route must be explicit, generic or compact");
  }
  const auto expm = get_or<std::string>(j, "expm", "full");
  if (expm == "full") {
    cfg.expm = ExpmMethod::Full;
  } else if (expm == "reduced") {
    cfg.expm = ExpmMethod::Reduced;
  } else {
    fail("expm must be full or reduced");
  }
  cfg.record_wall_time = get_or<bool>(j, "record_wall_time", false);
  cfg.plots = get_or<bool>(j, "plots", false);
  cfg.use_reference_cache = get_or<bool>(j, "use_reference_cache", true);
  cfg.fault_injection = get_or<std::string>(j, "fault_injection", "");
  if (!cfg.fault_injection.empty() && cfg.fault_injection != "corrupt_kraus") {
    fail("fault_injection must be empty or corrupt_kraus");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json init;
  switch (cfg.initial_state.kind) {
    case InitialKind::GroundState: init = {{"kind", "ground_state"}}; break;
    case InitialKind::Random: init = {{"kind", "random"}, {"seed", cfg.initial_state.seed}}; break;
    case InitialKind::Basis: init = {{"kind", "basis"}, {"index", cfg.initial_state.index}}; break;
  }
  nlohmann::json j = {
      {"model", {{"name", cfg.model.name}, {"params", cfg.model.params}}},
      {"orders", cfg.orders},
      {"dt_list", cfg.dt_list},
      {"T", cfg.T},
      {"initial_state", init},
      {"observable", to_string(cfg.observable)},
      {"base_seed", cfg.base_seed},
      {"output_dir", cfg.output_dir},
      {"t0", cfg.t0},
      {"dt_guard", cfg.dt_guard},
      {"route", to_string(cfg.route)},
      {"expm", cfg.expm == ExpmMethod::Full ? "full" : "reduced"},
      {"record_wall_time", cfg.record_wall_time},
      {"plots", cfg.plots},
      {"use_reference_cache", cfg.use_reference_cache},
      {"fault_injection", cfg.fault_injection},
  };
  return j;
}

Vector initial_vector(const InitialStateSpec& spec, const LindbladModel& model, double t0) {
  const Index d = model.dim();
  switch (spec.kind) {
    case InitialKind::GroundState: {
      const HermitianEigen eig = hermitian_eigen(model.hamiltonian(t0));
      Vector v = eig.vectors.col(0);
      // Fix the global phase so the largest component is real and positive.
      Index imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      v *= std::conj(v(imax)) / std::abs(v(imax));
      return v.normalized();
    }
    case InitialKind::Random: {
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector v(d);
      for (Index i = 0; i < d; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = Complex(re, im);
      }
      return v.normalized();
    }
    case InitialKind::Basis: {
      if (spec.index < 0 || spec.index >= d) {
        throw std::invalid_argument("initial_state: basis index out of range");
      }
      Vector v = Vector::Zero(d);
      v(spec.index) = 1.0;
      return v;
    }
  }
  throw std::invalid_argument("initial_state: unknown kind");
}

DensityMatrix initial_density(const InitialStateSpec& spec, const LindbladModel& model, double t0) {
  return DensityMatrix::pure(initial_vector(spec, model, t0));
}

}  // namespace lindsim
