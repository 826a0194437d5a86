// lindsim: Lindblad simulation experiments from the command line.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lindsim/config.hpp"
#include "lindsim/dilation.hpp"
#include "lindsim/experiments.hpp"
#include "lindsim/report.hpp"
#include "lindsim/stepper.hpp"

using namespace lindsim;

namespace {

void print_slopes(const std::vector<SlopeFit>& slopes) {
  for (const auto& s : slopes) {
    std::cout << "order " << s.order << ": slope " << format_double(s.slope) << " (band ["
              << s.lo << ", " << s.hi << "]) " << (s.within() ? "ok" : "OUT OF BAND") << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lindblad dynamics via dilated Hamiltonians"};
  app.require_subcommand(1);

  std::string config_path;
  auto* conv = app.add_subcommand("run-convergence", "error vs dt against the RK4 reference");
  conv->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* obs = app.add_subcommand("run-observable", "observable trajectories per order");
  obs->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* ver = app.add_subcommand("verify", "property report; nonzero exit on failure");
  ver->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* dump = app.add_subcommand("dump-hamiltonian", "write the dilated Hamiltonian blocks as JSON");
  ModelSpec spec;
  int order = 1;
  double dt = 0.1, t = 0.0;
  std::string out_path, route_name = "explicit";
  int m = 4;
  double g = 1.0, gamma = 0.1, omega = 1.0;
  std::uint64_t seed = 7;
  dump->add_option("--model", spec.name, "tfim_damping | tfim_driven | periodic_qubit | damped_qubit")
      ->required();
  dump->add_option("--order", order, "order k")->required()->check(CLI::Range(1, 3));
  dump->add_option("--dt", dt, "time step")->required()->check(CLI::PositiveNumber);
  dump->add_option("--t", t, "evaluation time");
  dump->add_option("--out", out_path, "output file")->required();
  dump->add_option("--route", route_name, "explicit | generic | compact");
  dump->add_option("--m", m, "TFIM sites");
  dump->add_option("--g", g, "TFIM field");
  dump->add_option("--gamma", gamma, "damping rate");
  dump->add_option("--seed", seed, "driven TFIM seed");
  dump->add_option("--omega", omega, "damped qubit frequency");

  CLI11_PARSE(app, argc, argv);

  try {
    if (conv->parsed()) {
      const auto cfg = load_config(config_path);
      const auto result = run_convergence(cfg);
      std::cout << convergence_csv(result, cfg.record_wall_time);
      print_slopes(result.slopes);
      return 0;
    }
    if (obs->parsed()) {
      const auto cfg = load_config(config_path);
      const auto result = run_observable(cfg);
      std::cout << "wrote " << result.rows.size() << " rows to " << cfg.output_dir
                << "/observable.csv (dt " << format_double(result.dt) << ")\n";
      return 0;
    }
    if (ver->parsed()) {
      const auto cfg = load_config(config_path);
      const auto report = verify(cfg);
      std::cout << report.to_json().dump(2) << "\n";
      return report.passed() ? 0 : 1;
    }
    if (dump->parsed()) {
      if (spec.name == "tfim_damping" || spec.name == "tfim_driven") {
        spec.params["m"] = m;
        spec.params["g"] = g;
        spec.params["gamma"] = gamma;
        if (spec.name == "tfim_driven") spec.params["seed"] = seed;
      } else if (spec.name == "damped_qubit") {
        spec.params["omega"] = omega;
        spec.params["gamma"] = gamma;
      }
      DilationRoute route = DilationRoute::Explicit;
      if (route_name == "generic") {
        route = DilationRoute::Generic;
      } else if (route_name == "compact") {
        route = DilationRoute::Compact;
      } else if (route_name != "explicit") {
        throw std::invalid_argument("--route must be explicit, generic or compact");
      }
      const LindbladModel model = build_model(spec);
      const DilatedHamiltonian dh = build_dilation(model, order, t, dt, route);
      write_text_file(out_path, dump_dilated_json(dh));
      std::cout << "wrote " << dh.num_blocks() << " blocks (" << dh.ancilla_qubits()
                << " ancilla qubits, dim " << dh.full_dim() << ") to " << out_path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
