// End-to-end acceptance gate: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lindsim/dilation.hpp"
#include "lindsim/experiments.hpp"
#include "lindsim/kraus.hpp"
#include "lindsim/reference.hpp"
#include "lindsim/report.hpp"
#include "lindsim/unraveler.hpp"

using namespace lindsim;

namespace {

const std::string kConfigDir = LINDSIM_CONFIG_DIR;
const std::string kScratch = (std::filesystem::temp_directory_path() / "lindsim_acceptance").string();

struct Gate {
  int failures = 0;
  void report(int id, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << std::endl;
    if (!ok) ++failures;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig config(const std::string& file, const std::string& out) {
  ExperimentConfig cfg = load_config(kConfigDir + "/" + file);
  cfg.output_dir = kScratch + "/" + out;
  cfg.plots = false;
  return cfg;
}

// Convergence runs feed both the slope criteria and the structural criterion.
struct StructureTally {
  double generator_defect = 0.0;
  double trace_drift = 0.0;
  double min_eig = 1.0;
  void add(const TrajectoryDiagnostics& d) {
    generator_defect = std::max(generator_defect, d.max_generator_hermiticity_defect);
    trace_drift = std::max(trace_drift, d.max_trace_drift);
    min_eig = std::min(min_eig, d.min_eigenvalue);
  }
};

void slope_criterion(Gate& gate, int id, const std::string& file, double budget_s, StructureTally& tally) {
  std::ostringstream msg;
  bool ok = true;
  try {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_convergence(config(file, "c" + std::to_string(id)), false);
    const double wall = seconds_since(start);
    for (const auto& row : r.rows) tally.add(row.diagnostics);
    for (const auto& s : r.slopes) {
      ok = ok && s.within();
      msg << "k=" << s.order << " slope " << s.slope << " in [" << s.lo << ", " << s.hi << "]; ";
    }
    ok = ok && wall <= budget_s;
    msg << "wall " << wall << " s (budget " << budget_s << " s)";
  } catch (const std::exception& e) {
    ok = false;
    msg << "error: " << e.what();
  }
  gate.report(id, ok, file + ": " + msg.str());
}

double relative_gap(const DilatedHamiltonian& a, const DilatedHamiltonian& b) {
  if (a.num_blocks() != b.num_blocks()) return INFINITY;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.num_blocks(); ++j) {
    num += (a.blocks[j] - b.blocks[j]).squaredNorm();
    den += b.blocks[j].squaredNorm();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

bool in_band(double r, int k) {
  const double t = std::pow(2.0, k + 1);
  return r >= t / 1.5 && r <= 1.5 * t;
}

LindbladModel qubit() { return damped_qubit(1.0, 1.0); }  // H = sigma_z, V = sigma_-

std::vector<LindbladModel> builtin_models() {
  return {tfim_damping(4, 1.0, 0.1), tfim_driven(4, 1.0, 0.1, 7), periodic_qubit(), qubit()};
}

void criterion4(Gate& gate) {
  const double dt = 1e-2;
  double worst = 0.0;
  std::vector<LindbladModel> models{qubit(), tfim_damping(4, 1.0, 0.1), tfim_driven(4, 1.0, 0.1, 7)};
  for (const auto& m : models) {
    const double t = 0.25;
    worst = std::max(worst, relative_gap(dilate_generic(kraus_series(m, t, 1), dt), dilate_order1(m, t, dt)));
    worst = std::max(worst, relative_gap(dilate_generic(kraus_series(m, t, 2), dt), dilate_order2(m, t, dt)));
    worst = std::max(worst, relative_gap(dilate_generic(kraus_series(m, t, 3), dt), dilate_order3(m, t, dt)));
    if (!m.time_dependent()) {
      worst = std::max(worst, relative_gap(dilate_generic(kraus_series_compact_order2(m), dt),
                                           dilate_order2_compact(m, dt)));
    }
  }
  std::ostringstream msg;
  msg << "max relative block gap generic vs explicit " << worst << " (tol 1e-10)";
  gate.report(4, worst <= 1e-10, msg.str());
}

void criterion5(Gate& gate) {
  std::ostringstream msg;
  bool ok = true;
  const auto q = qubit();
  for (int k = 1; k <= 3; ++k) {
    const auto set = kraus_series(q, 0.0, k);
    const double r = first_column_residual(dilate_explicit(set, 1e-2), set, 1e-2) /
                     first_column_residual(dilate_explicit(set, 5e-3), set, 5e-3);
    ok = ok && in_band(r, k);
    msg << "k=" << k << " ratio " << r << "; ";
  }
  gate.report(5, ok, "qubit first-column residual halving ratios: " + msg.str());

  // Informational: the same ratio on the many-jump models and the channel-level residual.
  for (const auto& m : builtin_models()) {
    std::ostringstream info;
    for (int k = 1; k <= 3; ++k) {
      const auto set = kraus_series(m, 0.0, k);
      const auto c = dilate_explicit(set, 1e-2), f = dilate_explicit(set, 5e-3);
      info << "k=" << k << " first-column " << first_column_residual(c, set, 1e-2) / first_column_residual(f, set, 5e-3)
           << " channel " << channel_residual(c, set, 1e-2) / channel_residual(f, set, 5e-3) << "; ";
    }
    std::cout << "  info " << m.identity() << ": " << info.str() << std::endl;
  }
}

void criterion6(Gate& gate) {
  std::ostringstream msg;
  bool ok = true;
  for (const auto& m : builtin_models()) {
    msg << m.identity() << ":";
    for (int k = 1; k <= 3; ++k) {
      const auto set = kraus_series(m, 0.0, k);
      const double r = trace_residual(set, 1e-2) / trace_residual(set, 5e-3);
      ok = ok && in_band(r, k);
      msg << " k=" << k << " " << r;
    }
    if (!m.time_dependent()) {
      const auto set = kraus_series_compact_order2(m);
      const double r = trace_residual(set, 1e-2) / trace_residual(set, 5e-3);
      ok = ok && in_band(r, 2);
      msg << " compact " << r;
    }
    msg << "; ";
  }
  gate.report(6, ok, "Kraus trace residual halving ratios: " + msg.str());
}

void criterion7(Gate& gate, StructureTally tally) {
  // The damped qubit is not part of the slope runs; add it on the same grid.
  ExperimentConfig cfg = config("tfim_damping_convergence.json", "c7");
  cfg.model = {"damped_qubit", {{"omega", 1.0}, {"gamma", 1.0}}};
  cfg.initial_state = {InitialKind::Basis, 0, 1};
  cfg.observable = Observable::PauliZExpectation;
  for (const auto& row : run_convergence(cfg, false).rows) tally.add(row.diagnostics);

  double assembled_defect = 0.0;
  for (const auto& m : builtin_models()) {
    for (int k = 1; k <= 3; ++k) {
      for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
        const Matrix a = dilate_explicit(kraus_series(m, 0.0, k), dt).assembled();
        assembled_defect = std::max(assembled_defect, hermiticity_defect(a));
      }
    }
  }
  std::ostringstream msg;
  msg << "assembled Hermiticity defect " << assembled_defect << " (tol 1e-12); relative generator defect "
      << tally.generator_defect << "; per-step trace drift " << tally.trace_drift
      << " (tol 1e-12); min eigenvalue " << tally.min_eig << " (tol -1e-10)";
  const bool ok = assembled_defect <= 1e-12 && tally.generator_defect <= 1e-12 && tally.trace_drift <= 1e-12 &&
                  tally.min_eig >= -1e-10;
  gate.report(7, ok, msg.str());
}

void criterion8(Gate& gate) {
  const auto amp = damped_qubit(1.0, 1.0);
  Vector one = Vector::Zero(2);
  one(1) = 1.0;
  const double dt = 0.01;
  const auto em = mc_density(simulate_batch(amp, SdeScheme::EulerMaruyama, one, 0.0, dt, 100, 2000, 2024));
  const Matrix exact = reference_solution(amp, DensityMatrix::pure(one), 0.0, 1.0).matrix();
  const double em_dist = trace_norm(em.mean - exact);
  const double em_tol = std::max(3.0 * em.stderr_frobenius, 5.0 * dt);

  Vector psi(2);
  psi << 1.0 / std::sqrt(2.0), Complex(0.0, 1.0 / std::sqrt(2.0));
  const double h = 0.1;
  const auto w2 = mc_density(simulate_batch(amp, SdeScheme::Weak2, psi, 0.0, h, 1, 10000, 2025));
  const Matrix kraus = apply_kraus(kraus_series_compact_order2(amp), h, Matrix(psi * psi.adjoint()));
  const double w2_dist = (w2.mean - kraus).norm();
  const double w2_tol = 3.0 * w2.stderr_frobenius;

  std::ostringstream msg;
  msg << "Euler-Maruyama trace distance " << em_dist << " <= " << em_tol << "; weak 2.0 Frobenius distance "
      << w2_dist << " <= " << w2_tol;
  gate.report(8, em_dist <= em_tol && w2_dist <= w2_tol, msg.str());
}

void criterion9(Gate& gate) {
  std::ostringstream msg;
  bool ok = true;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  auto random_pure = [&](Index d) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = Complex(n01(rng), n01(rng));
    return DensityMatrix::pure(v);
  };
  for (const auto& m : builtin_models()) {
    const DensityMatrix rho0 = random_pure(m.dim());
    const double T = 1.0;
    const Matrix fine = rk4_evolve(m, rho0, 0.0, T, 8192).matrix();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t n : {64u, 128u, 256u, 512u}) {
      pts.emplace_back(T / n, trace_norm(rk4_evolve(m, rho0, 0.0, T, n).matrix() - fine));
    }
    const double slope = fit_slope(pts);
    ok = ok && std::abs(slope - 4.0) <= 0.2;

    double worst = -INFINITY;
    for (int pair = 0; pair < 20; ++pair) {
      const DensityMatrix a = random_pure(m.dim()), b = random_pure(m.dim());
      const double before = trace_norm(a.matrix() - b.matrix());
      const double after = trace_norm(reference_solution(m, a, 0.0, T).matrix() -
                                      reference_solution(m, b, 0.0, T).matrix());
      worst = std::max(worst, after - before);
    }
    ok = ok && worst <= 1e-9;
    msg << m.identity() << ": RK4 slope " << slope << ", max distance growth " << worst << "; ";
  }
  gate.report(9, ok, msg.str() + "(slope tol 4 +- 0.2, growth tol 1e-9)");
}

void criterion10(Gate& gate) {
  bool ok = true;
  std::ostringstream msg;
  for (const std::string file : {"periodic_qubit_convergence.json", "tfim_driven_convergence.json"}) {
    std::vector<std::string> csv;
    for (int run = 0; run < 2; ++run) {
      ExperimentConfig cfg = config(file, "determinism_" + std::to_string(run));
      cfg.use_reference_cache = false;
      std::filesystem::remove_all(cfg.output_dir);
      run_convergence(cfg, true);
      run_observable(cfg, true);
      csv.push_back(read_text_file(cfg.output_dir + "/convergence.csv") +
                    read_text_file(cfg.output_dir + "/observable.csv"));
    }
    const bool same = csv[0] == csv[1];
    ok = ok && same;
    msg << file << (same ? " identical" : " differs") << " (" << csv[0].size() << " bytes); ";
  }
  gate.report(10, ok, "repeated runs: " + msg.str());
}

template <typename Fn>
void guarded(Gate& gate, int id, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    gate.report(id, false, std::string("error: ") + e.what());
  }
}

}  // namespace

int main() {
  std::filesystem::remove_all(kScratch);
  Gate gate;
  StructureTally tally;
  slope_criterion(gate, 1, "tfim_damping_convergence.json", 600.0, tally);
  slope_criterion(gate, 2, "tfim_driven_convergence.json", 600.0, tally);
  slope_criterion(gate, 3, "periodic_qubit_convergence.json", 120.0, tally);
  guarded(gate, 4, [&] { criterion4(gate); });
  guarded(gate, 5, [&] { criterion5(gate); });
  guarded(gate, 6, [&] { criterion6(gate); });
  guarded(gate, 7, [&] { criterion7(gate, tally); });
  guarded(gate, 8, [&] { criterion8(gate); });
  guarded(gate, 9, [&] { criterion9(gate); });
  guarded(gate, 10, [&] { criterion10(gate); });
  std::filesystem::remove_all(kScratch);
  std::cout << (gate.failures == 0 ? "ALL CRITERIA PASS" : std::to_string(gate.failures) + " CRITERIA FAIL")
            << std::endl;
  return gate.failures == 0 ? 0 : 1;
}
