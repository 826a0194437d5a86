#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lindsim/config.hpp"
#include "lindsim/stepper.hpp"

namespace lindsim {

/// Least-squares slope of log(error) against log(dt). Needs >= 3 points with
/// positive coordinates.
double fit_slope(const std::vector<std::pair<double, double>>& points);

/// Tr(rho0 rho) for the overlap, Tr(Z rho) with Z on site 0 otherwise.
double observable_value(Observable obs, const Matrix& rho, const Matrix& rho0);

/// Converged RK4 solution at t0 + T, cached under output_dir/cache keyed by a
/// hash of (model, t0, T, initial state, tolerance) when enabled.
struct ReferenceResult {
  Matrix rho;
  bool from_cache = false;
  std::string cache_path;
};
ReferenceResult cached_reference(const ExperimentConfig& cfg, const LindbladModel& model,
                                 const DensityMatrix& rho0);

struct ConvergenceRow {
  int order = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  double error = 0.0;  // trace norm of rho_N - rho_T
  double wall_seconds = 0.0;
  TrajectoryDiagnostics diagnostics;
};

struct SlopeFit {
  int order = 0;
  double slope = 0.0;
  double lo = 0.0, hi = 0.0;  // acceptance band [k - 0.25, k + 0.6]
  bool within() const { return slope >= lo && slope <= hi; }
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;  // sorted by (order, dt descending)
  std::vector<SlopeFit> slopes;
  bool reference_from_cache = false;
};

/// Runs every (order, dt) pair of the grid against the reference solution.
/// With `write_outputs`, emits output_dir/convergence.csv (and an SVG when
/// plots are enabled).
ConvergenceResult run_convergence(const ExperimentConfig& cfg, bool write_outputs = true);

/// CSV header `order,dt,error_trace_norm,wall_seconds`, 17 significant digits.
/// wall_seconds is written as 0 unless record_wall_time is set, keeping the
/// file byte-identical across runs.
std::string convergence_csv(const ConvergenceResult& r, bool record_wall_time);

struct ObservableRow {
  int order = 0;  // 0 is the reference curve
  std::size_t step = 0;
  double t = 0.0;
  double value = 0.0;
};

struct ObservableResult {
  double dt = 0.0;
  std::vector<ObservableRow> rows;
};

/// Observable trajectory per order at the first dt of the grid, plus the
/// reference curve (order 0) on the same time grid.
ObservableResult run_observable(const ExperimentConfig& cfg, bool write_outputs = true);

/// CSV header `order,step,t,value`.
std::string observable_csv(const ObservableResult& r);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string tolerance;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<SlopeFit> slopes;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Property suite: dilation Hermiticity, generic-vs-explicit agreement,
/// first-column and trace residual ratios, per-step trace and positivity,
/// Monte Carlo agreement, and convergence slopes for the configured model.
/// Writes output_dir/verify_report.json when `write_outputs` is set.
VerifyReport verify(const ExperimentConfig& cfg, bool write_outputs = true);

}  // namespace lindsim
