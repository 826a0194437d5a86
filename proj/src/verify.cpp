#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "lindsim/experiments.hpp"
#include "lindsim/kraus.hpp"
#include "lindsim/reference.hpp"
#include "lindsim/report.hpp"
#include "lindsim/unraveler.hpp"

namespace lindsim {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json()},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  }
  j["checks"] = std::move(arr);
  nlohmann::json slopes_json = nlohmann::json::array();
  for (const auto& s : slopes) {
    slopes_json.push_back({{"order", s.order},
                      {"slope", s.slope},
                      {"band", {s.lo, s.hi}},
                      {"passed", s.within()}});
  }
  j["slopes"] = std::move(slopes_json);
  return j;
}

namespace {

const double kResidualDtCoarse = 1e-2;
const double kResidualDtFine = 5e-3;

/// max_j ||a_j - b_j||_F / max_j ||b_j||_F
double relative_block_difference(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double diff = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].rows() != b[j].rows()) return std::numeric_limits<double>::infinity();
    diff = std::max(diff, (a[j] - b[j]).norm());
    scale = std::max(scale, b[j].norm());
  }
  return scale == 0.0 ? diff : diff / scale;
}

std::string band_text(double lo, double hi) {
  std::ostringstream s;
  s << "[" << lo << ", " << hi << "]";
  return s.str();
}

CheckResult ratio_check(const std::string& name, double coarse, double fine, int order) {
  const double target = std::pow(2.0, order + 1);
  CheckResult c;
  c.name = name;
  c.value = coarse / fine;
  c.tolerance = band_text(target / 1.5, 1.5 * target);
  c.passed = std::isfinite(c.value) && c.value >= target / 1.5 && c.value <= 1.5 * target;
  c.detail = "residual " + format_double(coarse) + " at dt=" + format_double(kResidualDtCoarse) +
             ", " + format_double(fine) + " at dt=" + format_double(kResidualDtFine);
  return c;
}

struct NamedModel {
  std::string label;
  LindbladModel model;
};

}  // namespace

VerifyReport verify(const ExperimentConfig& cfg, bool write_outputs) {
  VerifyReport report;
  auto add = [&](CheckResult c) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value
              << " tol=" << c.tolerance << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    report.checks.push_back(std::move(c));
  };
  auto guarded = [&](const std::string& name, const auto& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      CheckResult c;
      c.name = name;
      c.passed = false;
      c.value = std::nan("");
      c.detail = e.what();
      add(std::move(c));
    }
  };

  const LindbladModel model = build_model(cfg.model);
  const LindbladModel qubit = damped_qubit(1.0, 1.0);  // H = sigma_z, V = sigma_-
  std::vector<NamedModel> models{{"qubit", qubit}};
  if (model.identity() != qubit.identity()) models.push_back({cfg.model.name, model});
  const double dt0 = cfg.dt_list.front();

  // Input Kraus table consistency: the generic matcher must find a Hermitian H_0.
  guarded("dilation_input_trace_preserving", [&] {
    KrausSeriesSet set = kraus_series(model, cfg.t0, 2);
    if (cfg.fault_injection == "corrupt_kraus") {
      set.blocks[0].series.coeff(2) *= 1.5;
    }
    CheckResult c;
    c.name = "dilation_input_trace_preserving";
    c.tolerance = "H_0 coefficients Hermitian within 1e-10";
    try {
      const DilatedHamiltonian dh = dilate_generic(set, dt0);
      c.value = dh.h0_hermiticity_defect;
      c.passed = true;
    } catch (const NonHermitianError& e) {
      c.value = std::nan("");
      c.passed = false;
      c.detail = e.what();
    }
    add(std::move(c));
  });

  // Generic matcher versus the explicit constructions.
  for (const auto& nm : models) {
    for (int k = 1; k <= 3; ++k) {
      const std::string name = "generic_vs_explicit_" + nm.label + "_order" + std::to_string(k);
      guarded(name, [&] {
        const auto g = dilate_generic(kraus_series(nm.model, cfg.t0, k), dt0);
        const auto e = build_dilation(nm.model, k, cfg.t0, dt0, DilationRoute::Explicit);
        CheckResult c;
        c.name = name;
        c.value = relative_block_difference(g.blocks, e.blocks);
        c.tolerance = "<= 1e-10 (relative)";
        c.passed = c.value <= 1e-10;
        add(std::move(c));
      });
    }
    if (!nm.model.time_dependent()) {
      const std::string name = "generic_vs_explicit_" + nm.label + "_compact";
      guarded(name, [&] {
        const auto g = dilate_generic(kraus_series_compact_order2(nm.model), dt0);
        const auto e = dilate_order2_compact(nm.model, dt0);
        CheckResult c;
        c.name = name;
        c.value = relative_block_difference(g.blocks, e.blocks);
        c.tolerance = "<= 1e-10 (relative)";
        c.passed = c.value <= 1e-10;
        add(std::move(c));
      });
    }
  }

  // Dilated generator Hermiticity on the configured grid.
  for (const auto& nm : models) {
    const std::string name = "generator_hermiticity_" + nm.label;
    guarded(name, [&] {
      double worst = 0.0;
      for (int k : cfg.orders) {
        for (double dt : cfg.dt_list) {
          const Matrix h = build_dilation(nm.model, k, cfg.t0, dt, cfg.route).assembled();
          worst = std::max(worst, hermiticity_defect(h) / std::max(h.norm(), 1e-300));
        }
      }
      CheckResult c;
      c.name = name;
      c.value = worst;
      c.tolerance = "<= 1e-12";
      c.passed = worst <= 1e-12;
      add(std::move(c));
    });
  }

  // Residual scaling on the qubit; the channel-level residual on every model.
  for (int k = 1; k <= 3; ++k) {
    const std::string fc = "first_column_residual_ratio_order" + std::to_string(k);
    guarded(fc, [&] {
      const auto set = kraus_series(qubit, 0.0, k);
      const double a = first_column_residual(dilate_generic(set, kResidualDtCoarse), set, kResidualDtCoarse);
      const double b = first_column_residual(dilate_generic(set, kResidualDtFine), set, kResidualDtFine);
      add(ratio_check(fc, a, b, k));
    });
    for (const auto& nm : models) {
      const std::string tr = "kraus_trace_residual_ratio_" + nm.label + "_order" + std::to_string(k);
      guarded(tr, [&] {
        const auto set = kraus_series(nm.model, cfg.t0, k);
        add(ratio_check(tr, trace_residual(set, kResidualDtCoarse), trace_residual(set, kResidualDtFine), k));
      });
      const std::string ch = "channel_residual_ratio_" + nm.label + "_order" + std::to_string(k);
      guarded(ch, [&] {
        const auto set = kraus_series(nm.model, cfg.t0, k);
        const double a = channel_residual(dilate_generic(set, kResidualDtCoarse), set, kResidualDtCoarse);
        const double b = channel_residual(dilate_generic(set, kResidualDtFine), set, kResidualDtFine);
        add(ratio_check(ch, a, b, k));
      });
    }
  }
  guarded("kraus_trace_residual_ratio_qubit_compact", [&] {
    const auto set = kraus_series_compact_order2(qubit);
    add(ratio_check("kraus_trace_residual_ratio_qubit_compact", trace_residual(set, kResidualDtCoarse),
                    trace_residual(set, kResidualDtFine), 2));
  });

  // Convergence on the configured grid: per-step structure and slopes.
  guarded("convergence", [&] {
    ExperimentConfig run = cfg;
    run.output_dir = (std::filesystem::path(cfg.output_dir) / "verify").string();
    const ConvergenceResult conv = run_convergence(run, write_outputs);
    double drift = 0.0, lmin = 1.0, herm = 0.0;
    for (const auto& r : conv.rows) {
      drift = std::max(drift, r.diagnostics.max_trace_drift);
      lmin = std::min(lmin, r.diagnostics.min_eigenvalue);
      herm = std::max(herm, r.diagnostics.max_generator_hermiticity_defect);
    }
    add({"per_step_trace_drift", drift <= 1e-12, drift, "<= 1e-12", ""});
    add({"min_eigenvalue", lmin >= -1e-10, lmin, ">= -1e-10", ""});
    add({"trajectory_generator_hermiticity", herm <= 1e-12, herm, "<= 1e-12", ""});
    for (const auto& s : conv.slopes) {
      add({"slope_order" + std::to_string(s.order), s.within(), s.slope, band_text(s.lo, s.hi),
           cfg.model.name});
    }
    report.slopes = conv.slopes;
  });

  // Monte Carlo cross-checks on the amplitude-damped qubit.
  guarded("mc_euler_maruyama", [&] {
    const LindbladModel damping = damped_qubit(0.0, 1.0);
    Vector psi0(2);
    psi0 << 0.0, 1.0;
    const double dt = 0.01;
    const auto batch = simulate_batch(damping, SdeScheme::EulerMaruyama, psi0, 0.0, dt, 100, 2000,
                                      cfg.base_seed);
    const McEstimate est = mc_density(batch);
    const Matrix ref = reference_solution(damping, DensityMatrix::pure(psi0), 0.0, 1.0).matrix();
    const double dist = trace_norm(est.mean - ref);
    const double tol = std::max(3.0 * est.stderr_frobenius, 5.0 * dt);
    add({"mc_euler_maruyama", dist <= tol, dist, "<= " + format_double(tol),
         "M=2000, dt=0.01, T=1"});
  });
  guarded("mc_weak2", [&] {
    const double dt = 0.1;
    Vector psi0(2);
    psi0 << 1.0 / std::sqrt(2.0), Complex(0.0, 1.0 / std::sqrt(2.0));
    const auto batch = simulate_batch(qubit, SdeScheme::Weak2, psi0, 0.0, dt, 1, 10000,
                                      cfg.base_seed + 1);
    const McEstimate est = mc_density(batch);
    const Matrix kraus = apply_kraus(kraus_series_compact_order2(qubit), dt, psi0 * psi0.adjoint());
    const double dist = (est.mean - kraus).norm();
    const double tol = 3.0 * est.stderr_frobenius;
    add({"mc_weak2", dist <= tol, dist, "<= " + format_double(tol),
         "Frobenius distance, M=10000, single step dt=0.1"});
  });

  if (write_outputs) {
    write_text_file((std::filesystem::path(cfg.output_dir) / "verify_report.json").string(),
                    report.to_json().dump(2) + "\n");
  }
  return report;
}

}  // namespace lindsim
