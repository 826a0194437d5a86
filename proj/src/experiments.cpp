#include "lindsim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "lindsim/reference.hpp"
#include "lindsim/report.hpp"

namespace lindsim {

double fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& [dt, err] : points) {
    if (!(dt > 0.0) || !(err > 0.0) || !std::isfinite(dt) || !std::isfinite(err)) {
      throw std::invalid_argument("fit_slope: values must be positive and finite");
    }
    sx += std::log(dt);
    sy += std::log(err);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [dt, err] : points) {
    const double x = std::log(dt) - mx;
    sxx += x * x;
    sxy += x * (std::log(err) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: dt values must not all coincide");
  return sxy / sxx;
}

double observable_value(Observable obs, const Matrix& rho, const Matrix& rho0) {
  if (obs == Observable::OverlapWithInitial) {
    return (rho0 * rho).trace().real();
  }
  const Index d = rho.rows();
  int m = 0;
  while ((Index{1} << m) < d) ++m;
  if ((Index{1} << m) != d || m == 0) {
    throw std::invalid_argument("pauli_z_expectation needs a qubit register");
  }
  return (pauli::on_site(pauli::z(), 0, m) * rho).trace().real();
}

namespace {

std::string initial_key(const InitialStateSpec& s) {
  switch (s.kind) {
    case InitialKind::GroundState: return "ground_state";
    case InitialKind::Random: return "random:" + std::to_string(s.seed);
    case InitialKind::Basis: return "basis:" + std::to_string(s.index);
  }
  return "?";
}

const ReferenceOptions kReferenceOptions{};

}  // namespace

ReferenceResult cached_reference(const ExperimentConfig& cfg, const LindbladModel& model,
                                 const DensityMatrix& rho0) {
  const std::string key = model.identity() + "|t0=" + format_double(cfg.t0) + "|T=" +
                          format_double(cfg.T) + "|init=" + initial_key(cfg.initial_state) +
                          "|tol=" + format_double(kReferenceOptions.tolerance);
  ReferenceResult out;
  out.cache_path = (std::filesystem::path(cfg.output_dir) / "cache" /
                    ("reference_" + hex64(fnv1a64(key)) + ".json"))
                       .string();
  if (cfg.use_reference_cache && std::filesystem::exists(out.cache_path)) {
    try {
      const auto j = nlohmann::json::parse(read_text_file(out.cache_path));
      if (j.at("key").get<std::string>() == key) {
        out.rho = matrix_from_json(j.at("rho"));
        out.from_cache = true;
        return out;
      }
    } catch (const std::exception& e) {
      std::cerr << "ignoring unreadable reference cache " << out.cache_path << ": " << e.what()
                << "\n";
    }
  }
  out.rho = reference_solution(model, rho0, cfg.t0, cfg.t0 + cfg.T, kReferenceOptions).matrix();
  if (cfg.use_reference_cache) {
    const nlohmann::json j = {{"key", key}, {"rho", matrix_to_json(out.rho)}};
    write_text_file(out.cache_path, j.dump());
  }
  return out;
}

namespace {

EvolveOptions evolve_options(const ExperimentConfig& cfg, bool keep_states) {
  EvolveOptions o;
  o.route = cfg.route;
  o.method = cfg.expm;
  o.dt_guard = cfg.dt_guard;
  o.t0 = cfg.t0;
  o.keep_states = keep_states;
  return o;
}

/// Runs fn(i) for i in [0, n) on the OpenMP pool and rethrows the first
/// failure in index order.
template <typename F>
void parallel_for(std::size_t n, const F& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& cfg, bool write_outputs) {
  const LindbladModel model = build_model(cfg.model);
  const DensityMatrix rho0 = initial_density(cfg.initial_state, model, cfg.t0);
  const ReferenceResult ref = cached_reference(cfg, model, rho0);

  ConvergenceResult result;
  result.reference_from_cache = ref.from_cache;
  std::vector<int> orders = cfg.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  for (int k : orders) {
    for (double dt : cfg.dt_list) {
      ConvergenceRow row;
      row.order = k;
      row.dt = dt;
      row.steps = cfg.steps_for(dt);
      result.rows.push_back(row);
    }
  }

  const EvolveOptions opts = evolve_options(cfg, false);
  parallel_for(result.rows.size(), [&](std::size_t i) {
    ConvergenceRow& row = result.rows[i];
    const auto start = std::chrono::steady_clock::now();
    Trajectory traj;
    try {
      traj = evolve(model, row.order, rho0, cfg.T, row.steps, opts);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << model.identity() << ", order " << row.order << ", dt " << row.dt << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.error = trace_norm(traj.final_matrix() - ref.rho);
    row.diagnostics = traj.diagnostics;
  });

  for (int k : orders) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : result.rows) {
      if (r.order == k) pts.emplace_back(r.dt, r.error);
    }
    SlopeFit fit;
    fit.order = k;
    fit.lo = k - 0.25;
    fit.hi = k + 0.6;
    fit.slope = pts.size() >= 3 ? fit_slope(pts) : std::nan("");
    result.slopes.push_back(fit);
  }

  if (write_outputs) {
    const std::filesystem::path dir(cfg.output_dir);
    write_text_file((dir / "convergence.csv").string(), convergence_csv(result, cfg.record_wall_time));
    for (const auto& r : result.rows) {
      std::cerr << "order " << r.order << " dt " << format_double(r.dt) << " error "
                << format_double(r.error) << " (" << r.wall_seconds << " s)\n";
    }
    if (cfg.plots) {
      std::vector<SvgSeries> series;
      for (int k : orders) {
        SvgSeries s;
        s.label = "order " + std::to_string(k);
        for (const auto& r : result.rows) {
          if (r.order == k) s.x.push_back(r.dt), s.y.push_back(r.error);
        }
        series.push_back(std::move(s));
      }
      write_text_file((dir / "convergence.svg").string(),
                      svg_plot(cfg.model.name + ": error at T", "dt", "trace-norm error", series,
                               true, true));
    }
  }
  return result;
}

std::string convergence_csv(const ConvergenceResult& r, bool record_wall_time) {
  std::ostringstream out;
  out << "order,dt,error_trace_norm,wall_seconds\n";
  for (const auto& row : r.rows) {
    out << row.order << ',' << format_double(row.dt) << ',' << format_double(row.error) << ','
        << format_double(record_wall_time ? row.wall_seconds : 0.0) << '\n';
  }
  return out.str();
}

ObservableResult run_observable(const ExperimentConfig& cfg, bool write_outputs) {
  const LindbladModel model = build_model(cfg.model);
  const DensityMatrix rho0 = initial_density(cfg.initial_state, model, cfg.t0);
  const double dt = cfg.dt_list.front();
  const std::size_t N = cfg.steps_for(dt);

  std::vector<int> orders = cfg.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  // Slot 0 is the reference curve; slot i the i-th order.
  std::vector<std::vector<double>> values(orders.size() + 1);
  const EvolveOptions opts = evolve_options(cfg, true);
  parallel_for(orders.size() + 1, [&](std::size_t slot) {
    std::vector<double>& v = values[slot];
    v.reserve(N + 1);
    if (slot == 0) {
      DensityMatrix rho = rho0;
      v.push_back(observable_value(cfg.observable, rho.matrix(), rho0.matrix()));
      for (std::size_t n = 0; n < N; ++n) {
        const double a = cfg.t0 + static_cast<double>(n) * dt;
        rho = reference_solution(model, rho, a, a + dt, kReferenceOptions);
        v.push_back(observable_value(cfg.observable, rho.matrix(), rho0.matrix()));
      }
      return;
    }
    const Trajectory traj = evolve(model, orders[slot - 1], rho0, cfg.T, N, opts);
    for (const auto& rho : traj.states) {
      v.push_back(observable_value(cfg.observable, rho, rho0.matrix()));
    }
  });

  ObservableResult result;
  result.dt = dt;
  for (std::size_t slot = 0; slot < values.size(); ++slot) {
    const int order = slot == 0 ? 0 : orders[slot - 1];
    for (std::size_t n = 0; n < values[slot].size(); ++n) {
      result.rows.push_back({order, n, cfg.t0 + static_cast<double>(n) * dt, values[slot][n]});
    }
  }

  if (write_outputs) {
    const std::filesystem::path dir(cfg.output_dir);
    write_text_file((dir / "observable.csv").string(), observable_csv(result));
    if (cfg.plots) {
      std::map<int, SvgSeries> by_order;
      for (const auto& r : result.rows) {
        auto& s = by_order[r.order];
        s.label = r.order == 0 ? "reference" : "order " + std::to_string(r.order);
        s.x.push_back(r.t);
        s.y.push_back(r.value);
      }
      std::vector<SvgSeries> series;
      for (auto& [_, s] : by_order) series.push_back(std::move(s));
      write_text_file((dir / "observable.svg").string(),
                      svg_plot(cfg.model.name + ": " + to_string(cfg.observable), "t",
                               to_string(cfg.observable), series, false, false));
    }
  }
  return result;
}

std::string observable_csv(const ObservableResult& r) {
  std::ostringstream out;
  out << "order,step,t,value\n";
  for (const auto& row : r.rows) {
    out << row.order << ',' << row.step << ',' << format_double(row.t) << ','
        << format_double(row.value) << '\n';
  }
  return out.str();
}

}  // namespace lindsim
