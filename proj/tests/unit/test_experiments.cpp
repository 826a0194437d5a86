#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "lindsim/experiments.hpp"
#include "lindsim/report.hpp"

using namespace lindsim;
using nlohmann::json;

namespace {

std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lindsim_test_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

json periodic_config(const std::string& out) {
  return {{"model", {{"name", "periodic_qubit"}}},
          {"orders", {1, 2, 3}},
          {"dt_list", {0.1, 0.05, 0.025, 0.0125}},
          {"T", 1.0},
          {"initial_state", {{"kind", "random"}, {"seed", 3}}},
          {"observable", "pauli_z_expectation"},
          {"base_seed", 1},
          {"output_dir", out}};
}

}  // namespace

TEST_CASE("fit_slope") {
  for (double p : {1.0, 2.0, 3.0}) {
    std::vector<std::pair<double, double>> pts;
    for (double dt : {0.1, 0.05, 0.025, 0.0125}) pts.emplace_back(dt, 0.37 * std::pow(dt, p));
    CHECK(std::abs(fit_slope(pts) - p) <= 1e-9);
  }
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.05, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.05, 0.0}, {0.025, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {-0.05, 0.5}, {0.025, 0.1}}), std::invalid_argument);
}

TEST_CASE("config validation") {
  const json base = periodic_config(scratch_dir("cfg"));
  const auto cfg = parse_config(base);
  CHECK(cfg.steps_for(0.0125) == 80);
  CHECK(cfg.observable == Observable::PauliZExpectation);
  CHECK(cfg.dt_guard == 2.5);
  CHECK(config_to_json(parse_config(config_to_json(cfg))) == config_to_json(cfg));

  auto with = [&](const std::function<void(json&)>& edit) {
    json j = base;
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["unexpected"] = 1; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["model"]["params"] = {{"m", 2}}; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["initial_state"]["extra"] = 0; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["dt_list"] = {0.05, 0.1}; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["dt_list"] = {0.3}; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["orders"] = {4}; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["observable"] = "energy"; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j["expm"] = "pade"; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(with([](json& j) { j.erase("T"); })), std::invalid_argument);

  CHECK_THROWS_AS(build_model({"tfim_damping", {{"m", 2}, {"field", 1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(build_model({"nope", json::object()}), std::invalid_argument);
}

TEST_CASE("initial states") {
  const auto model = tfim_damping(3, 1.0, 0.1);
  const Vector g = initial_vector({InitialKind::GroundState, 0, 0}, model, 0.0);
  CHECK(g.norm() == doctest::Approx(1.0));
  const Matrix H = model.hamiltonian(0.0);
  const double e0 = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues()(0);
  CHECK(std::abs(g.dot(H * g).real() - e0) <= 1e-10);

  const Vector r1 = initial_vector({InitialKind::Random, 5, 0}, model, 0.0);
  CHECK(r1 == initial_vector({InitialKind::Random, 5, 0}, model, 0.0));
  CHECK(r1 != initial_vector({InitialKind::Random, 6, 0}, model, 0.0));
  CHECK(initial_vector({InitialKind::Basis, 0, 7}, model, 0.0)(7) == Complex(1.0));
  CHECK_THROWS(initial_vector({InitialKind::Basis, 0, 8}, model, 0.0));
}

TEST_CASE("convergence run and byte-identical output") {
  const std::string out = scratch_dir("conv");
  const auto cfg = parse_config(periodic_config(out));
  const auto r = run_convergence(cfg);
  REQUIRE(r.rows.size() == 12);
  for (const auto& row : r.rows) {
    CHECK(std::isfinite(row.error));
    CHECK(row.error >= 0.0);
  }
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const bool ordered = r.rows[i - 1].order < r.rows[i].order ||
                         (r.rows[i - 1].order == r.rows[i].order && r.rows[i - 1].dt > r.rows[i].dt);
    CHECK(ordered);
  }
  REQUIRE(r.slopes.size() == 3);
  for (const auto& s : r.slopes) CHECK_MESSAGE(s.within(), "order " << s.order << " slope " << s.slope);
  CHECK(r.slopes[0].slope >= 0.75);
  CHECK(r.slopes[0].slope <= 1.6);

  const std::string csv1 = read_text_file(out + "/convergence.csv");
  CHECK(csv1.rfind("order,dt,error_trace_norm,wall_seconds\n", 0) == 0);
  const auto r2 = run_convergence(cfg);
  CHECK(r2.reference_from_cache);
  CHECK(read_text_file(out + "/convergence.csv") == csv1);
  CHECK(convergence_csv(r2, false) == csv1);
  std::filesystem::remove_all(out);
}

TEST_CASE("reference cache") {
  const std::string out = scratch_dir("cache");
  const auto cfg = parse_config(periodic_config(out));
  const auto model = build_model(cfg.model);
  const auto rho0 = initial_density(cfg.initial_state, model, cfg.t0);
  const auto a = cached_reference(cfg, model, rho0);
  const auto b = cached_reference(cfg, model, rho0);
  CHECK_FALSE(a.from_cache);
  CHECK(b.from_cache);
  CHECK(a.rho == b.rho);
  CHECK(std::filesystem::exists(b.cache_path));

  auto other = cfg;
  other.T = 2.0;
  CHECK_FALSE(cached_reference(other, model, rho0).from_cache);
  std::filesystem::remove_all(out);
}

TEST_CASE("observable runs") {
  const std::string out = scratch_dir("obs");
  json j = {{"model", {{"name", "tfim_damping"}, {"params", {{"m", 4}, {"g", 1.0}, {"gamma", 0.1}}}}},
            {"orders", {1, 2, 3}},
            {"dt_list", {0.1}},
            {"T", 2.0},
            {"initial_state", {{"kind", "ground_state"}}},
            {"observable", "overlap_with_initial"},
            {"base_seed", 0},
            {"output_dir", out},
            {"expm", "reduced"}};
  const auto r = run_observable(parse_config(j));
  CHECK(r.dt == 0.1);
  std::map<int, std::vector<double>> curves;
  for (const auto& row : r.rows) {
    curves[row.order].push_back(row.value);
    if (row.step == 0) CHECK(row.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  REQUIRE(curves.size() == 4);
  auto max_dev = [&](int k) {
    double m = 0.0;
    for (std::size_t i = 0; i < curves[0].size(); ++i) m = std::max(m, std::abs(curves[k][i] - curves[0][i]));
    return m;
  };
  for (const auto& [k, c] : curves) CHECK(c.size() == 21);
  CHECK(max_dev(2) < max_dev(1));
  CHECK(max_dev(3) < max_dev(1));
  const std::string csv = read_text_file(out + "/observable.csv");
  CHECK(csv.rfind("order,step,t,value\n", 0) == 0);
  CHECK(csv == observable_csv(r));

  json p = periodic_config(out);
  p["dt_list"] = {0.1};
  p["T"] = 3.0;
  for (const auto& row : run_observable(parse_config(p), false).rows) {
    CHECK(row.value >= -1.0 - 1e-12);
    CHECK(row.value <= 1.0 + 1e-12);
  }
  std::filesystem::remove_all(out);
}

TEST_CASE("verify report") {
  const std::string out = scratch_dir("verify");
  json j = periodic_config(out);
  const auto report = verify(parse_config(j));
  for (const auto& c : report.checks) CHECK_MESSAGE(c.passed, c.name << " value " << c.value << " " << c.detail);
  CHECK(report.passed());
  CHECK(report.slopes.size() == 3);
  const auto saved = json::parse(read_text_file(out + "/verify_report.json"));
  CHECK(saved.at("passed").get<bool>());
  CHECK(saved.at("slopes").size() == 3);

  j["fault_injection"] = "corrupt_kraus";
  const auto bad = verify(parse_config(j), false);
  CHECK_FALSE(bad.passed());
  bool found = false;
  for (const auto& c : bad.checks) {
    if (c.name == "dilation_input_trace_preserving") {
      found = true;
      CHECK_FALSE(c.passed);
      CHECK(c.detail.find("Hermitian") != std::string::npos);
    }
  }
  CHECK(found);
  std::filesystem::remove_all(out);
}
