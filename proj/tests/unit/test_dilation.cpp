#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lindsim/dilation.hpp"
#include "lindsim/kraus.hpp"

using namespace lindsim;
using namespace testing;

namespace {

LindbladModel qubit() {
  return LindbladModel::constant("qubit", pauli::z(), {pauli::sigma_minus()});
}

LindbladModel random_model(Index d, std::size_t J, std::mt19937_64& rng) {
  std::vector<Matrix> jumps;
  for (std::size_t j = 0; j < J; ++j) jumps.push_back(0.5 * random_matrix(d, d, rng));
  return LindbladModel::constant("random", random_hermitian(d, rng), jumps);
}

double max_block_distance(const DilatedHamiltonian& a, const DilatedHamiltonian& b) {
  REQUIRE(a.num_blocks() == b.num_blocks());
  double e = 0.0;
  for (std::size_t j = 0; j < a.num_blocks(); ++j) e = std::max(e, (a.blocks[j] - b.blocks[j]).norm());
  return e;
}

bool in_band(double r, int order) {
  const double target = std::pow(2.0, order + 1);
  return r >= target / 1.5 && r <= 1.5 * target;
}

}  // namespace

TEST_CASE("first-order bordered form") {
  const double dt = 0.04;
  const auto dh = dilate_order1(qubit(), 0.0, dt);
  CHECK(dh.num_blocks() == 2);
  CHECK(dh.ancilla_qubits() == 1);
  const Matrix A = dh.assembled();
  REQUIRE(A.rows() == 4);
  CHECK((A.topLeftCorner(2, 2) - std::sqrt(dt) * pauli::z()).norm() <= 1e-15);
  CHECK((A.topRightCorner(2, 2) - pauli::sigma_plus()).norm() == 0.0);
  CHECK((A.bottomLeftCorner(2, 2) - pauli::sigma_minus()).norm() == 0.0);
  CHECK(A.bottomRightCorner(2, 2).norm() == 0.0);

  const auto zero = dilate_order1(LindbladModel::constant("zero", Matrix::Zero(2, 2), {Matrix::Zero(2, 2)}), 0.0, dt);
  CHECK(zero.assembled().norm() == 0.0);

  const auto tfim = dilate_order1(tfim_damping(4, 1.0, 0.5), 0.0, 0.01);
  CHECK(tfim.num_blocks() == 5);
  CHECK(tfim.ancilla_qubits() == 3);
  CHECK(tfim.full_dim() == 128);
}

TEST_CASE("block counts and ancilla register") {
  CHECK(ancilla_qubits_for(1) == 0);
  CHECK(ancilla_qubits_for(2) == 1);
  CHECK(ancilla_qubits_for(3) == 2);
  CHECK(ancilla_qubits_for(5) == 3);
  CHECK(ancilla_qubits_for(17) == 5);
  CHECK(ancilla_qubits_for(32) == 5);

  const auto two = LindbladModel::constant("two", pauli::z(), {pauli::sigma_minus(), pauli::sigma_plus()});
  const auto dh = dilate_order2(two, 0.0, 0.01);
  CHECK(dh.num_blocks() == 17);
  CHECK(dh.ancilla_qubits() == 5);

  const auto compact = dilate_order2_compact(qubit(), 0.01);
  CHECK(compact.num_blocks() == 3);
  CHECK(compact.ancilla_qubits() == 2);
  CHECK((compact.block_series[compact_pair_index(0, 0, 1)].coeff(1) -
         pauli::sigma_minus() * pauli::sigma_minus() / std::sqrt(2.0)).norm() <= 1e-15);
  CHECK_THROWS(dilate_order2_compact(periodic_qubit(), 0.01));
}

TEST_CASE("second-order coefficients") {
  const double dt = 0.01;
  const auto dh = dilate_order2(qubit(), 0.0, dt);
  const auto& h0 = dh.block_series[0];
  CHECK((h0.coeff(1) - pauli::z()).norm() <= 1e-15);
  Matrix expected = Matrix::Zero(2, 2);
  expected(1, 1) = 1.0 / 6.0;
  CHECK((h0.coeff(3) - expected).norm() <= 1e-14);
  for (std::size_t j = 0; j < dh.num_blocks(); ++j) {
    CHECK((evaluate(dh.block_series[j], dt) - dh.blocks[j]).norm() <= 1e-15);
  }

  // Commuting case: H = 0 and a normal jump give a vanishing F2-type block.
  const auto normal = dilate_order2(LindbladModel::constant("n", Matrix::Zero(2, 2), {pauli::z()}), 0.0, dt);
  CHECK(normal.blocks[f2_index(0, 1)].norm() <= 1e-15);

  // Third order truncates to second order.
  std::mt19937_64 rng(1);
  const auto model = random_model(2, 2, rng);
  const auto d2 = dilate_order2(model, 0.0, dt);
  const auto d3 = dilate_order3(model, 0.0, dt);
  REQUIRE(d2.num_blocks() == d3.num_blocks());
  for (std::size_t j = 0; j < d2.num_blocks(); ++j) {
    for (int p = 0; p <= d2.block_series[j].max_half_power(); ++p) {
      CHECK((d2.block_series[j].coeff(p) - d3.block_series[j].coeff_or_zero(p)).norm() <= 1e-13);
    }
  }
  CHECK(d3.h0_hermiticity_defect <= 1e-10);
}

TEST_CASE("generic matcher agrees with explicit recursions") {
  std::mt19937_64 rng(2);
  std::vector<LindbladModel> models{qubit(), random_model(3, 2, rng), periodic_qubit(),
                                    tfim_driven(2, 1.0, 0.3, 5)};
  const double dt = 0.01;
  for (const auto& m : models) {
    for (int k = 1; k <= 3; ++k) {
      const auto set = kraus_series(m, 0.3, k);
      const auto ex = dilate_explicit(set, dt);
      const auto gen = dilate_generic(set, dt);
      CHECK_MESSAGE(max_block_distance(ex, gen) <= 1e-10, m.identity() << " order " << k);
      CHECK(gen.h0_hermiticity_defect <= 1e-10);
    }
    if (!m.time_dependent()) {
      const auto set = kraus_series_compact_order2(m);
      CHECK(max_block_distance(dilate_explicit(set, dt), dilate_generic(set, dt)) <= 1e-10);
    }
  }
  CHECK(max_block_distance(dilate_generic(kraus_series(qubit(), 0.0, 1), dt),
                           dilate_order1(qubit(), 0.0, dt)) <= 1e-12);
}

TEST_CASE("generic matcher rejects non-trace-preserving input") {
  auto set = kraus_series(qubit(), 0.0, 2);
  set.blocks[0].series.coeff(2) *= 1.5;
  CHECK_THROWS_AS(dilate_generic(set, 0.01), NonHermitianError);

  auto bad_constant = kraus_series(qubit(), 0.0, 1);
  bad_constant.blocks[0].series.coeff(0) *= 2.0;
  CHECK_THROWS(dilate_generic(bad_constant, 0.01));
}

TEST_CASE("assembly") {
  std::mt19937_64 rng(3);
  const auto model = random_model(2, 2, rng);
  const auto dh = dilate_order3(model, 0.0, 0.02);
  const Matrix A = dh.assembled();
  const Index d = 2;
  REQUIRE(A.rows() == dh.full_dim());
  CHECK(hermiticity_defect(A) <= 1e-12);
  const Index nb = A.rows() / d;
  for (Index r = 0; r < nb; ++r) {
    for (Index c = 0; c < nb; ++c) {
      const Matrix blk = A.block(r * d, c * d, d, d);
      if (r == 0 && c == 0) {
        CHECK((blk - dh.blocks[0]).norm() <= 1e-15);
      } else if (c == 0 && r < static_cast<Index>(dh.num_blocks())) {
        CHECK((blk - dh.blocks[r]).norm() == 0.0);
      } else if (r == 0 && c < static_cast<Index>(dh.num_blocks())) {
        CHECK((blk - dh.blocks[c].adjoint()).norm() == 0.0);
      } else {
        CHECK(blk.norm() == 0.0);
      }
    }
  }

  // Leading columns against a general-purpose matrix exponential.
  const auto W = first_column_blocks(dh);
  REQUIRE(W.size() == dh.num_blocks());
  const Matrix U = general_expm(-kI * std::sqrt(dh.dt) * A);
  for (std::size_t j = 0; j < W.size(); ++j) {
    CHECK((W[j] - U.block(j * d, 0, d, d)).norm() <= 1e-12);
  }
  // Padding rows of the first column vanish.
  CHECK(U.block(dh.num_blocks() * d, 0, A.rows() - dh.num_blocks() * d, d).norm() <= 1e-12);
}

TEST_CASE("residual scaling") {
  const auto q = qubit();
  for (int k = 1; k <= 3; ++k) {
    const auto set = kraus_series(q, 0.0, k);
    const double r = first_column_residual(dilate_explicit(set, 1e-2), set, 1e-2) /
                     first_column_residual(dilate_explicit(set, 5e-3), set, 5e-3);
    CHECK_MESSAGE(in_band(r, k), "first column order " << k << " ratio " << r);
  }

  // V = 0: residual is the Taylor remainder of exp(-iH dt).
  std::mt19937_64 rng(4);
  const Matrix H = random_hermitian(3, rng);
  const auto unitary = LindbladModel::constant("h", H, {});
  const auto set = kraus_series(unitary, 0.0, 1);
  for (double dt : {1e-2, 5e-3}) {
    const double res = first_column_residual(dilate_order1(unitary, 0.0, dt), set, dt);
    CHECK(res <= dt * dt * operator_norm(H * H));
    CHECK(res >= 0.4 * dt * dt * operator_norm(H * H));
  }

  std::vector<LindbladModel> models{random_model(3, 2, rng), periodic_qubit(), tfim_damping(2, 1.0, 0.5)};
  for (const auto& m : models) {
    for (int k = 1; k <= 3; ++k) {
      const double dt = 1e-2 / be_norm(m, 0.2);
      const auto s = kraus_series(m, 0.2, k);
      const double r = channel_residual(dilate_explicit(s, dt), s, dt) /
                       channel_residual(dilate_explicit(s, dt / 2), s, dt / 2);
      CHECK_MESSAGE(in_band(r, k), m.identity() << " channel order " << k << " ratio " << r);
    }
  }
}

TEST_CASE("block norms bounded by the generator norm") {
  std::vector<LindbladModel> models{qubit(), periodic_qubit(), tfim_damping(3, 1.0, 0.5),
                                    tfim_driven(2, 1.0, 0.3, 9)};
  for (const auto& m : models) {
    const double be = be_norm(m, 0.0);
    for (int k = 1; k <= 3; ++k) {
      const auto dh = dilate_explicit(kraus_series(m, 0.0, k), 0.1 / be);
      for (std::size_t j = 0; j < dh.num_blocks(); ++j) CHECK(operator_norm(dh.blocks[j]) <= 10.0 * be);
    }
  }
}

TEST_CASE("JSON round trip") {
  std::mt19937_64 rng(5);
  const auto dh = dilate_order3(random_model(2, 2, rng), 0.0, 0.0123);
  const auto back = load_dilated_json(dump_dilated_json(dh));
  CHECK(back.sys_dim == dh.sys_dim);
  CHECK(back.order == dh.order);
  CHECK(back.dt == dh.dt);
  REQUIRE(back.num_blocks() == dh.num_blocks());
  for (std::size_t j = 0; j < dh.num_blocks(); ++j) CHECK(back.blocks[j] == dh.blocks[j]);
  CHECK(back.assembled() == dh.assembled());
  CHECK_THROWS(load_dilated_json("{\"sys_dim\": 2}"));
}
