#include "lindsim/model.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

namespace lindsim {

LindbladModel::LindbladModel(std::string identity, Index dim, std::size_t num_jumps,
                             ModelCallables fns, bool time_dependent,
                             int derivative_order_available)
    : identity_(std::move(identity)),
      dim_(dim),
      num_jumps_(num_jumps),
      fns_(std::move(fns)),
      time_dependent_(time_dependent),
      derivative_order_(time_dependent ? derivative_order_available : 2) {
  if (dim_ <= 0) {
    throw std::invalid_argument("LindbladModel: dimension must be positive");
  }
  if (!fns_.hamiltonian || (num_jumps_ > 0 && !fns_.jump)) {
    throw std::invalid_argument("LindbladModel: hamiltonian and jump callables are required");
  }
  if (derivative_order_ < 0 || derivative_order_ > 2) {
    throw std::invalid_argument("LindbladModel: derivative order must be 0, 1 or 2");
  }
  if (time_dependent_) {
    const bool first = fns_.ham_dot && (num_jumps_ == 0 || fns_.jump_dot);
    const bool second = fns_.ham_ddot && (num_jumps_ == 0 || fns_.jump_ddot);
    if ((derivative_order_ >= 1 && !first) || (derivative_order_ >= 2 && !second)) {
      throw std::invalid_argument("LindbladModel: declared derivative callables are missing");
    }
  }
}

LindbladModel LindbladModel::constant(std::string identity, Matrix hamiltonian,
                                      std::vector<Matrix> jumps) {
  const Index d = hamiltonian.rows();
  for (const auto& v : jumps) {
    if (v.rows() != d || v.cols() != d) {
      throw std::invalid_argument("LindbladModel::constant: jump dimension mismatch");
    }
  }
  const std::size_t n = jumps.size();
  auto h = std::make_shared<const Matrix>(std::move(hamiltonian));
  auto vs = std::make_shared<const std::vector<Matrix>>(std::move(jumps));
  ModelCallables fns;
  fns.hamiltonian = [h](double) { return *h; };
  fns.jump = [vs](std::size_t j, double) { return (*vs)[j]; };
  return LindbladModel(std::move(identity), d, n, std::move(fns), false, 2);
}

void LindbladModel::require_derivative(int order, const char* what) const {
  if (derivative_order_ < order) {
    std::ostringstream msg;
    msg << "model '" << identity_ << "' does not provide " << what;
    throw std::invalid_argument(msg.str());
  }
}

Matrix LindbladModel::checked(Matrix m, const char* what) const {
  if (m.rows() != dim_ || m.cols() != dim_) {
    std::ostringstream msg;
    msg << "model '" << identity_ << "': " << what << " returned " << m.rows() << "x" << m.cols()
        << ", expected " << dim_ << "x" << dim_;
    throw std::runtime_error(msg.str());
  }
  return m;
}

Matrix LindbladModel::hamiltonian(double t) const {
  return checked(fns_.hamiltonian(t), "hamiltonian");
}

Matrix LindbladModel::ham_dot(double t) const {
  if (!time_dependent_) return Matrix::Zero(dim_, dim_);
  require_derivative(1, "ham_dot");
  return checked(fns_.ham_dot(t), "ham_dot");
}

Matrix LindbladModel::ham_ddot(double t) const {
  if (!time_dependent_) return Matrix::Zero(dim_, dim_);
  require_derivative(2, "ham_ddot");
  return checked(fns_.ham_ddot(t), "ham_ddot");
}

Matrix LindbladModel::jump(std::size_t j, double t) const {
  if (j >= num_jumps_) throw std::out_of_range("jump index out of range");
  return checked(fns_.jump(j, t), "jump");
}

Matrix LindbladModel::jump_dot(std::size_t j, double t) const {
  if (j >= num_jumps_) throw std::out_of_range("jump index out of range");
  if (!time_dependent_) return Matrix::Zero(dim_, dim_);
  require_derivative(1, "jump_dot");
  return checked(fns_.jump_dot(j, t), "jump_dot");
}

Matrix LindbladModel::jump_ddot(std::size_t j, double t) const {
  if (j >= num_jumps_) throw std::out_of_range("jump index out of range");
  if (!time_dependent_) return Matrix::Zero(dim_, dim_);
  require_derivative(2, "jump_ddot");
  return checked(fns_.jump_ddot(j, t), "jump_ddot");
}

ModelSnapshot snapshot(const LindbladModel& model, double t, int derivative_order) {
  ModelSnapshot s;
  s.t = t;
  const Index d = model.dim();
  const std::size_t n = model.num_jumps();
  s.H = model.hamiltonian(t);
  s.H_dot = derivative_order >= 1 ? model.ham_dot(t) : Matrix::Zero(d, d);
  s.H_ddot = derivative_order >= 2 ? model.ham_ddot(t) : Matrix::Zero(d, d);
  s.V.reserve(n);
  s.V_dot.reserve(n);
  s.V_ddot.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.V.push_back(model.jump(j, t));
    s.V_dot.push_back(derivative_order >= 1 ? model.jump_dot(j, t) : Matrix::Zero(d, d));
    s.V_ddot.push_back(derivative_order >= 2 ? model.jump_ddot(j, t) : Matrix::Zero(d, d));
  }
  return s;
}

LindbladModel with_finite_difference_derivatives(const LindbladModel& model) {
  if (!model.time_dependent()) {
    return model;
  }
  auto base = std::make_shared<const LindbladModel>(model);
  auto step = [](double t) { return 1e-5 * std::max(1.0, std::abs(t)); };
  ModelCallables fns;
  fns.hamiltonian = [base](double t) { return base->hamiltonian(t); };
  fns.jump = [base](std::size_t j, double t) { return base->jump(j, t); };
  fns.ham_dot = [base, step](double t) {
    const double h = step(t);
    return Matrix((base->hamiltonian(t + h) - base->hamiltonian(t - h)) / (2.0 * h));
  };
  fns.ham_ddot = [base, step](double t) {
    const double h = step(t);
    return Matrix((base->hamiltonian(t + h) - 2.0 * base->hamiltonian(t) + base->hamiltonian(t - h)) /
                  (h * h));
  };
  fns.jump_dot = [base, step](std::size_t j, double t) {
    const double h = step(t);
    return Matrix((base->jump(j, t + h) - base->jump(j, t - h)) / (2.0 * h));
  };
  fns.jump_ddot = [base, step](std::size_t j, double t) {
    const double h = step(t);
    return Matrix((base->jump(j, t + h) - 2.0 * base->jump(j, t) + base->jump(j, t - h)) / (h * h));
  };
  return LindbladModel(model.identity() + "+fd", model.dim(), model.num_jumps(), std::move(fns),
                       true, 2);
}

Matrix effective_drift(const ModelSnapshot& s) {
  Matrix v0 = -kI * s.H;
  for (const auto& v : s.V) {
    v0 -= 0.5 * v.adjoint() * v;
  }
  return v0;
}

Matrix effective_drift(const LindbladModel& model, double t) {
  return effective_drift(snapshot(model, t, 0));
}

double be_norm(const LindbladModel& model, double t) {
  double out = 1.0 + operator_norm(model.hamiltonian(t));
  for (std::size_t j = 0; j < model.num_jumps(); ++j) {
    const double n = operator_norm(model.jump(j, t));
    out += n * n;
  }
  return out;
}

namespace pauli {

Matrix x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Matrix z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix sigma_minus() {
  Matrix m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}

Matrix sigma_plus() { return sigma_minus().adjoint(); }

Matrix on_site(const Matrix& op, int site, int num_sites) {
  if (site < 0 || site >= num_sites) {
    throw std::out_of_range("pauli::on_site: site out of range");
  }
  Matrix out = Matrix::Identity(1, 1);
  for (int s = 0; s < num_sites; ++s) {
    out = kron(out, s == site ? op : identity(2));
  }
  return out;
}

}  // namespace pauli

Matrix tfim_hamiltonian(int m, double g) {
  if (m < 2) {
    throw std::invalid_argument("tfim: need at least two sites");
  }
  const Index d = Index{1} << m;
  Matrix h = Matrix::Zero(d, d);
  for (int i = 0; i < m; ++i) {
    h -= pauli::on_site(pauli::z(), i, m) * pauli::on_site(pauli::z(), (i + 1) % m, m);
  }
  for (int i = 0; i < m; ++i) {
    h -= g * pauli::on_site(pauli::x(), i, m);
  }
  return h;
}

LindbladModel tfim_damping(int m, double g, double gamma) {
  Matrix h = tfim_hamiltonian(m, g);
  std::vector<Matrix> jumps;
  for (int i = 0; i < m; ++i) {
    jumps.push_back(std::sqrt(gamma) * pauli::on_site(pauli::sigma_minus(), i, m));
  }
  std::ostringstream id;
  id.precision(17);
  id << "tfim_damping(m=" << m << ",g=" << g << ",gamma=" << gamma << ")";
  return LindbladModel::constant(id.str(), std::move(h), std::move(jumps));
}

namespace {

Matrix complex_gaussian(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

}  // namespace

LindbladModel tfim_driven(int m, double g, double gamma, std::uint64_t seed) {
  constexpr std::size_t kJumps = 2;
  if (m < 2) {
    throw std::invalid_argument("tfim_driven: need at least two sites");
  }
  const Index d = Index{1} << m;
  std::mt19937_64 rng(seed);

  auto h = std::make_shared<const Matrix>(tfim_hamiltonian(m, g));
  Matrix gh = complex_gaussian(d, rng);
  gh = gh + gh.adjoint().eval();
  auto h_dot = std::make_shared<const Matrix>(gh / operator_norm(gh));

  auto v1 = std::make_shared<std::vector<Matrix>>();
  auto v2 = std::make_shared<std::vector<Matrix>>();
  for (std::size_t j = 0; j < kJumps; ++j) {
    v1->push_back(std::sqrt(gamma) * pauli::on_site(pauli::sigma_minus(), static_cast<int>(j), m));
    Matrix gj = complex_gaussian(d, rng);
    v2->push_back(gj / operator_norm(gj));
  }

  ModelCallables fns;
  fns.hamiltonian = [h, h_dot](double t) { return Matrix(*h + t * *h_dot); };
  fns.ham_dot = [h_dot](double) { return *h_dot; };
  fns.ham_ddot = [d](double) { return Matrix(Matrix::Zero(d, d)); };
  fns.jump = [v1, v2](std::size_t j, double t) { return Matrix((*v1)[j] + t * (*v2)[j]); };
  fns.jump_dot = [v2](std::size_t j, double) { return (*v2)[j]; };
  fns.jump_ddot = [d](std::size_t, double) { return Matrix(Matrix::Zero(d, d)); };

  std::ostringstream id;
  id.precision(17);
  id << "tfim_driven(m=" << m << ",g=" << g << ",gamma=" << gamma << ",seed=" << seed << ")";
  return LindbladModel(id.str(), d, kJumps, std::move(fns), true, 2);
}

LindbladModel periodic_qubit() {
  const double a = std::sqrt(2.0) / 2.0;
  const Matrix z = pauli::z();
  const Matrix sp = pauli::sigma_plus();
  const Matrix sm = pauli::sigma_minus();

  ModelCallables fns;
  fns.hamiltonian = [a, z](double t) { return Matrix(-a * (1.0 - std::cos(t)) * z); };
  fns.ham_dot = [a, z](double t) { return Matrix(-a * std::sin(t) * z); };
  fns.ham_ddot = [a, z](double t) { return Matrix(-a * std::cos(t) * z); };
  fns.jump = [sp, sm](std::size_t j, double t) {
    return j == 0 ? Matrix((2.0 + 0.5 * std::sin(t)) * sp) : Matrix((3.0 - 0.5 * std::sin(t)) * sm);
  };
  fns.jump_dot = [sp, sm](std::size_t j, double t) {
    return j == 0 ? Matrix(0.5 * std::cos(t) * sp) : Matrix(-0.5 * std::cos(t) * sm);
  };
  fns.jump_ddot = [sp, sm](std::size_t j, double t) {
    return j == 0 ? Matrix(-0.5 * std::sin(t) * sp) : Matrix(0.5 * std::sin(t) * sm);
  };
  return LindbladModel("periodic_qubit", 2, 2, std::move(fns), true, 2);
}

LindbladModel damped_qubit(double omega, double gamma) {
  std::ostringstream id;
  id.precision(17);
  id << "damped_qubit(omega=" << omega << ",gamma=" << gamma << ")";
  return LindbladModel::constant(id.str(), omega * pauli::z(),
                                 {std::sqrt(gamma) * pauli::sigma_minus()});
}

}  // namespace lindsim
