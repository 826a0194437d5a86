#include "lindsim/series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindsim {

namespace {

void require_same_dim(const HalfPowerSeries& a, const HalfPowerSeries& b, const char* what) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

HalfPowerSeries::HalfPowerSeries(Index dim, int max_half_power) : dim_(dim) {
  if (dim < 0 || max_half_power < 0) {
    throw std::invalid_argument("HalfPowerSeries: negative dimension or order");
  }
  coeffs_.assign(static_cast<std::size_t>(max_half_power) + 1, Matrix::Zero(dim, dim));
}

HalfPowerSeries HalfPowerSeries::constant(const Matrix& c, int max_half_power) {
  return monomial(c, 0, max_half_power);
}

HalfPowerSeries HalfPowerSeries::monomial(const Matrix& c, int p, int max_half_power) {
  if (c.rows() != c.cols()) {
    throw std::invalid_argument("HalfPowerSeries: coefficient must be square");
  }
  HalfPowerSeries s(c.rows(), max_half_power);
  if (p >= 0 && p <= max_half_power) {
    s.coeffs_[p] = c;
  }
  return s;
}

const Matrix& HalfPowerSeries::coeff(int p) const {
  if (p < 0 || p > max_half_power()) {
    throw std::out_of_range("HalfPowerSeries: half-power " + std::to_string(p) +
                            " outside truncation " + std::to_string(max_half_power()));
  }
  return coeffs_[p];
}

Matrix& HalfPowerSeries::coeff(int p) {
  if (p < 0 || p > max_half_power()) {
    throw std::out_of_range("HalfPowerSeries: half-power " + std::to_string(p) +
                            " outside truncation " + std::to_string(max_half_power()));
  }
  return coeffs_[p];
}

Matrix HalfPowerSeries::coeff_or_zero(int p) const {
  if (p < 0 || p > max_half_power()) {
    return Matrix::Zero(dim_, dim_);
  }
  return coeffs_[p];
}

int HalfPowerSeries::leading_half_power() const {
  for (int p = 0; p <= max_half_power(); ++p) {
    if (!coeffs_[p].isZero(0.0)) {
      return p;
    }
  }
  return max_half_power() + 1;
}

HalfPowerSeries HalfPowerSeries::adjoint() const {
  HalfPowerSeries out(dim_, max_half_power());
  for (int p = 0; p <= max_half_power(); ++p) {
    out.coeffs_[p] = coeffs_[p].adjoint();
  }
  return out;
}

HalfPowerSeries HalfPowerSeries::truncated(int m) const {
  HalfPowerSeries out(dim_, m);
  for (int p = 0; p <= std::min(m, max_half_power()); ++p) {
    out.coeffs_[p] = coeffs_[p];
  }
  return out;
}

HalfPowerSeries HalfPowerSeries::shifted(int q) const {
  HalfPowerSeries out(dim_, max_half_power());
  for (int p = 0; p <= max_half_power(); ++p) {
    const int src = p - q;
    if (src >= 0 && src <= max_half_power()) {
      out.coeffs_[p] = coeffs_[src];
    }
  }
  return out;
}

HalfPowerSeries& HalfPowerSeries::operator+=(const HalfPowerSeries& o) {
  require_same_dim(*this, o, "series +");
  const int m = std::min(max_half_power(), o.max_half_power());
  coeffs_.resize(static_cast<std::size_t>(m) + 1);
  for (int p = 0; p <= m; ++p) {
    coeffs_[p] += o.coeffs_[p];
  }
  return *this;
}

HalfPowerSeries& HalfPowerSeries::operator-=(const HalfPowerSeries& o) {
  require_same_dim(*this, o, "series -");
  const int m = std::min(max_half_power(), o.max_half_power());
  coeffs_.resize(static_cast<std::size_t>(m) + 1);
  for (int p = 0; p <= m; ++p) {
    coeffs_[p] -= o.coeffs_[p];
  }
  return *this;
}

HalfPowerSeries& HalfPowerSeries::operator*=(Complex s) {
  for (auto& c : coeffs_) {
    c *= s;
  }
  return *this;
}

HalfPowerSeries operator+(HalfPowerSeries a, const HalfPowerSeries& b) { return a += b; }
HalfPowerSeries operator-(HalfPowerSeries a, const HalfPowerSeries& b) { return a -= b; }
HalfPowerSeries operator-(HalfPowerSeries a) { return a *= Complex(-1.0, 0.0); }
HalfPowerSeries operator*(Complex s, HalfPowerSeries a) { return a *= s; }
HalfPowerSeries operator*(HalfPowerSeries a, Complex s) { return a *= s; }

HalfPowerSeries series_mul(const HalfPowerSeries& a, const HalfPowerSeries& b) {
  require_same_dim(a, b, "series_mul");
  const int m = std::min(a.max_half_power(), b.max_half_power());
  HalfPowerSeries out(a.dim(), m);
  const int la = a.leading_half_power();
  const int lb = b.leading_half_power();
  for (int p = la; p <= m; ++p) {
    for (int q = lb; p + q <= m; ++q) {
      out.coeff(p + q).noalias() += a.coeff(p) * b.coeff(q);
    }
  }
  return out;
}

HalfPowerSeries operator*(const HalfPowerSeries& a, const HalfPowerSeries& b) {
  return series_mul(a, b);
}

HalfPowerSeries operator*(const Matrix& m, const HalfPowerSeries& s) {
  HalfPowerSeries out(s.dim(), s.max_half_power());
  for (int p = 0; p <= s.max_half_power(); ++p) {
    out.coeff(p).noalias() = m * s.coeff(p);
  }
  return out;
}

HalfPowerSeries operator*(const HalfPowerSeries& s, const Matrix& m) {
  HalfPowerSeries out(s.dim(), s.max_half_power());
  for (int p = 0; p <= s.max_half_power(); ++p) {
    out.coeff(p).noalias() = s.coeff(p) * m;
  }
  return out;
}

HalfPowerSeries exp_of_nilpotent_order(const HalfPowerSeries& s) {
  if (!s.coeff(0).isZero(0.0)) {
    throw std::invalid_argument(
        "exp_of_nilpotent_order: constant coefficient must vanish for the series to terminate");
  }
  const int m = s.max_half_power();
  HalfPowerSeries out = HalfPowerSeries::constant(identity(s.dim()), m);
  HalfPowerSeries term = out;
  for (int n = 1; n <= m; ++n) {
    term = series_mul(term, s) * Complex(1.0 / n, 0.0);
    if (term.leading_half_power() > m) {
      break;
    }
    out += term;
  }
  return out;
}

Matrix evaluate(const HalfPowerSeries& s, double dt) {
  if (dt < 0.0) {
    throw std::invalid_argument("evaluate: dt must be nonnegative");
  }
  const double r = std::sqrt(dt);
  Matrix acc = s.coeff(s.max_half_power());
  for (int p = s.max_half_power() - 1; p >= 0; --p) {
    acc = acc * r + s.coeff(p);
  }
  return acc;
}

}  // namespace lindsim
