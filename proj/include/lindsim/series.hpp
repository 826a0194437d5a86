#pragma once

#include <vector>

#include "lindsim/linalg.hpp"

namespace lindsim {

/// Truncated power series in dt^(1/2) with d x d matrix coefficients:
///   s(dt) = sum_{p=0}^{m} coeffs[p] * dt^(p/2).
/// Half-integer powers are indexed by integers p, so there are no floating
/// exponents anywhere. Binary operations truncate to the smaller order.
class HalfPowerSeries {
 public:
  HalfPowerSeries(Index dim, int max_half_power);

  static HalfPowerSeries zero(Index dim, int max_half_power) { return {dim, max_half_power}; }
  static HalfPowerSeries constant(const Matrix& c, int max_half_power);
  /// Single term c * dt^(p/2).
  static HalfPowerSeries monomial(const Matrix& c, int p, int max_half_power);

  Index dim() const { return dim_; }
  int max_half_power() const { return static_cast<int>(coeffs_.size()) - 1; }

  /// Coefficient of dt^(p/2). Reading past the truncation throws.
  const Matrix& coeff(int p) const;
  Matrix& coeff(int p);
  /// Coefficient or zero when p lies past the truncation.
  Matrix coeff_or_zero(int p) const;

  const std::vector<Matrix>& coeffs() const { return coeffs_; }

  /// Lowest p with a nonzero coefficient, or max_half_power()+1 if none.
  int leading_half_power() const;

  HalfPowerSeries adjoint() const;
  HalfPowerSeries truncated(int max_half_power) const;
  /// Multiply by dt^(q/2); terms pushed past the truncation are dropped.
  HalfPowerSeries shifted(int q) const;

  HalfPowerSeries& operator+=(const HalfPowerSeries& o);
  HalfPowerSeries& operator-=(const HalfPowerSeries& o);
  HalfPowerSeries& operator*=(Complex s);

 private:
  Index dim_;
  std::vector<Matrix> coeffs_;
};

HalfPowerSeries operator+(HalfPowerSeries a, const HalfPowerSeries& b);
HalfPowerSeries operator-(HalfPowerSeries a, const HalfPowerSeries& b);
HalfPowerSeries operator-(HalfPowerSeries a);
HalfPowerSeries operator*(Complex s, HalfPowerSeries a);
HalfPowerSeries operator*(HalfPowerSeries a, Complex s);

/// Cauchy product truncated at min(a.max_half_power, b.max_half_power).
HalfPowerSeries series_mul(const HalfPowerSeries& a, const HalfPowerSeries& b);
HalfPowerSeries operator*(const HalfPowerSeries& a, const HalfPowerSeries& b);

/// Left/right multiplication by a constant matrix.
HalfPowerSeries operator*(const Matrix& m, const HalfPowerSeries& s);
HalfPowerSeries operator*(const HalfPowerSeries& s, const Matrix& m);

/// exp(s) = sum_n s^n / n!, exact within the truncation. Requires a zero
/// constant coefficient (every factor then raises the order by at least one).
HalfPowerSeries exp_of_nilpotent_order(const HalfPowerSeries& s);

/// sum_p coeffs[p] * dt^(p/2), Horner in sqrt(dt).
Matrix evaluate(const HalfPowerSeries& s, double dt);

}  // namespace lindsim
