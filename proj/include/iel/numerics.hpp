#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace iel {

/// Dense square matrix of small dimension (1..8), row-major.
class SquareMatrix {
 public:
  static constexpr int kMaxDim = 8;

  SquareMatrix() = default;
  explicit SquareMatrix(int dim);
  SquareMatrix(int dim, std::vector<double> entries);
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(int dim);
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);
  /// Block-diagonal matrix diag(a, b).
  static SquareMatrix block_diagonal(const SquareMatrix& a, const SquareMatrix& b);

  int dim() const { return dim_; }
  double operator()(int r, int c) const { return entries_[static_cast<std::size_t>(r * dim_ + c)]; }
  double& operator()(int r, int c) { return entries_[static_cast<std::size_t>(r * dim_ + c)]; }
  std::span<const double> entries() const { return entries_; }
  std::vector<std::vector<double>> rows() const;

  bool is_integer(double tol = 0.0) const;
  double infinity_norm() const;
  SquareMatrix inverse() const;
  SquareMatrix power(int k) const;

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);
  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  int dim_ = 0;
  std::vector<double> entries_;
};

/// LU with partial pivoting. Integer input gives a value that rounds to the exact integer.
double determinant(const SquareMatrix& m);

/// Exact determinant of an integer-valued matrix (fraction-free Bareiss elimination).
long long integer_determinant(const SquareMatrix& m);

/// All eigenvalues with multiplicity, sorted by descending modulus, ties by ascending argument.
/// Throws std::runtime_error when the iteration fails to converge.
std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m);

/// Moduli of eigenvalues(m), in the same order.
std::vector<double> eigenvalue_moduli(const SquareMatrix& m);

struct SlopePoint {
  int n = 0;
  double y = 0.0;
};

struct SlopeEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  int num_points = 0;
  double residual_rms = 0.0;
};

/// Ordinary least squares y ~ slope*n + intercept. `std_error` is the standard error of the
/// slope coefficient (zero for exactly two points). Throws std::invalid_argument with fewer
/// than two distinct abscissae.
SlopeEstimate fit_slope(std::span<const SlopePoint> points);

/// Mean and standard error of the mean; std_error is zero for fewer than two values.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanEstimate mean_and_stderr(std::span<const double> values);

}  // namespace iel
