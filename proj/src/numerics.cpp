#include "iel/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace iel {

namespace {

__extension__ typedef __int128 i128;

void check_dim(int dim) {
  if (dim < 1 || dim > SquareMatrix::kMaxDim) {
    throw std::invalid_argument("matrix dimension must be in 1.." +
                                std::to_string(SquareMatrix::kMaxDim) + ", got " +
                                std::to_string(dim));
  }
}

Eigen::MatrixXd to_eigen(const SquareMatrix& m) {
  Eigen::MatrixXd out(m.dim(), m.dim());
  for (int r = 0; r < m.dim(); ++r) {
    for (int c = 0; c < m.dim(); ++c) out(r, c) = m(r, c);
  }
  return out;
}

}  // namespace

SquareMatrix::SquareMatrix(int dim) : dim_(dim), entries_(static_cast<std::size_t>(dim * dim), 0.0) {
  check_dim(dim);
}

SquareMatrix::SquareMatrix(int dim, std::vector<double> entries) : dim_(dim), entries_(std::move(entries)) {
  check_dim(dim);
  if (entries_.size() != static_cast<std::size_t>(dim * dim)) {
    throw std::invalid_argument("matrix needs dim*dim entries");
  }
}

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : dim_(static_cast<int>(rows.size())) {
  check_dim(dim_);
  entries_.reserve(static_cast<std::size_t>(dim_ * dim_));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim_) throw std::invalid_argument("matrix must be square");
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

SquareMatrix SquareMatrix::identity(int dim) {
  SquareMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int dim = static_cast<int>(rows.size());
  check_dim(dim);
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(dim * dim));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim) throw std::invalid_argument("matrix must be square");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return SquareMatrix(dim, std::move(entries));
}

SquareMatrix SquareMatrix::block_diagonal(const SquareMatrix& a, const SquareMatrix& b) {
  SquareMatrix m(a.dim() + b.dim());
  for (int r = 0; r < a.dim(); ++r) {
    for (int c = 0; c < a.dim(); ++c) m(r, c) = a(r, c);
  }
  for (int r = 0; r < b.dim(); ++r) {
    for (int c = 0; c < b.dim(); ++c) m(a.dim() + r, a.dim() + c) = b(r, c);
  }
  return m;
}

std::vector<std::vector<double>> SquareMatrix::rows() const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(dim_));
  for (int r = 0; r < dim_; ++r) {
    out[static_cast<std::size_t>(r)].assign(entries_.begin() + r * dim_, entries_.begin() + (r + 1) * dim_);
  }
  return out;
}

bool SquareMatrix::is_integer(double tol) const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [tol](double v) { return std::abs(v - std::round(v)) <= tol; });
}

double SquareMatrix::infinity_norm() const {
  double best = 0.0;
  for (int r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (int c = 0; c < dim_; ++c) s += std::abs((*this)(r, c));
    best = std::max(best, s);
  }
  return best;
}

SquareMatrix SquareMatrix::inverse() const {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(*this));
  if (!lu.isInvertible()) throw std::domain_error("matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  SquareMatrix out(dim_);
  for (int r = 0; r < dim_; ++r) {
    for (int c = 0; c < dim_; ++c) out(r, c) = inv(r, c);
  }
  return out;
}

SquareMatrix SquareMatrix::power(int k) const {
  if (k < 0) throw std::invalid_argument("negative matrix power");
  SquareMatrix result = identity(dim_);
  SquareMatrix base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in matrix product");
  SquareMatrix out(a.dim());
  for (int r = 0; r < a.dim(); ++r) {
    for (int c = 0; c < a.dim(); ++c) {
      double s = 0.0;
      for (int k = 0; k < a.dim(); ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  }
  return out;
}

double determinant(const SquareMatrix& m) {
  const int n = m.dim();
  std::vector<long double> a(m.entries().begin(), m.entries().end());
  auto at = [&](int r, int c) -> long double& { return a[static_cast<std::size_t>(r * n + c)]; };
  long double det = 1.0L;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
    }
    if (at(pivot, col) == 0.0L) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(at(pivot, c), at(col, c));
      det = -det;
    }
    det *= at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const long double f = at(r, col) / at(col, col);
      for (int c = col; c < n; ++c) at(r, c) -= f * at(col, c);
    }
  }
  return static_cast<double>(det);
}

long long integer_determinant(const SquareMatrix& m) {
  if (!m.is_integer()) throw std::invalid_argument("integer_determinant needs integer entries");
  const int n = m.dim();
  std::vector<i128> a(static_cast<std::size_t>(n * n));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<i128>(std::llround(m.entries()[i]));
  auto at = [&](int r, int c) -> i128& { return a[static_cast<std::size_t>(r * n + c)]; };
  i128 prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (at(k, k) == 0) {
      int swap_row = -1;
      for (int r = k + 1; r < n; ++r) {
        if (at(r, k) != 0) {
          swap_row = r;
          break;
        }
      }
      if (swap_row < 0) return 0;
      for (int c = 0; c < n; ++c) std::swap(at(k, c), at(swap_row, c));
      sign = -sign;
    }
    for (int r = k + 1; r < n; ++r) {
      for (int c = k + 1; c < n; ++c) {
        at(r, c) = (at(r, c) * at(k, k) - at(r, k) * at(k, c)) / prev;
      }
    }
    prev = at(k, k);
  }
  return static_cast<long long>(sign * at(n - 1, n - 1));
}

std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(m), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue iteration did not converge (degenerate input)");
  }
  std::vector<std::complex<double>> values(static_cast<std::size_t>(m.dim()));
  for (int i = 0; i < m.dim(); ++i) values[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];

  double scale = 1.0;
  for (const auto& v : values) scale = std::max(scale, std::abs(v));
  const double tie = 1e-12 * scale;
  std::sort(values.begin(), values.end(), [tie](const auto& a, const auto& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (std::abs(ma - mb) > tie) return ma > mb;
    return std::arg(a) < std::arg(b);
  });
  return values;
}

std::vector<double> eigenvalue_moduli(const SquareMatrix& m) {
  const auto values = eigenvalues(m);
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(std::abs(v));
  return out;
}

SlopeEstimate fit_slope(std::span<const SlopePoint> points) {
  if (points.size() < 2) throw std::invalid_argument("fit_slope needs at least 2 points");
  const bool distinct = std::any_of(points.begin(), points.end(),
                                    [&](const SlopePoint& p) { return p.n != points.front().n; });
  if (!distinct) throw std::invalid_argument("fit_slope needs at least 2 distinct abscissae");

  // Abscissae are centred in integer arithmetic (k*n - sum n), so the weights sum to exactly zero
  // and adding a constant to every y cannot move the slope.
  const auto count = static_cast<long long>(points.size());
  const double k = static_cast<double>(count);
  long long sum_n = 0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    sum_n += p.n;
    mean_y += p.y;
  }
  mean_y /= k;
  const double mean_n = static_cast<double>(sum_n) / k;

  long long sxx_scaled = 0;
  double sxy_scaled = 0.0;
  for (const auto& p : points) {
    const long long dn = count * p.n - sum_n;
    sxx_scaled += dn * dn;
    sxy_scaled += static_cast<double>(dn) * p.y;
  }
  const double sxx = static_cast<double>(sxx_scaled) / (k * k);

  SlopeEstimate fit;
  fit.slope = sxy_scaled * k / static_cast<double>(sxx_scaled);
  fit.intercept = mean_y - fit.slope * mean_n;
  fit.num_points = static_cast<int>(points.size());

  double ssr = 0.0;
  for (const auto& p : points) {
    const double r = p.y - (fit.intercept + fit.slope * p.n);
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr / k);
  fit.std_error = points.size() > 2 ? std::sqrt(ssr / (k - 2.0) / sxx) : 0.0;
  return fit;
}

MeanEstimate mean_and_stderr(std::span<const double> values) {
  MeanEstimate out;
  if (values.empty()) return out;
  const double k = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (k - 1.0) / k);
  }
  return out;
}

}  // namespace iel
