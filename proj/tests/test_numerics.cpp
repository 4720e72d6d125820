#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "iel/numerics.hpp"
#include "iel/rng.hpp"
#include "test_util.hpp"

using iel::SquareMatrix;

namespace {

const SquareMatrix kA1{{8, 1, 4}, {0, 3, 1}, {0, 2, 1}};
const SquareMatrix kA2{{4, 0, 0}, {3, 6, 2}, {5, 4, 2}};

// Cofactor expansion along the first row, used as an independent oracle.
double cofactor_det(const SquareMatrix& m) {
  const int n = m.dim();
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (int c = 0; c < n; ++c) {
    SquareMatrix minor(n - 1);
    for (int r = 1; r < n; ++r) {
      for (int k = 0, kk = 0; k < n; ++k) {
        if (k != c) minor(r - 1, kk++) = m(r, k);
      }
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * m(0, c) * cofactor_det(minor);
  }
  return det;
}

SquareMatrix random_integer_matrix(iel::RngStream& rng, int dim, int bound) {
  SquareMatrix m(dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = static_cast<double>(static_cast<int>(rng.below(2 * bound + 1)) - bound);
  }
  return m;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("determinant of small matrices") {
    CHECK(iel::determinant(SquareMatrix::identity(3)) == 1.0);
    CHECK(cofactor_det(kA1) == 8.0);
    CHECK(cofactor_det(kA2) == 16.0);
    CHECK(iel::determinant(kA1) == doctest::Approx(cofactor_det(kA1)).epsilon(1e-14));
    CHECK(iel::determinant(kA2) == doctest::Approx(cofactor_det(kA2)).epsilon(1e-14));
    CHECK(std::round(iel::determinant(kA1)) == 8.0);
    CHECK(iel::integer_determinant(kA1) == 8);
    CHECK(iel::integer_determinant(kA2) == 16);
  }

  TEST_CASE("integer determinant agrees with cofactor expansion") {
    iel::RngStream rng(11, 0);
    for (int trial = 0; trial < 300; ++trial) {
      const int dim = 1 + static_cast<int>(rng.below(5));
      const SquareMatrix m = random_integer_matrix(rng, dim, 10);
      CHECK(static_cast<double>(iel::integer_determinant(m)) == cofactor_det(m));
    }
  }

  TEST_CASE("eigenvalues of the worked matrices") {
    const double s3 = std::sqrt(3.0);
    const auto e1 = iel::eigenvalues(kA1);
    REQUIRE(e1.size() == 3);
    const double want1[] = {8.0, 2.0 + s3, 2.0 - s3};
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(e1[static_cast<std::size_t>(i)] - want1[i]) <= 1e-10 * want1[i]);
    }
    const auto e2 = iel::eigenvalues(kA2);
    const double want2[] = {4.0 + 2.0 * s3, 4.0, 4.0 - 2.0 * s3};
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(e2[static_cast<std::size_t>(i)] - want2[i]) <= 1e-10 * want2[i]);
    }
  }

  TEST_CASE("eigenvalues of a 2x2 match the quadratic formula") {
    const SquareMatrix m{{3, 1}, {1, 1}};
    const double tr = 4.0;
    const double det = 2.0;
    const double disc = std::sqrt(tr * tr - 4.0 * det);
    const auto e = iel::eigenvalues(m);
    CHECK(e[0].real() == doctest::Approx((tr + disc) / 2).epsilon(1e-12));
    CHECK(e[1].real() == doctest::Approx((tr - disc) / 2).epsilon(1e-12));
    CHECK(e[0].imag() == 0.0);
  }

  TEST_CASE("equal moduli are ordered by ascending argument") {
    const auto e = iel::eigenvalues(SquareMatrix{{0, -2}, {2, 0}});
    CHECK(std::abs(e[0]) == doctest::Approx(2.0));
    CHECK(e[0].imag() < 0.0);
    CHECK(e[1].imag() > 0.0);
    const auto d = iel::eigenvalues(SquareMatrix{{-3, 0}, {0, 3}});
    CHECK(d[0].real() == doctest::Approx(3.0));
    CHECK(d[1].real() == doctest::Approx(-3.0));
  }

  TEST_CASE("determinant equals the product of eigenvalues") {
    iel::RngStream rng(12, 0);
    for (int trial = 0; trial < 500; ++trial) {
      const int dim = 1 + static_cast<int>(rng.below(4));
      const SquareMatrix m = random_integer_matrix(rng, dim, 10);
      std::complex<double> prod = 1.0;
      for (const auto& z : iel::eigenvalues(m)) prod *= z;
      const double det = iel::determinant(m);
      const double scale = std::max(1.0, std::pow(m.infinity_norm(), dim));
      CHECK(std::abs(prod - det) <= 1e-8 * std::max(std::abs(det), 1e-4 * scale));
    }
  }

  TEST_CASE("eigenvalues of powers are powers of eigenvalues") {
    iel::RngStream rng(13, 0);
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = 1 + static_cast<int>(rng.below(4));
      const SquareMatrix m = random_integer_matrix(rng, dim, 4);
      const int k = 2 + static_cast<int>(rng.below(3));
      std::vector<double> want;
      for (const auto& z : iel::eigenvalues(m)) want.push_back(std::pow(std::abs(z), k));
      std::sort(want.rbegin(), want.rend());
      const auto got = iel::eigenvalue_moduli(m.power(k));
      const double top = want.front();
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(std::abs(got[i] - want[i]) <= 1e-6 * std::max(want[i], 1e-3 * top) + 1e-9);
      }
    }
  }

  TEST_CASE("slope fit") {
    const std::vector<iel::SlopePoint> line{{1, 2.0}, {2, 4.0}, {3, 6.0}};
    const auto f = iel::fit_slope(line);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f.std_error == doctest::Approx(0.0));
    CHECK(f.num_points == 3);

    const std::vector<iel::SlopePoint> flat{{0, 0.0}, {1, 0.0}, {2, 0.0}};
    CHECK(iel::fit_slope(flat).slope == 0.0);

    // Closed-form OLS for three points at n = 1, 2, 3: slope = (y3 - y1) / 2.
    const std::vector<iel::SlopePoint> noisy{{1, 1.1}, {2, 1.9}, {3, 3.05}};
    const double want = (3.05 - 1.1) / 2.0;
    const auto g = iel::fit_slope(noisy);
    CHECK(std::abs(g.slope - want) < 1e-9);
    const double intercept = (1.1 + 1.9 + 3.05) / 3.0 - want * 2.0;
    double ssr = 0.0;
    for (const auto& p : noisy) ssr += std::pow(p.y - intercept - want * p.n, 2);
    CHECK(g.std_error == doctest::Approx(std::sqrt(ssr / 1.0 / 2.0)).epsilon(1e-9));
    CHECK(g.residual_rms == doctest::Approx(std::sqrt(ssr / 3.0)).epsilon(1e-9));
  }

  TEST_CASE("slope fit rejects degenerate abscissae") {
    const std::vector<iel::SlopePoint> one{{1, 1.0}};
    const std::vector<iel::SlopePoint> same{{2, 1.0}, {2, 3.0}};
    CHECK_THROWS_AS(iel::fit_slope(one), std::invalid_argument);
    CHECK_THROWS_AS(iel::fit_slope(same), std::invalid_argument);
  }

  TEST_CASE("slope is translation equivariant") {
    iel::RngStream rng(14, 0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<iel::SlopePoint> pts;
      std::vector<iel::SlopePoint> shifted;
      const double c = static_cast<double>(static_cast<int>(rng.below(2001)) - 1000);
      const int k = 2 + static_cast<int>(rng.below(12));
      for (int n = 0; n < k; ++n) {
        // Dyadic data: every shift and product is exact, so equality must be bitwise.
        const double y = static_cast<double>(static_cast<int>(rng.below(1 << 16))) / 1024.0;
        pts.push_back({n + 2, y});
        shifted.push_back({n + 2, y + c});
      }
      CHECK(iel::fit_slope(pts).slope == iel::fit_slope(shifted).slope);
    }
    // Arbitrary reals: equal up to the rounding of the shifted data.
    std::vector<iel::SlopePoint> pts;
    std::vector<iel::SlopePoint> shifted;
    for (int n = 2; n <= 12; ++n) {
      const double y = 0.5348 * n + 0.1 * std::sin(n);
      pts.push_back({n, y});
      shifted.push_back({n, y + 7.25});
    }
    CHECK(iel::fit_slope(pts).slope == doctest::Approx(iel::fit_slope(shifted).slope).epsilon(1e-13));
  }

  TEST_CASE("mean and standard error") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto m = iel::mean_and_stderr(v);
    CHECK(m.mean == 2.5);
    CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are reproducible") {
    iel::RngStream a(42, 7);
    iel::RngStream b(42, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    iel::RngStream c(42, 7);
    c.next_u64();
    CHECK(c.position() == 1);
  }

  TEST_CASE("first values are pinned") {
    // SplitMix64 finalizer of key + i * golden gamma; pins the documented algorithm.
    const std::uint64_t key = iel::mix64(1 ^ iel::mix64(0 ^ 0xD1B54A32D192ED03ULL));
    iel::RngStream s(1, 0);
    CHECK(s.next_u64() == iel::mix64(key + 0x9E3779B97F4A7C15ULL));
    CHECK(s.next_u64() == iel::mix64(key + 2 * 0x9E3779B97F4A7C15ULL));
    CHECK(iel::mix64(0) == 0xE220A8397B1DCDAFULL);
  }

  TEST_CASE("uniform draws lie in [0, 1) and pass chi-square") {
    for (std::uint64_t id : {0ULL, 1ULL, 99ULL}) {
      iel::RngStream s(2024, id);
      std::vector<double> v(1000000);
      for (auto& x : v) {
        x = iel::rng_next_uniform(s);
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
      }
      CHECK(test::chi_square_uniform_p(v, 100) > 0.01);
    }
  }

  TEST_CASE("distinct streams are uncorrelated") {
    iel::RngStream a(5, 1);
    iel::RngStream b(5, 2);
    const int n = 200000;
    double sab = 0.0;
    double sa = 0.0;
    double sb = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = a.next_uniform();
      const double y = b.next_uniform();
      sab += x * y;
      sa += x;
      sb += y;
      saa += x * x;
      sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) < 4.0 / std::sqrt(n));
  }

  TEST_CASE("split children differ from the parent and each other") {
    const iel::RngStream root(3, 0);
    iel::RngStream c0 = root.split(0);
    iel::RngStream c1 = root.split(1);
    iel::RngStream p = root;
    const auto x0 = c0.next_u64();
    CHECK(x0 != c1.next_u64());
    CHECK(x0 != p.next_u64());
    iel::RngStream again = root.split(0);
    CHECK(again.next_u64() == x0);
  }

  TEST_CASE("below is unbiased over a small range") {
    iel::RngStream s(8, 0);
    std::vector<double> v(300000);
    for (auto& x : v) x = (static_cast<double>(s.below(7)) + 0.5) / 7.0;
    CHECK(test::chi_square_uniform_p(v, 7) > 0.01);
  }
}
