#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iel/numerics.hpp"
#include "iel/rng.hpp"

namespace iel {

inline constexpr int kMaxCoords = SquareMatrix::kMaxDim;
inline constexpr int kMaxWord = 64;

/// A point of one of the phase spaces below.
///
/// Geometric systems use `x[0..dim)`. Shift systems use `word[0..word_len)` as the symbol
/// sequence (positions beyond word_len are unknown). Reference samples of the fat baker and
/// Tsujii SRB measures also carry a latent symbolic code in `word`: the backward branch digits
/// that generated the point. The latent code never enters the metric.
struct Point {
  std::uint8_t dim = 0;
  std::uint8_t word_len = 0;
  std::array<double, kMaxCoords> x{};
  std::array<std::uint8_t, kMaxWord> word{};

  static Point at(std::initializer_list<double> coords);
  static Point at(std::span<const double> coords);
  static Point symbols(std::initializer_list<int> syms);

  std::span<const double> coords() const { return {x.data(), dim}; }
  std::span<const std::uint8_t> symbol_word() const { return {word.data(), word_len}; }
  void clear_word() { word_len = 0; }
};

enum class Metric { TorusSup, TorusEuclidean, ProductSup, Shift };
enum class ReferenceMeasure { Haar, Bernoulli, Srb };
enum class SystemKind { ToralLinear, ExpandingCircle, FullShift, FatBaker, Tsujii };

std::string_view to_string(Metric m);
std::string_view to_string(ReferenceMeasure m);
std::string_view to_string(SystemKind k);
std::optional<Metric> parse_metric(std::string_view s);
std::optional<ReferenceMeasure> parse_measure(std::string_view s);

/// f(x) = a_0 + sum_{k>=1} (a_k cos 2 pi k x + b_k sin 2 pi k x), k <= 8.
struct TrigPolynomial {
  std::vector<double> cos_coeffs;  // a_0 .. a_K
  std::vector<double> sin_coeffs;  // b_0 .. b_K, b_0 unused

  double value(double x) const;
  double derivative(double x) const;
  /// sup |f| over [0,1), evaluated on a 4096-point grid.
  double sup_abs() const;
  /// Coefficients a_k, b_k uniform in [-amplitude/k^2, amplitude/k^2] for 1 <= k <= terms.
  static TrigPolynomial random(int terms, double amplitude, RngStream& rng);

  friend bool operator==(const TrigPolynomial&, const TrigPolynomial&) = default;
};

struct ToralLinear {
  SquareMatrix matrix;
  friend bool operator==(const ToralLinear&, const ToralLinear&) = default;
};
struct ExpandingCircle {
  int degree = 2;
  friend bool operator==(const ExpandingCircle&, const ExpandingCircle&) = default;
};
struct FullShift {
  std::vector<double> probabilities;
  int word_length = kMaxWord;
  int symbols() const { return static_cast<int>(probabilities.size()); }
  friend bool operator==(const FullShift&, const FullShift&) = default;
};
struct FatBaker {
  double beta = 0.75;
  friend bool operator==(const FatBaker&, const FatBaker&) = default;
};
struct Tsujii {
  int l = 2;
  double lambda = 0.7;
  TrigPolynomial f;
  friend bool operator==(const Tsujii&, const Tsujii&) = default;
};

using SystemParams = std::variant<ToralLinear, ExpandingCircle, FullShift, FatBaker, Tsujii>;

/// Draws sum_{i < N} +-(1 - beta) beta^i with fair signs, N chosen so that beta^N < 1e-12.
/// If `digits` is non-null the first min(N, kMaxWord) sign digits (0 for +, 1 for -) are
/// written to it and the count is returned through `digit_count`.
double sample_bernoulli_convolution(double beta, RngStream& rng, std::uint8_t* digits = nullptr,
                                    int* digit_count = nullptr);
/// Number of digits used by sample_bernoulli_convolution.
int bernoulli_convolution_depth(double beta);

/// An immutable endomorphism together with its metric. Validates the family invariants on
/// construction (std::invalid_argument on failure) and is safe to share between threads.
class System {
 public:
  explicit System(SystemParams params, std::optional<Metric> metric = std::nullopt);

  static System toral_linear(SquareMatrix a, Metric metric = Metric::TorusSup);
  static System expanding_circle(int degree, Metric metric = Metric::TorusSup);
  static System full_shift(std::vector<double> probabilities, int word_length = kMaxWord);
  static System fat_baker(double beta);
  static System tsujii(int l, double lambda, TrigPolynomial f);

  SystemKind kind() const;
  const SystemParams& params() const { return params_; }
  Metric metric() const { return metric_; }
  /// Number of real coordinates (0 for the shift).
  int dimension() const { return dim_; }
  bool is_smooth() const { return kind() != SystemKind::FullShift; }
  /// Largest distance between two points under the system metric.
  double diameter() const;
  ReferenceMeasure default_measure() const;
  bool supports(ReferenceMeasure m) const;
  /// Throws std::invalid_argument if `m` is not a valid reference measure for this system.
  void check_measure(ReferenceMeasure m) const;
  /// Largest possible number of preimages of a point.
  int max_preimages() const;
  /// Exact |det A| for toral systems, degree for circles, symbol count, 2, l otherwise.
  long long degree() const;

  bool in_phase_space(const Point& p) const;
  Point apply(const Point& p) const;
  std::vector<Point> preimages(const Point& p) const;
  /// Same as preimages(p) but reuses `out`.
  void preimages(const Point& p, std::vector<Point>& out) const;
  SquareMatrix differential(const Point& p) const;
  /// Parry Jacobian of the reference measure, or nullopt where it has no closed form.
  std::optional<double> measure_jacobian(ReferenceMeasure m, const Point& p) const;
  /// One draw from the reference measure. For the Tsujii SRB measure this is the endpoint of a
  /// forward orbit of length min(burn_in, tsujii_burn_in()) from a uniformly chosen seed.
  Point sample_reference(ReferenceMeasure m, RngStream& rng, int burn_in = 10000) const;
  double distance(const Point& p, const Point& q) const;

  /// True when propose() is a reversible move for the reference measure `m`.
  bool has_reversible_kernel(ReferenceMeasure m) const;
  /// Symmetric proposal (Haar: uniform box jitter of half-width `scale`; Bernoulli: resample
  /// one symbol from p). Combined with a set-indicator acceptance it leaves the reference
  /// measure restricted to that set invariant.
  Point propose(ReferenceMeasure m, const Point& p, double scale, RngStream& rng) const;

  /// Tsujii only: sup|f| / (1 - lambda), the half-height of the invariant strip.
  double fiber_bound() const { return fiber_bound_; }
  /// Tsujii only: orbit length after which the seed's fiber coordinate contributes < 1e-13.
  int tsujii_burn_in() const;

  std::string describe() const;

  friend bool operator==(const System& a, const System& b) {
    return a.params_ == b.params_ && a.metric_ == b.metric_;
  }

 private:
  SystemParams params_;
  Metric metric_;
  int dim_ = 0;
  // ToralLinear: inverse matrix and the preimages of 0 (the kernel of the torus map).
  std::vector<double> inverse_;
  std::vector<std::array<double, kMaxCoords>> kernel_;
  long long det_ = 0;
  // FullShift: cumulative distribution of the symbol law.
  std::vector<double> cumulative_;
  double fiber_bound_ = 0.0;
};

Metric default_metric(SystemKind kind);

}  // namespace iel
