#include "iel/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace iel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundaryTol = 1e-12;

double wrap01(double v) {
  double w = v - std::floor(v);
  if (w >= 1.0) w = 0.0;
  return w;
}

double circle_gap(double a, double b) {
  const double d = std::abs(a - b);
  const double m = d - std::floor(d);
  return std::min(m, 1.0 - m);
}

bool lexicographic_less(const Point& a, const Point& b) {
  for (int i = 0; i < a.dim; ++i) {
    if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
  }
  return std::lexicographical_compare(a.word.begin(), a.word.begin() + a.word_len, b.word.begin(),
                                      b.word.begin() + b.word_len);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Point Point::at(std::initializer_list<double> coords) {
  return at(std::span<const double>(coords.begin(), coords.size()));
}

Point Point::at(std::span<const double> coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxCoords)) throw std::invalid_argument("too many coordinates");
  Point p;
  p.dim = static_cast<std::uint8_t>(coords.size());
  std::copy(coords.begin(), coords.end(), p.x.begin());
  return p;
}

Point Point::symbols(std::initializer_list<int> syms) {
  if (syms.size() > static_cast<std::size_t>(kMaxWord)) throw std::invalid_argument("word too long");
  Point p;
  p.word_len = static_cast<std::uint8_t>(syms.size());
  std::size_t i = 0;
  for (int s : syms) {
    if (s < 0 || s > 255) throw std::invalid_argument("symbol out of range");
    p.word[i++] = static_cast<std::uint8_t>(s);
  }
  return p;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::TorusSup: return "torus-sup";
    case Metric::TorusEuclidean: return "torus-euclidean";
    case Metric::ProductSup: return "product-sup";
    case Metric::Shift: return "shift";
  }
  return "?";
}

std::string_view to_string(ReferenceMeasure m) {
  switch (m) {
    case ReferenceMeasure::Haar: return "haar";
    case ReferenceMeasure::Bernoulli: return "bernoulli";
    case ReferenceMeasure::Srb: return "srb";
  }
  return "?";
}

std::string_view to_string(SystemKind k) {
  switch (k) {
    case SystemKind::ToralLinear: return "toral_linear";
    case SystemKind::ExpandingCircle: return "expanding_circle";
    case SystemKind::FullShift: return "full_shift";
    case SystemKind::FatBaker: return "fat_baker";
    case SystemKind::Tsujii: return "tsujii";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view s) {
  for (Metric m : {Metric::TorusSup, Metric::TorusEuclidean, Metric::ProductSup, Metric::Shift}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::optional<ReferenceMeasure> parse_measure(std::string_view s) {
  for (ReferenceMeasure m : {ReferenceMeasure::Haar, ReferenceMeasure::Bernoulli, ReferenceMeasure::Srb}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

Metric default_metric(SystemKind kind) {
  switch (kind) {
    case SystemKind::ToralLinear:
    case SystemKind::ExpandingCircle: return Metric::TorusSup;
    case SystemKind::FullShift: return Metric::Shift;
    case SystemKind::FatBaker:
    case SystemKind::Tsujii: return Metric::ProductSup;
  }
  return Metric::TorusSup;
}

// ---------------------------------------------------------------------------------------------
// TrigPolynomial

double TrigPolynomial::value(double x) const {
  double sum = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
  const std::size_t terms = std::max(cos_coeffs.size(), sin_coeffs.size());
  if (terms <= 1) return sum;
  const double c1 = std::cos(kTwoPi * x);
  const double s1 = std::sin(kTwoPi * x);
  double ck = c1;
  double sk = s1;
  for (std::size_t k = 1; k < terms; ++k) {
    if (k < cos_coeffs.size()) sum += cos_coeffs[k] * ck;
    if (k < sin_coeffs.size()) sum += sin_coeffs[k] * sk;
    const double next_c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = next_c;
  }
  return sum;
}

double TrigPolynomial::derivative(double x) const {
  const std::size_t terms = std::max(cos_coeffs.size(), sin_coeffs.size());
  if (terms <= 1) return 0.0;
  const double c1 = std::cos(kTwoPi * x);
  const double s1 = std::sin(kTwoPi * x);
  double ck = c1;
  double sk = s1;
  double sum = 0.0;
  for (std::size_t k = 1; k < terms; ++k) {
    const double w = kTwoPi * static_cast<double>(k);
    if (k < cos_coeffs.size()) sum -= w * cos_coeffs[k] * sk;
    if (k < sin_coeffs.size()) sum += w * sin_coeffs[k] * ck;
    const double next_c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = next_c;
  }
  return sum;
}

double TrigPolynomial::sup_abs() const {
  constexpr int kGrid = 4096;
  double best = 0.0;
  for (int i = 0; i < kGrid; ++i) best = std::max(best, std::abs(value(static_cast<double>(i) / kGrid)));
  return best;
}

TrigPolynomial TrigPolynomial::random(int terms, double amplitude, RngStream& rng) {
  if (terms < 1 || terms > 8) throw std::invalid_argument("trigonometric polynomial needs 1..8 terms");
  TrigPolynomial f;
  f.cos_coeffs.assign(static_cast<std::size_t>(terms + 1), 0.0);
  f.sin_coeffs.assign(static_cast<std::size_t>(terms + 1), 0.0);
  for (int k = 1; k <= terms; ++k) {
    const double a = amplitude / (static_cast<double>(k) * k);
    f.cos_coeffs[static_cast<std::size_t>(k)] = rng.uniform(-a, a);
    f.sin_coeffs[static_cast<std::size_t>(k)] = rng.uniform(-a, a);
  }
  return f;
}

// ---------------------------------------------------------------------------------------------
// Bernoulli convolution

int bernoulli_convolution_depth(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
  return static_cast<int>(std::ceil(std::log(1e-12) / std::log(beta)));
}

double sample_bernoulli_convolution(double beta, RngStream& rng, std::uint8_t* digits, int* digit_count) {
  const int depth = bernoulli_convolution_depth(beta);
  const double step = 1.0 - beta;
  double sum = 0.0;
  double weight = step;
  std::uint64_t bits = 0;
  for (int i = 0; i < depth; ++i) {
    if (i % 64 == 0) bits = rng.next_u64();
    const auto digit = static_cast<std::uint8_t>(bits & 1U);
    bits >>= 1;
    sum += digit ? -weight : weight;
    weight *= beta;
    if (digits != nullptr && i < kMaxWord) digits[i] = digit;
  }
  if (digit_count != nullptr) *digit_count = std::min(depth, kMaxWord);
  return sum;
}

// ---------------------------------------------------------------------------------------------
// System construction

System::System(SystemParams params, std::optional<Metric> metric) : params_(std::move(params)) {
  metric_ = metric.value_or(default_metric(kind()));

  std::visit(
      overloaded{
          [&](const ToralLinear& t) {
            const SquareMatrix& a = t.matrix;
            if (!a.is_integer()) throw std::invalid_argument("toral_linear: matrix entries must be integers");
            if (a.dim() > 8) throw std::invalid_argument("toral_linear: dimension must be at most 8");
            det_ = integer_determinant(a);
            if (std::llabs(det_) < 2) throw std::invalid_argument("toral_linear: |det A| must be at least 2");
            for (double m : eigenvalue_moduli(a)) {
              if (std::abs(m - 1.0) < 1e-9) {
                throw std::invalid_argument("toral_linear: matrix is not hyperbolic (eigenvalue of modulus 1)");
              }
            }
            if (metric_ != Metric::TorusSup && metric_ != Metric::TorusEuclidean) {
              throw std::invalid_argument("toral_linear: metric must be torus-sup or torus-euclidean");
            }
            dim_ = a.dim();
            const SquareMatrix inv = a.inverse();
            inverse_.assign(inv.entries().begin(), inv.entries().end());

            // Preimages of 0 form the group A^{-1}Z^d / Z^d of order D = |det A|. Its elements
            // are adj(A) k / det mod 1, so we close the columns of sign(det)*adj(A) mod D under
            // addition in exact integer arithmetic.
            const long long big_d = std::llabs(det_);
            const long long sign = det_ > 0 ? 1 : -1;
            std::vector<std::vector<long long>> gens(static_cast<std::size_t>(dim_),
                                                     std::vector<long long>(static_cast<std::size_t>(dim_)));
            for (int c = 0; c < dim_; ++c) {
              for (int r = 0; r < dim_; ++r) {
                const long long adj = std::llround(inv(r, c) * static_cast<double>(det_));
                long long v = (sign * adj) % big_d;
                if (v < 0) v += big_d;
                gens[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] = v;
              }
            }
            std::set<std::vector<long long>> seen;
            std::vector<std::vector<long long>> frontier{std::vector<long long>(static_cast<std::size_t>(dim_), 0)};
            seen.insert(frontier.front());
            while (!frontier.empty()) {
              std::vector<std::vector<long long>> next;
              for (const auto& v : frontier) {
                for (const auto& g : gens) {
                  std::vector<long long> w(v.size());
                  for (std::size_t i = 0; i < v.size(); ++i) w[i] = (v[i] + g[i]) % big_d;
                  if (seen.insert(w).second) next.push_back(std::move(w));
                }
              }
              if (static_cast<long long>(seen.size()) > big_d) break;
              frontier = std::move(next);
            }
            if (static_cast<long long>(seen.size()) != big_d) {
              throw std::logic_error("toral_linear: preimage group has unexpected order");
            }
            kernel_.clear();
            for (const auto& v : seen) {
              std::array<double, kMaxCoords> c{};
              for (int i = 0; i < dim_; ++i) {
                c[static_cast<std::size_t>(i)] =
                    static_cast<double>(v[static_cast<std::size_t>(i)]) / static_cast<double>(big_d);
              }
              kernel_.push_back(c);
            }
          },
          [&](const ExpandingCircle& c) {
            if (c.degree < 2) throw std::invalid_argument("expanding_circle: degree must be at least 2");
            if (metric_ != Metric::TorusSup && metric_ != Metric::TorusEuclidean) {
              throw std::invalid_argument("expanding_circle: metric must be torus-sup or torus-euclidean");
            }
            dim_ = 1;
          },
          [&](const FullShift& s) {
            if (s.symbols() < 2 || s.symbols() > 255) throw std::invalid_argument("full_shift: needs 2..255 symbols");
            double total = 0.0;
            for (double p : s.probabilities) {
              if (!(p > 0.0)) throw std::invalid_argument("full_shift: probabilities must be positive");
              total += p;
            }
            if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("full_shift: probabilities must sum to 1");
            if (s.word_length < 1 || s.word_length > kMaxWord) {
              throw std::invalid_argument("full_shift: word_length must be in 1..64");
            }
            if (metric_ != Metric::Shift) throw std::invalid_argument("full_shift: metric must be shift");
            cumulative_.resize(s.probabilities.size());
            std::partial_sum(s.probabilities.begin(), s.probabilities.end(), cumulative_.begin());
            cumulative_.back() = 1.0;
            dim_ = 0;
          },
          [&](const FatBaker& b) {
            if (!(b.beta > 0.5 && b.beta < 1.0)) throw std::invalid_argument("fat_baker: beta must lie in (1/2, 1)");
            if (metric_ != Metric::ProductSup) throw std::invalid_argument("fat_baker: metric must be product-sup");
            dim_ = 2;
          },
          [&](const Tsujii& t) {
            if (t.l < 2) throw std::invalid_argument("tsujii: l must be an integer >= 2");
            if (!(t.lambda < 1.0 && t.lambda * t.l > 1.0)) {
              throw std::invalid_argument("tsujii: lambda must satisfy 1/l < lambda < 1");
            }
            if (t.f.cos_coeffs.size() > 9 || t.f.sin_coeffs.size() > 9) {
              throw std::invalid_argument("tsujii: trigonometric polynomial degree must be at most 8");
            }
            if (metric_ != Metric::ProductSup) throw std::invalid_argument("tsujii: metric must be product-sup");
            fiber_bound_ = t.f.sup_abs() / (1.0 - t.lambda);
            dim_ = 2;
          },
      },
      params_);
}

System System::toral_linear(SquareMatrix a, Metric metric) { return System(ToralLinear{std::move(a)}, metric); }
System System::expanding_circle(int degree, Metric metric) { return System(ExpandingCircle{degree}, metric); }
System System::full_shift(std::vector<double> probabilities, int word_length) {
  return System(FullShift{std::move(probabilities), word_length});
}
System System::fat_baker(double beta) { return System(FatBaker{beta}); }
System System::tsujii(int l, double lambda, TrigPolynomial f) { return System(Tsujii{l, lambda, std::move(f)}); }

SystemKind System::kind() const { return static_cast<SystemKind>(params_.index()); }

double System::diameter() const {
  switch (kind()) {
    case SystemKind::ToralLinear:
    case SystemKind::ExpandingCircle:
      return metric_ == Metric::TorusSup ? 0.5 : 0.5 * std::sqrt(static_cast<double>(dim_));
    case SystemKind::FullShift: return 1.0;
    case SystemKind::FatBaker: return 2.0;
    case SystemKind::Tsujii: return std::max(0.5, 2.0 * fiber_bound_);
  }
  return 0.0;
}

ReferenceMeasure System::default_measure() const {
  switch (kind()) {
    case SystemKind::ToralLinear:
    case SystemKind::ExpandingCircle: return ReferenceMeasure::Haar;
    case SystemKind::FullShift: return ReferenceMeasure::Bernoulli;
    case SystemKind::FatBaker:
    case SystemKind::Tsujii: return ReferenceMeasure::Srb;
  }
  return ReferenceMeasure::Haar;
}

bool System::supports(ReferenceMeasure m) const { return m == default_measure(); }

void System::check_measure(ReferenceMeasure m) const {
  if (!supports(m)) {
    throw std::invalid_argument(std::string("measure '") + std::string(to_string(m)) + "' is not valid for " +
                                std::string(to_string(kind())));
  }
}

int System::max_preimages() const {
  switch (kind()) {
    case SystemKind::ToralLinear: return static_cast<int>(std::llabs(det_));
    case SystemKind::ExpandingCircle: return std::get<ExpandingCircle>(params_).degree;
    case SystemKind::FullShift: return std::get<FullShift>(params_).symbols();
    case SystemKind::FatBaker: return 2;
    case SystemKind::Tsujii: return std::get<Tsujii>(params_).l;
  }
  return 0;
}

long long System::degree() const {
  if (kind() == SystemKind::ToralLinear) return std::llabs(det_);
  return max_preimages();
}

bool System::in_phase_space(const Point& p) const {
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  switch (kind()) {
    case SystemKind::ToralLinear:
    case SystemKind::ExpandingCircle:
      if (p.dim != dim_) return false;
      return std::all_of(p.x.begin(), p.x.begin() + dim_, unit);
    case SystemKind::FullShift: {
      if (p.dim != 0) return false;
      const int m = std::get<FullShift>(params_).symbols();
      return std::all_of(p.word.begin(), p.word.begin() + p.word_len, [m](std::uint8_t s) { return s < m; });
    }
    case SystemKind::FatBaker:
      return p.dim == 2 && std::abs(p.x[0]) <= 1.0 && std::abs(p.x[1]) <= 1.0;
    case SystemKind::Tsujii: return p.dim == 2 && unit(p.x[0]) && std::isfinite(p.x[1]);
  }
  return false;
}

// ---------------------------------------------------------------------------------------------
// Dynamics

Point System::apply(const Point& p) const {
  Point out;
  out.dim = p.dim;
  switch (kind()) {
    case SystemKind::ToralLinear: {
      for (int r = 0; r < dim_; ++r) {
        double s = 0.0;
        const double* row = std::get<ToralLinear>(params_).matrix.entries().data() + r * dim_;
        for (int c = 0; c < dim_; ++c) s += row[c] * p.x[c];
        out.x[r] = wrap01(s);
      }
      break;
    }
    case SystemKind::ExpandingCircle:
      out.x[0] = wrap01(std::get<ExpandingCircle>(params_).degree * p.x[0]);
      break;
    case SystemKind::FullShift:
      if (p.word_len > 0) {
        out.word_len = static_cast<std::uint8_t>(p.word_len - 1);
        std::copy(p.word.begin() + 1, p.word.begin() + p.word_len, out.word.begin());
      }
      break;
    case SystemKind::FatBaker: {
      const double beta = std::get<FatBaker>(params_).beta;
      if (p.x[1] >= 0.0) {
        out.x[0] = beta * p.x[0] + (1.0 - beta);
        out.x[1] = 2.0 * p.x[1] - 1.0;
      } else {
        out.x[0] = beta * p.x[0] - (1.0 - beta);
        out.x[1] = 2.0 * p.x[1] + 1.0;
      }
      break;
    }
    case SystemKind::Tsujii: {
      const auto& t = std::get<Tsujii>(params_);
      out.x[0] = wrap01(t.l * p.x[0]);
      out.x[1] = t.lambda * p.x[1] + t.f.value(p.x[0]);
      break;
    }
  }
  return out;
}

std::vector<Point> System::preimages(const Point& p) const {
  std::vector<Point> out;
  preimages(p, out);
  return out;
}

void System::preimages(const Point& p, std::vector<Point>& out) const {
  out.clear();
  switch (kind()) {
    case SystemKind::ToralLinear: {
      std::array<double, kMaxCoords> base{};
      for (int r = 0; r < dim_; ++r) {
        double s = 0.0;
        for (int c = 0; c < dim_; ++c) s += inverse_[static_cast<std::size_t>(r * dim_ + c)] * p.x[c];
        base[r] = s;
      }
      for (const auto& k : kernel_) {
        Point w;
        w.dim = static_cast<std::uint8_t>(dim_);
        for (int i = 0; i < dim_; ++i) w.x[i] = wrap01(base[i] + k[i]);
        out.push_back(w);
      }
      std::sort(out.begin(), out.end(), lexicographic_less);
      break;
    }
    case SystemKind::ExpandingCircle: {
      const int d = std::get<ExpandingCircle>(params_).degree;
      for (int j = 0; j < d; ++j) {
        Point w;
        w.dim = 1;
        w.x[0] = wrap01((p.x[0] + j) / d);
        out.push_back(w);
      }
      break;
    }
    case SystemKind::FullShift: {
      const auto& s = std::get<FullShift>(params_);
      const int len = std::min<int>(p.word_len + 1, s.word_length);
      for (int a = 0; a < s.symbols(); ++a) {
        Point w;
        w.word_len = static_cast<std::uint8_t>(len);
        w.word[0] = static_cast<std::uint8_t>(a);
        std::copy(p.word.begin(), p.word.begin() + (len - 1), w.word.begin() + 1);
        out.push_back(w);
      }
      break;
    }
    case SystemKind::FatBaker: {
      const double beta = std::get<FatBaker>(params_).beta;
      const double shift = 1.0 - beta;
      // Upper branch: y >= 0 maps by (beta x + (1-beta), 2y - 1).
      double x_up = (p.x[0] - shift) / beta;
      if (x_up >= -1.0 - kBoundaryTol && x_up <= 1.0 + kBoundaryTol) {
        Point w;
        w.dim = 2;
        w.x[0] = std::clamp(x_up, -1.0, 1.0);
        w.x[1] = (p.x[1] + 1.0) / 2.0;
        out.push_back(w);
      }
      // Lower branch: y < 0 maps by (beta x - (1-beta), 2y + 1).
      double x_low = (p.x[0] + shift) / beta;
      const double y_low = (p.x[1] - 1.0) / 2.0;
      if (x_low >= -1.0 - kBoundaryTol && x_low <= 1.0 + kBoundaryTol && y_low < 0.0) {
        Point w;
        w.dim = 2;
        w.x[0] = std::clamp(x_low, -1.0, 1.0);
        w.x[1] = y_low;
        out.push_back(w);
      }
      std::sort(out.begin(), out.end(), lexicographic_less);
      break;
    }
    case SystemKind::Tsujii: {
      const auto& t = std::get<Tsujii>(params_);
      for (int j = 0; j < t.l; ++j) {
        Point w;
        w.dim = 2;
        w.x[0] = wrap01((p.x[0] + j) / t.l);
        w.x[1] = (p.x[1] - t.f.value(w.x[0])) / t.lambda;
        out.push_back(w);
      }
      break;
    }
  }
}

SquareMatrix System::differential(const Point& p) const {
  switch (kind()) {
    case SystemKind::ToralLinear: return std::get<ToralLinear>(params_).matrix;
    case SystemKind::ExpandingCircle: return SquareMatrix{{static_cast<double>(std::get<ExpandingCircle>(params_).degree)}};
    case SystemKind::FullShift: throw std::domain_error("full_shift is not a smooth system");
    case SystemKind::FatBaker: return SquareMatrix{{std::get<FatBaker>(params_).beta, 0.0}, {0.0, 2.0}};
    case SystemKind::Tsujii: {
      const auto& t = std::get<Tsujii>(params_);
      return SquareMatrix{{static_cast<double>(t.l), 0.0}, {t.f.derivative(p.x[0]), t.lambda}};
    }
  }
  throw std::logic_error("unknown system kind");
}

std::optional<double> System::measure_jacobian(ReferenceMeasure m, const Point& p) const {
  check_measure(m);
  switch (kind()) {
    case SystemKind::ToralLinear: return static_cast<double>(std::llabs(det_));
    case SystemKind::ExpandingCircle: return static_cast<double>(std::get<ExpandingCircle>(params_).degree);
    case SystemKind::FullShift:
      if (p.word_len == 0) return std::nullopt;
      return 1.0 / std::get<FullShift>(params_).probabilities[p.word[0]];
    case SystemKind::FatBaker:
    case SystemKind::Tsujii: return std::nullopt;
  }
  return std::nullopt;
}

int System::tsujii_burn_in() const {
  if (kind() != SystemKind::Tsujii) return 0;
  const double lambda = std::get<Tsujii>(params_).lambda;
  const double scale = std::max(1.0, 2.0 * fiber_bound_);
  return static_cast<int>(std::ceil(std::log(1e-13 / scale) / std::log(lambda)));
}

Point System::sample_reference(ReferenceMeasure m, RngStream& rng, int burn_in) const {
  check_measure(m);
  Point p;
  switch (kind()) {
    case SystemKind::ToralLinear:
    case SystemKind::ExpandingCircle:
      p.dim = static_cast<std::uint8_t>(dim_);
      for (int i = 0; i < dim_; ++i) p.x[i] = rng.next_uniform();
      break;
    case SystemKind::FullShift: {
      const auto& s = std::get<FullShift>(params_);
      p.word_len = static_cast<std::uint8_t>(s.word_length);
      for (int i = 0; i < s.word_length; ++i) {
        const double u = rng.next_uniform();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        p.word[i] = static_cast<std::uint8_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(), s.symbols() - 1));
      }
      break;
    }
    case SystemKind::FatBaker: {
      int digits = 0;
      p.dim = 2;
      p.x[0] = sample_bernoulli_convolution(std::get<FatBaker>(params_).beta, rng, p.word.data(), &digits);
      p.word_len = static_cast<std::uint8_t>(digits);
      p.x[1] = rng.uniform(-1.0, 1.0);
      break;
    }
    case SystemKind::Tsujii: {
      // Walk the base backwards from a uniform endpoint with uniform branch digits, then run the
      // fiber recursion forward from a uniform seed in the strip. The orbit (x_{-B}, y_seed) ->
      // (x_0, y_0) is a forward orbit of length B whose seed has uniform base coordinate; only
      // the order of evaluation differs, which avoids the precision loss of iterating l*x mod 1.
      const auto& t = std::get<Tsujii>(params_);
      const int steps = std::max(0, std::min(burn_in, tsujii_burn_in()));
      p.dim = 2;
      p.x[0] = rng.next_uniform();
      double xb = p.x[0];
      double fiber = 0.0;
      double weight = 1.0;
      for (int k = 0; k < steps; ++k) {
        const auto j = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(t.l)));
        xb = wrap01((xb + j) / t.l);
        if (k < kMaxWord) p.word[k] = j;
        fiber += weight * t.f.value(xb);
        weight *= t.lambda;
      }
      fiber += weight * rng.uniform(-fiber_bound_, fiber_bound_);
      p.x[1] = fiber;
      p.word_len = static_cast<std::uint8_t>(std::min(steps, kMaxWord));
      break;
    }
  }
  return p;
}

double System::distance(const Point& p, const Point& q) const {
  switch (kind()) {
    case SystemKind::ToralLinear:
    case SystemKind::ExpandingCircle: {
      if (metric_ == Metric::TorusSup) {
        double d = 0.0;
        for (int i = 0; i < dim_; ++i) d = std::max(d, circle_gap(p.x[i], q.x[i]));
        return d;
      }
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) {
        const double g = circle_gap(p.x[i], q.x[i]);
        s += g * g;
      }
      return std::sqrt(s);
    }
    case SystemKind::FullShift: {
      const int common = std::min(p.word_len, q.word_len);
      for (int k = 0; k < common; ++k) {
        if (p.word[k] != q.word[k]) return std::ldexp(1.0, -k);
      }
      if (p.word_len == q.word_len) return 0.0;
      return std::ldexp(1.0, -common);
    }
    case SystemKind::FatBaker: return std::max(std::abs(p.x[0] - q.x[0]), std::abs(p.x[1] - q.x[1]));
    case SystemKind::Tsujii: return std::max(circle_gap(p.x[0], q.x[0]), std::abs(p.x[1] - q.x[1]));
  }
  return 0.0;
}

bool System::has_reversible_kernel(ReferenceMeasure m) const {
  return supports(m) && (m == ReferenceMeasure::Haar || m == ReferenceMeasure::Bernoulli);
}

Point System::propose(ReferenceMeasure m, const Point& p, double scale, RngStream& rng) const {
  if (!has_reversible_kernel(m)) throw std::domain_error("no reversible proposal kernel for this measure");
  Point q = p;
  if (m == ReferenceMeasure::Haar) {
    for (int i = 0; i < dim_; ++i) q.x[i] = wrap01(p.x[i] + rng.uniform(-scale, scale));
    return q;
  }
  if (p.word_len == 0) return q;
  const auto pos = rng.below(p.word_len);
  const double u = rng.next_uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const int m_symbols = std::get<FullShift>(params_).symbols();
  q.word[pos] = static_cast<std::uint8_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(), m_symbols - 1));
  return q;
}

std::string System::describe() const {
  std::ostringstream os;
  os << to_string(kind());
  std::visit(overloaded{
                 [&](const ToralLinear& t) {
                   os << " A=[";
                   for (int r = 0; r < t.matrix.dim(); ++r) {
                     os << (r ? ";" : "");
                     for (int c = 0; c < t.matrix.dim(); ++c) os << (c ? "," : "") << t.matrix(r, c);
                   }
                   os << "]";
                 },
                 [&](const ExpandingCircle& c) { os << " d=" << c.degree; },
                 [&](const FullShift& s) {
                   os << " p=(";
                   for (std::size_t i = 0; i < s.probabilities.size(); ++i) os << (i ? "," : "") << s.probabilities[i];
                   os << ")";
                 },
                 [&](const FatBaker& b) { os << " beta=" << b.beta; },
                 [&](const Tsujii& t) { os << " l=" << t.l << " lambda=" << t.lambda; },
             },
             params_);
  os << " metric=" << to_string(metric_);
  return os.str();
}

}  // namespace iel
