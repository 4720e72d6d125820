#include "iel/exact.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace iel {

namespace {

constexpr double kUnitTol = 1e-9;

}  // namespace

InvariantPair toral_invariants(const SquareMatrix& a, long long min_abs_det) {
  if (!a.is_integer()) throw std::invalid_argument("toral_invariants: matrix entries must be integers");
  const long long det = integer_determinant(a);
  if (std::llabs(det) < std::max(min_abs_det, 1LL)) {
    throw std::invalid_argument("toral_invariants: |det A| must be at least " + std::to_string(std::max(min_abs_det, 1LL)));
  }

  InvariantPair out;
  for (double m : eigenvalue_moduli(a)) {
    if (std::abs(m - 1.0) < kUnitTol) {
      throw std::invalid_argument("toral_invariants: matrix is not hyperbolic (eigenvalue of modulus 1)");
    }
    const double e = std::log(m);
    out.lyapunov.push_back(e);
    if (m > 1.0) {
      out.forward_entropy += e;
    } else {
      out.inverse_entropy -= e;
    }
  }
  std::sort(out.lyapunov.begin(), out.lyapunov.end(), std::greater<>());
  out.folding_entropy = std::log(static_cast<double>(std::llabs(det)));
  out.provenance = "exact: eigenvalues of A";
  return out;
}

InvariantPair bernoulli_shift_invariants(const std::vector<double>& probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0)) throw std::invalid_argument("bernoulli_shift_invariants: probabilities must be positive");
    h -= p * std::log(p);
  }
  InvariantPair out;
  out.forward_entropy = h;
  out.folding_entropy = h;
  out.inverse_entropy = 0.0;
  out.provenance = "exact: Shannon entropy of p; inverse entropy of a one-sided shift vanishes";
  return out;
}

FatBakerExact fat_baker_inverse_from_dimension(double beta, double delta) {
  if (!(beta > 0.5 && beta < 1.0)) throw std::invalid_argument("fat_baker_inverse_from_dimension: beta must lie in (1/2, 1)");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("fat_baker_inverse_from_dimension: delta must lie in [0, 1]");
  FatBakerExact out;
  out.inverse_entropy = std::abs(std::log(beta)) * delta;
  out.overlap_number = std::exp(std::numbers::ln2 - out.inverse_entropy);
  return out;
}

TsujiiExact tsujii_invariants(int l, double lambda) {
  if (l < 2) throw std::invalid_argument("tsujii_invariants: l must be at least 2");
  if (!(lambda < 1.0 && lambda * l > 1.0)) throw std::invalid_argument("tsujii_invariants: need 1/l < lambda < 1");
  TsujiiExact out;
  out.forward = std::log(static_cast<double>(l));
  out.folding = std::log(lambda * l);
  out.inverse_exact_ac = std::abs(std::log(lambda));
  out.inverse_low = 0.5 * out.inverse_exact_ac;
  out.inverse_high = out.inverse_exact_ac;
  return out;
}

InvariantPair rigidity_pair(const System& sys) {
  if (sys.kind() == SystemKind::ToralLinear) {
    const auto& a = std::get<ToralLinear>(sys.params()).matrix;
    if (a.dim() != 2) throw std::invalid_argument("rigidity_pair: toral system must be 2x2");
    const auto moduli = eigenvalue_moduli(a);
    if (!(moduli[0] > 1.0 + kUnitTol && moduli[1] < 1.0 - kUnitTol)) {
      throw std::invalid_argument("rigidity_pair: need one expanding and one contracting eigenvalue");
    }
    InvariantPair out = toral_invariants(a);
    out.forward_entropy = std::log(moduli[0]);
    out.inverse_entropy = -std::log(moduli[1]);
    out.provenance = "exact: SRB and inverse SRB of a linear map are Haar";
    return out;
  }
  if (sys.kind() == SystemKind::Tsujii) {
    const auto& t = std::get<Tsujii>(sys.params());
    const TsujiiExact e = tsujii_invariants(t.l, t.lambda);
    InvariantPair out;
    out.forward_entropy = e.forward;
    out.inverse_entropy = e.inverse_exact_ac;
    out.folding_entropy = e.folding;
    out.lyapunov = {std::log(static_cast<double>(t.l)), std::log(t.lambda)};
    out.inverse_bounds = std::make_pair(e.inverse_low, e.inverse_high);
    out.provenance = "exact forward entropy; inverse entropy bounded for almost every parameter";
    return out;
  }
  throw std::invalid_argument("rigidity_pair: unsupported system kind");
}

std::optional<InvariantPair> exact_invariants(const System& sys) {
  switch (sys.kind()) {
    case SystemKind::ToralLinear: return toral_invariants(std::get<ToralLinear>(sys.params()).matrix);
    case SystemKind::ExpandingCircle: {
      const int d = std::get<ExpandingCircle>(sys.params()).degree;
      InvariantPair out = toral_invariants(SquareMatrix{{static_cast<double>(d)}});
      out.provenance = "exact: expanding circle map";
      return out;
    }
    case SystemKind::FullShift: return bernoulli_shift_invariants(std::get<FullShift>(sys.params()).probabilities);
    case SystemKind::Tsujii: {
      InvariantPair out = rigidity_pair(sys);
      out.provenance = "exact: forward and folding entropy; inverse entropy exact in the absolutely continuous case";
      return out;
    }
    case SystemKind::FatBaker: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace iel
