#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iel/numerics.hpp"
#include "iel/systems.hpp"

namespace iel {

/// Closed-form entropy invariants of a system with its reference measure.
struct InvariantPair {
  double forward_entropy = 0.0;
  double inverse_entropy = 0.0;
  double folding_entropy = 0.0;
  std::vector<double> lyapunov;  // descending, with multiplicity
  /// Present when only bounds on the inverse entropy are known; inverse_entropy then holds the
  /// value for the absolutely continuous case.
  std::optional<std::pair<double, double>> inverse_bounds;
  std::string provenance;
};

/// Haar measure on the torus under x -> A x mod 1:
///   inverse = -sum_{|l|<1} log|l|, forward = sum_{|l|>1} log|l|, folding = log|det A|.
/// Rejects non-integer matrices, |det A| < min_abs_det and eigenvalues with ||l| - 1| < 1e-9.
/// min_abs_det = 1 admits hyperbolic automorphisms, where inverse and forward entropy coincide.
InvariantPair toral_invariants(const SquareMatrix& a, long long min_abs_det = 2);

/// One-sided Bernoulli shift: forward = folding = Shannon entropy of p, inverse = 0.
InvariantPair bernoulli_shift_invariants(const std::vector<double>& probabilities);

struct FatBakerExact {
  double inverse_entropy = 0.0;
  double overlap_number = 0.0;
};

/// inverse = |log beta| * delta and overlap = exp(log 2 - inverse).
FatBakerExact fat_baker_inverse_from_dimension(double beta, double delta);

struct TsujiiExact {
  double forward = 0.0;           // log l
  double folding = 0.0;           // log(lambda l)
  double inverse_exact_ac = 0.0;  // |log lambda|, absolutely continuous SRB
  double inverse_low = 0.0;       // |log lambda| / 2
  double inverse_high = 0.0;      // |log lambda|
};

TsujiiExact tsujii_invariants(int l, double lambda);

/// (forward entropy of the SRB measure, inverse entropy of the inverse SRB measure). For
/// hyperbolic 2x2 toral maps both measures are Haar; for Tsujii maps the inverse side is the
/// bound interval.
InvariantPair rigidity_pair(const System& sys);

/// Whatever closed forms exist for the system's reference measure; nullopt for the fat baker,
/// whose inverse entropy depends on the unknown dimension of nu_beta.
std::optional<InvariantPair> exact_invariants(const System& sys);

}  // namespace iel
