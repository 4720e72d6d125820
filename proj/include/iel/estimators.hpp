#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iel/numerics.hpp"
#include "iel/prehistory.hpp"
#include "iel/systems.hpp"

namespace iel {

struct EstimatorConfig {
  std::vector<double> radii{0.2, 0.1, 0.05};
  std::vector<int> depths{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int anchors = 32;
  std::int64_t samples_per_ball = 200000;
  int burn_in = 10000;
  std::uint64_t seed = 1;
  int min_hits = 10;

  int max_depth() const { return depths.empty() ? 0 : depths.back(); }
  /// Throws std::invalid_argument whose message starts with the offending field name.
  void validate() const;

  friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

struct BallMeasureEstimate {
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  double phat = 0.0;
  double std_error = 0.0;
};

/// Draws N reference points and counts membership in the queried Bowen ball (forward balls
/// are centred on the anchor's x_0). The draws split into fixed chunks with derived streams, so
/// the result does not depend on the worker count.
BallMeasureEstimate estimate_ball_measure(const System& sys, ReferenceMeasure measure, const BowenQuery& q,
                                          std::int64_t samples, const RngStream& rng);

struct CurvePoint {
  int n = 0;
  std::int64_t hits = 0;    // summed over anchors
  std::int64_t trials = 0;  // summed over anchors
  /// Mean of -log phat over anchors that retained this depth; empty if none did.
  std::optional<double> neg_log_phat;
  int anchors_retained = 0;
};

struct RadiusResult {
  double eps = 0.0;
  /// Anchor-averaged decay slope; empty when every anchor dropped this radius.
  std::optional<SlopeEstimate> fit;
  /// Fraction of (anchor, depth) balls with at least min_hits hits.
  double retention = 0.0;
  int anchors_used = 0;
  std::vector<CurvePoint> curve;
};

struct EntropyReport {
  std::vector<RadiusResult> per_radius;
  double extrapolated = 0.0;
  double std_error = 0.0;
  std::optional<double> eps_used;
  int anchors_used = 0;
  int balls_skipped = 0;
  bool failed = false;
  std::vector<std::string> notes;
};

/// Inverse metric entropy from the decay of Monte-Carlo estimates of mu(B^-_n(x^, eps)).
EntropyReport estimate_inverse_entropy(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg);

/// Forward (Brin-Katok) entropy from the decay of mu(B_n(x, eps)). Uses multilevel splitting
/// when the reference measure has a reversible proposal kernel, plain Monte Carlo otherwise.
EntropyReport estimate_forward_entropy(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg);

/// Folding entropy as the Birkhoff average of log J over reference orbits. Throws
/// std::domain_error when the measure Jacobian has no closed form.
EntropyReport estimate_folding_entropy(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg);

/// Lyapunov exponents (descending) from QR-reorthogonalised products of differentials.
/// Throws std::domain_error for non-smooth systems.
std::vector<double> estimate_lyapunov_spectrum(const System& sys, const EstimatorConfig& cfg);

struct DimensionEstimate {
  SlopeEstimate fit;  // fit.slope is the dimension estimate
  int centers = 0;
  std::int64_t samples = 0;
  bool ladder_truncated = false;
  std::vector<std::string> notes;
};

/// Pointwise dimension of the Bernoulli convolution nu_beta from an empirical sample, as the
/// slope of log nu(B(x, r)) against log r over a dyadic radius ladder, averaged over centers.
DimensionEstimate estimate_pointwise_dimension(double beta, const EstimatorConfig& cfg);

/// True when 1/beta is one of the Pisot numbers this library knows (multinacci numbers and the
/// plastic number), for which nu_beta is singular.
bool is_known_pisot_reciprocal(double beta);

struct QuantityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::string provenance;  // "exact" or "estimated"
};

struct InvariantReport {
  QuantityEstimate forward;
  QuantityEstimate inverse;
  QuantityEstimate folding;
  std::vector<double> lyapunov;
  double residual = 0.0;  // forward - (inverse + folding)
  double combined_std_error = 0.0;
  double tolerance = 0.0;  // 2 * combined_std_error + 0.05
  bool pass = false;
  /// inverse <= forward - folding + tolerance.
  bool chain_holds = false;
  /// inverse <= -(sum of negative exponents) + tolerance; empty for non-smooth systems.
  std::optional<bool> lyapunov_bound_holds;
  EntropyReport forward_report;
  EntropyReport inverse_report;
  std::optional<EntropyReport> folding_report;
  std::vector<std::string> notes;
};

/// Runs the forward, inverse and folding estimators and checks h = h^- + F.
InvariantReport check_entropy_identity(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg);

struct FatBakerReport {
  double beta = 0.0;
  DimensionEstimate dimension;
  double from_dimension = 0.0;  // |log beta| * delta
  double from_dimension_std_error = 0.0;
  EntropyReport direct;  // decay of nu(B(x, beta^n eps)) * eps
  double gap = 0.0;
  double agreement_tolerance = 0.0;  // 2 * combined std error + 0.03
  bool agree = false;
  double inverse_entropy = 0.0;  // the direct estimate
  double overlap_number = 0.0;   // exp(log 2 - h^-), h^- clamped to [0, log 2]
  std::vector<std::string> notes;
};

/// Two independent estimates of the fat baker inverse entropy of the SRB measure. Accepts
/// 1/2 <= beta < 1 (beta = 1/2 is the uniform boundary case).
FatBakerReport estimate_fat_baker_inverse_entropy(double beta, const EstimatorConfig& cfg);

}  // namespace iel
