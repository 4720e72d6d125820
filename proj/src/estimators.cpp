#include "iel/estimators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "iel/exact.hpp"
#include "iel/parallel.hpp"

namespace iel {

namespace {

// Root stream ids, one per estimator, so that tasks never share random numbers.
enum StreamPurpose : std::uint64_t {
  kInverseStream = 1,
  kForwardStream = 2,
  kFoldingStream = 3,
  kLyapunovStream = 4,
  kDimensionStream = 5,
  kFatBakerStream = 6,
};

constexpr std::int64_t kChunk = 8192;
constexpr int kSegment = 32;  // orbit steps between fresh reference draws
constexpr int kSweeps = 4;    // Metropolis sweeps per splitting level
constexpr int kMaxBatches = 16;  // clone batches per splitting level
constexpr int kLadderFirst = 4;
constexpr int kLadderLast = 24;

struct BallStat {
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  double phat = 0.0;
};

// stats[anchor][radius][depth index]
using BallTable = std::vector<std::vector<std::vector<BallStat>>>;

std::size_t chunk_count(std::int64_t samples) { return static_cast<std::size_t>((samples + kChunk - 1) / kChunk); }

void check_radii(const System& sys, const EstimatorConfig& cfg) {
  for (double eps : cfg.radii) {
    if (!(eps < 0.5 * sys.diameter())) {
      throw std::invalid_argument("radii: every radius must be below half the phase-space diameter (" +
                                  std::to_string(0.5 * sys.diameter()) + ")");
    }
  }
}

struct AnchorPoint {
  Point x0;
  Prehistory pre;
};

std::vector<AnchorPoint> draw_anchors(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg,
                                      const RngStream& root, int depth) {
  std::vector<AnchorPoint> anchors(static_cast<std::size_t>(cfg.anchors));
  parallel_for(anchors.size(), [&](std::size_t k) {
    RngStream rng = root.split(k).split(0);
    anchors[k].x0 = sys.sample_reference(measure, rng, cfg.burn_in);
    anchors[k].pre = sample_prehistory(sys, measure, anchors[k].x0, depth, rng);
  });
  return anchors;
}

EntropyReport aggregate(const EstimatorConfig& cfg, const BallTable& table) {
  EntropyReport report;
  const std::size_t nr = cfg.radii.size();
  const std::size_t nd = cfg.depths.size();
  const std::size_t na = table.size();

  for (std::size_t r = 0; r < nr; ++r) {
    RadiusResult rr;
    rr.eps = cfg.radii[r];
    rr.curve.resize(nd);
    std::vector<double> slopes;
    std::vector<double> intercepts;
    std::vector<double> rms;
    std::vector<double> anchor_errors;
    std::vector<double> neg_log_sum(nd, 0.0);
    int retained_pairs = 0;
    int total_points = 0;

    for (std::size_t a = 0; a < na; ++a) {
      std::vector<SlopePoint> pts;
      int skipped = 0;
      for (std::size_t d = 0; d < nd; ++d) {
        const BallStat& s = table[a][r][d];
        CurvePoint& cp = rr.curve[d];
        cp.n = cfg.depths[d];
        cp.hits += s.hits;
        cp.trials += s.trials;
        if (s.hits >= cfg.min_hits && s.phat > 0.0) {
          const double y = -std::log(s.phat);
          pts.push_back({cfg.depths[d], y});
          neg_log_sum[d] += y;
          ++cp.anchors_retained;
          ++retained_pairs;
        } else {
          ++skipped;
        }
      }
      report.balls_skipped += skipped;
      if (2 * skipped > static_cast<int>(nd) || pts.size() < 2) continue;
      const SlopeEstimate fit = fit_slope(pts);
      slopes.push_back(fit.slope);
      intercepts.push_back(fit.intercept);
      rms.push_back(fit.residual_rms);
      anchor_errors.push_back(fit.std_error);
      total_points += fit.num_points;
    }

    for (std::size_t d = 0; d < nd; ++d) {
      if (rr.curve[d].anchors_retained > 0) rr.curve[d].neg_log_phat = neg_log_sum[d] / rr.curve[d].anchors_retained;
    }
    rr.retention = na * nd == 0 ? 0.0 : static_cast<double>(retained_pairs) / static_cast<double>(na * nd);
    rr.anchors_used = static_cast<int>(slopes.size());
    if (!slopes.empty()) {
      SlopeEstimate fit;
      const MeanEstimate m = mean_and_stderr(slopes);
      fit.slope = m.mean;
      fit.std_error = slopes.size() > 1 ? m.std_error : anchor_errors.front();
      fit.intercept = mean_and_stderr(intercepts).mean;
      fit.residual_rms = mean_and_stderr(rms).mean;
      fit.num_points = total_points;
      rr.fit = fit;
    }
    report.per_radius.push_back(std::move(rr));
  }

  // Smallest radius with at least 80% retained balls; else the best-retained radius with a fit.
  const RadiusResult* chosen = nullptr;
  for (const auto& rr : report.per_radius) {
    if (rr.fit && rr.retention >= 0.8) chosen = &rr;
  }
  if (chosen == nullptr) {
    for (const auto& rr : report.per_radius) {
      if (rr.fit && (chosen == nullptr || rr.retention > chosen->retention)) chosen = &rr;
    }
    if (chosen != nullptr) {
      report.notes.push_back("no radius retained 80% of balls; using eps = " + std::to_string(chosen->eps) +
                             " with retention " + std::to_string(chosen->retention));
    }
  }
  if (chosen == nullptr) {
    report.failed = true;
    report.notes.push_back("insufficient resolution: every radius was dropped");
  } else {
    report.extrapolated = chosen->fit->slope;
    report.std_error = chosen->fit->std_error;
    report.eps_used = chosen->eps;
    report.anchors_used = chosen->anchors_used;
  }
  report.notes.push_back("finite-n regression slope; lower and upper limits are not distinguished");
  return report;
}

bool is_lower_triangular(const SquareMatrix& m) {
  for (int r = 0; r < m.dim(); ++r) {
    for (int c = r + 1; c < m.dim(); ++c) {
      if (m(r, c) != 0.0) return false;
    }
  }
  return true;
}

// Plain Monte-Carlo forward-ball statistics for one anchor: deepest level per sample, shared
// across radii and depths.
std::vector<std::vector<BallStat>> forward_plain(const System& sys, ReferenceMeasure measure,
                                                 const EstimatorConfig& cfg, const std::vector<Point>& orbit,
                                                 const RngStream& anchor_rng) {
  const int max_depth = cfg.max_depth();
  const std::size_t nr = cfg.radii.size();
  const std::size_t chunks = chunk_count(cfg.samples_per_ball);
  std::vector<std::vector<std::int64_t>> hist(nr, std::vector<std::int64_t>(static_cast<std::size_t>(max_depth) + 2, 0));
  for (std::size_t c = 0; c < chunks; ++c) {
    RngStream rng = anchor_rng.split(c + 1);
    const std::int64_t count = std::min<std::int64_t>(kChunk, cfg.samples_per_ball - static_cast<std::int64_t>(c) * kChunk);
    for (std::int64_t s = 0; s < count; ++s) {
      const Point z = sys.sample_reference(measure, rng, cfg.burn_in);
      for (std::size_t r = 0; r < nr; ++r) {
        const int level = deepest_forward_level(sys, orbit, z, cfg.radii[r], max_depth);
        ++hist[r][static_cast<std::size_t>(level + 1)];
        if (level < 0) break;  // radii descend, so smaller balls miss too
      }
    }
  }
  std::vector<std::vector<BallStat>> out(nr, std::vector<BallStat>(cfg.depths.size()));
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t d = 0; d < cfg.depths.size(); ++d) {
      std::int64_t hits = 0;
      for (int lv = cfg.depths[d]; lv <= max_depth; ++lv) hits += hist[r][static_cast<std::size_t>(lv + 1)];
      out[r][d] = {hits, cfg.samples_per_ball, static_cast<double>(hits) / static_cast<double>(cfg.samples_per_ball)};
    }
  }
  return out;
}

// Multilevel splitting for mu(B_n(x, eps)): the population at level i is (approximately) mu
// restricted to B_i; each level's survival ratio multiplies into the estimate.
std::vector<BallStat> forward_splitting(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg,
                                        const std::vector<Point>& orbit, double eps, const RngStream& rng_base) {
  const int max_depth = cfg.max_depth();
  const std::size_t pop = static_cast<std::size_t>(std::clamp<std::int64_t>(cfg.samples_per_ball / 50, 200, 20000));
  std::vector<BallStat> by_level(static_cast<std::size_t>(max_depth) + 1);

  // Level 0 by plain sampling.
  std::vector<Point> particles;
  std::int64_t inside = 0;
  const std::size_t chunks = chunk_count(cfg.samples_per_ball);
  for (std::size_t c = 0; c < chunks; ++c) {
    RngStream rng = rng_base.split(0).split(c);
    const std::int64_t count = std::min<std::int64_t>(kChunk, cfg.samples_per_ball - static_cast<std::int64_t>(c) * kChunk);
    for (std::int64_t s = 0; s < count; ++s) {
      const Point z = sys.sample_reference(measure, rng, cfg.burn_in);
      if (sys.distance(z, orbit[0]) < eps) {
        ++inside;
        if (particles.size() < pop) particles.push_back(z);
      }
    }
  }
  double phat = static_cast<double>(inside) / static_cast<double>(cfg.samples_per_ball);
  by_level[0] = {inside, cfg.samples_per_ball, phat};
  if (inside == 0) return by_level;

  auto in_ball = [&](const Point& z, int level) {
    Point w = z;
    for (int i = 0; i <= level; ++i) {
      if (!(sys.distance(w, orbit[static_cast<std::size_t>(i)]) < eps)) return false;
      if (i < level) w = sys.apply(w);
    }
    return true;
  };

  // Each level draws batches of moved clones until it has `target` survivors or runs out of
  // batches, so steep decay per level still leaves enough hits to fit.
  const std::int64_t target = std::max<std::int64_t>(50, 5 * cfg.min_hits);
  double scale = 0.5 * eps;
  for (int level = 1; level <= max_depth; ++level) {
    const std::vector<Point> seeds = std::move(particles);
    particles.clear();
    std::int64_t survivors = 0;
    std::int64_t trials = 0;
    const int prev = level - 1;
    for (int b = 0; b < kMaxBatches && survivors < target; ++b) {
      // Resample to the full population, then decorrelate with indicator-acceptance moves.
      std::vector<Point> next(pop);
      for (std::size_t j = 0; j < pop; ++j) next[j] = seeds[(static_cast<std::size_t>(b) * pop + j) % seeds.size()];
      const RngStream batch_rng = rng_base.split(static_cast<std::uint64_t>(level)).split(static_cast<std::uint64_t>(b));
      for (int t = 0; t < kSweeps; ++t) {
        std::vector<unsigned char> accepted(pop, 0);
        parallel_for(pop, [&](std::size_t j) {
          RngStream rng = batch_rng.split(static_cast<std::uint64_t>(t)).split(j);
          const Point cand = sys.propose(measure, next[j], scale, rng);
          if (in_ball(cand, prev)) {
            next[j] = cand;
            accepted[j] = 1;
          }
        });
        std::size_t acc = 0;
        for (unsigned char a : accepted) acc += a;
        const double rate = static_cast<double>(acc) / static_cast<double>(pop);
        if (rate < 0.2) {
          scale *= 0.5;
        } else if (rate > 0.4) {
          scale = std::min(scale * 1.5, 0.5 * eps);
        }
      }

      // Advance to f^level and count survivors.
      std::vector<unsigned char> alive(pop, 0);
      parallel_for(pop, [&](std::size_t j) {
        Point w = next[j];
        for (int i = 0; i < level; ++i) w = sys.apply(w);
        alive[j] = sys.distance(w, orbit[static_cast<std::size_t>(level)]) < eps ? 1 : 0;
      });
      for (std::size_t j = 0; j < pop; ++j) {
        if (!alive[j]) continue;
        ++survivors;
        if (particles.size() < pop) particles.push_back(next[j]);
      }
      trials += static_cast<std::int64_t>(pop);
    }
    phat *= static_cast<double>(survivors) / static_cast<double>(trials);
    by_level[static_cast<std::size_t>(level)] = {survivors, trials, phat};
    if (survivors == 0) break;
  }
  return by_level;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (radii.empty()) throw std::invalid_argument("radii: must not be empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) throw std::invalid_argument("radii: values must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw std::invalid_argument("radii: must be strictly descending");
  }
  if (depths.size() < 2) throw std::invalid_argument("depths: need at least two depths");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < 0) throw std::invalid_argument("depths: values must be non-negative");
    if (i > 0 && depths[i] <= depths[i - 1]) throw std::invalid_argument("depths: must be strictly increasing");
  }
  if (depths.back() > kMaxWord - 8) throw std::invalid_argument("depths: largest depth must be at most 56");
  if (anchors < 1) throw std::invalid_argument("anchors: must be at least 1");
  if (samples_per_ball < 1) throw std::invalid_argument("samples_per_ball: must be at least 1");
  if (burn_in < 0) throw std::invalid_argument("burn_in: must be non-negative");
  if (min_hits < 5) throw std::invalid_argument("min_hits: must be at least 5");
}

BallMeasureEstimate estimate_ball_measure(const System& sys, ReferenceMeasure measure, const BowenQuery& q,
                                          std::int64_t samples, const RngStream& rng) {
  sys.check_measure(measure);
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  if (q.n < 0 || (q.direction == BallDirection::Inverse && q.n > q.anchor.depth())) {
    throw std::invalid_argument("query depth exceeds anchor depth");
  }
  if (!(q.epsilon > 0.0)) throw std::invalid_argument("query radius must be positive");

  const std::size_t chunks = chunk_count(samples);
  std::vector<std::int64_t> hits(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    RngStream local = rng.split(c);
    const std::int64_t count = std::min<std::int64_t>(kChunk, samples - static_cast<std::int64_t>(c) * kChunk);
    if (q.direction == BallDirection::Inverse) {
      InverseBallSearch search(sys, q.anchor);
      for (std::int64_t s = 0; s < count; ++s) {
        if (search.contains(sys.sample_reference(measure, local), q.epsilon, q.n)) ++hits[c];
      }
    } else {
      for (std::int64_t s = 0; s < count; ++s) {
        if (is_in_forward_bowen_ball(sys, q.anchor.at(0), q.n, q.epsilon, sys.sample_reference(measure, local))) {
          ++hits[c];
        }
      }
    }
  });

  BallMeasureEstimate out;
  out.trials = samples;
  for (auto h : hits) out.hits += h;
  out.phat = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.phat * (1.0 - out.phat) / static_cast<double>(samples));
  return out;
}

EntropyReport estimate_inverse_entropy(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg) {
  cfg.validate();
  sys.check_measure(measure);
  check_radii(sys, cfg);
  const RngStream root(cfg.seed, kInverseStream);
  const int max_depth = cfg.max_depth();
  const auto anchors = draw_anchors(sys, measure, cfg, root, max_depth);

  const std::size_t nr = cfg.radii.size();
  const std::size_t chunks = chunk_count(cfg.samples_per_ball);
  const std::size_t levels = static_cast<std::size_t>(max_depth) + 2;
  // hist[slot][r][deepest + 1], slot = anchor * chunks + chunk
  std::vector<std::vector<std::int64_t>> hist(anchors.size() * chunks, std::vector<std::int64_t>(nr * levels, 0));
  parallel_for(hist.size(), [&](std::size_t slot) {
    const std::size_t a = slot / chunks;
    const std::size_t c = slot % chunks;
    RngStream rng = root.split(a).split(c + 1);
    InverseBallSearch search(sys, anchors[a].pre);
    const std::int64_t count = std::min<std::int64_t>(kChunk, cfg.samples_per_ball - static_cast<std::int64_t>(c) * kChunk);
    auto& h = hist[slot];
    for (std::int64_t s = 0; s < count; ++s) {
      const Point z = sys.sample_reference(measure, rng, cfg.burn_in);
      for (std::size_t r = 0; r < nr; ++r) {
        const int level = search.deepest_level(z, cfg.radii[r], max_depth);
        ++h[r * levels + static_cast<std::size_t>(level + 1)];
        if (level < 0) break;
      }
    }
  });

  BallTable table(anchors.size(), std::vector<std::vector<BallStat>>(nr, std::vector<BallStat>(cfg.depths.size())));
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    for (std::size_t r = 0; r < nr; ++r) {
      std::vector<std::int64_t> counts(levels, 0);
      for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t lv = 0; lv < levels; ++lv) counts[lv] += hist[a * chunks + c][r * levels + lv];
      }
      for (std::size_t d = 0; d < cfg.depths.size(); ++d) {
        std::int64_t hits = 0;
        for (int lv = cfg.depths[d]; lv <= max_depth; ++lv) hits += counts[static_cast<std::size_t>(lv + 1)];
        table[a][r][d] = {hits, cfg.samples_per_ball,
                          static_cast<double>(hits) / static_cast<double>(cfg.samples_per_ball)};
      }
    }
  }

  EntropyReport report = aggregate(cfg, table);
  const bool approximate =
      std::any_of(anchors.begin(), anchors.end(), [](const AnchorPoint& a) { return !a.pre.exact_lift; });
  if (approximate) report.notes.push_back("some anchor prehistories used approximate backward conditionals");
  if (sys.kind() == SystemKind::Tsujii) {
    report.notes.push_back("compare against the interval [|log lambda|/2, |log lambda|], not a point value");
  }
  return report;
}

EntropyReport estimate_forward_entropy(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg) {
  cfg.validate();
  sys.check_measure(measure);
  check_radii(sys, cfg);
  const RngStream root(cfg.seed, kForwardStream);
  const int max_depth = cfg.max_depth();
  const std::size_t nr = cfg.radii.size();
  const bool splitting = sys.has_reversible_kernel(measure);

  std::vector<std::vector<Point>> orbits(static_cast<std::size_t>(cfg.anchors));
  for (std::size_t a = 0; a < orbits.size(); ++a) {
    RngStream rng = root.split(a).split(0);
    orbits[a] = forward_orbit(sys, sys.sample_reference(measure, rng, cfg.burn_in), max_depth);
  }

  BallTable table(orbits.size(), std::vector<std::vector<BallStat>>(nr, std::vector<BallStat>(cfg.depths.size())));
  if (splitting) {
    for (std::size_t a = 0; a < orbits.size(); ++a) {
      for (std::size_t r = 0; r < nr; ++r) {
        const auto by_level = forward_splitting(sys, measure, cfg, orbits[a], cfg.radii[r], root.split(a).split(r + 1));
        for (std::size_t d = 0; d < cfg.depths.size(); ++d) table[a][r][d] = by_level[static_cast<std::size_t>(cfg.depths[d])];
      }
    }
  } else {
    parallel_for(orbits.size(), [&](std::size_t a) {
      table[a] = forward_plain(sys, measure, cfg, orbits[a], root.split(a));
    });
  }

  EntropyReport report = aggregate(cfg, table);
  report.notes.push_back(splitting ? "ball measures by multilevel splitting (population " +
                                         std::to_string(std::clamp<std::int64_t>(cfg.samples_per_ball / 50, 200, 20000)) +
                                         ", " + std::to_string(kSweeps) + " Metropolis sweeps per level)"
                                   : "ball measures by plain Monte Carlo");
  return report;
}

EntropyReport estimate_folding_entropy(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg) {
  cfg.validate();
  sys.check_measure(measure);
  {
    RngStream probe(cfg.seed, kFoldingStream);
    if (!sys.measure_jacobian(measure, sys.sample_reference(measure, probe, 0))) {
      throw std::domain_error("folding estimator requires closed-form measure Jacobian");
    }
  }
  const RngStream root(cfg.seed, kFoldingStream);
  const std::int64_t steps = static_cast<std::int64_t>(std::max(1, cfg.max_depth())) * 1000;

  std::vector<double> means(static_cast<std::size_t>(cfg.anchors), 0.0);
  parallel_for(means.size(), [&](std::size_t a) {
    RngStream rng = root.split(a);
    double sum = 0.0;
    Point x;
    for (std::int64_t t = 0; t < steps; ++t) {
      // Fresh reference draws every few steps: long double-precision orbits of expanding maps
      // collapse onto periodic points.
      if (t % kSegment == 0) x = sys.sample_reference(measure, rng, cfg.burn_in);
      sum += std::log(*sys.measure_jacobian(measure, x));
      x = sys.apply(x);
    }
    means[a] = sum / static_cast<double>(steps);
  });

  const MeanEstimate m = mean_and_stderr(means);
  EntropyReport report;
  report.extrapolated = m.mean;
  report.std_error = m.std_error;
  report.anchors_used = cfg.anchors;
  report.notes.push_back("Birkhoff average of log J over " + std::to_string(cfg.anchors) + " orbits of " +
                         std::to_string(steps) + " steps");
  return report;
}

std::vector<double> estimate_lyapunov_spectrum(const System& sys, const EstimatorConfig& cfg) {
  cfg.validate();
  if (!sys.is_smooth()) throw std::domain_error("not a smooth system");
  const ReferenceMeasure measure = sys.default_measure();
  const RngStream root(cfg.seed, kLyapunovStream);
  const std::int64_t steps = static_cast<std::int64_t>(std::max(1, cfg.max_depth())) * 1000;
  const std::int64_t warm_up = std::min(cfg.burn_in, 1000);
  const int d = sys.dimension();

  std::vector<std::vector<double>> per_anchor(static_cast<std::size_t>(cfg.anchors), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  parallel_for(per_anchor.size(), [&](std::size_t a) {
    RngStream rng = root.split(a);
    Point x = sys.sample_reference(measure, rng, cfg.burn_in);
    // A lower-triangular cocycle keeps the reversed standard flag invariant; starting there makes
    // the diagonal of R the diagonal of the cocycle.
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d);
    if (is_lower_triangular(sys.differential(x))) q = q.rowwise().reverse().eval();
    std::vector<double>& sums = per_anchor[a];
    for (std::int64_t t = 0; t < warm_up + steps; ++t) {
      if (t > 0 && t % kSegment == 0) x = sys.sample_reference(measure, rng, cfg.burn_in);
      const SquareMatrix df = sys.differential(x);
      Eigen::MatrixXd m(d, d);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) m(r, c) = df(r, c);
      }
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(m * q);
      const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
      q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
      for (int i = 0; i < d; ++i) {
        if (rmat(i, i) < 0.0) q.col(i) *= -1.0;
        if (t >= warm_up) sums[static_cast<std::size_t>(i)] += std::log(std::abs(rmat(i, i)));
      }
      x = sys.apply(x);
    }
    for (double& s : sums) s /= static_cast<double>(steps);
  });

  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  for (const auto& v : per_anchor) {
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
  }
  for (double& v : out) v /= static_cast<double>(cfg.anchors);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

bool is_known_pisot_reciprocal(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) return false;
  const double theta = 1.0 / beta;
  auto root = [](auto poly) {
    double lo = 1.0;
    double hi = 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (poly(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  // Multinacci: x^k = x^{k-1} + ... + 1.
  for (int k = 2; k <= 8; ++k) {
    const double r = root([k](double x) {
      double rhs = 0.0;
      double p = 1.0;
      for (int i = 0; i < k; ++i) {
        rhs += p;
        p *= x;
      }
      return p - rhs;
    });
    if (std::abs(theta - r) < 1e-9) return true;
  }
  const double plastic = root([](double x) { return x * x * x - x - 1.0; });
  return std::abs(theta - plastic) < 1e-9;
}

namespace {

std::vector<double> sorted_convolution_samples(double beta, std::int64_t count, const RngStream& root) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  const std::size_t chunks = chunk_count(count);
  parallel_for(chunks, [&](std::size_t c) {
    RngStream rng = root.split(c);
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(count, begin + kChunk);
    for (std::int64_t i = begin; i < end; ++i) xs[static_cast<std::size_t>(i)] = sample_bernoulli_convolution(beta, rng);
  });
  std::sort(xs.begin(), xs.end());
  return xs;
}

std::int64_t count_within(const std::vector<double>& sorted, double c, double r) {
  const auto lo = std::upper_bound(sorted.begin(), sorted.end(), c - r);
  const auto hi = std::lower_bound(sorted.begin(), sorted.end(), c + r);
  return hi > lo ? static_cast<std::int64_t>(hi - lo) : 0;
}

std::vector<double> convolution_centers(double beta, int count, const RngStream& rng_base) {
  std::vector<double> centers(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < centers.size(); ++k) {
    RngStream rng = rng_base.split(k);
    centers[k] = sample_bernoulli_convolution(beta, rng);
  }
  return centers;
}

void check_beta(double beta) {
  if (!(beta >= 0.5 && beta < 1.0)) throw std::invalid_argument("beta: must lie in [1/2, 1)");
}

}  // namespace

DimensionEstimate estimate_pointwise_dimension(double beta, const EstimatorConfig& cfg) {
  check_beta(beta);
  cfg.validate();
  const RngStream root(cfg.seed, kDimensionStream);
  const std::int64_t total = cfg.samples_per_ball * 10;
  const auto xs = sorted_convolution_samples(beta, total, root.split(0));
  const auto centers = convolution_centers(beta, cfg.anchors, root.split(1));

  DimensionEstimate out;
  out.samples = total;
  std::vector<double> dims;
  std::vector<double> intercepts;
  std::vector<double> rms;
  std::vector<double> errors;
  int points = 0;
  for (double c : centers) {
    std::vector<SlopePoint> pts;
    for (int j = kLadderFirst; j <= kLadderLast; ++j) {
      const std::int64_t n = count_within(xs, c, std::ldexp(1.0, -j));
      if (n < cfg.min_hits) {
        out.ladder_truncated = true;
        break;
      }
      pts.push_back({j, std::log(static_cast<double>(n) / static_cast<double>(total))});
    }
    if (pts.size() < 2) continue;
    const SlopeEstimate fit = fit_slope(pts);
    dims.push_back(-fit.slope / std::numbers::ln2);
    intercepts.push_back(fit.intercept);
    rms.push_back(fit.residual_rms);
    errors.push_back(fit.std_error / std::numbers::ln2);
    points += fit.num_points;
  }
  if (dims.empty()) throw std::runtime_error("insufficient resolution: no center has two usable radii");

  const MeanEstimate m = mean_and_stderr(dims);
  out.fit.slope = m.mean;
  out.fit.std_error = dims.size() > 1 ? m.std_error : errors.front();
  out.fit.intercept = mean_and_stderr(intercepts).mean;
  out.fit.residual_rms = mean_and_stderr(rms).mean;
  out.fit.num_points = points;
  out.centers = static_cast<int>(dims.size());
  if (out.ladder_truncated) {
    out.notes.push_back("radius ladder truncated where balls held fewer than " + std::to_string(cfg.min_hits) +
                        " samples");
  }
  if (is_known_pisot_reciprocal(beta)) {
    out.notes.push_back("1/beta is a Pisot number: nu_beta is singular and its dimension is below 1");
  }
  return out;
}

InvariantReport check_entropy_identity(const System& sys, ReferenceMeasure measure, const EstimatorConfig& cfg) {
  cfg.validate();
  sys.check_measure(measure);
  InvariantReport out;

  out.forward_report = estimate_forward_entropy(sys, measure, cfg);
  out.inverse_report = estimate_inverse_entropy(sys, measure, cfg);
  out.forward = {out.forward_report.extrapolated, out.forward_report.std_error, "estimated"};
  out.inverse = {out.inverse_report.extrapolated, out.inverse_report.std_error, "estimated"};

  RngStream probe(cfg.seed, kFoldingStream);
  if (sys.measure_jacobian(measure, sys.sample_reference(measure, probe, 0))) {
    out.folding_report = estimate_folding_entropy(sys, measure, cfg);
    out.folding = {out.folding_report->extrapolated, out.folding_report->std_error, "estimated"};
  } else if (sys.kind() == SystemKind::Tsujii) {
    const auto& t = std::get<Tsujii>(sys.params());
    out.folding = {tsujii_invariants(t.l, t.lambda).folding, 0.0, "exact"};
  } else {
    throw std::domain_error("folding entropy is neither estimable nor known in closed form for this system");
  }

  if (sys.is_smooth()) out.lyapunov = estimate_lyapunov_spectrum(sys, cfg);

  out.residual = out.forward.value - (out.inverse.value + out.folding.value);
  out.combined_std_error = std::sqrt(out.forward.std_error * out.forward.std_error +
                                     out.inverse.std_error * out.inverse.std_error +
                                     out.folding.std_error * out.folding.std_error);
  out.tolerance = 2.0 * out.combined_std_error + 0.05;
  out.pass = !out.forward_report.failed && !out.inverse_report.failed && std::abs(out.residual) <= out.tolerance;
  out.chain_holds = out.inverse.value <= out.forward.value - out.folding.value + out.tolerance;
  if (!out.lyapunov.empty()) {
    double negative = 0.0;
    for (double e : out.lyapunov) {
      if (e < 0.0) negative -= e;
    }
    out.lyapunov_bound_holds = out.inverse.value <= negative + out.tolerance;
  }
  if (out.forward_report.failed) out.notes.push_back("forward estimator failed");
  if (out.inverse_report.failed) out.notes.push_back("inverse estimator failed");
  return out;
}

FatBakerReport estimate_fat_baker_inverse_entropy(double beta, const EstimatorConfig& cfg) {
  check_beta(beta);
  cfg.validate();
  FatBakerReport out;
  out.beta = beta;
  out.dimension = estimate_pointwise_dimension(beta, cfg);
  const double log_beta = std::abs(std::log(beta));
  out.from_dimension = log_beta * out.dimension.fit.slope;
  out.from_dimension_std_error = log_beta * out.dimension.fit.std_error;

  // Direct route: SRB balls are products, so mu(B^-_n) = nu_beta(B(x, beta^n eps)) * eps.
  const RngStream root(cfg.seed, kFatBakerStream);
  const std::int64_t total = cfg.samples_per_ball * 10;
  const auto xs = sorted_convolution_samples(beta, total, root.split(0));
  const auto centers = convolution_centers(beta, cfg.anchors, root.split(1));
  BallTable table(centers.size(),
                  std::vector<std::vector<BallStat>>(cfg.radii.size(), std::vector<BallStat>(cfg.depths.size())));
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t r = 0; r < cfg.radii.size(); ++r) {
      const double eps = cfg.radii[r];
      for (std::size_t d = 0; d < cfg.depths.size(); ++d) {
        const std::int64_t hits = count_within(xs, centers[a], std::pow(beta, cfg.depths[d]) * eps);
        table[a][r][d] = {hits, total, static_cast<double>(hits) / static_cast<double>(total) * eps};
      }
    }
  }
  out.direct = aggregate(cfg, table);

  out.inverse_entropy = out.direct.extrapolated;
  out.gap = out.direct.extrapolated - out.from_dimension;
  out.agreement_tolerance =
      2.0 * std::sqrt(out.direct.std_error * out.direct.std_error +
                      out.from_dimension_std_error * out.from_dimension_std_error) +
      0.03;
  out.agree = !out.direct.failed && std::abs(out.gap) <= out.agreement_tolerance;
  const double clamped = std::clamp(out.inverse_entropy, 0.0, std::numbers::ln2);
  if (clamped != out.inverse_entropy) out.notes.push_back("inverse entropy clamped to [0, log 2] for the overlap number");
  out.overlap_number = std::exp(std::numbers::ln2 - clamped);
  for (const auto& n : out.dimension.notes) out.notes.push_back(n);
  out.notes.push_back("the singular versus absolutely continuous question for nu_beta is not decided numerically");
  return out;
}

}  // namespace iel
