#include "iel/prehistory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iel {

namespace {

constexpr double kDedupTol = 1e-9;

void check_query(const BowenQuery& q) {
  if (q.direction != BallDirection::Inverse) throw std::invalid_argument("query direction must be inverse");
  if (q.n < 0 || q.n > q.anchor.depth()) throw std::invalid_argument("query depth exceeds anchor depth");
  if (!(q.epsilon > 0.0)) throw std::invalid_argument("query radius must be positive");
}

Point fat_baker_branch(double beta, const Point& p, bool upper) {
  Point w;
  w.dim = 2;
  if (upper) {
    w.x[0] = std::clamp((p.x[0] - (1.0 - beta)) / beta, -1.0, 1.0);
    w.x[1] = (p.x[1] + 1.0) / 2.0;
  } else {
    w.x[0] = std::clamp((p.x[0] + (1.0 - beta)) / beta, -1.0, 1.0);
    w.x[1] = (p.x[1] - 1.0) / 2.0;
  }
  return w;
}

Point tsujii_branch(const Tsujii& t, const Point& p, int j) {
  Point w;
  w.dim = 2;
  w.x[0] = (p.x[0] + j) / t.l;
  if (w.x[0] >= 1.0) w.x[0] -= 1.0;
  w.x[1] = (p.x[1] - t.f.value(w.x[0])) / t.lambda;
  return w;
}

}  // namespace

bool is_valid_prehistory(const System& sys, const Prehistory& pre, double tol) {
  for (int i = 1; i <= pre.depth(); ++i) {
    if (sys.distance(sys.apply(pre.at(i)), pre.at(i - 1)) >= tol) return false;
  }
  return true;
}

Prehistory sample_prehistory(const System& sys, ReferenceMeasure measure, const Point& x0, int depth,
                             RngStream& rng) {
  sys.check_measure(measure);
  if (depth < 0) throw std::invalid_argument("prehistory depth must be non-negative");
  if (!sys.in_phase_space(x0)) throw std::invalid_argument("x0 is not in the phase space");

  Prehistory pre;
  pre.points.reserve(static_cast<std::size_t>(depth) + 1);
  pre.points.push_back(x0);
  std::vector<Point> candidates;
  std::vector<double> weights;

  for (int i = 0; i < depth; ++i) {
    const Point& y = pre.points.back();
    Point next;
    switch (sys.kind()) {
      case SystemKind::FatBaker: {
        const double beta = std::get<FatBaker>(sys.params()).beta;
        if (i < x0.word_len) {
          next = fat_baker_branch(beta, y, x0.word[static_cast<std::size_t>(i)] == 0);
        } else {
          pre.exact_lift = false;
          sys.preimages(y, candidates);
          next = candidates[rng.below(candidates.size())];
        }
        break;
      }
      case SystemKind::Tsujii: {
        const auto& t = std::get<Tsujii>(sys.params());
        if (i < x0.word_len) {
          next = tsujii_branch(t, y, x0.word[static_cast<std::size_t>(i)]);
        } else {
          pre.exact_lift = false;
          sys.preimages(y, candidates);
          std::vector<Point> inside;
          for (const auto& w : candidates) {
            if (std::abs(w.x[1]) <= sys.fiber_bound() * (1.0 + 1e-9)) inside.push_back(w);
          }
          const auto& pool = inside.empty() ? candidates : inside;
          next = pool[rng.below(pool.size())];
        }
        break;
      }
      default: {
        sys.preimages(y, candidates);
        weights.clear();
        double total = 0.0;
        for (const auto& w : candidates) {
          const auto jac = sys.measure_jacobian(measure, w);
          const double weight = jac ? 1.0 / *jac : 1.0;
          weights.push_back(weight);
          total += weight;
        }
        double u = rng.next_uniform() * total;
        std::size_t pick = candidates.size() - 1;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
          if (u < weights[k]) {
            pick = k;
            break;
          }
          u -= weights[k];
        }
        next = candidates[pick];
        break;
      }
    }
    pre.points.push_back(next);
  }
  return pre;
}

bool is_in_forward_bowen_ball(const System& sys, const Point& x, int n, double eps, const Point& z) {
  Point a = x;
  Point b = z;
  for (int i = 0; i <= n; ++i) {
    if (!(sys.distance(a, b) < eps)) return false;
    if (i < n) {
      a = sys.apply(a);
      b = sys.apply(b);
    }
  }
  return true;
}

std::vector<Point> forward_orbit(const System& sys, const Point& x, int n) {
  std::vector<Point> orbit;
  orbit.reserve(static_cast<std::size_t>(n) + 1);
  orbit.push_back(x);
  for (int i = 0; i < n; ++i) orbit.push_back(sys.apply(orbit.back()));
  return orbit;
}

int deepest_forward_level(const System& sys, std::span<const Point> anchor_orbit, const Point& z, double eps,
                          int max_depth) {
  Point w = z;
  for (int i = 0; i <= max_depth; ++i) {
    if (!(sys.distance(w, anchor_orbit[static_cast<std::size_t>(i)]) < eps)) return i - 1;
    if (i < max_depth) w = sys.apply(w);
  }
  return max_depth;
}

// ---------------------------------------------------------------------------------------------
// InverseBallSearch

InverseBallSearch::InverseBallSearch(const System& sys, const Prehistory& anchor)
    : sys_(&sys), anchor_(&anchor), buffers_(static_cast<std::size_t>(anchor.depth()) + 1) {
  if (sys.kind() == SystemKind::Tsujii) strip_ = sys.fiber_bound();
}

std::vector<Point>& InverseBallSearch::buffer(int level) { return buffers_[static_cast<std::size_t>(level)]; }

bool InverseBallSearch::admissible(const Point& w, int level, double eps) const {
  // Tsujii fibers expand backwards by 1/lambda: drop branches that leave the invariant strip.
  if (strip_ > 0.0 && std::abs(w.x[1]) > strip_ + eps) return false;
  return sys_->distance(w, anchor_->at(level)) < eps;
}

int InverseBallSearch::search_deepest(const Point& z, int level, double eps, int max_depth) {
  if (level == max_depth) return level;
  ++nodes_expanded_;
  auto& kids = buffer(level);
  sys_->preimages(z, kids);
  int best = level;
  for (std::size_t k = 0; k < kids.size(); ++k) {
    if (!admissible(kids[k], level + 1, eps)) continue;
    // Deeper levels write only to their own buffers, so kids[k] stays valid.
    best = std::max(best, search_deepest(kids[k], level + 1, eps, max_depth));
    if (best == max_depth) break;
  }
  return best;
}

int InverseBallSearch::deepest_level(const Point& z, double eps, int max_depth) {
  if (max_depth > anchor_->depth()) throw std::invalid_argument("search depth exceeds anchor depth");
  if (!admissible(z, 0, eps)) return -1;
  return search_deepest(z, 0, eps, max_depth);
}

bool InverseBallSearch::contains(const Point& z, double eps, int n) { return deepest_level(z, eps, n) >= n; }

std::uint64_t InverseBallSearch::search_count(const Point& z, int level, double eps, int n) {
  if (level == n) return 1;
  ++nodes_expanded_;
  std::vector<Point> kept;
  {
    auto& kids = buffer(level);
    sys_->preimages(z, kids);
    for (const auto& w : kids) {
      if (!admissible(w, level + 1, eps)) continue;
      const bool duplicate = std::any_of(kept.begin(), kept.end(),
                                         [&](const Point& u) { return sys_->distance(u, w) < kDedupTol; });
      if (!duplicate) kept.push_back(w);
    }
  }
  std::uint64_t total = 0;
  for (const auto& w : kept) total += search_count(w, level + 1, eps, n);
  return total;
}

std::uint64_t InverseBallSearch::count_branches(const Point& z, double eps, int n) {
  if (n > anchor_->depth()) throw std::invalid_argument("search depth exceeds anchor depth");
  if (!admissible(z, 0, eps)) return 0;
  return search_count(z, 0, eps, n);
}

bool InverseBallSearch::search_branch(const Point& z, int level, double eps, int n, std::vector<Point>& path) {
  path.push_back(z);
  if (level == n) return true;
  ++nodes_expanded_;
  std::vector<Point> kids;
  sys_->preimages(z, kids);
  for (const auto& w : kids) {
    if (admissible(w, level + 1, eps) && search_branch(w, level + 1, eps, n, path)) return true;
  }
  path.pop_back();
  return false;
}

std::optional<std::vector<Point>> InverseBallSearch::find_branch(const Point& z, double eps, int n) {
  if (n > anchor_->depth()) throw std::invalid_argument("search depth exceeds anchor depth");
  if (!admissible(z, 0, eps)) return std::nullopt;
  std::vector<Point> path;
  if (search_branch(z, 0, eps, n, path)) return path;
  return std::nullopt;
}

bool is_in_inverse_bowen_ball(const System& sys, const BowenQuery& q, const Point& z) {
  check_query(q);
  InverseBallSearch search(sys, q.anchor);
  return search.contains(z, q.epsilon, q.n);
}

std::uint64_t count_admissible_branches(const System& sys, const BowenQuery& q, const Point& z) {
  check_query(q);
  InverseBallSearch search(sys, q.anchor);
  return search.count_branches(z, q.epsilon, q.n);
}

}  // namespace iel
