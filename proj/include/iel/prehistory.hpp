#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iel/systems.hpp"

namespace iel {

/// Finite backward trajectory (x_0, x_{-1}, ..., x_{-n}) with f(x_{-i}) = x_{-i+1}.
struct Prehistory {
  std::vector<Point> points;  // points[i] is x_{-i}
  /// False when some backward step used an approximate branch law instead of the exact
  /// conditional measure of the lifted reference measure.
  bool exact_lift = true;

  int depth() const { return static_cast<int>(points.size()) - 1; }
  const Point& at(int i) const { return points[static_cast<std::size_t>(i)]; }
};

/// Checks f(x_{-i}) = x_{-i+1} within `tol` for every step.
bool is_valid_prehistory(const System& sys, const Prehistory& pre, double tol = 1e-10);

/// Samples a backward trajectory of the given depth ending at x0.
///
/// Branch laws: weights proportional to 1/J at each preimage where the measure Jacobian has a
/// closed form (Haar, Bernoulli). For SRB samples that carry a latent branch code (see
/// System::sample_reference) the code is followed, which samples the lift exactly; past the end
/// of the code, or for points without one, the fat baker uses a fair coin over admissible
/// branches and Tsujii a uniform choice over base preimages that stay in the invariant strip.
/// Those steps clear `exact_lift`.
Prehistory sample_prehistory(const System& sys, ReferenceMeasure measure, const Point& x0, int depth,
                             RngStream& rng);

enum class BallDirection { Forward, Inverse };

struct BowenQuery {
  Prehistory anchor;
  int n = 0;
  double epsilon = 0.1;
  BallDirection direction = BallDirection::Inverse;
};

/// d(f^i z, f^i x) < eps for all 0 <= i <= n.
bool is_in_forward_bowen_ball(const System& sys, const Point& x, int n, double eps, const Point& z);

/// Largest n' <= max_depth with z in B_{n'}(x, eps), given the orbit x, f x, ..., f^max_depth x;
/// -1 when d(z, x) >= eps.
int deepest_forward_level(const System& sys, std::span<const Point> anchor_orbit, const Point& z, double eps,
                          int max_depth);

/// x, f x, ..., f^n x.
std::vector<Point> forward_orbit(const System& sys, const Point& x, int n);

/// Membership in inverse Bowen balls by depth-first search over the preimage tree of z,
/// pruning every preimage farther than eps from the anchor coordinate at the same level.
/// Holds per-level scratch buffers; one instance per worker.
class InverseBallSearch {
 public:
  InverseBallSearch(const System& sys, const Prehistory& anchor);

  bool contains(const Point& z, double eps, int n);
  /// Largest n' <= max_depth with z in B^-_{n'}(anchor, eps); -1 when d(z, x_0) >= eps.
  int deepest_level(const Point& z, double eps, int max_depth);
  /// Number of distinct eps-admissible backward branches of length n (exhaustive; siblings
  /// closer than 1e-9 count once).
  std::uint64_t count_branches(const Point& z, double eps, int n);
  /// One admissible branch (z, z_{-1}, ..., z_{-n}) if any.
  std::optional<std::vector<Point>> find_branch(const Point& z, double eps, int n);

  /// Tree nodes whose preimages were enumerated since construction.
  std::uint64_t nodes_expanded() const { return nodes_expanded_; }

 private:
  bool admissible(const Point& w, int level, double eps) const;
  int search_deepest(const Point& z, int level, double eps, int max_depth);
  std::uint64_t search_count(const Point& z, int level, double eps, int n);
  bool search_branch(const Point& z, int level, double eps, int n, std::vector<Point>& path);
  std::vector<Point>& buffer(int level);

  const System* sys_;
  const Prehistory* anchor_;
  std::vector<std::vector<Point>> buffers_;
  std::uint64_t nodes_expanded_ = 0;
  double strip_ = 0.0;
};

bool is_in_inverse_bowen_ball(const System& sys, const BowenQuery& q, const Point& z);
std::uint64_t count_admissible_branches(const System& sys, const BowenQuery& q, const Point& z);

}  // namespace iel
