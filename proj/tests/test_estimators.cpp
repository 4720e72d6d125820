#include <doctest.h>

#include <cmath>

#include "iel/estimators.hpp"
#include "iel/exact.hpp"
#include "iel/parallel.hpp"
#include "iel/prehistory.hpp"

using iel::EstimatorConfig;
using iel::Point;
using iel::ReferenceMeasure;
using iel::SquareMatrix;
using iel::System;

namespace {

const SquareMatrix kCat{{3, 1}, {1, 1}};
const SquareMatrix kA1{{8, 1, 4}, {0, 3, 1}, {0, 2, 1}};
const SquareMatrix kA2{{4, 0, 0}, {3, 6, 2}, {5, 4, 2}};

EstimatorConfig small_config() {
  EstimatorConfig cfg;
  cfg.radii = {0.2, 0.1};
  cfg.depths = {2, 3, 4, 5, 6, 7, 8};
  cfg.anchors = 8;
  cfg.samples_per_ball = 40000;
  cfg.burn_in = 1000;
  cfg.seed = 7;
  return cfg;
}

iel::Prehistory anchor(const System& sys, int depth, std::uint64_t seed) {
  iel::RngStream rng(seed, 0);
  const Point x0 = sys.sample_reference(sys.default_measure(), rng, 100);
  return iel::sample_prehistory(sys, sys.default_measure(), x0, depth, rng);
}

void check_reports_equal(const iel::EntropyReport& a, const iel::EntropyReport& b) {
  CHECK(a.extrapolated == b.extrapolated);
  CHECK(a.std_error == b.std_error);
  CHECK(a.balls_skipped == b.balls_skipped);
  REQUIRE(a.per_radius.size() == b.per_radius.size());
  for (std::size_t r = 0; r < a.per_radius.size(); ++r) {
    REQUIRE(a.per_radius[r].curve.size() == b.per_radius[r].curve.size());
    for (std::size_t i = 0; i < a.per_radius[r].curve.size(); ++i) {
      CHECK(a.per_radius[r].curve[i].hits == b.per_radius[r].curve[i].hits);
      CHECK(a.per_radius[r].curve[i].neg_log_phat == b.per_radius[r].curve[i].neg_log_phat);
    }
  }
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("config validation names the field") {
    CHECK_NOTHROW(EstimatorConfig{}.validate());
    auto expect = [](EstimatorConfig cfg, const std::string& field) {
      try {
        cfg.validate();
        FAIL("accepted invalid " << field);
      } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).rfind(field + ":", 0) == 0);
      }
    };
    EstimatorConfig c;
    c.radii = {0.05, 0.1};
    expect(c, "radii");
    c = {};
    c.radii = {};
    expect(c, "radii");
    c = {};
    c.radii = {0.1, -0.1};
    expect(c, "radii");
    c = {};
    c.depths = {3, 2};
    expect(c, "depths");
    c = {};
    c.depths = {4};
    expect(c, "depths");
    c = {};
    c.depths = {2, 80};
    expect(c, "depths");
    c = {};
    c.min_hits = 4;
    expect(c, "min_hits");
    c = {};
    c.anchors = 0;
    expect(c, "anchors");
    c = {};
    c.samples_per_ball = 0;
    expect(c, "samples_per_ball");
    c = {};
    c.burn_in = -1;
    expect(c, "burn_in");
    c = small_config();
    c.radii = {0.3, 0.1};
    CHECK_THROWS_WITH_AS(iel::estimate_inverse_entropy(System::toral_linear(kCat), ReferenceMeasure::Haar, c),
                         doctest::Contains("radii"), std::invalid_argument);
  }

  TEST_CASE("ball measure of the whole space") {
    const System sys = System::toral_linear(kCat);
    const iel::BowenQuery q{anchor(sys, 0, 1), 0, 2.0 * sys.diameter(), iel::BallDirection::Inverse};
    const auto est = iel::estimate_ball_measure(sys, ReferenceMeasure::Haar, q, 1000, iel::RngStream(2, 0));
    CHECK(est.hits == 1000);
    CHECK(est.trials == 1000);
    CHECK(est.phat == 1.0);
    CHECK(est.std_error == 0.0);
  }

  TEST_CASE("doubling map inverse balls do not shrink with depth") {
    const System sys = System::expanding_circle(2);
    const auto pre = anchor(sys, 8, 3);
    const iel::RngStream rng(4, 0);
    const int samples = 200000;
    const auto base = iel::estimate_ball_measure(sys, ReferenceMeasure::Haar, {pre, 2, 0.1, iel::BallDirection::Inverse}, samples, rng);
    CHECK(base.phat == doctest::Approx(0.2).epsilon(0.02));
    for (int n = 3; n <= 8; ++n) {
      const auto est = iel::estimate_ball_measure(sys, ReferenceMeasure::Haar, {pre, n, 0.1, iel::BallDirection::Inverse}, samples, rng);
      CHECK(std::abs(est.phat - base.phat) <= 2.0 * std::hypot(est.std_error, base.std_error));
    }
  }

  TEST_CASE("cat map inverse balls shrink by the stable eigenvalue") {
    const System sys = System::toral_linear(kCat);
    const auto pre = anchor(sys, 6, 5);
    const int samples = 2000000;
    const double ratio = 2.0 - std::sqrt(2.0);
    for (int n = 4; n < 6; ++n) {
      const auto a = iel::estimate_ball_measure(sys, ReferenceMeasure::Haar, {pre, n, 0.2, iel::BallDirection::Inverse}, samples, iel::RngStream(6, n));
      const auto b = iel::estimate_ball_measure(sys, ReferenceMeasure::Haar, {pre, n + 1, 0.2, iel::BallDirection::Inverse}, samples, iel::RngStream(6, 100 + n));
      const double r = b.phat / a.phat;
      const double sigma = r * std::hypot(a.std_error / a.phat, b.std_error / b.phat);
      CHECK(std::abs(r - ratio) <= 3.0 * sigma);
    }
  }

  TEST_CASE("inverse entropy of expanding systems vanishes") {
    const auto cfg = small_config();
    for (const System& sys : {System::expanding_circle(2), System::expanding_circle(3), System::full_shift({0.5, 0.5})}) {
      const auto rep = iel::estimate_inverse_entropy(sys, sys.default_measure(), cfg);
      CHECK_FALSE(rep.failed);
      CHECK(std::abs(rep.extrapolated) <= 0.05);
      REQUIRE(rep.eps_used);
    }
  }

  TEST_CASE("cat map inverse entropy and metric robustness") {
    auto cfg = small_config();
    cfg.samples_per_ball = 100000;
    const double exact = -std::log(2.0 - std::sqrt(2.0));
    const auto sup = iel::estimate_inverse_entropy(System::toral_linear(kCat, iel::Metric::TorusSup), ReferenceMeasure::Haar, cfg);
    const auto euc = iel::estimate_inverse_entropy(System::toral_linear(kCat, iel::Metric::TorusEuclidean), ReferenceMeasure::Haar, cfg);
    CHECK(std::abs(sup.extrapolated - exact) <= 0.1 * exact);
    CHECK(std::abs(euc.extrapolated - exact) <= 0.1 * exact);
    CHECK(std::abs(sup.extrapolated - euc.extrapolated) <= 2.0 * (sup.std_error + euc.std_error) + 0.05);
    for (const auto& rep : {sup, euc}) {
      for (const auto& r : rep.per_radius) {
        if (r.fit) CHECK(r.fit->slope >= -2.0 * r.fit->std_error);
      }
    }
  }

  TEST_CASE("power law for the squared cat map") {
    auto cfg = small_config();
    cfg.depths = {1, 2, 3, 4, 5};
    cfg.samples_per_ball = 200000;
    const auto single = iel::estimate_inverse_entropy(System::toral_linear(kCat), ReferenceMeasure::Haar, cfg);
    const auto squared = iel::estimate_inverse_entropy(System::toral_linear(kCat.power(2)), ReferenceMeasure::Haar, cfg);
    CHECK_FALSE(squared.failed);
    CHECK(std::abs(squared.extrapolated - 2.0 * single.extrapolated) <= 2.0 * std::hypot(squared.std_error, 2.0 * single.std_error) + 0.1);
    const double exact = iel::toral_invariants(kCat.power(2)).inverse_entropy;
    CHECK(std::abs(squared.extrapolated - exact) <= 0.1 * exact);
  }

  TEST_CASE("forward entropy") {
    auto cfg = small_config();
    const auto circle = iel::estimate_forward_entropy(System::expanding_circle(2), ReferenceMeasure::Haar, cfg);
    CHECK(std::abs(circle.extrapolated - std::log(2.0)) <= 0.1 * std::log(2.0));

    cfg.depths = {1, 2, 3, 4, 5, 6};
    cfg.samples_per_ball = 20000;
    const double a1 = std::log(8.0) + std::log(2.0 + std::sqrt(3.0));
    const auto rep = iel::estimate_forward_entropy(System::toral_linear(kA1), ReferenceMeasure::Haar, cfg);
    CHECK_FALSE(rep.failed);
    CHECK(std::abs(rep.extrapolated - a1) <= 0.1 * a1);
  }

  TEST_CASE("folding entropy") {
    const auto cfg = small_config();
    const auto circle = iel::estimate_folding_entropy(System::expanding_circle(2), ReferenceMeasure::Haar, cfg);
    CHECK(std::abs(circle.extrapolated - std::log(2.0)) < 1e-12);
    const auto a2 = iel::estimate_folding_entropy(System::toral_linear(kA2), ReferenceMeasure::Haar, cfg);
    CHECK(std::abs(a2.extrapolated - std::log(16.0)) < 1e-12);
    const double h = -(0.3 * std::log(0.3) + 0.7 * std::log(0.7));
    const auto shift = iel::estimate_folding_entropy(System::full_shift({0.3, 0.7}), ReferenceMeasure::Bernoulli, cfg);
    CHECK(std::abs(shift.extrapolated - h) <= 0.01 * h);
    CHECK_THROWS_WITH_AS(iel::estimate_folding_entropy(System::fat_baker(0.75), ReferenceMeasure::Srb, cfg),
                         "folding estimator requires closed-form measure Jacobian", std::domain_error);
  }

  TEST_CASE("Lyapunov spectra") {
    const auto cfg = small_config();
    const auto a1 = iel::estimate_lyapunov_spectrum(System::toral_linear(kA1), cfg);
    REQUIRE(a1.size() == 3);
    CHECK(std::abs(a1[0] - std::log(8.0)) < 1e-6);
    CHECK(std::abs(a1[1] - std::log(2.0 + std::sqrt(3.0))) < 1e-6);
    CHECK(std::abs(a1[2] - std::log(2.0 - std::sqrt(3.0))) < 1e-6);
    const auto fb = iel::estimate_lyapunov_spectrum(System::fat_baker(0.75), cfg);
    REQUIRE(fb.size() == 2);
    CHECK(std::abs(fb[0] - std::log(2.0)) < 1e-6);
    CHECK(std::abs(fb[1] - std::log(0.75)) < 1e-6);
    iel::RngStream frng(8, 0);
    const auto ts = iel::estimate_lyapunov_spectrum(System::tsujii(2, 0.7, iel::TrigPolynomial::random(3, 0.3, frng)), cfg);
    REQUIRE(ts.size() == 2);
    CHECK(std::abs(ts[0] - std::log(2.0)) < 1e-6);
    CHECK(std::abs(ts[1] - std::log(0.7)) < 1e-6);
    CHECK_THROWS_AS(iel::estimate_lyapunov_spectrum(System::full_shift({0.5, 0.5}), cfg), std::domain_error);
  }

  TEST_CASE("pointwise dimension of Bernoulli convolutions") {
    auto cfg = small_config();
    cfg.anchors = 16;
    cfg.samples_per_ball = 100000;
    const auto half = iel::estimate_pointwise_dimension(0.5, cfg);
    CHECK(std::abs(half.fit.slope - 1.0) <= 0.03);
    const auto b75 = iel::estimate_pointwise_dimension(0.75, cfg);
    CHECK(b75.fit.slope >= 0.9);
    CHECK(b75.fit.slope <= 1.02);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto g = iel::estimate_pointwise_dimension(golden, cfg);
    CHECK(g.fit.slope <= 1.02);
    bool noted = false;
    for (const auto& n : g.notes) noted = noted || n.find("singular") != std::string::npos;
    CHECK(noted);
    CHECK(iel::is_known_pisot_reciprocal(golden));
    CHECK(iel::is_known_pisot_reciprocal(1.0 / 1.324717957244746));
    CHECK_FALSE(iel::is_known_pisot_reciprocal(0.75));
    CHECK_FALSE(iel::is_known_pisot_reciprocal(0.5));
    CHECK_THROWS_AS(iel::estimate_pointwise_dimension(0.4, cfg), std::invalid_argument);
  }

  TEST_CASE("fat baker overlap numbers stay in range") {
    auto cfg = small_config();
    cfg.anchors = 8;
    cfg.samples_per_ball = 50000;
    for (double beta : {0.55, 0.65, 0.75, 0.85, 0.95}) {
      const auto rep = iel::estimate_fat_baker_inverse_entropy(beta, cfg);
      CHECK(rep.overlap_number >= 1.0);
      CHECK(rep.overlap_number <= 2.0);
      CHECK(rep.from_dimension >= 0.0);
      CHECK(rep.from_dimension <= std::log(2.0) + 0.05);
    }
    const auto edge = iel::estimate_fat_baker_inverse_entropy(0.5, cfg);
    CHECK(std::abs(edge.inverse_entropy - std::log(2.0)) <= 0.03);
  }

  TEST_CASE("identity on the circle") {
    auto cfg = small_config();
    const auto rep = iel::check_entropy_identity(System::expanding_circle(3), ReferenceMeasure::Haar, cfg);
    CHECK(rep.pass);
    CHECK(rep.chain_holds);
    REQUIRE(rep.lyapunov_bound_holds);
    CHECK(*rep.lyapunov_bound_holds);
    CHECK(rep.folding.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(std::abs(rep.inverse.value) <= 0.05);
    CHECK(std::abs(rep.forward.value - std::log(3.0)) <= 0.1 * std::log(3.0));
  }

  TEST_CASE("estimates do not depend on the worker count") {
    auto cfg = small_config();
    cfg.anchors = 4;
    cfg.samples_per_ball = 20000;
    const System sys = System::toral_linear(kCat);
    const int saved = iel::thread_count();
    iel::set_thread_count(1);
    const auto inv1 = iel::estimate_inverse_entropy(sys, ReferenceMeasure::Haar, cfg);
    const auto fwd1 = iel::estimate_forward_entropy(sys, ReferenceMeasure::Haar, cfg);
    iel::set_thread_count(4);
    const auto inv4 = iel::estimate_inverse_entropy(sys, ReferenceMeasure::Haar, cfg);
    const auto fwd4 = iel::estimate_forward_entropy(sys, ReferenceMeasure::Haar, cfg);
    const auto inv4b = iel::estimate_inverse_entropy(sys, ReferenceMeasure::Haar, cfg);
    iel::set_thread_count(saved);
    check_reports_equal(inv1, inv4);
    check_reports_equal(inv4, inv4b);
    check_reports_equal(fwd1, fwd4);
    cfg.seed = 8;
    const auto other = iel::estimate_inverse_entropy(sys, ReferenceMeasure::Haar, cfg);
    CHECK(other.extrapolated != inv1.extrapolated);
  }
}
