// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "iel/estimators.hpp"
#include "iel/exact.hpp"
#include "iel/experiment.hpp"
#include "iel/prehistory.hpp"
#include "oracles.hpp"

using iel::EstimatorConfig;
using iel::ReferenceMeasure;
using iel::SquareMatrix;
using iel::System;
using Clock = std::chrono::steady_clock;

namespace {

const SquareMatrix kA1{{8, 1, 4}, {0, 3, 1}, {0, 2, 1}};
const SquareMatrix kA2{{4, 0, 0}, {3, 6, 2}, {5, 4, 2}};
const SquareMatrix kCat{{3, 1}, {1, 1}};

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Runs one criterion body; an exception counts as a failure.
template <class Fn>
void criterion(int id, Fn fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, std::string("threw: ") + e.what());
  }
}

void strip_wall_clock(nlohmann::json& j) {
  if (j.is_object()) {
    j.erase("wall_clock_seconds");
    for (auto& [k, v] : j.items()) strip_wall_clock(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_wall_clock(v);
  }
}

bool monotone_balls() {
  iel::RngStream rng(901, 0);
  for (const System& sys : {System::toral_linear(kCat), System::expanding_circle(2), System::fat_baker(0.7)}) {
    const auto m = sys.default_measure();
    for (int trial = 0; trial < 20; ++trial) {
      const auto x0 = sys.sample_reference(m, rng);
      const auto pre = iel::sample_prehistory(sys, m, x0, 10, rng);
      iel::InverseBallSearch search(sys, pre);
      for (int k = 0; k < 20; ++k) {
        const auto z = test::near(sys, x0, 0.2, rng);
        const double eps = rng.uniform(0.02, 0.2);
        for (int n = 0; n < 10; ++n) {
          if (search.contains(z, eps, n + 1) && !search.contains(z, eps, n)) return false;
          if (search.contains(z, eps, n) && !search.contains(z, 1.3 * eps, n)) return false;
        }
      }
    }
  }
  return true;
}

// Returns (cases, mismatches).
std::pair<int, int> dfs_versus_exhaustive() {
  iel::RngStream rng(902, 0);
  int cases = 0;
  int mismatches = 0;
  for (const System& sys : {System::expanding_circle(2), System::expanding_circle(3), System::toral_linear(kCat),
                            System::toral_linear(SquareMatrix{{3, 1}, {1, 2}}), System::fat_baker(0.75)}) {
    const auto m = sys.default_measure();
    for (int trial = 0; trial < 120; ++trial) {
      const int n = static_cast<int>(rng.below(7));
      const double eps = rng.uniform(0.03, 0.45 * sys.diameter());
      const auto x0 = sys.sample_reference(m, rng);
      const auto pre = iel::sample_prehistory(sys, m, x0, n, rng);
      iel::InverseBallSearch search(sys, pre);
      for (int k = 0; k < 5; ++k) {
        const auto z = test::near(sys, x0, 1.5 * eps, rng);
        if (search.contains(z, eps, n) != test::exhaustive_member(sys, pre, z, eps, n)) ++mismatches;
        ++cases;
      }
    }
  }
  return {cases, mismatches};
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();
  const EstimatorConfig defaults;

  criterion(1, [] {
    const auto t0 = Clock::now();
    const auto p = iel::toral_invariants(kA1);
    const double ms = 1e3 * seconds_since(t0);
    const double inv_err = std::abs(p.inverse_entropy + std::log(2.0 - std::sqrt(3.0)));
    const double fwd_err = std::abs(p.forward_entropy - (std::log(8.0) + std::log(2.0 + std::sqrt(3.0))));
    report(1, inv_err <= 1e-10 && fwd_err <= 1e-10 && ms < 1.0,
           fmt("toral invariants of A1: inverse %.12f (err %.1e), forward %.12f (err %.1e), %.3f ms", p.inverse_entropy,
               inv_err, p.forward_entropy, fwd_err, ms));
  });

  criterion(2, [] {
    const auto v = iel::distinguish(kA1, kA2);
    const double fwd_gap = std::abs(v.a.forward_entropy - v.b.forward_entropy);
    const double inv_gap = v.a.inverse_entropy - v.b.inverse_entropy;
    const double expected = std::log((4.0 - 2.0 * std::sqrt(3.0)) / (2.0 - std::sqrt(3.0)));
    report(2, fwd_gap < 1e-10 && std::abs(inv_gap - expected) < 1e-10 && v.verdict == "not isomorphic (inverse entropy differs)",
           fmt("A1 vs A2: forward gap %.1e, inverse gap %.12f (expected %.12f), verdict '%s'", fwd_gap, inv_gap, expected,
               v.verdict.c_str()));
  });

  criterion(3, [&] {
    const auto t0 = Clock::now();
    const auto r = iel::check_entropy_identity(System::toral_linear(kCat), ReferenceMeasure::Haar, defaults);
    const double secs = seconds_since(t0);
    report(3, r.pass && std::abs(r.residual) <= r.tolerance && secs <= 600.0,
           fmt("cat map identity: h %.4f, h- %.4f, F %.4f, residual %.4f, tolerance %.4f, %.1f s", r.forward.value,
               r.inverse.value, r.folding.value, r.residual, r.tolerance, secs));
  });

  criterion(4, [&] {
    bool pass = true;
    std::string detail = "inverse entropy of expanding systems:";
    const std::vector<std::pair<std::string, System>> systems{{"circle(2)", System::expanding_circle(2)},
                                                              {"circle(3)", System::expanding_circle(3)},
                                                              {"shift(1/2,1/2)", System::full_shift({0.5, 0.5})}};
    for (const auto& [name, sys] : systems) {
      const auto r = iel::estimate_inverse_entropy(sys, sys.default_measure(), defaults);
      pass = pass && !r.failed && std::abs(r.extrapolated) <= 0.05;
      detail += fmt(" %s %.4f", name.c_str(), r.extrapolated);
    }
    report(4, pass, detail + " (bound 0.05)");
  });

  criterion(5, [&] {
    const double exact = iel::toral_invariants(kCat).inverse_entropy;
    const auto r = iel::estimate_inverse_entropy(System::toral_linear(kCat), ReferenceMeasure::Haar, defaults);
    const double rel = std::abs(r.extrapolated - exact) / exact;
    report(5, !r.failed && rel <= 0.10,
           fmt("cat map inverse entropy %.4f +- %.4f vs exact %.4f (relative error %.3f, bound 0.10)", r.extrapolated,
               r.std_error, exact, rel));
  });

  criterion(6, [&] {
    const auto shift = iel::estimate_folding_entropy(System::full_shift({0.3, 0.7}), ReferenceMeasure::Bernoulli, defaults);
    const double target = -(0.3 * std::log(0.3) + 0.7 * std::log(0.7));
    const double rel = std::abs(shift.extrapolated - target) / target;
    const auto circle = iel::estimate_folding_entropy(System::expanding_circle(2), ReferenceMeasure::Haar, defaults);
    const double circle_err = std::abs(circle.extrapolated - std::log(2.0));
    report(6, rel <= 0.01 && circle_err <= 1e-12,
           fmt("folding: shift(0.3,0.7) %.5f vs %.5f (relative error %.4f, bound 0.01); circle(2) error %.1e", shift.extrapolated,
               target, rel, circle_err));
  });

  criterion(7, [&] {
    const auto spec = iel::estimate_lyapunov_spectrum(System::toral_linear(kA1), defaults);
    const std::vector<double> expected{std::log(8.0), std::log(2.0 + std::sqrt(3.0)), std::log(2.0 - std::sqrt(3.0))};
    double err = spec.size() == 3 ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min<std::size_t>(spec.size(), 3); ++i) err = std::max(err, std::abs(spec[i] - expected[i]));
    report(7, err <= 1e-6, fmt("Lyapunov spectrum of A1: max error %.1e (bound 1e-6)", err));
  });

  criterion(8, [&] {
    const auto r = iel::estimate_fat_baker_inverse_entropy(0.75, defaults);
    const auto edge = iel::estimate_fat_baker_inverse_entropy(0.5, defaults);
    const double edge_err = std::abs(edge.inverse_entropy - std::log(2.0));
    const bool pass = r.agree && r.gap <= r.agreement_tolerance && r.overlap_number >= 1.0 && r.overlap_number <= 2.0 &&
                      edge_err <= 0.03;
    report(8, pass,
           fmt("fat baker 0.75: dimension route %.4f, direct %.4f, gap %.4f (tolerance %.4f), overlap %.3f; beta 1/2: "
               "%.4f (error %.4f, bound 0.03)",
               r.from_dimension, r.inverse_entropy, r.gap, r.agreement_tolerance, r.overlap_number, edge.inverse_entropy,
               edge_err));
  });

  criterion(9, [&] {
    const auto exact = iel::tsujii_invariants(2, 0.7);
    const double low = exact.inverse_low - 0.05;
    const double high = exact.inverse_high + 0.05;
    const double identity_err = std::abs(exact.forward - exact.folding - std::abs(std::log(0.7)));
    bool pass = identity_err <= 1e-12 && std::abs(exact.folding - std::log(1.4)) <= 1e-12;
    std::string detail = fmt("tsujii(2, 0.7) inverse estimates in [%.3f, %.3f]:", low, high);
    iel::RngStream frng(903, 0);
    for (int i = 0; i < 3; ++i) {
      const auto sys = System::tsujii(2, 0.7, iel::TrigPolynomial::random(3, 0.3, frng));
      const auto r = iel::estimate_inverse_entropy(sys, sys.default_measure(), defaults);
      pass = pass && !r.failed && r.extrapolated >= low && r.extrapolated <= high;
      detail += fmt(" %.4f", r.extrapolated);
    }
    report(9, pass, detail + fmt("; exact h - F - |log lambda| = %.1e", identity_err));
  });

  criterion(10, [&] {
    std::string detail;
    bool pass = true;

    const bool mono = monotone_balls();
    pass = pass && mono;
    detail += fmt("monotonicity %s", mono ? "ok" : "violated");

    const auto [cases, mismatches] = dfs_versus_exhaustive();
    pass = pass && cases >= 500 && mismatches == 0;
    detail += fmt("; DFS vs exhaustive %d cases, %d mismatches", cases, mismatches);

    double power_err = 0.0;
    for (const auto& a : {kCat, kA1, kA2, SquareMatrix{{3, 1}, {1, 2}}}) {
      power_err = std::max(power_err, std::abs(iel::toral_invariants(a.power(2)).inverse_entropy -
                                               2.0 * iel::toral_invariants(a).inverse_entropy));
    }
    pass = pass && power_err <= 1e-8;
    detail += fmt("; power law error %.1e", power_err);

    const auto block = iel::toral_invariants(SquareMatrix::block_diagonal(kA1, kCat));
    const double product_err = std::abs(block.inverse_entropy - iel::toral_invariants(kA1).inverse_entropy -
                                        iel::toral_invariants(kCat).inverse_entropy);
    pass = pass && product_err <= 1e-10;
    detail += fmt("; product law error %.1e", product_err);

    const auto sup = iel::estimate_inverse_entropy(System::toral_linear(kCat, iel::Metric::TorusSup), ReferenceMeasure::Haar, defaults);
    const auto euc = iel::estimate_inverse_entropy(System::toral_linear(kCat, iel::Metric::TorusEuclidean), ReferenceMeasure::Haar, defaults);
    const double metric_gap = std::abs(sup.extrapolated - euc.extrapolated);
    const double metric_tol = 2.0 * (sup.std_error + euc.std_error) + 0.05;
    pass = pass && metric_gap <= metric_tol;
    detail += fmt("; metric gap %.4f (tolerance %.4f)", metric_gap, metric_tol);

    auto cfg = iel::parse_config(R"({"system": {"kind": "toral_linear", "params": {"matrix": [[3, 1], [1, 1]]}},
      "estimator": {"anchors": 4, "samples_per_ball": 20000}, "tasks": ["exact", "inverse", "forward", "folding"]})");
    auto first = iel::run_experiment(cfg);
    auto second = iel::run_experiment(cfg);
    strip_wall_clock(first.report);
    strip_wall_clock(second.report);
    const bool same = first.report.dump(2) == second.report.dump(2) && first.curves_csv == second.curves_csv;
    pass = pass && same;
    detail += fmt("; rerun %s", same ? "byte-identical" : "differs");

    const double minutes = seconds_since(suite_start) / 60.0;
    pass = pass && minutes <= 30.0;
    detail += fmt("; acceptance run %.1f min (bound 30)", minutes);
    report(10, pass, detail);
  });

  return failures == 0 ? 0 : 1;
}
