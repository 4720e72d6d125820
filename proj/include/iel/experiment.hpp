#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "iel/estimators.hpp"
#include "iel/exact.hpp"
#include "iel/systems.hpp"

namespace iel {

enum class Task { Exact, Forward, Inverse, Folding, Lyapunov, Identity, Dimension, RigidityPair };

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view s);

struct ExperimentConfig {
  std::string name = "experiment";
  SystemParams system;
  Metric metric = Metric::TorusSup;
  ReferenceMeasure measure = ReferenceMeasure::Haar;
  EstimatorConfig estimator;
  std::vector<Task> tasks;
  std::string output_dir = "iel-out";

  System make_system() const { return System(system, metric); }
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Invalid configuration. `line` is 1-based (0 when unknown), `field` a dotted path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Parses and fully validates a config document (JSON). Every check that can fail, including
/// the system invariants and task applicability, runs here.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Seed precedence: explicit override, then the IEL_SEED environment variable, then the config.
void apply_seed_override(ExperimentConfig& cfg, std::optional<std::uint64_t> cli_seed);

struct RunOutput {
  nlohmann::json report;
  std::string curves_csv;
  std::string summary;
  int exit_code = 0;  // 0 success, 2 estimator failure
};

RunOutput run_experiment(const ExperimentConfig& cfg);

/// run_experiment plus report.json, curves.csv and summary.txt in cfg.output_dir.
RunOutput run_and_write(const ExperimentConfig& cfg);

/// Plot data for one entropy report: one row per (eps, n).
void append_curve_rows(std::string& csv, std::string_view task, const EntropyReport& report);
inline constexpr std::string_view kCurvesHeader = "task,eps,n,hits,trials,neg_log_phat,slope,stderr\n";

struct Verdict {
  InvariantPair a;
  InvariantPair b;
  bool inverse_differs = false;
  bool forward_differs = false;
  std::string verdict;
};

/// Compares two hyperbolic toral maps (|det| >= 1) by their exact entropy invariants. Never claims
/// isomorphism: equal invariants give "indistinguishable by these invariants".
Verdict distinguish(const SquareMatrix& a, const SquareMatrix& b);

nlohmann::json to_json(const InvariantPair& p);
nlohmann::json to_json(const Verdict& v);

/// Reads a matrix given either as a nested array or as {"matrix": [[...]]}.
SquareMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace iel
