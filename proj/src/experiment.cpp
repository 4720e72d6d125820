#include "iel/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace iel {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Task, std::string_view>, 8> kTaskNames{{
    {Task::Exact, "exact"},
    {Task::Forward, "forward"},
    {Task::Inverse, "inverse"},
    {Task::Folding, "folding"},
    {Task::Lyapunov, "lyapunov"},
    {Task::Identity, "identity"},
    {Task::Dimension, "dimension"},
    {Task::RigidityPair, "rigidity_pair"},
}};

int line_at(std::string_view text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Line of the innermost key of `path` found in order in the raw text; 0 if the first is missing.
int locate(std::string_view text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  int line = 0;
  for (const auto& key : path) {
    const auto hit = text.find("\"" + key + "\"", pos);
    if (hit == std::string_view::npos) break;
    pos = hit;
    line = line_at(text, hit);
  }
  return line;
}

std::string join(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& p : path) out += (out.empty() ? "" : ".") + p;
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
    throw ConfigError(locate(text_, path), join(path), message);
  }

  void only_keys(const json& obj, const std::vector<std::string>& path, std::initializer_list<std::string_view> keys) const {
    if (!obj.is_object()) fail(path, "must be an object");
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        auto p = path;
        p.push_back(k);
        fail(p, "unknown field");
      }
    }
  }

  const json& require(const json& obj, const std::vector<std::string>& path, const std::string& key) const {
    auto p = path;
    p.push_back(key);
    if (!obj.contains(key)) fail(p, "missing required field");
    return obj.at(key);
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "must be a number");
    return v.get<double>();
  }

  long long integer(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    return v.get<long long>();
  }

  std::string string(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array()) fail(path, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number(e, path));
    return out;
  }

 private:
  std::string_view text_;
};

SquareMatrix parse_matrix(const Parser& p, const json& v, const std::vector<std::string>& path) {
  if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(SquareMatrix::kMaxDim)) {
    p.fail(path, "must be a square array of 1 to 8 integer rows");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : v) {
    if (!row.is_array() || row.size() != v.size()) p.fail(path, "must be square");
    std::vector<double> r;
    for (const auto& e : row) r.push_back(static_cast<double>(p.integer(e, path)));
    rows.push_back(std::move(r));
  }
  return SquareMatrix::from_rows(rows);
}

SystemParams parse_system_params(const Parser& p, const std::string& kind, const json& params) {
  const std::vector<std::string> path{"system", "params"};
  auto at = [&](const std::string& key) -> std::vector<std::string> { return {"system", "params", key}; };
  if (kind == "toral_linear") {
    p.only_keys(params, path, {"matrix"});
    return ToralLinear{parse_matrix(p, p.require(params, path, "matrix"), at("matrix"))};
  }
  if (kind == "expanding_circle") {
    p.only_keys(params, path, {"degree"});
    return ExpandingCircle{static_cast<int>(p.integer(p.require(params, path, "degree"), at("degree")))};
  }
  if (kind == "full_shift") {
    p.only_keys(params, path, {"probabilities", "word_length"});
    FullShift s;
    s.probabilities = p.numbers(p.require(params, path, "probabilities"), at("probabilities"));
    if (params.contains("word_length")) {
      s.word_length = static_cast<int>(p.integer(params.at("word_length"), at("word_length")));
      if (s.word_length < 1 || s.word_length > kMaxWord) p.fail(at("word_length"), "must lie in [1, 64]");
    }
    return s;
  }
  if (kind == "fat_baker") {
    p.only_keys(params, path, {"beta"});
    return FatBaker{p.number(p.require(params, path, "beta"), at("beta"))};
  }
  if (kind == "tsujii") {
    p.only_keys(params, path, {"l", "lambda", "cos_coeffs", "sin_coeffs"});
    Tsujii t;
    t.l = static_cast<int>(p.integer(p.require(params, path, "l"), at("l")));
    t.lambda = p.number(p.require(params, path, "lambda"), at("lambda"));
    t.f.cos_coeffs = p.numbers(p.require(params, path, "cos_coeffs"), at("cos_coeffs"));
    t.f.sin_coeffs = p.numbers(p.require(params, path, "sin_coeffs"), at("sin_coeffs"));
    return t;
  }
  p.fail({"system", "kind"}, "unknown system kind '" + kind + "'");
}

json system_params_json(const SystemParams& params) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ToralLinear>) {
          json rows = json::array();
          for (const auto& r : s.matrix.rows()) {
            json row = json::array();
            for (double v : r) row.push_back(static_cast<long long>(v));
            rows.push_back(row);
          }
          return {{"matrix", rows}};
        } else if constexpr (std::is_same_v<T, ExpandingCircle>) {
          return {{"degree", s.degree}};
        } else if constexpr (std::is_same_v<T, FullShift>) {
          return {{"probabilities", s.probabilities}, {"word_length", s.word_length}};
        } else if constexpr (std::is_same_v<T, FatBaker>) {
          return {{"beta", s.beta}};
        } else {
          return {{"l", s.l}, {"lambda", s.lambda}, {"cos_coeffs", s.f.cos_coeffs}, {"sin_coeffs", s.f.sin_coeffs}};
        }
      },
      params);
}

bool folding_estimable(const System& sys, ReferenceMeasure m) {
  RngStream probe(0, 0);
  return sys.measure_jacobian(m, sys.sample_reference(m, probe, 0)).has_value();
}

void check_task(const Parser& p, const System& sys, ReferenceMeasure m, Task t) {
  const std::vector<std::string> path{"tasks"};
  const std::string name(to_string(t));
  switch (t) {
    case Task::Folding:
      if (!folding_estimable(sys, m)) p.fail(path, "task 'folding' needs a closed-form measure Jacobian");
      break;
    case Task::Lyapunov:
      if (!sys.is_smooth()) p.fail(path, "task 'lyapunov' needs a smooth system");
      break;
    case Task::Identity:
      if (!folding_estimable(sys, m) && sys.kind() != SystemKind::Tsujii) {
        p.fail(path, "task 'identity' needs folding entropy, estimated or exact");
      }
      break;
    case Task::Dimension:
      if (sys.kind() != SystemKind::FatBaker) p.fail(path, "task 'dimension' needs a fat_baker system");
      break;
    case Task::RigidityPair:
      try {
        (void)rigidity_pair(sys);
      } catch (const std::exception& e) {
        p.fail(path, std::string("task 'rigidity_pair': ") + e.what());
      }
      break;
    default:
      break;
  }
}

// ---------------------------------------------------------------------------------------------
// Report serialisation

json quantity(double value, double std_error, std::string_view provenance) {
  return {{"value", value}, {"stderr", std_error}, {"provenance", provenance}};
}

json exact_value(double value) { return {{"value", value}, {"provenance", "exact"}}; }

json entropy_json(const EntropyReport& r) {
  json per = json::array();
  for (const auto& rr : r.per_radius) {
    json e = {{"eps", rr.eps}, {"retention", rr.retention}, {"anchors_used", rr.anchors_used}};
    if (rr.fit) {
      e["slope"] = quantity(rr.fit->slope, rr.fit->std_error, "estimated");
      e["intercept"] = rr.fit->intercept;
      e["residual_rms"] = rr.fit->residual_rms;
      e["num_points"] = rr.fit->num_points;
    } else {
      e["slope"] = nullptr;
    }
    per.push_back(e);
  }
  json out = {{"provenance", "estimated"},
              {"failed", r.failed},
              {"anchors_used", r.anchors_used},
              {"balls_skipped", r.balls_skipped},
              {"per_radius", per},
              {"notes", r.notes}};
  out["estimate"] = r.failed ? json(nullptr) : quantity(r.extrapolated, r.std_error, "estimated");
  out["eps_used"] = r.eps_used ? json(*r.eps_used) : json(nullptr);
  return out;
}

json folding_json(const EntropyReport& r) {
  return {{"provenance", "estimated"},
          {"estimate", quantity(r.extrapolated, r.std_error, "estimated")},
          {"anchors_used", r.anchors_used},
          {"notes", r.notes}};
}

json spectrum_json(const std::vector<double>& exps, std::string_view provenance) {
  json arr = json::array();
  for (double e : exps) arr.push_back({{"value", e}, {"provenance", provenance}});
  return arr;
}

json exact_task(const System& sys) {
  if (auto inv = exact_invariants(sys)) {
    json out = to_json(*inv);
    out["system"] = sys.describe();
    return out;
  }
  const double beta = std::get<FatBaker>(sys.params()).beta;
  return {{"provenance", "exact"},
          {"lyapunov", spectrum_json({std::log(2.0), std::log(beta)}, "exact")},
          {"notes",
           {"inverse entropy equals |log beta| times the dimension of nu_beta, which has no closed form; run the "
            "dimension task"}}};
}

json identity_json(const InvariantReport& r) {
  json out = {{"provenance", "estimated"},
              {"forward", quantity(r.forward.value, r.forward.std_error, r.forward.provenance)},
              {"inverse", quantity(r.inverse.value, r.inverse.std_error, r.inverse.provenance)},
              {"folding", quantity(r.folding.value, r.folding.std_error, r.folding.provenance)},
              {"lyapunov", spectrum_json(r.lyapunov, "estimated")},
              {"residual", quantity(r.residual, r.combined_std_error, "estimated")},
              {"tolerance", r.tolerance},
              {"pass", r.pass},
              {"chain_holds", r.chain_holds},
              {"forward_report", entropy_json(r.forward_report)},
              {"inverse_report", entropy_json(r.inverse_report)},
              {"notes", r.notes}};
  out["lyapunov_bound_holds"] = r.lyapunov_bound_holds ? json(*r.lyapunov_bound_holds) : json(nullptr);
  if (r.folding_report) out["folding_report"] = folding_json(*r.folding_report);
  return out;
}

json fat_baker_json(const FatBakerReport& r) {
  return {{"provenance", "estimated"},
          {"beta", r.beta},
          {"dimension", quantity(r.dimension.fit.slope, r.dimension.fit.std_error, "estimated")},
          {"dimension_centers", r.dimension.centers},
          {"dimension_samples", r.dimension.samples},
          {"ladder_truncated", r.dimension.ladder_truncated},
          {"inverse_from_dimension", quantity(r.from_dimension, r.from_dimension_std_error, "estimated")},
          {"inverse_direct", quantity(r.direct.extrapolated, r.direct.std_error, "estimated")},
          {"direct_report", entropy_json(r.direct)},
          {"gap", r.gap},
          {"agreement_tolerance", r.agreement_tolerance},
          {"agree", r.agree},
          {"overlap_number", quantity(r.overlap_number, 0.0, "estimated")},
          {"notes", r.notes}};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string bounds_line(const json& result) {
  if (!result.contains("inverse_bounds")) return "";
  const json& b = result["inverse_bounds"];
  return "  inverse_bounds = [" + fmt(b["low"].get<double>()) + ", " + fmt(b["high"].get<double>()) + "] (exact)\n";
}

std::string summary_line(std::string_view label, const json& q) {
  std::string s = "  " + std::string(label) + " = " + fmt(q.at("value").get<double>());
  if (q.contains("stderr") && q.at("stderr").get<double>() > 0.0) s += " +- " + fmt(q.at("stderr").get<double>());
  s += " (" + q.at("provenance").get<std::string>() + ")\n";
  return s;
}

}  // namespace

std::string_view to_string(Task t) {
  for (const auto& [task, name] : kTaskNames) {
    if (task == t) return name;
  }
  return "unknown";
}

std::optional<Task> parse_task(std::string_view s) {
  for (const auto& [task, name] : kTaskNames) {
    if (name == s) return task;
  }
  return std::nullopt;
}

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : std::runtime_error("config:" + std::to_string(line) + ": " + (field.empty() ? "" : field + ": ") + message),
      line_(line),
      field_(std::move(field)) {}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_at(text, e.byte == 0 ? 0 : e.byte - 1), "", "malformed JSON");
  }
  const Parser p(text);
  p.only_keys(j, {}, {"name", "system", "measure", "estimator", "tasks", "output_dir"});

  ExperimentConfig cfg;
  if (j.contains("name")) cfg.name = p.string(j.at("name"), {"name"});
  if (j.contains("output_dir")) cfg.output_dir = p.string(j.at("output_dir"), {"output_dir"});

  const json& sj = p.require(j, {}, "system");
  p.only_keys(sj, {"system"}, {"kind", "params", "metric"});
  const std::string kind = p.string(p.require(sj, {"system"}, "kind"), {"system", "kind"});
  cfg.system = parse_system_params(p, kind, p.require(sj, {"system"}, "params"));

  std::optional<Metric> metric;
  if (sj.contains("metric")) {
    const std::string m = p.string(sj.at("metric"), {"system", "metric"});
    metric = parse_metric(m);
    if (!metric) p.fail({"system", "metric"}, "unknown metric '" + m + "'");
  }
  std::optional<System> sys;
  try {
    sys.emplace(cfg.system, metric);
  } catch (const std::invalid_argument& e) {
    p.fail({"system"}, e.what());
  }
  cfg.metric = sys->metric();

  cfg.measure = sys->default_measure();
  if (j.contains("measure")) {
    const std::string m = p.string(j.at("measure"), {"measure"});
    const auto parsed = parse_measure(m);
    if (!parsed) p.fail({"measure"}, "unknown measure '" + m + "'");
    if (!sys->supports(*parsed)) p.fail({"measure"}, "measure '" + m + "' is not valid for this system");
    cfg.measure = *parsed;
  }

  if (j.contains("estimator")) {
    const json& ej = j.at("estimator");
    const std::vector<std::string> path{"estimator"};
    p.only_keys(ej, path, {"radii", "depths", "anchors", "samples_per_ball", "burn_in", "seed", "min_hits"});
    auto at = [](const std::string& k) { return std::vector<std::string>{"estimator", k}; };
    EstimatorConfig& e = cfg.estimator;
    if (ej.contains("radii")) e.radii = p.numbers(ej.at("radii"), at("radii"));
    if (ej.contains("depths")) {
      if (!ej.at("depths").is_array()) p.fail(at("depths"), "must be an array of integers");
      e.depths.clear();
      for (const auto& d : ej.at("depths")) e.depths.push_back(static_cast<int>(p.integer(d, at("depths"))));
    }
    if (ej.contains("anchors")) e.anchors = static_cast<int>(p.integer(ej.at("anchors"), at("anchors")));
    if (ej.contains("samples_per_ball")) e.samples_per_ball = p.integer(ej.at("samples_per_ball"), at("samples_per_ball"));
    if (ej.contains("burn_in")) e.burn_in = static_cast<int>(p.integer(ej.at("burn_in"), at("burn_in")));
    if (ej.contains("min_hits")) e.min_hits = static_cast<int>(p.integer(ej.at("min_hits"), at("min_hits")));
    if (ej.contains("seed")) {
      const json& s = ej.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
        p.fail(at("seed"), "must be a non-negative integer");
      }
      e.seed = s.get<std::uint64_t>();
    }
  }
  try {
    cfg.estimator.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    p.fail({"estimator", msg.substr(0, colon)}, msg.substr(colon == std::string::npos ? 0 : colon + 2));
  }
  for (double eps : cfg.estimator.radii) {
    if (!(eps < 0.5 * sys->diameter())) {
      p.fail({"estimator", "radii"}, "every radius must be below half the phase-space diameter (" +
                                         fmt(0.5 * sys->diameter()) + ")");
    }
  }

  const json& tj = p.require(j, {}, "tasks");
  if (!tj.is_array() || tj.empty()) p.fail({"tasks"}, "must be a non-empty array of task names");
  std::set<Task> seen;
  for (const auto& t : tj) {
    const std::string name = p.string(t, {"tasks"});
    const auto task = parse_task(name);
    if (!task) p.fail({"tasks"}, "unknown task '" + name + "'");
    if (!seen.insert(*task).second) p.fail({"tasks"}, "duplicate task '" + name + "'");
    check_task(p, *sys, cfg.measure, *task);
    cfg.tasks.push_back(*task);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const ExperimentConfig& cfg) {
  json tasks = json::array();
  for (Task t : cfg.tasks) tasks.push_back(to_string(t));
  const char* kind = std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ToralLinear>) return "toral_linear";
        else if constexpr (std::is_same_v<T, ExpandingCircle>) return "expanding_circle";
        else if constexpr (std::is_same_v<T, FullShift>) return "full_shift";
        else if constexpr (std::is_same_v<T, FatBaker>) return "fat_baker";
        else return "tsujii";
      },
      cfg.system);
  const EstimatorConfig& e = cfg.estimator;
  return {{"name", cfg.name},
          {"system", {{"kind", kind}, {"params", system_params_json(cfg.system)}, {"metric", to_string(cfg.metric)}}},
          {"measure", to_string(cfg.measure)},
          {"estimator",
           {{"radii", e.radii},
            {"depths", e.depths},
            {"anchors", e.anchors},
            {"samples_per_ball", e.samples_per_ball},
            {"burn_in", e.burn_in},
            {"seed", e.seed},
            {"min_hits", e.min_hits}}},
          {"tasks", tasks},
          {"output_dir", cfg.output_dir}};
}

void apply_seed_override(ExperimentConfig& cfg, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) {
    cfg.estimator.seed = *cli_seed;
    return;
  }
  if (const char* env = std::getenv("IEL_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError(0, "IEL_SEED", "must be a non-negative integer");
    cfg.estimator.seed = v;
  }
}

void append_curve_rows(std::string& csv, std::string_view task, const EntropyReport& report) {
  for (const auto& rr : report.per_radius) {
    for (const auto& cp : rr.curve) {
      csv += std::string(task) + "," + fmt(rr.eps) + "," + std::to_string(cp.n) + "," + std::to_string(cp.hits) + "," +
             std::to_string(cp.trials) + ",";
      if (cp.neg_log_phat) csv += fmt(*cp.neg_log_phat);
      csv += ",";
      if (rr.fit) csv += fmt(rr.fit->slope) + "," + fmt(rr.fit->std_error);
      else csv += ",";
      csv += "\n";
    }
  }
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const System sys = cfg.make_system();
  RunOutput out;
  out.curves_csv = std::string(kCurvesHeader);
  std::string& summary = out.summary;
  summary += "experiment: " + cfg.name + "\n";
  summary += "system: " + sys.describe() + "\n";
  summary += "measure: " + std::string(to_string(cfg.measure)) + "\n";
  summary += "seed: " + std::to_string(cfg.estimator.seed) + "\n";

  json tasks = json::array();
  bool any_failed = false;
  for (Task t : cfg.tasks) {
    const auto t0 = clock::now();
    json entry = {{"task", to_string(t)}};
    json result;
    bool failed = false;
    std::string task_summary;
    try {
      switch (t) {
        case Task::Exact: {
          result = exact_task(sys);
          for (const char* k : {"forward_entropy", "inverse_entropy", "folding_entropy"}) {
            if (result.contains(k)) task_summary += summary_line(k, result[k]);
          }
          task_summary += bounds_line(result);
          break;
        }
        case Task::Forward:
        case Task::Inverse: {
          const EntropyReport r = t == Task::Forward ? estimate_forward_entropy(sys, cfg.measure, cfg.estimator)
                                                     : estimate_inverse_entropy(sys, cfg.measure, cfg.estimator);
          result = entropy_json(r);
          append_curve_rows(out.curves_csv, to_string(t), r);
          failed = r.failed;
          if (!failed) task_summary += summary_line("entropy", result["estimate"]);
          break;
        }
        case Task::Folding: {
          const EntropyReport r = estimate_folding_entropy(sys, cfg.measure, cfg.estimator);
          result = folding_json(r);
          task_summary += summary_line("folding_entropy", result["estimate"]);
          break;
        }
        case Task::Lyapunov: {
          result = {{"provenance", "estimated"},
                    {"exponents", spectrum_json(estimate_lyapunov_spectrum(sys, cfg.estimator), "estimated")}};
          for (const auto& e : result["exponents"]) task_summary += summary_line("exponent", e);
          break;
        }
        case Task::Identity: {
          const InvariantReport r = check_entropy_identity(sys, cfg.measure, cfg.estimator);
          result = identity_json(r);
          append_curve_rows(out.curves_csv, "identity.forward", r.forward_report);
          append_curve_rows(out.curves_csv, "identity.inverse", r.inverse_report);
          failed = r.forward_report.failed || r.inverse_report.failed;
          for (const char* k : {"forward", "inverse", "folding", "residual"}) task_summary += summary_line(k, result[k]);
          task_summary += "  identity " + std::string(r.pass ? "holds" : "does not hold") + " within " +
                          fmt(r.tolerance) + "\n";
          break;
        }
        case Task::Dimension: {
          const FatBakerReport r =
              estimate_fat_baker_inverse_entropy(std::get<FatBaker>(sys.params()).beta, cfg.estimator);
          result = fat_baker_json(r);
          append_curve_rows(out.curves_csv, "dimension.direct", r.direct);
          failed = r.direct.failed;
          for (const char* k : {"dimension", "inverse_from_dimension", "inverse_direct", "overlap_number"}) {
            task_summary += summary_line(k, result[k]);
          }
          break;
        }
        case Task::RigidityPair: {
          result = to_json(rigidity_pair(sys));
          task_summary += summary_line("forward_entropy", result["forward_entropy"]);
          task_summary += summary_line("inverse_entropy", result["inverse_entropy"]);
          task_summary += bounds_line(result);
          break;
        }
      }
    } catch (const std::exception& e) {
      failed = true;
      result = {{"error", e.what()}};
    }
    entry["result"] = result;
    entry["status"] = failed ? "failed" : "ok";
    entry["wall_clock_seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
    tasks.push_back(entry);
    any_failed = any_failed || failed;
    summary += "[" + std::string(to_string(t)) + "] " + (failed ? "FAILED" : "ok") + "\n" + task_summary;
  }

  out.exit_code = any_failed ? 2 : 0;
  out.report = {{"tool", "iel"},
                {"version", IEL_VERSION},
                {"seed", cfg.estimator.seed},
                {"config", to_json(cfg)},
                {"tasks", tasks},
                {"status", any_failed ? "failed" : "ok"},
                {"wall_clock_seconds", std::chrono::duration<double>(clock::now() - start).count()}};
  summary += std::string("status: ") + (any_failed ? "failed" : "ok") + "\n";
  return out;
}

RunOutput run_and_write(const ExperimentConfig& cfg) {
  RunOutput out = run_experiment(cfg);
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json") << out.report.dump(2) << "\n";
  std::ofstream(dir / "curves.csv") << out.curves_csv;
  std::ofstream(dir / "summary.txt") << out.summary;
  return out;
}

json to_json(const InvariantPair& p) {
  json out = {{"forward_entropy", exact_value(p.forward_entropy)},
              {"inverse_entropy", exact_value(p.inverse_entropy)},
              {"folding_entropy", exact_value(p.folding_entropy)},
              {"lyapunov", spectrum_json(p.lyapunov, "exact")},
              {"provenance", "exact"},
              {"derivation", p.provenance}};
  if (p.inverse_bounds) {
    out["inverse_bounds"] = {{"low", p.inverse_bounds->first}, {"high", p.inverse_bounds->second}, {"provenance", "exact"}};
  }
  return out;
}

Verdict distinguish(const SquareMatrix& a, const SquareMatrix& b) {
  Verdict v;
  v.a = toral_invariants(a, 1);
  v.b = toral_invariants(b, 1);
  v.inverse_differs = std::abs(v.a.inverse_entropy - v.b.inverse_entropy) > 1e-9;
  v.forward_differs = std::abs(v.a.forward_entropy - v.b.forward_entropy) > 1e-9;
  if (v.inverse_differs) {
    v.verdict = "not isomorphic (inverse entropy differs)";
  } else if (v.forward_differs) {
    v.verdict = "not isomorphic (forward entropy differs)";
  } else {
    v.verdict = "indistinguishable by these invariants";
  }
  return v;
}

json to_json(const Verdict& v) {
  return {{"a", to_json(v.a)},
          {"b", to_json(v.b)},
          {"inverse_difference", v.a.inverse_entropy - v.b.inverse_entropy},
          {"forward_difference", v.a.forward_entropy - v.b.forward_entropy},
          {"verdict", v.verdict}};
}

SquareMatrix matrix_from_json(const json& j) {
  const json& m = j.is_object() && j.contains("matrix") ? j.at("matrix") : j;
  if (!m.is_array() || m.empty() || m.size() > static_cast<std::size_t>(SquareMatrix::kMaxDim)) {
    throw std::invalid_argument("matrix must be a square array of 1 to 8 rows");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : m) {
    if (!row.is_array() || row.size() != m.size()) throw std::invalid_argument("matrix must be square");
    std::vector<double> r;
    for (const auto& e : row) {
      if (!e.is_number()) throw std::invalid_argument("matrix entries must be numbers");
      r.push_back(e.get<double>());
    }
    rows.push_back(std::move(r));
  }
  return SquareMatrix::from_rows(rows);
}

}  // namespace iel
