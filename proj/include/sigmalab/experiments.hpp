#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigmalab/descriptors.hpp"

namespace sigmalab {

enum class ExperimentKind { Solve, Character, Jacobian, Oracle, Bounds, Convergence };

std::string_view to_string(ExperimentKind kind);

/// Threshold on one named metric of a run.
struct CheckSpec {
  std::string metric;
  std::optional<double> min;
  std::optional<double> max;
};

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::Solve;
  Json domain;       ///< null when the kind needs none
  Json coefficient;  ///< null when the kind needs none
  Json datum;
  std::vector<double> mesh_sizes;
  std::string output_dir;
  std::uint64_t seed = 0;
  Json params = Json::object();
  std::vector<CheckSpec> checks;

  /// Validates field types, family names and mesh-size ordering; throws
  /// ConfigError with the offending field.
  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
};

struct CheckOutcome {
  CheckSpec spec;
  double value = 0.0;
  bool passed = false;
};

struct ExperimentResult {
  Json report;
  std::map<std::string, double> metrics;
  std::vector<CheckOutcome> checks;
  /// Auxiliary files (name, content) written next to the report.
  std::vector<std::pair<std::string, std::string>> artifacts;

  bool passed() const;
};

/// Runs one experiment. Independent instances (seeds, layouts) are spread
/// over at most `threads` workers; results are gathered in a fixed order, so
/// the report does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads);

/// LAB_THREADS when set to a positive integer, otherwise the hardware count.
int lab_threads();

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

struct RunOutcome {
  int exit_code = 0;  ///< 0 pass, 2 invariant failure
  std::string report_path;
  ExperimentResult result;
};

/// Runs and persists report.json, metadata.json and artifacts into
/// `output_dir` (the configured directory when empty).
RunOutcome run_and_persist(const ExperimentConfig& config, const std::string& output_dir, int threads,
                           std::ostream& log);

struct CannedExperiment {
  std::string name;
  std::string description;
  Json config;
};

const std::vector<CannedExperiment>& canned_catalog();
std::optional<Json> canned_config(const std::string& name);

}  // namespace sigmalab
