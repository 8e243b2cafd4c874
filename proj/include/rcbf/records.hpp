#pragma once

// Output artifacts: trial and aggregate CSVs, JSON solution records, the run
// manifest, and a resolved-config echo that parses back to the same
// experiment.  All numeric text uses shortest round-trip formatting so equal
// runs produce byte-identical files.

#include <string>
#include <vector>

#include "rcbf/config.hpp"
#include "rcbf/experiments.hpp"
#include "rcbf/problems.hpp"

namespace rcbf {

std::string format_double(double v);  // shortest round-trip decimal

// Writes via a temp file in the same directory plus rename; IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

std::string render_trials_csv(const ExperimentConfig& cfg,
                              const std::vector<TrialRecord>& records);
std::string render_aggregate_csv(const std::vector<AggregateRow>& rows);

// The experiment config with every effective value spelled out, in the
// config grammar; parse_experiment_config(parse_config_text(echo)) == cfg.
std::string render_experiment_config(const ExperimentConfig& cfg);

struct RunManifest {
  std::string config_path;
  std::string tool_version;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;
  std::vector<std::string> outputs;  // paths relative to the output directory
  std::string resolved_config;       // echo of the effective config
};

std::string timestamp_utc_now();
std::string render_manifest(const RunManifest& manifest);  // JSON

// Solution record for one explicit scenario: status, objective, covariances,
// multipliers, extracted beams; complex numbers as [re, im].
std::string render_solution_record(const ScenarioProblem& scenario,
                                   const SdrSolution& sol,
                                   const ExtractionResult* extraction);

// The subset of a solution record that verification needs.
struct SolutionRecord {
  DesignKind kind = DesignKind::RobustMcbf;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  bool has_beams = false;
  BeamformerSet beams;
};

SolutionRecord parse_solution_record(const std::string& json_text);  // ConfigError

}  // namespace rcbf
