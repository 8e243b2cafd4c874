#pragma once

// Monte Carlo driver: sweeps target SINR over random channel draws, solves
// the requested designs on identical inputs, extracts beamformers, and scores
// the sampled worst-case SINR against shared error sets so methods are
// compared pairwise on the same randomness.
//
// All per-trial seeds derive from (base_seed, draw index) only, so trial
// results are independent of the gamma grid position, thread count, and
// completion order; reruns of the same config are bitwise identical.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcbf/channel.hpp"
#include "rcbf/model.hpp"
#include "rcbf/problems.hpp"

namespace rcbf {

struct ExperimentConfig {
  int num_cells = 3;
  int users_per_cell = 2;
  int num_antennas = 5;
  double power_weight = 1.0;
  double interference_cap_watts = 0.0;  // 0: equal to the noise power
  ScenarioConfig scenario;
  std::vector<double> gamma_grid_db{1, 3, 5, 7, 9, 11};
  int num_channel_draws = 200;
  int num_error_draws = 100;
  std::vector<DesignKind> methods{DesignKind::NominalMcbf, DesignKind::NominalSbf,
                                  DesignKind::RobustMcbf, DesignKind::RobustSbf};
  std::uint64_t base_seed = 0;
  std::string output_path = ".";
  SolverOptions solver;
  int extraction_trials = 50;
  int rescale_samples = 1000;
  bool record_timing = false;  // off by default so reruns are bitwise equal
  int threads = 1;

  void validate() const;  // throws std::invalid_argument
  // Uniform per-user targets/noise/caps at the given target SINR.
  SystemConfig system_for(double gamma_db) const;
};

struct MethodOutcome {
  DesignKind kind = DesignKind::NominalMcbf;
  SolveStatus status = SolveStatus::NumericalFailure;
  double sum_power_watts = 0.0;  // meaningful iff status == Optimal
  bool rank_one = false;         // every user gap <= threshold (iff Optimal)
  double max_rank_gap = 0.0;
  bool extraction_ok = false;
  double min_sinr_db = 0.0;  // meaningful iff extraction_ok
  double solve_time_ms = 0.0;
};

struct TrialRecord {
  int trial_index = 0;
  double gamma_db = 0.0;
  std::vector<MethodOutcome> outcomes;  // parallel to ExperimentConfig::methods

  bool all_feasible() const;  // every method solved to optimality
};

struct AggregateRow {
  double gamma_db = 0.0;
  DesignKind kind = DesignKind::NominalMcbf;
  int trials = 0;        // trials at this gamma
  int solved = 0;        // status == Optimal
  int all_feasible = 0;  // trials where every requested method solved
  double feasibility_pct = 0.0;
  // Over all-feasible trials; NaN when the intersection is empty.
  double avg_power_dbm = 0.0;
  double avg_min_sinr_db = 0.0;  // average of per-trial minima
  double rank_one_pct = 0.0;     // over solved trials
  bool insufficient_data = false;
};

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg,
                                    const std::vector<TrialRecord>& records);

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (gamma grid position, draw)
  std::vector<AggregateRow> aggregates;
};

// Runs the full sweep; progress notes go to *progress when given.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::ostream* progress = nullptr);

}  // namespace rcbf
