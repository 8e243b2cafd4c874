#include "rcbf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace rcbf {
namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Per-draw sub-seeds: independent of gamma so channels and evaluation errors
// are shared across the whole grid, and spaced so the streams never collide.
std::uint64_t sub_seed(std::uint64_t base, int draw, int salt) {
  return base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(draw + 1) +
         static_cast<std::uint64_t>(salt);
}

struct TrialInputs {
  ChannelSet channels;
  std::vector<std::vector<VectorXcd>> realized;  // per error set, per link
};

TrialInputs make_trial_inputs(const ExperimentConfig& cfg, int draw) {
  TrialInputs in;
  Layout layout = generate_layout(cfg.scenario, cfg.num_cells, cfg.users_per_cell,
                                  sub_seed(cfg.base_seed, draw, 0));
  in.channels = generate_channels(layout, cfg.scenario, cfg.num_antennas,
                                  sub_seed(cfg.base_seed, draw, 1));
  Rng err_rng(sub_seed(cfg.base_seed, draw, 2));
  in.realized.resize(cfg.num_error_draws);
  for (int s = 0; s < cfg.num_error_draws; ++s)
    in.realized[s] = perturb(in.channels, draw_error_set(in.channels, err_rng));
  return in;
}

double min_sampled_sinr_db(const TrialInputs& in, const BeamformerSet& beams,
                           const SystemConfig& sys) {
  double worst = std::numeric_limits<double>::infinity();
  std::vector<VectorXcd> user_channels(sys.num_cells);
  for (const auto& realized : in.realized)
    for (int i = 0; i < sys.num_cells; ++i)
      for (int k = 0; k < sys.users_per_cell; ++k) {
        for (int j = 0; j < sys.num_cells; ++j)
          user_channels[j] = realized[in.channels.link_index(j, i, k)];
        worst = std::min(worst, compute_sinr(user_channels, i, k, beams, sys));
      }
  return linear_to_db(worst);
}

TrialRecord run_trial(const ExperimentConfig& cfg, const TrialInputs& in, int draw,
                      double gamma_db) {
  TrialRecord rec;
  rec.trial_index = draw;
  rec.gamma_db = gamma_db;
  const SystemConfig sys = cfg.system_for(gamma_db);

  for (size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodOutcome out;
    out.kind = cfg.methods[m];
    const auto t0 = std::chrono::steady_clock::now();

    SdrSolution sol = solve_design(out.kind, in.channels, sys, cfg.solver);
    out.status = sol.status;
    if (sol.status == SolveStatus::Optimal) {
      out.sum_power_watts = sol.objective;
      out.max_rank_gap = sol.rank_one_gap.size() ? sol.rank_one_gap.maxCoeff() : 0.0;
      out.rank_one = out.max_rank_gap <= kRankOneThreshold;
      ExtractionOptions ex_opts;
      ex_opts.randomization_trials = cfg.extraction_trials;
      ex_opts.rescale_samples = cfg.rescale_samples;
      ex_opts.seed = sub_seed(cfg.base_seed, draw, 3) + m;
      ExtractionResult ex;
      try {
        ex = extract_beamformers(sol, in.channels, sys, ex_opts);
      } catch (const std::exception&) {
        ex.success = false;  // a degenerate W must not abort the whole sweep
      }
      out.extraction_ok = ex.success;
      if (ex.success) out.min_sinr_db = min_sampled_sinr_db(in, ex.beams, sys);
    }

    if (cfg.record_timing) {
      const auto t1 = std::chrono::steady_clock::now();
      out.solve_time_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    rec.outcomes.push_back(out);
  }
  return rec;
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.validate();
  require(num_cells == 1 || num_cells == 3, "num_cells must be 1 or 3");
  require(users_per_cell >= 1, "users_per_cell must be >= 1");
  require(num_antennas >= 1, "num_antennas must be >= 1");
  require(power_weight > 0, "power_weight must be positive");
  require(interference_cap_watts >= 0, "interference_cap_watts must be >= 0");
  require(!gamma_grid_db.empty(), "gamma grid must be nonempty");
  for (double g : gamma_grid_db)
    require(std::isfinite(g), "gamma grid entries must be finite");
  require(num_channel_draws >= 1, "num_channel_draws must be >= 1");
  require(num_error_draws >= 1, "num_error_draws must be >= 1");
  require(!methods.empty(), "at least one method required");
  for (size_t a = 0; a < methods.size(); ++a)
    for (size_t b = a + 1; b < methods.size(); ++b)
      require(methods[a] != methods[b], "duplicate method");
  require(extraction_trials >= 1, "extraction_trials must be >= 1");
  require(rescale_samples >= 1, "rescale_samples must be >= 1");
  require(threads >= 1, "threads must be >= 1");
}

SystemConfig ExperimentConfig::system_for(double gamma_db) const {
  const double noise = dbm_to_watts(scenario.noise_power_dbm);
  const double cap = interference_cap_watts > 0 ? interference_cap_watts : noise;
  return SystemConfig::uniform(num_cells, users_per_cell, num_antennas,
                               db_to_linear(gamma_db), noise, cap, power_weight);
}

bool TrialRecord::all_feasible() const {
  for (const auto& out : outcomes)
    if (out.status != SolveStatus::Optimal) return false;
  return !outcomes.empty();
}

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg,
                                    const std::vector<TrialRecord>& records) {
  require(!records.empty(), "no records to aggregate");
  std::vector<AggregateRow> rows;
  for (double gamma : cfg.gamma_grid_db) {
    std::vector<const TrialRecord*> at_gamma;
    for (const auto& rec : records)
      if (rec.gamma_db == gamma) at_gamma.push_back(&rec);
    int all_feasible = 0;
    for (const TrialRecord* rec : at_gamma)
      if (rec->all_feasible()) ++all_feasible;

    for (size_t m = 0; m < cfg.methods.size(); ++m) {
      AggregateRow row;
      row.gamma_db = gamma;
      row.kind = cfg.methods[m];
      row.trials = static_cast<int>(at_gamma.size());
      row.all_feasible = all_feasible;
      double power_sum = 0.0, sinr_sum = 0.0;
      int sinr_count = 0, rank_one = 0;
      for (const TrialRecord* rec : at_gamma) {
        const MethodOutcome& out = rec->outcomes[m];
        if (out.status == SolveStatus::Optimal) {
          ++row.solved;
          if (out.rank_one) ++rank_one;
        }
        if (rec->all_feasible()) {
          power_sum += out.sum_power_watts;
          if (out.extraction_ok) {
            sinr_sum += out.min_sinr_db;
            ++sinr_count;
          }
        }
      }
      row.feasibility_pct = row.trials ? 100.0 * row.solved / row.trials : 0.0;
      row.rank_one_pct = row.solved ? 100.0 * rank_one / row.solved : kNan;
      row.insufficient_data = all_feasible == 0;
      row.avg_power_dbm =
          all_feasible ? watts_to_dbm(power_sum / all_feasible) : kNan;
      row.avg_min_sinr_db = sinr_count ? sinr_sum / sinr_count : kNan;
      rows.push_back(row);
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate();
  const int num_gammas = static_cast<int>(cfg.gamma_grid_db.size());
  const int total = num_gammas * cfg.num_channel_draws;

  ExperimentResult result;
  result.records.resize(total);

  // Tasks grouped by draw so each worker builds a draw's channels and error
  // sets once and reuses them across the gamma grid.
  std::atomic<int> next_draw{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;

  auto worker = [&]() {
    for (int draw; (draw = next_draw.fetch_add(1)) < cfg.num_channel_draws;) {
      const TrialInputs in = make_trial_inputs(cfg, draw);
      for (int g = 0; g < num_gammas; ++g) {
        result.records[g * cfg.num_channel_draws + draw] =
            run_trial(cfg, in, draw, cfg.gamma_grid_db[g]);
        const int finished = done.fetch_add(1) + 1;
        if (progress && (finished % 100 == 0 || finished == total)) {
          std::lock_guard<std::mutex> lock(progress_mutex);
          *progress << "trials " << finished << "/" << total << "\n";
        }
      }
    }
  };

  const int workers = std::min(cfg.threads, cfg.num_channel_draws);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  result.aggregates = aggregate(cfg, result.records);
  return result;
}

}  // namespace rcbf
