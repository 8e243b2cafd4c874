#include "rcbf/records.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rcbf {
namespace {

using nlohmann::json;

json complex_json(const std::complex<double>& z) {
  return json::array({z.real(), z.imag()});
}

json vector_json(const VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v[i]));
  return out;
}

json matrix_json(const MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json real_vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

SolveStatus parse_status(const std::string& text) {
  for (SolveStatus s : {SolveStatus::Optimal, SolveStatus::PrimalInfeasible,
                        SolveStatus::DualInfeasible, SolveStatus::IterationLimit,
                        SolveStatus::NumericalFailure})
    if (text == to_string(s)) return s;
  throw ConfigError("unknown status '" + text + "' in solution record");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "': " + std::strerror(errno));
    out << content;
    out.flush();
    if (!out) throw IoError("error writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot rename '" + tmp + "' to '" + path + "': " +
                  std::strerror(errno));
}

std::string render_trials_csv(const ExperimentConfig& cfg,
                              const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "trial,gamma_db,method,status,power_dbm,min_sinr_db,rank_one,ms\n";
  for (const TrialRecord& rec : records)
    for (size_t m = 0; m < rec.outcomes.size(); ++m) {
      const MethodOutcome& out = rec.outcomes[m];
      os << rec.trial_index << ',' << format_double(rec.gamma_db) << ','
         << to_string(cfg.methods[m]) << ',' << to_string(out.status) << ',';
      if (out.status == SolveStatus::Optimal)
        os << format_double(watts_to_dbm(out.sum_power_watts));
      os << ',';
      if (out.extraction_ok) os << format_double(out.min_sinr_db);
      os << ',';
      if (out.status == SolveStatus::Optimal) os << (out.rank_one ? '1' : '0');
      os << ',' << format_double(out.solve_time_ms) << '\n';
    }
  return os.str();
}

std::string render_aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "gamma_db,method,trials,solved,all_feasible,feasibility_pct,"
        "avg_power_dbm,avg_min_sinr_db,rank_one_pct,insufficient_data\n";
  for (const AggregateRow& row : rows) {
    os << format_double(row.gamma_db) << ',' << to_string(row.kind) << ','
       << row.trials << ',' << row.solved << ',' << row.all_feasible << ','
       << format_double(row.feasibility_pct) << ',';
    if (!std::isnan(row.avg_power_dbm)) os << format_double(row.avg_power_dbm);
    os << ',';
    if (!std::isnan(row.avg_min_sinr_db)) os << format_double(row.avg_min_sinr_db);
    os << ',';
    if (!std::isnan(row.rank_one_pct)) os << format_double(row.rank_one_pct);
    os << ',' << (row.insufficient_data ? '1' : '0') << '\n';
  }
  return os.str();
}

std::string render_experiment_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "gamma_grid_db =";
  for (double g : cfg.gamma_grid_db) os << ' ' << format_double(g);
  os << "\nnum_channel_draws = " << cfg.num_channel_draws;
  os << "\nnum_error_draws = " << cfg.num_error_draws;
  os << "\nmethods =";
  for (DesignKind k : cfg.methods) os << ' ' << to_string(k);
  os << "\nbase_seed = " << cfg.base_seed;
  os << "\noutput_path = " << cfg.output_path;
  os << "\nextraction_trials = " << cfg.extraction_trials;
  os << "\nrescale_samples = " << cfg.rescale_samples;
  os << "\nrecord_timing = " << (cfg.record_timing ? "true" : "false");
  os << "\nthreads = " << cfg.threads << "\n";
  os << "\n[system]\n";
  os << "num_cells = " << cfg.num_cells;
  os << "\nusers_per_cell = " << cfg.users_per_cell;
  os << "\nnum_antennas = " << cfg.num_antennas;
  os << "\npower_weight = " << format_double(cfg.power_weight);
  os << "\ninterference_cap_watts = " << format_double(cfg.interference_cap_watts)
     << "\n";
  os << "\n[scenario]\n";
  os << "inter_bs_distance = " << format_double(cfg.scenario.inter_bs_distance);
  os << "\nmin_bs_ms_distance = " << format_double(cfg.scenario.min_bs_ms_distance);
  os << "\nshadowing_std_db = " << format_double(cfg.scenario.shadowing_std_db);
  os << "\nantenna_gain_dbi = " << format_double(cfg.scenario.antenna_gain_dbi);
  os << "\nerror_radius = " << format_double(cfg.scenario.error_radius);
  os << "\nnoise_power_dbm = " << format_double(cfg.scenario.noise_power_dbm) << "\n";
  os << "\n[solver]\n";
  os << "tol = " << format_double(cfg.solver.tol);
  os << "\ninfeas_tol = " << format_double(cfg.solver.infeas_tol);
  os << "\nmax_iter = " << cfg.solver.max_iter;
  os << "\nstatic_reg = " << format_double(cfg.solver.static_reg);
  os << "\nretry_reg = " << format_double(cfg.solver.retry_reg);
  os << "\nstep_fraction = " << format_double(cfg.solver.step_fraction);
  os << "\nstall_step = " << format_double(cfg.solver.stall_step) << "\n";
  return os.str();
}

std::string timestamp_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  gmtime_r(&now, &tm_utc);
  std::array<char, 32> buf;
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return std::string(buf.data());
}

std::string render_manifest(const RunManifest& manifest) {
  json j;
  j["record"] = "rcbf-run-manifest";
  j["version"] = 1;
  j["config_path"] = manifest.config_path;
  j["tool_version"] = manifest.tool_version;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["outputs"] = manifest.outputs;
  j["resolved_config"] = manifest.resolved_config;
  return j.dump(2) + "\n";
}

std::string render_solution_record(const ScenarioProblem& scenario,
                                   const SdrSolution& sol,
                                   const ExtractionResult* extraction) {
  const SystemConfig& cfg = scenario.system;
  json j;
  j["record"] = "rcbf-solution";
  j["version"] = 1;
  j["method"] = to_string(sol.kind);
  j["status"] = to_string(sol.status);
  j["objective_watts"] = sol.objective;
  j["iterations"] = sol.iterations;
  j["residuals"] = {{"primal", sol.residuals.primal},
                    {"dual", sol.residuals.dual},
                    {"gap", sol.residuals.gap}};
  j["system"] = {{"num_cells", cfg.num_cells},
                 {"users_per_cell", cfg.users_per_cell},
                 {"num_antennas", cfg.num_antennas},
                 {"power_weights", real_vector_json(cfg.power_weights)},
                 {"sinr_targets", real_vector_json(cfg.sinr_targets)},
                 {"noise_powers", real_vector_json(cfg.noise_powers)},
                 {"interference_caps", real_vector_json(cfg.interference_caps)}};

  if (sol.status == SolveStatus::Optimal) {
    json covs = json::array();
    for (int i = 0; i < cfg.num_cells; ++i)
      for (int k = 0; k < cfg.users_per_cell; ++k) {
        json entry;
        entry["cell"] = i;
        entry["user"] = k;
        entry["matrix"] = matrix_json(sol.covariances[cfg.user_index(i, k)]);
        covs.push_back(entry);
      }
    j["covariances"] = covs;
    j["rank_one_gap"] = real_vector_json(sol.rank_one_gap);
    if (sol.lambda_sinr.size()) j["lambda_sinr"] = real_vector_json(sol.lambda_sinr);
    if (sol.lambda_leak.size()) j["lambda_leak"] = real_vector_json(sol.lambda_leak);
    if (sol.slacks.size()) j["slacks"] = real_vector_json(sol.slacks);
  }
  if (sol.certificate.present) {
    j["certificate"] = {{"objective", sol.certificate.objective},
                        {"residual", sol.certificate.residual},
                        {"detail", sol.certificate.detail}};
  }
  if (!sol.infeasible_cells.empty()) j["infeasible_cells"] = sol.infeasible_cells;

  if (extraction) {
    json e;
    e["success"] = extraction->success;
    e["randomization_used"] = extraction->randomization_used;
    e["sampled_feasible_only"] = extraction->sampled_feasible_only;
    e["power_watts"] = extraction->power;
    e["power_ratio"] = extraction->power_ratio;
    if (extraction->success) {
      json beams = json::array();
      for (int i = 0; i < cfg.num_cells; ++i)
        for (int k = 0; k < cfg.users_per_cell; ++k) {
          json entry;
          entry["cell"] = i;
          entry["user"] = k;
          entry["vector"] =
              vector_json(extraction->beams.vectors[cfg.user_index(i, k)]);
          beams.push_back(entry);
        }
      e["beams"] = beams;
    }
    j["extraction"] = e;
  }
  return j.dump(2) + "\n";
}

SolutionRecord parse_solution_record(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solution record is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("record").get<std::string>() != "rcbf-solution")
      throw ConfigError("not a solution record");
    SolutionRecord rec;
    if (!parse_design_kind(j.at("method").get<std::string>(), rec.kind))
      throw ConfigError("unknown method in solution record");
    rec.status = parse_status(j.at("status").get<std::string>());
    rec.objective = j.at("objective_watts").get<double>();
    const json& sys = j.at("system");
    rec.beams.num_cells = sys.at("num_cells").get<int>();
    rec.beams.users_per_cell = sys.at("users_per_cell").get<int>();
    rec.beams.num_antennas = sys.at("num_antennas").get<int>();
    if (j.contains("extraction") && j["extraction"].value("success", false) &&
        j["extraction"].contains("beams")) {
      const int users = rec.beams.num_cells * rec.beams.users_per_cell;
      rec.beams.vectors.assign(users, VectorXcd::Zero(rec.beams.num_antennas));
      for (const json& entry : j["extraction"]["beams"]) {
        const int u = rec.beams.user_index(entry.at("cell").get<int>(),
                                           entry.at("user").get<int>());
        const json& vec = entry.at("vector");
        if (static_cast<int>(vec.size()) != rec.beams.num_antennas)
          throw ConfigError("beam vector length mismatch in solution record");
        for (int r = 0; r < rec.beams.num_antennas; ++r)
          rec.beams.vectors[u][r] = {vec[r].at(0).get<double>(),
                                     vec[r].at(1).get<double>()};
      }
      rec.has_beams = true;
    }
    return rec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed solution record: ") + e.what());
  }
}

}  // namespace rcbf
