// Command-line front end: run Monte Carlo experiments from a config file,
// solve/verify/dump a single explicit scenario.
// Exit codes: 0 success, 2 config error, 3 IO error, 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "rcbf/config.hpp"
#include "rcbf/experiments.hpp"
#include "rcbf/problems.hpp"
#include "rcbf/records.hpp"

namespace {

using namespace rcbf;

constexpr const char* kVersion = "rcbf 1.0.0";

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            bool has_seed, std::uint64_t seed, int threads) {
  RunManifest manifest;
  manifest.config_path = config_path;
  manifest.tool_version = kVersion;
  manifest.started_at = timestamp_utc_now();

  ExperimentConfig cfg = parse_experiment_config(load_config_file(config_path));
  if (!out_override.empty()) cfg.output_path = out_override;
  if (has_seed) cfg.base_seed = seed;
  if (threads > 0) cfg.threads = threads;
  cfg.validate();

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_path, ec);
  if (ec)
    throw IoError("cannot create output directory '" + cfg.output_path +
                  "': " + ec.message());

  const ExperimentResult result = run_experiment(cfg, &std::cerr);

  manifest.resolved_config = render_experiment_config(cfg);
  write_file_atomic(join_path(cfg.output_path, "trials.csv"),
                    render_trials_csv(cfg, result.records));
  write_file_atomic(join_path(cfg.output_path, "aggregate.csv"),
                    render_aggregate_csv(result.aggregates));
  write_file_atomic(join_path(cfg.output_path, "resolved.cfg"),
                    manifest.resolved_config);
  manifest.outputs = {"trials.csv", "aggregate.csv", "resolved.cfg"};
  manifest.finished_at = timestamp_utc_now();
  write_file_atomic(join_path(cfg.output_path, "manifest.json"),
                    render_manifest(manifest));

  int solved = 0, total = 0;
  for (const auto& rec : result.records)
    for (const auto& out : rec.outcomes) {
      ++total;
      if (out.status == SolveStatus::Optimal) ++solved;
    }
  std::cout << "wrote trials.csv, aggregate.csv, resolved.cfg, manifest.json to "
            << cfg.output_path << " (" << solved << "/" << total
            << " solves optimal)\n";
  return 0;
}

int cmd_solve(const std::string& config_path, const std::string& out_path,
              std::uint64_t seed, int samples) {
  const ScenarioProblem sp = parse_scenario(load_config_file(config_path));
  const SdrSolution sol = solve_design(sp.kind, sp.channels, sp.system);

  ExtractionResult ex;
  bool have_ex = false;
  if (sol.status == SolveStatus::Optimal) {
    ExtractionOptions opts;
    opts.seed = seed;
    opts.rescale_samples = samples;
    ex = extract_beamformers(sol, sp.channels, sp.system, opts);
    have_ex = true;
  }

  write_file_atomic(out_path, render_solution_record(sp, sol, have_ex ? &ex : nullptr));
  std::cout << "status " << to_string(sol.status);
  if (sol.status == SolveStatus::Optimal)
    std::cout << ", objective " << format_double(sol.objective) << " W";
  std::cout << " -> " << out_path << "\n";
  return sol.status == SolveStatus::NumericalFailure ? 4 : 0;
}

int cmd_verify(const std::string& solution_path, const std::string& config_path,
               int samples, std::uint64_t seed) {
  const ScenarioProblem sp = parse_scenario(load_config_file(config_path));
  const SolutionRecord rec = parse_solution_record(read_text_file(solution_path));
  if (rec.beams.num_cells != sp.system.num_cells ||
      rec.beams.users_per_cell != sp.system.users_per_cell ||
      rec.beams.num_antennas != sp.system.num_antennas)
    throw ConfigError("solution and scenario dimensions do not match");
  if (!rec.has_beams)
    throw ConfigError("solution record has no extracted beamformers to verify");

  int failures = 0;
  for (int i = 0; i < sp.system.num_cells; ++i)
    for (int k = 0; k < sp.system.users_per_cell; ++k) {
      const int u = sp.system.user_index(i, k);
      const double worst_db = linear_to_db(sampled_worst_sinr(
          sp.channels, rec.beams, sp.system, i, k, samples, seed));
      const double target_db = linear_to_db(sp.system.sinr_targets[u]);
      const bool pass = worst_db >= target_db - 1e-4;
      if (!pass) ++failures;
      std::cout << "user (" << i << "," << k << "): worst "
                << format_double(worst_db) << " dB, target "
                << format_double(target_db) << " dB -> "
                << (pass ? "PASS" : "FAIL") << "\n";
    }
  std::cout << (failures == 0 ? "all users meet the target" :
                std::to_string(failures) + " user(s) below the target")
            << " over " << samples << " samples\n";
  return 0;
}

int cmd_dump(const std::string& config_path, const std::string& out_path) {
  const ScenarioProblem sp = parse_scenario(load_config_file(config_path));
  const ConicProblem problem = to_conic(make_design(sp.kind, sp.channels, sp.system));
  if (out_path.empty() || out_path == "-") {
    dump_problem(problem, std::cout);
  } else {
    std::ostringstream os;
    dump_problem(problem, os);
    write_file_atomic(out_path, os.str());
    std::cout << "wrote conic problem to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"worst-case robust multicell coordinated beamforming toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_path, solution_path;
  std::uint64_t seed = 0;
  int threads = 0, samples = 0;

  CLI::App* run = app.add_subcommand("run", "run a Monte Carlo experiment config");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_path, "output directory (overrides config)");
  CLI::Option* run_seed = run->add_option("--seed", seed, "override base_seed");
  run->add_option("--threads", threads, "worker thread cap");

  CLI::App* solve = app.add_subcommand("solve", "solve one explicit scenario file");
  solve->add_option("--config", config_path, "scenario file")->required();
  solve->add_option("--out", out_path, "solution record path")
      ->default_val("solution.json");
  solve->add_option("--seed", seed, "extraction randomization seed");
  solve->add_option("--samples", samples, "error samples for extraction rescaling")
      ->default_val(1000);

  CLI::App* verify = app.add_subcommand(
      "verify", "check a solution record against the sampling oracle");
  verify->add_option("solution", solution_path, "solution record file")->required();
  verify->add_option("--config", config_path, "scenario file")->required();
  verify->add_option("--samples", samples, "error samples per user")->default_val(100);
  verify->add_option("--seed", seed, "sampling seed");

  CLI::App* dump = app.add_subcommand("dump-conic", "dump the standard-form conic problem");
  dump->add_option("--config", config_path, "scenario file")->required();
  dump->add_option("--out", out_path, "output file ('-' for stdout)")->default_val("-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed())
      return cmd_run(config_path, out_path, run_seed->count() > 0, seed, threads);
    if (solve->parsed()) return cmd_solve(config_path, out_path, seed, samples);
    if (verify->parsed()) return cmd_verify(solution_path, config_path, samples, seed);
    if (dump->parsed()) return cmd_dump(config_path, out_path);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
