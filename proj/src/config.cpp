#include "rcbf/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace rcbf {
namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) fail("trailing characters in value of '" + key + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail("value of '" + key + "' is not a number: '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size()) fail("trailing characters in value of '" + key + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail("value of '" + key + "' is not an integer: '" + value + "'");
  }
}

std::uint64_t parse_uint64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) fail("trailing characters in value of '" + key + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail("value of '" + key + "' is not an unsigned integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail("value of '" + key + "' is not a boolean: '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& tok : split_ws(value)) out.push_back(parse_double(key, tok));
  if (out.empty()) fail("value of '" + key + "' is empty");
  return out;
}

// A single value broadcasts to `count` entries; otherwise the count must match.
VectorXd parse_vector(const std::string& key, const std::string& value, int count) {
  std::vector<double> vals = parse_double_list(key, value);
  if (vals.size() == 1) return VectorXd::Constant(count, vals[0]);
  if (static_cast<int>(vals.size()) != count)
    fail("'" + key + "' needs 1 or " + std::to_string(count) + " values, got " +
         std::to_string(vals.size()));
  return Eigen::Map<VectorXd>(vals.data(), count);
}

// Guard against silently ignored settings: every present key must be known.
void check_keys(const ConfigSection& section, const std::set<std::string>& known) {
  for (const auto& [key, value] : section.entries)
    if (!known.count(key))
      fail("unknown key '" + key + "' in section [" + section.name + "]");
}

void check_sections(const ParsedConfig& parsed, const std::set<std::string>& known) {
  for (const auto& s : parsed.sections)
    if (!known.count(s.name)) fail("unknown section [" + s.name + "]");
}

}  // namespace

const std::string* ConfigSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

const ConfigSection* ParsedConfig::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

bool ParsedConfig::empty() const {
  for (const auto& s : sections)
    if (!s.entries.empty()) return false;
  return true;
}

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail("line " + std::to_string(lineno) + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) fail("line " + std::to_string(lineno) + ": empty section name");
      if (out.find(name))
        fail("line " + std::to_string(lineno) + ": duplicate section [" + name + "]");
      out.sections.push_back({name, {}});
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail("line " + std::to_string(lineno) + ": expected 'key = value'");
    if (out.sections.empty())
      fail("line " + std::to_string(lineno) + ": entry before any [section] header");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("line " + std::to_string(lineno) + ": empty key");
    if (out.sections.back().find(key))
      fail("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out.sections.back().entries.emplace_back(key, value);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return buf.str();
}

ParsedConfig load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

ExperimentConfig parse_experiment_config(const ParsedConfig& parsed) {
  if (parsed.empty()) fail("config is empty");
  check_sections(parsed, {"experiment", "system", "scenario", "solver"});

  ExperimentConfig cfg;
  bool have_seed = false;

  if (const ConfigSection* s = parsed.find("experiment")) {
    check_keys(*s, {"gamma_grid_db", "num_channel_draws", "num_error_draws", "methods",
                    "base_seed", "output_path", "extraction_trials", "rescale_samples",
                    "record_timing", "threads"});
    if (const auto* v = s->find("gamma_grid_db")) cfg.gamma_grid_db = parse_double_list("gamma_grid_db", *v);
    if (const auto* v = s->find("num_channel_draws"))
      cfg.num_channel_draws = static_cast<int>(parse_int("num_channel_draws", *v));
    if (const auto* v = s->find("num_error_draws"))
      cfg.num_error_draws = static_cast<int>(parse_int("num_error_draws", *v));
    if (const auto* v = s->find("methods")) {
      cfg.methods.clear();
      for (const std::string& tok : split_ws(*v)) {
        DesignKind kind;
        if (!parse_design_kind(tok, kind)) fail("unknown method '" + tok + "'");
        cfg.methods.push_back(kind);
      }
    }
    if (const auto* v = s->find("base_seed")) {
      cfg.base_seed = parse_uint64("base_seed", *v);
      have_seed = true;
    }
    if (const auto* v = s->find("output_path")) cfg.output_path = *v;
    if (const auto* v = s->find("extraction_trials"))
      cfg.extraction_trials = static_cast<int>(parse_int("extraction_trials", *v));
    if (const auto* v = s->find("rescale_samples"))
      cfg.rescale_samples = static_cast<int>(parse_int("rescale_samples", *v));
    if (const auto* v = s->find("record_timing"))
      cfg.record_timing = parse_bool("record_timing", *v);
    if (const auto* v = s->find("threads"))
      cfg.threads = static_cast<int>(parse_int("threads", *v));
  }
  if (!have_seed) fail("experiment.base_seed is required");

  if (const ConfigSection* s = parsed.find("system")) {
    check_keys(*s, {"num_cells", "users_per_cell", "num_antennas", "power_weight",
                    "interference_cap_watts"});
    if (const auto* v = s->find("num_cells"))
      cfg.num_cells = static_cast<int>(parse_int("num_cells", *v));
    if (const auto* v = s->find("users_per_cell"))
      cfg.users_per_cell = static_cast<int>(parse_int("users_per_cell", *v));
    if (const auto* v = s->find("num_antennas"))
      cfg.num_antennas = static_cast<int>(parse_int("num_antennas", *v));
    if (const auto* v = s->find("power_weight"))
      cfg.power_weight = parse_double("power_weight", *v);
    if (const auto* v = s->find("interference_cap_watts"))
      cfg.interference_cap_watts = parse_double("interference_cap_watts", *v);
  }

  if (const ConfigSection* s = parsed.find("scenario")) {
    check_keys(*s, {"inter_bs_distance", "min_bs_ms_distance", "shadowing_std_db",
                    "antenna_gain_dbi", "error_radius", "noise_power_dbm"});
    if (const auto* v = s->find("inter_bs_distance"))
      cfg.scenario.inter_bs_distance = parse_double("inter_bs_distance", *v);
    if (const auto* v = s->find("min_bs_ms_distance"))
      cfg.scenario.min_bs_ms_distance = parse_double("min_bs_ms_distance", *v);
    if (const auto* v = s->find("shadowing_std_db"))
      cfg.scenario.shadowing_std_db = parse_double("shadowing_std_db", *v);
    if (const auto* v = s->find("antenna_gain_dbi"))
      cfg.scenario.antenna_gain_dbi = parse_double("antenna_gain_dbi", *v);
    if (const auto* v = s->find("error_radius"))
      cfg.scenario.error_radius = parse_double("error_radius", *v);
    if (const auto* v = s->find("noise_power_dbm"))
      cfg.scenario.noise_power_dbm = parse_double("noise_power_dbm", *v);
  }

  if (const ConfigSection* s = parsed.find("solver")) {
    check_keys(*s, {"tol", "infeas_tol", "max_iter", "static_reg", "retry_reg",
                    "step_fraction", "stall_step"});
    if (const auto* v = s->find("tol")) cfg.solver.tol = parse_double("tol", *v);
    if (const auto* v = s->find("infeas_tol"))
      cfg.solver.infeas_tol = parse_double("infeas_tol", *v);
    if (const auto* v = s->find("max_iter"))
      cfg.solver.max_iter = static_cast<int>(parse_int("max_iter", *v));
    if (const auto* v = s->find("static_reg"))
      cfg.solver.static_reg = parse_double("static_reg", *v);
    if (const auto* v = s->find("retry_reg"))
      cfg.solver.retry_reg = parse_double("retry_reg", *v);
    if (const auto* v = s->find("step_fraction"))
      cfg.solver.step_fraction = parse_double("step_fraction", *v);
    if (const auto* v = s->find("stall_step"))
      cfg.solver.stall_step = parse_double("stall_step", *v);
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid experiment config: ") + e.what());
  }
  return cfg;
}

namespace {

// Parse "re im re im ..." into a complex vector of the given length.
VectorXcd parse_complex_vector(const std::string& key, const std::string& value, int n) {
  std::vector<double> vals = parse_double_list(key, value);
  if (static_cast<int>(vals.size()) != 2 * n)
    fail("'" + key + "' needs " + std::to_string(2 * n) + " numbers (re im pairs), got " +
         std::to_string(vals.size()));
  VectorXcd out(n);
  for (int i = 0; i < n; ++i) out[i] = {vals[2 * i], vals[2 * i + 1]};
  return out;
}

MatrixXcd parse_complex_matrix(const std::string& key, const std::string& value, int n) {
  std::vector<double> vals = parse_double_list(key, value);
  if (static_cast<int>(vals.size()) != 2 * n * n)
    fail("'" + key + "' needs " + std::to_string(2 * n * n) +
         " numbers (row-major re im pairs), got " + std::to_string(vals.size()));
  MatrixXcd out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out(r, c) = {vals[2 * (r * n + c)], vals[2 * (r * n + c) + 1]};
  return out;
}

// Link keys look like "h 0 1 0" / "eps 0 1 0" / "shape 0 1 0".
bool parse_link_key(const std::string& key, const std::string& prefix, int nc, int nk,
                    int out[3]) {
  std::vector<std::string> toks = split_ws(key);
  if (toks.size() != 4 || toks[0] != prefix) return false;
  for (int t = 0; t < 3; ++t) {
    const std::string& tok = toks[t + 1];
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) {
          return std::isdigit(c);
        }))
      fail("bad link index in '" + key + "'");
    out[t] = static_cast<int>(parse_int(key, tok));
  }
  if (out[0] < 0 || out[0] >= nc || out[1] < 0 || out[1] >= nc || out[2] < 0 ||
      out[2] >= nk)
    fail("link index out of range in '" + key + "'");
  return true;
}

}  // namespace

ScenarioProblem parse_scenario(const ParsedConfig& parsed) {
  if (parsed.empty()) fail("scenario is empty");
  check_sections(parsed, {"problem", "system", "channels"});

  ScenarioProblem out;

  const ConfigSection* prob = parsed.find("problem");
  if (!prob) fail("missing [problem] section");
  check_keys(*prob, {"method"});
  const std::string* method = prob->find("method");
  if (!method) fail("problem.method is required");
  if (!parse_design_kind(*method, out.kind)) fail("unknown method '" + *method + "'");

  const ConfigSection* sys = parsed.find("system");
  if (!sys) fail("missing [system] section");
  check_keys(*sys, {"num_cells", "users_per_cell", "num_antennas", "power_weights",
                    "sinr_targets", "noise_powers", "interference_caps"});
  const std::string* v_nc = sys->find("num_cells");
  const std::string* v_nk = sys->find("users_per_cell");
  const std::string* v_nt = sys->find("num_antennas");
  if (!v_nc || !v_nk || !v_nt)
    fail("system.num_cells, system.users_per_cell, system.num_antennas are required");
  SystemConfig& cfg = out.system;
  cfg.num_cells = static_cast<int>(parse_int("num_cells", *v_nc));
  cfg.users_per_cell = static_cast<int>(parse_int("users_per_cell", *v_nk));
  cfg.num_antennas = static_cast<int>(parse_int("num_antennas", *v_nt));
  if (cfg.num_cells < 1 || cfg.users_per_cell < 1 || cfg.num_antennas < 1)
    fail("system dimensions must be positive");

  const int users = cfg.num_users();
  const int caps = cfg.num_cells * (cfg.num_cells - 1) * cfg.users_per_cell;
  cfg.power_weights = VectorXd::Ones(cfg.num_cells);
  if (const auto* v = sys->find("power_weights"))
    cfg.power_weights = parse_vector("power_weights", *v, cfg.num_cells);
  const std::string* v_t = sys->find("sinr_targets");
  const std::string* v_n = sys->find("noise_powers");
  if (!v_t || !v_n) fail("system.sinr_targets and system.noise_powers are required");
  cfg.sinr_targets = parse_vector("sinr_targets", *v_t, users);
  cfg.noise_powers = parse_vector("noise_powers", *v_n, users);
  if (const auto* v = sys->find("interference_caps")) {
    cfg.interference_caps = parse_vector("interference_caps", *v, caps);
  } else if (caps == 0) {
    cfg.interference_caps = VectorXd(0);
  } else if (is_single_cell(out.kind)) {
    fail("system.interference_caps is required for single-cell methods");
  } else {
    // MCBF never reads the caps; keep the config valid with noise-level caps.
    cfg.interference_caps = cfg.noise_powers.segment(0, 1).replicate(caps, 1);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid system: ") + e.what());
  }

  const ConfigSection* chan = parsed.find("channels");
  if (!chan) fail("missing [channels] section");
  ChannelSet& ch = out.channels;
  ch.num_cells = cfg.num_cells;
  ch.users_per_cell = cfg.users_per_cell;
  ch.num_antennas = cfg.num_antennas;
  const int links = ch.num_links();
  ch.nominal.assign(links, VectorXcd());
  ch.ellipsoids.assign(links, ErrorEllipsoid::spherical(0.0, cfg.num_antennas));
  ch.large_scale_gains = VectorXd::Ones(links);

  double eps_all = 0.0;
  bool have_eps_all = false;
  std::vector<bool> have_h(links, false), have_set(links, false);
  for (const auto& [key, value] : chan->entries) {
    int idx[3];
    if (key == "eps_all") {
      eps_all = parse_double(key, value);
      have_eps_all = true;
    } else if (parse_link_key(key, "h", cfg.num_cells, cfg.users_per_cell, idx)) {
      const int link = ch.link_index(idx[0], idx[1], idx[2]);
      ch.nominal[link] = parse_complex_vector(key, value, cfg.num_antennas);
      have_h[link] = true;
    } else if (parse_link_key(key, "eps", cfg.num_cells, cfg.users_per_cell, idx)) {
      const int link = ch.link_index(idx[0], idx[1], idx[2]);
      if (have_set[link]) fail("duplicate error set for link in '" + key + "'");
      const double eps = parse_double(key, value);
      if (eps < 0) fail("'" + key + "' must be >= 0");
      ch.ellipsoids[link] = ErrorEllipsoid::spherical(eps, cfg.num_antennas);
      have_set[link] = true;
    } else if (parse_link_key(key, "shape", cfg.num_cells, cfg.users_per_cell, idx)) {
      const int link = ch.link_index(idx[0], idx[1], idx[2]);
      if (have_set[link]) fail("duplicate error set for link in '" + key + "'");
      try {
        ch.ellipsoids[link] =
            ErrorEllipsoid::general(parse_complex_matrix(key, value, cfg.num_antennas));
      } catch (const std::invalid_argument& e) {
        fail("bad shape matrix in '" + key + "': " + e.what());
      }
      have_set[link] = true;
    } else {
      fail("unknown key '" + key + "' in section [channels]");
    }
  }
  for (int j = 0; j < cfg.num_cells; ++j)
    for (int i = 0; i < cfg.num_cells; ++i)
      for (int k = 0; k < cfg.users_per_cell; ++k)
        if (!have_h[ch.link_index(j, i, k)])
          fail("missing channel 'h " + std::to_string(j) + " " + std::to_string(i) +
               " " + std::to_string(k) + "'");
  if (have_eps_all)
    for (int l = 0; l < links; ++l)
      if (!have_set[l])
        ch.ellipsoids[l] = ErrorEllipsoid::spherical(eps_all, cfg.num_antennas);
  try {
    ch.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid channels: ") + e.what());
  }
  return out;
}

}  // namespace rcbf
