#pragma once

// Flat key-value configuration: a strict INI-style grammar shared by the
// experiment config and the explicit-scenario file.  Unknown sections or
// keys, duplicates, and empty files are rejected rather than defaulted.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rcbf/experiments.hpp"
#include "rcbf/model.hpp"
#include "rcbf/problems.hpp"

namespace rcbf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
};

struct ParsedConfig {
  std::vector<ConfigSection> sections;

  const ConfigSection* find(const std::string& name) const;
  bool empty() const;
};

// Grammar: '[section]' headers, 'key = value' lines, '#' or ';' comments,
// blank lines ignored; keys may contain spaces (trimmed at both ends).
// Duplicate sections, duplicate keys within a section, and entries before
// the first header are errors.
ParsedConfig parse_config_text(const std::string& text);

std::string read_text_file(const std::string& path);  // IoError
ParsedConfig load_config_file(const std::string& path);

// Experiment config: sections [experiment], [system], [scenario], [solver];
// every key optional except experiment.base_seed; spec-named defaults
// otherwise.  Throws ConfigError on unknown keys or invalid values.
ExperimentConfig parse_experiment_config(const ParsedConfig& parsed);

// A fully explicit problem instance: [problem] method, [system] dimensions
// and per-user targets, [channels] nominal vectors and error sets.
struct ScenarioProblem {
  DesignKind kind = DesignKind::RobustMcbf;
  SystemConfig system;
  ChannelSet channels;
};

ScenarioProblem parse_scenario(const ParsedConfig& parsed);

}  // namespace rcbf
