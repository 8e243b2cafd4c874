#include "rcbf/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace rcbf {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

constexpr double kCellRadiusFactor = 1.0 / 1.7320508075688772;  // 1/sqrt(3)

}  // namespace

void ScenarioConfig::validate() const {
  require(min_bs_ms_distance > 0, "min_bs_ms_distance must be positive");
  require(inter_bs_distance > min_bs_ms_distance,
          "inter_bs_distance must exceed min_bs_ms_distance");
  require(shadowing_std_db >= 0, "shadowing_std_db must be >= 0");
  require(error_radius >= 0, "error_radius must be >= 0");
  require(std::isfinite(noise_power_dbm), "noise_power_dbm must be finite");
  require(std::isfinite(antenna_gain_dbi), "antenna_gain_dbi must be finite");
}

double Layout::distance(int src_cell, int cell, int user) const {
  return (bs_positions.at(src_cell) -
          ms_positions.at(static_cast<size_t>(cell) * users_per_cell + user))
      .norm();
}

void Layout::validate(const ScenarioConfig& cfg) const {
  require(!bs_positions.empty() && users_per_cell >= 1, "empty layout");
  require(ms_positions.size() ==
              bs_positions.size() * static_cast<size_t>(users_per_cell),
          "layout user count mismatch");
  for (int i = 0; i < num_cells(); ++i)
    for (int k = 0; k < users_per_cell; ++k)
      require(distance(i, i, k) >= cfg.min_bs_ms_distance - 1e-9,
              "user closer to its serving BS than the minimum distance");
}

Layout generate_layout(const ScenarioConfig& cfg, int num_cells, int users_per_cell,
                       std::uint64_t seed) {
  cfg.validate();
  require(num_cells == 1 || num_cells == 3, "supported cell counts are 1 and 3");
  require(users_per_cell >= 1, "users_per_cell must be >= 1");
  const double cell_radius = cfg.inter_bs_distance * kCellRadiusFactor;
  require(cfg.min_bs_ms_distance < cell_radius,
          "min_bs_ms_distance must be smaller than the cell radius");

  Layout layout;
  layout.users_per_cell = users_per_cell;
  const double d = cfg.inter_bs_distance;
  layout.bs_positions.emplace_back(0.0, 0.0);
  if (num_cells == 3) {
    layout.bs_positions.emplace_back(d, 0.0);
    layout.bs_positions.emplace_back(0.5 * d, 0.5 * std::sqrt(3.0) * d);
  }

  Rng rng(seed);
  for (int i = 0; i < num_cells; ++i)
    for (int k = 0; k < users_per_cell; ++k) {
      Eigen::Vector2d pos;
      double dist = 0.0;
      do {
        const double r = cell_radius * std::sqrt(rng.uniform());
        const double a = 2.0 * M_PI * rng.uniform();
        pos = layout.bs_positions[i] + r * Eigen::Vector2d(std::cos(a), std::sin(a));
        dist = (pos - layout.bs_positions[i]).norm();
      } while (dist < cfg.min_bs_ms_distance);
      layout.ms_positions.push_back(pos);
    }
  layout.validate(cfg);
  return layout;
}

double large_scale_gain(double distance_m, double shadow_db, double gain_dbi) {
  require(distance_m > 0, "distance must be positive");
  const double path_loss_db = 34.6 + 35.0 * std::log10(distance_m);
  return std::pow(10.0, -path_loss_db / 20.0) * std::pow(10.0, shadow_db / 20.0) *
         std::pow(10.0, gain_dbi / 20.0);
}

ChannelSet generate_channels(const Layout& layout, const ScenarioConfig& cfg,
                             int num_antennas, std::uint64_t seed) {
  cfg.validate();
  layout.validate(cfg);
  require(num_antennas >= 1, "num_antennas must be >= 1");

  ChannelSet set;
  set.num_cells = layout.num_cells();
  set.users_per_cell = layout.users_per_cell;
  set.num_antennas = num_antennas;
  const int links = set.num_links();
  set.nominal.resize(links);
  set.ellipsoids.resize(links);
  set.large_scale_gains.resize(links);

  Rng rng(seed);
  for (int j = 0; j < set.num_cells; ++j)
    for (int i = 0; i < set.num_cells; ++i)
      for (int k = 0; k < set.users_per_cell; ++k) {
        const int l = set.link_index(j, i, k);
        const double shadow_db = cfg.shadowing_std_db * rng.normal();
        const double gain =
            large_scale_gain(layout.distance(j, i, k), shadow_db, cfg.antenna_gain_dbi);
        set.nominal[l] = gain * rng.cnormal_vector(num_antennas);
        set.ellipsoids[l] =
            ErrorEllipsoid::spherical(cfg.error_radius * gain, num_antennas);
        set.large_scale_gains[l] = gain;
      }
  set.validate();
  return set;
}

double dbm_to_watts(double p_dbm) {
  require(std::isfinite(p_dbm), "power in dBm must be finite");
  return std::pow(10.0, (p_dbm - 30.0) / 10.0);
}

double watts_to_dbm(double p_watts) {
  require(p_watts > 0, "power must be positive to express in dBm");
  return 10.0 * std::log10(p_watts) + 30.0;
}

}  // namespace rcbf
