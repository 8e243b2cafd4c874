#pragma once

// Monte Carlo scenario generation: cell geometry, user placement, and nominal
// channels under an LTE-style path-loss model with log-normal shadowing.
//
// The large-scale factor multiplies (hbar + e) jointly, so the generated
// ChannelSet stores the scaled nominal vector and a spherical ellipsoid whose
// radius is error_radius times the link's large-scale amplitude gain;
// downstream consumers never see the decomposition.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "rcbf/model.hpp"

namespace rcbf {

struct ScenarioConfig {
  double inter_bs_distance = 500.0;  // meters
  double min_bs_ms_distance = 35.0;  // meters
  double shadowing_std_db = 8.0;     // dB
  double antenna_gain_dbi = 5.0;     // dBi
  double error_radius = 0.1;         // epsilon, dimensionless
  double noise_power_dbm = -106.27;  // dBm
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Layout {
  std::vector<Eigen::Vector2d> bs_positions;  // per BS
  std::vector<Eigen::Vector2d> ms_positions;  // per user (i,k)
  int users_per_cell = 0;

  int num_cells() const { return static_cast<int>(bs_positions.size()); }
  double distance(int src_cell, int cell, int user) const;  // BS j -> MS (i,k)
  void validate(const ScenarioConfig& cfg) const;
};

// BS geometry: a single BS at the origin, or three BSs on an equilateral
// triangle with side inter_bs_distance.  Each MS is uniform in the disk of
// radius inter_bs_distance/sqrt(3) around its serving BS, redrawn until its
// serving distance is at least min_bs_ms_distance.
Layout generate_layout(const ScenarioConfig& cfg, int num_cells, int users_per_cell,
                       std::uint64_t seed);

// Amplitude gain 10^((34.6 + 35*log10(d)) / -20) * 10^(shadow_db/20) *
// 10^(gain_dbi/20).
double large_scale_gain(double distance_m, double shadow_db, double gain_dbi);

// Nominal channels: i.i.d. unit-variance circularly symmetric complex
// Gaussian entries scaled by the link's large-scale gain (path loss at the
// layout distance, log-normal shadowing, antenna gain); spherical error
// ellipsoids of radius error_radius * gain.
ChannelSet generate_channels(const Layout& layout, const ScenarioConfig& cfg,
                             int num_antennas, std::uint64_t seed);

double dbm_to_watts(double p_dbm);
double watts_to_dbm(double p_watts);

}  // namespace rcbf
