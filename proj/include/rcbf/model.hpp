#pragma once

// Domain types for the multicell downlink: system dimensions and targets,
// bounded channel uncertainty, channel sets, beamformer sets, plus exact SINR
// evaluation and a sampling-based worst-case SINR oracle.
//
// Index conventions, used everywhere downstream:
//   cells   i, j in [0, num_cells)
//   users   k, l in [0, users_per_cell)
//   a "user" means the pair (i, k); user_index(i, k) = i * K + k
//   a "link" means (j, i, k): the channel from BS j to user (i, k);
//   link_index(j, i, k) = (j * num_cells + i) * K + k
//   a "cap" means (j, i, k) with j != i: the interference cap that BS j must
//   respect toward user (i, k); caps are stored densely over ordered pairs.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "rcbf/rng.hpp"

namespace rcbf {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct SystemConfig {
  int num_cells = 0;
  int users_per_cell = 0;
  int num_antennas = 0;
  VectorXd power_weights;      // per cell, > 0
  VectorXd sinr_targets;       // per user, linear scale, > 0
  VectorXd noise_powers;       // per user, watts, > 0
  VectorXd interference_caps;  // per cap (j != i), watts, > 0; SBF only

  int num_users() const { return num_cells * users_per_cell; }
  int user_index(int cell, int user) const;
  int cap_index(int src_cell, int cell, int user) const;  // src_cell != cell

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;

  // Uniform construction helper: same target/noise for every user, same cap
  // for every cross-cell pair, unit power weights.
  static SystemConfig uniform(int num_cells, int users_per_cell, int num_antennas,
                              double sinr_target, double noise_power,
                              double interference_cap, double power_weight = 1.0);
};

// The admissible CSI error set {e : e^H C e <= 1}.  Spherical shorthand
// C = I / eps^2 is stored as eps so the radius round-trips exactly; eps = 0
// denotes the degenerate zero ball (only e = 0 admissible).
class ErrorEllipsoid {
 public:
  ErrorEllipsoid() = default;
  static ErrorEllipsoid spherical(double eps, int dim);
  static ErrorEllipsoid general(const MatrixXcd& shape);  // Hermitian PD

  int dim() const { return dim_; }
  bool is_spherical() const { return spherical_; }
  bool is_degenerate() const { return spherical_ && eps_ == 0.0; }
  double radius() const;          // spherical only
  MatrixXcd shape_matrix() const; // C; throws for the degenerate ball

  // e^H C e; +inf for a nonzero e against the degenerate ball.
  double quad(const VectorXcd& e) const;
  bool contains(const VectorXcd& e, double rtol = 1e-9) const;

  // Uniform draw from the ellipsoid: uniform in the unit ball of C^dim
  // mapped through C^{-1/2}.  Degenerate ball yields exactly zero.
  VectorXcd sample(Rng& rng) const;

 private:
  bool spherical_ = true;
  double eps_ = 0.0;
  int dim_ = 0;
  MatrixXcd shape_;       // general case only
  MatrixXcd inv_sqrt_;    // C^{-1/2}, general case only
};

struct ChannelSet {
  int num_cells = 0;
  int users_per_cell = 0;
  int num_antennas = 0;
  std::vector<VectorXcd> nominal;          // per link
  std::vector<ErrorEllipsoid> ellipsoids;  // per link
  VectorXd large_scale_gains;              // per link; 1 when channels are direct

  int num_links() const { return num_cells * num_cells * users_per_cell; }
  int link_index(int src_cell, int cell, int user) const;
  void validate() const;
};

struct BeamformerSet {
  int num_cells = 0;
  int users_per_cell = 0;
  int num_antennas = 0;
  std::vector<VectorXcd> vectors;  // per user (i,k)

  int user_index(int cell, int user) const;
  // Sum_i alpha_i Sum_k ||w_ik||^2
  double weighted_power(const VectorXd& power_weights) const;
  void validate() const;
};

// SINR of user (cell, user) given its realized channels from every BS
// (user_channels[j] = h_{j,cell,user}).
double compute_sinr(const std::vector<VectorXcd>& user_channels, int cell, int user,
                    const BeamformerSet& beams, const SystemConfig& cfg);

// Realized channels h = hbar + e for every link; every error vector must lie
// in its link's ellipsoid (violation reported with the offending link).
std::vector<VectorXcd> perturb(const ChannelSet& channels,
                               const std::vector<VectorXcd>& errors);

// One uniform error draw for every link of the set, in link order.
std::vector<VectorXcd> draw_error_set(const ChannelSet& channels, Rng& rng);

// Minimum SINR of user (cell, user) over num_samples error draws; sample 0 is
// always the zero perturbation, the remaining num_samples - 1 are uniform in
// the ellipsoids.  Deterministic given the seed.
double sampled_worst_sinr(const ChannelSet& channels, const BeamformerSet& beams,
                          const SystemConfig& cfg, int cell, int user,
                          int num_samples, std::uint64_t seed);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace rcbf
