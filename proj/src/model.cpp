#include "rcbf/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rcbf/linalg.hpp"

namespace rcbf {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_index(int value, int bound, const char* what) {
  if (value < 0 || value >= bound)
    throw std::invalid_argument(std::string(what) + " index out of range");
}

}  // namespace

int SystemConfig::user_index(int cell, int user) const {
  check_index(cell, num_cells, "cell");
  check_index(user, users_per_cell, "user");
  return cell * users_per_cell + user;
}

int SystemConfig::cap_index(int src_cell, int cell, int user) const {
  check_index(src_cell, num_cells, "cell");
  check_index(cell, num_cells, "cell");
  check_index(user, users_per_cell, "user");
  require(src_cell != cell, "interference caps are defined for cross-cell pairs only");
  // Dense over ordered pairs (src, cell), src != cell, pairs in (src, cell)
  // lexicographic order with the diagonal skipped.
  int pair = src_cell * (num_cells - 1) + (cell < src_cell ? cell : cell - 1);
  return pair * users_per_cell + user;
}

void SystemConfig::validate() const {
  require(num_cells >= 1, "num_cells must be >= 1");
  require(users_per_cell >= 1, "users_per_cell must be >= 1");
  require(num_antennas >= 1, "num_antennas must be >= 1");
  require(power_weights.size() == num_cells, "power_weights must have one entry per cell");
  require(sinr_targets.size() == num_users(), "sinr_targets must have N_c*K entries");
  require(noise_powers.size() == num_users(), "noise_powers must have N_c*K entries");
  const int num_caps = num_cells * (num_cells - 1) * users_per_cell;
  require(interference_caps.size() == num_caps,
          "interference_caps must have N_c*(N_c-1)*K entries");
  require((power_weights.array() > 0).all(), "power weights must be positive");
  require(power_weights.allFinite(), "power weights must be finite");
  require((sinr_targets.array() > 0).all(), "SINR targets must be positive");
  require(sinr_targets.allFinite(), "SINR targets must be finite");
  require((noise_powers.array() > 0).all(), "noise powers must be positive");
  require(noise_powers.allFinite(), "noise powers must be finite");
  require(num_caps == 0 || ((interference_caps.array() > 0).all() &&
                            interference_caps.allFinite()),
          "interference caps must be positive and finite");
}

SystemConfig SystemConfig::uniform(int num_cells, int users_per_cell, int num_antennas,
                                   double sinr_target, double noise_power,
                                   double interference_cap, double power_weight) {
  SystemConfig cfg;
  cfg.num_cells = num_cells;
  cfg.users_per_cell = users_per_cell;
  cfg.num_antennas = num_antennas;
  cfg.power_weights = VectorXd::Constant(num_cells, power_weight);
  cfg.sinr_targets = VectorXd::Constant(cfg.num_users(), sinr_target);
  cfg.noise_powers = VectorXd::Constant(cfg.num_users(), noise_power);
  cfg.interference_caps =
      VectorXd::Constant(num_cells * (num_cells - 1) * users_per_cell, interference_cap);
  cfg.validate();
  return cfg;
}

ErrorEllipsoid ErrorEllipsoid::spherical(double eps, int dim) {
  require(eps >= 0.0 && std::isfinite(eps), "ellipsoid radius must be finite and >= 0");
  require(dim >= 1, "ellipsoid dimension must be >= 1");
  ErrorEllipsoid e;
  e.spherical_ = true;
  e.eps_ = eps;
  e.dim_ = static_cast<int>(dim);
  return e;
}

ErrorEllipsoid ErrorEllipsoid::general(const MatrixXcd& shape) {
  require(shape.rows() == shape.cols() && shape.rows() >= 1,
          "ellipsoid shape matrix must be square");
  require(shape.allFinite(), "ellipsoid shape matrix must be finite");
  const double scale = std::max(1.0, shape.cwiseAbs().maxCoeff());
  require((shape - shape.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "ellipsoid shape matrix must be Hermitian");
  ErrorEllipsoid e;
  e.spherical_ = false;
  e.dim_ = static_cast<int>(shape.rows());
  e.shape_ = 0.5 * (shape + shape.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(e.shape_);
  require(es.eigenvalues().minCoeff() > 0.0, "ellipsoid shape matrix must be positive definite");
  e.inv_sqrt_ = es.eigenvectors() *
                es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                es.eigenvectors().adjoint();
  return e;
}

double ErrorEllipsoid::radius() const {
  require(spherical_, "radius is defined for spherical ellipsoids only");
  return eps_;
}

MatrixXcd ErrorEllipsoid::shape_matrix() const {
  if (!spherical_) return shape_;
  require(eps_ > 0.0, "degenerate ellipsoid has no shape matrix");
  return MatrixXcd::Identity(dim_, dim_) / (eps_ * eps_);
}

double ErrorEllipsoid::quad(const VectorXcd& e) const {
  require(e.size() == dim_, "error vector dimension mismatch");
  if (spherical_) {
    if (eps_ == 0.0)
      return e.squaredNorm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return e.squaredNorm() / (eps_ * eps_);
  }
  return std::real(e.dot(shape_ * e));
}

bool ErrorEllipsoid::contains(const VectorXcd& e, double rtol) const {
  return quad(e) <= 1.0 + rtol;
}

VectorXcd ErrorEllipsoid::sample(Rng& rng) const {
  if (is_degenerate()) return VectorXcd::Zero(dim_);
  VectorXcd u = rng.uniform_ball(dim_);
  if (spherical_) return eps_ * u;
  return inv_sqrt_ * u;
}

int ChannelSet::link_index(int src_cell, int cell, int user) const {
  check_index(src_cell, num_cells, "cell");
  check_index(cell, num_cells, "cell");
  check_index(user, users_per_cell, "user");
  return (src_cell * num_cells + cell) * users_per_cell + user;
}

void ChannelSet::validate() const {
  require(num_cells >= 1 && users_per_cell >= 1 && num_antennas >= 1,
          "channel set dimensions must be >= 1");
  const int links = num_links();
  require(static_cast<int>(nominal.size()) == links, "missing nominal channel links");
  require(static_cast<int>(ellipsoids.size()) == links, "missing ellipsoid links");
  require(large_scale_gains.size() == links, "missing large-scale gain entries");
  for (int l = 0; l < links; ++l) {
    require(nominal[l].size() == num_antennas, "nominal channel length mismatch");
    require(nominal[l].allFinite(), "nominal channel must be finite");
    require(ellipsoids[l].dim() == num_antennas, "ellipsoid dimension mismatch");
    require(std::isfinite(large_scale_gains[l]) && large_scale_gains[l] > 0,
            "large-scale gains must be positive and finite");
  }
}

int BeamformerSet::user_index(int cell, int user) const {
  check_index(cell, num_cells, "cell");
  check_index(user, users_per_cell, "user");
  return cell * users_per_cell + user;
}

double BeamformerSet::weighted_power(const VectorXd& power_weights) const {
  require(power_weights.size() == num_cells, "power_weights must have one entry per cell");
  double total = 0.0;
  for (int i = 0; i < num_cells; ++i)
    for (int k = 0; k < users_per_cell; ++k)
      total += power_weights[i] * vectors[user_index(i, k)].squaredNorm();
  return total;
}

void BeamformerSet::validate() const {
  require(num_cells >= 1 && users_per_cell >= 1 && num_antennas >= 1,
          "beamformer set dimensions must be >= 1");
  require(static_cast<int>(vectors.size()) == num_cells * users_per_cell,
          "missing beamformer vectors");
  for (const auto& w : vectors) {
    require(w.size() == num_antennas, "beamformer length mismatch");
    require(w.allFinite(), "beamformers must be finite");
  }
}

double compute_sinr(const std::vector<VectorXcd>& user_channels, int cell, int user,
                    const BeamformerSet& beams, const SystemConfig& cfg) {
  require(static_cast<int>(user_channels.size()) == cfg.num_cells,
          "need one realized channel per BS");
  for (const auto& h : user_channels)
    require(h.size() == cfg.num_antennas, "channel/beamformer dimension mismatch");
  require(beams.num_cells == cfg.num_cells &&
              beams.users_per_cell == cfg.users_per_cell &&
              beams.num_antennas == cfg.num_antennas,
          "beamformer set does not match the system configuration");

  const int uidx = cfg.user_index(cell, user);
  double signal = 0.0, interference = 0.0;
  for (int j = 0; j < cfg.num_cells; ++j) {
    const VectorXcd& h = user_channels[j];
    for (int l = 0; l < cfg.users_per_cell; ++l) {
      const double p = std::norm(h.dot(beams.vectors[beams.user_index(j, l)]));
      if (j == cell && l == user)
        signal = p;
      else
        interference += p;
    }
  }
  return signal / (interference + cfg.noise_powers[uidx]);
}

std::vector<VectorXcd> perturb(const ChannelSet& channels,
                               const std::vector<VectorXcd>& errors) {
  channels.validate();
  require(errors.size() == channels.nominal.size(), "need one error vector per link");
  std::vector<VectorXcd> realized(channels.nominal.size());
  for (int j = 0; j < channels.num_cells; ++j)
    for (int i = 0; i < channels.num_cells; ++i)
      for (int k = 0; k < channels.users_per_cell; ++k) {
        const int l = channels.link_index(j, i, k);
        if (!channels.ellipsoids[l].contains(errors[l]))
          throw std::invalid_argument("error vector outside its ellipsoid at link (" +
                                      std::to_string(j) + "," + std::to_string(i) + "," +
                                      std::to_string(k) + ")");
        realized[l] = channels.nominal[l] + errors[l];
      }
  return realized;
}

std::vector<VectorXcd> draw_error_set(const ChannelSet& channels, Rng& rng) {
  std::vector<VectorXcd> errors(channels.nominal.size());
  for (size_t l = 0; l < errors.size(); ++l) errors[l] = channels.ellipsoids[l].sample(rng);
  return errors;
}

double sampled_worst_sinr(const ChannelSet& channels, const BeamformerSet& beams,
                          const SystemConfig& cfg, int cell, int user,
                          int num_samples, std::uint64_t seed) {
  require(num_samples >= 1, "num_samples must be >= 1");
  channels.validate();
  Rng rng(seed);
  std::vector<VectorXcd> user_channels(cfg.num_cells);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < num_samples; ++s) {
    for (int j = 0; j < cfg.num_cells; ++j) {
      const int l = channels.link_index(j, cell, user);
      if (s == 0)
        user_channels[j] = channels.nominal[l];
      else
        user_channels[j] = channels.nominal[l] + channels.ellipsoids[l].sample(rng);
    }
    worst = std::min(worst, compute_sinr(user_channels, cell, user, beams, cfg));
  }
  return worst;
}

}  // namespace rcbf
