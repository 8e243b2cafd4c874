#pragma once

// The four beamforming design problems as structured semidefinite programs,
// their standard-form conic encoding, the solve wrapper that maps conic
// output back to complex covariances, and rank-one beamformer extraction.
//
// Encoding note: the emitted ConicProblem places the design scalars (the
// covariance components, multipliers, and interference slacks) on the free
// multiplier side of the standard form and every PSD/nonnegativity
// requirement as a cone block.  The design optimum is the negated conic
// optimum; design infeasibility surfaces as the conic dual-infeasibility
// certificate.  This keeps the interior-point Schur complement at the size
// of the design variable count.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "rcbf/lmi.hpp"
#include "rcbf/model.hpp"
#include "rcbf/solver.hpp"

namespace rcbf {

enum class DesignKind { NominalMcbf, NominalSbf, RobustMcbf, RobustSbf };

const char* to_string(DesignKind kind);
bool parse_design_kind(const std::string& text, DesignKind& out);
inline bool is_robust(DesignKind k) {
  return k == DesignKind::RobustMcbf || k == DesignKind::RobustSbf;
}
inline bool is_single_cell(DesignKind k) {
  return k == DesignKind::NominalSbf || k == DesignKind::RobustSbf;
}

struct LinearTerm {
  VarId var = -1;
  double coeff = 0.0;
};

// constant + sum coeff * value >= 0
struct ScalarConstraint {
  double constant = 0.0;
  std::vector<LinearTerm> terms;
  std::string name;

  double value(const Eigen::VectorXd& values) const;
};

// A design problem in structured form: minimize objective . v subject to all
// LMI blocks PSD, all scalar constraints nonnegative, and v[i] >= 0 for every
// variable flagged nonnegative.  Channel data inside the blocks is rescaled
// per user (noise normalized to one); `unscale` maps solved variable values
// back to natural units (covariance components are unaffected).
struct SdpDesign {
  DesignKind kind = DesignKind::NominalMcbf;
  VariableSpace vars;
  std::vector<VariableSpace::MatrixVar> w_vars;
  std::vector<int> w_cell, w_user;  // global (cell, user) per covariance var
  Eigen::VectorXd objective;
  std::vector<RealLmiBlock> blocks;
  std::vector<std::string> block_names;
  std::vector<ScalarConstraint> scalar_constraints;
  Eigen::VectorXd unscale;

  struct ScalarInfo {
    std::string role;  // "lambda_sinr" | "lambda_leak" | "slack"
    int src_cell = -1, cell = -1, user = -1;
    VarId id = -1;
  };
  std::vector<ScalarInfo> scalar_info;
};

// cell >= 0 restricts single-cell kinds to that cell's subproblem; cell = -1
// assembles the joint problem (for the single-cell kinds this is the
// block-separable union over cells).
SdpDesign make_design(DesignKind kind, const ChannelSet& channels,
                      const SystemConfig& cfg, int cell = -1);

ConicProblem to_conic(const SdpDesign& design);

ConicProblem build_robust_mcbf(const ChannelSet& channels, const SystemConfig& cfg);
ConicProblem build_robust_sbf(const ChannelSet& channels, const SystemConfig& cfg,
                              int cell);
ConicProblem build_nominal(DesignKind kind, const ChannelSet& channels,
                           const SystemConfig& cfg);

struct CertificateInfo {
  bool present = false;
  double objective = 0.0;  // certificate value (c^T x of the normalized ray)
  double residual = 0.0;   // ||A x|| of the normalized ray
  std::string detail;
};

struct SdrSolution {
  DesignKind kind = DesignKind::NominalMcbf;
  // Design-level status: PrimalInfeasible means the beamforming design is
  // infeasible (carried by the conic dual-infeasibility certificate).
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<MatrixXcd> covariances;  // per global user; empty unless optimal
  Eigen::VectorXd lambda_sinr;         // per user (robust kinds)
  Eigen::VectorXd lambda_leak;         // per cap index (robust kinds)
  Eigen::VectorXd slacks;              // per cap index (robust MCBF)
  double objective = 0.0;              // weighted sum power, watts
  Eigen::VectorXd rank_one_gap;        // per user: second / largest eigenvalue
  Residuals residuals;
  int iterations = 0;
  CertificateInfo certificate;
  std::vector<int> infeasible_cells;  // single-cell kinds: offending cells
};

SdrSolution solve_design(DesignKind kind, const ChannelSet& channels,
                         const SystemConfig& cfg, const SolverOptions& opts = {});

constexpr double kRankOneThreshold = 1e-6;

struct ExtractionOptions {
  int randomization_trials = 50;
  int rescale_samples = 1000;  // error draws used by the rescaling step
  std::uint64_t seed = 0;
};

struct ExtractionResult {
  bool success = false;
  BeamformerSet beams;
  bool randomization_used = false;
  // Robust designs recovered through randomization are only verified against
  // sampled errors, never certified.
  bool sampled_feasible_only = false;
  double power = 0.0;        // weighted sum power of the extracted beams
  double power_ratio = 0.0;  // power / SDR objective
};

ExtractionResult extract_beamformers(const SdrSolution& sol, const ChannelSet& channels,
                                     const SystemConfig& cfg,
                                     const ExtractionOptions& opts = {});

}  // namespace rcbf
