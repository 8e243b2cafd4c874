#pragma once

// Self-contained primal-dual interior-point solver for conic programs in
// standard form
//   minimize    c^T x
//   subject to  A x = b,   x in K,
// where K is an ordered product of nonnegative-orthant and real-symmetric
// PSD blocks.  PSD blocks are carried in scaled upper-triangle (svec)
// coordinates, so all inner products are plain dot products.
//
// The method is a homogeneous self-dual embedding with Nesterov-Todd scaling
// and Mehrotra predictor-corrector steps; it terminates with an optimal
// point, a certified primal/dual infeasibility ray, or an iteration/numerics
// verdict.  One solve call owns its workspace; the solver is single-threaded
// and bit-deterministic for identical inputs.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>
#include <vector>

namespace rcbf {

enum class ConeKind { NonNeg, Psd };

struct ConeBlock {
  ConeKind kind = ConeKind::NonNeg;
  Eigen::Index size = 0;  // NonNeg: coordinate count; Psd: matrix side

  Eigen::Index scalar_size() const {
    return kind == ConeKind::NonNeg ? size : size * (size + 1) / 2;
  }
  // Barrier degree: coordinate count for the orthant, side for PSD.
  Eigen::Index degree() const { return size; }
};

struct ConicProblem {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;  // constraints x variables
  Eigen::VectorXd b;
  std::vector<ConeBlock> cones;
  std::vector<std::string> cone_names;  // optional; empty or one per block

  Eigen::Index num_vars() const { return c.size(); }
  Eigen::Index num_constraints() const { return b.size(); }
  void validate() const;  // throws std::invalid_argument
};

struct SolverOptions {
  double tol = 1e-7;            // optimality: max(primal, dual, gap) residual
  double infeas_tol = 1e-7;     // certificate residual tolerance
  int max_iter = 200;
  double static_reg = 1e-9;     // KKT regularization
  double retry_reg = 1e-7;      // refactorization retry regularization
  double step_fraction = 0.99;  // fraction of the step to the cone boundary
  double stall_step = 1e-10;    // two consecutive steps below this: give up
  bool collect_trace = false;
};

enum class SolveStatus {
  Optimal,
  PrimalInfeasible,
  DualInfeasible,
  IterationLimit,
  NumericalFailure,
};

const char* to_string(SolveStatus status);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double worst() const { return std::max(primal, std::max(dual, gap)); }
};

struct IterateInfo {
  int iter = 0;
  double mu = 0.0;
  double step = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  double min_x_margin = 0.0;  // smallest orthant coordinate / PSD eigenvalue of x
  double min_z_margin = 0.0;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x, y, z;
  double tau = 0.0;
  double kappa = 0.0;
  Residuals residuals;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::vector<IterateInfo> trace;
};

// Relative residuals of an arbitrary candidate point:
//   primal = ||Ax - b|| / (1 + ||b||)
//   dual   = ||A^T y + z - c|| / (1 + ||c||)
//   gap    = |c^T x - b^T y| / (1 + |c^T x| + |b^T y|)
Residuals residuals(const ConicProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y, const Eigen::VectorXd& z);
Residuals residuals(const ConicProblem& problem, const ConicSolution& sol);

ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts = {});

// Plain-text dump (dimensions, cone spec, dense c and b, triplet-form A) for
// cross-checking against an external solver; format documented in README.
void dump_problem(const ConicProblem& problem, std::ostream& os);

}  // namespace rcbf
