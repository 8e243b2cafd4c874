#pragma once

// Robust quadratic constraints over ellipsoidal uncertainty recast as finite
// LMIs, and the real-symmetric embedding that feeds the conic solver.
//
// A robust constraint  e^H A e + b^H e + e^H b + c >= 0  for all e^H C e <= 1
// holds iff there is a multiplier lambda >= 0 with
//   [[A + lambda C, b], [b^H, c - lambda]] >= 0.
// Blocks are affine in scalar decision variables; Hermitian matrix variables
// are decomposed into n^2 real scalar components with a fixed basis.

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "rcbf/model.hpp"

namespace rcbf {

using Eigen::MatrixXd;
using VarId = int;

// Registry of scalar decision variables.  A Hermitian matrix variable of side
// n occupies n^2 consecutive scalar slots: the n(n+1)/2 real components of
// the upper triangle in column-major order, then the n(n-1)/2 imaginary
// components of the strict upper triangle in column-major order.
class VariableSpace {
 public:
  struct MatrixVar {
    VarId first = -1;
    int side = 0;
    int count() const { return side * side; }
  };

  VarId add_scalar(const std::string& name, bool nonnegative);
  MatrixVar add_hermitian(const std::string& name, int side);

  int count() const { return static_cast<int>(nonneg_.size()); }
  bool nonnegative(VarId id) const { return nonneg_.at(id); }
  const std::string& name(VarId id) const { return names_.at(id); }

  // Basis matrix of one scalar component of a Hermitian variable: E_ii for a
  // diagonal real part, E_ij + E_ji for an off-diagonal real part, and
  // i(E_ij - E_ji) for an imaginary part.
  static MatrixXcd hermitian_basis(int side, int component);

  // Reassemble the Hermitian value of a matrix variable from the flat vector
  // of all scalar variable values.
  static MatrixXcd hermitian_value(const MatrixVar& var, const Eigen::VectorXd& values);

  // Inverse of hermitian_value: write the components representing `value`
  // into the variable's slots of `values`.
  static void set_hermitian_components(const MatrixVar& var, const MatrixXcd& value,
                                       Eigen::VectorXd& values);

 private:
  std::vector<bool> nonneg_;
  std::vector<std::string> names_;
};

struct RobustQuadratic {
  MatrixXcd a_matrix;   // Hermitian
  VectorXcd b_vector;
  double c_scalar = 0;
  MatrixXcd shape_matrix;  // Hermitian PD

  void validate() const;
};

// An affine Hermitian matrix expression constrained PSD:
//   constant + sum_v values[v] * coefficient(v)  >= 0.
struct LmiBlock {
  MatrixXcd constant;
  std::vector<std::pair<VarId, MatrixXcd>> coeffs;
  VarId multiplier = -1;  // the lambda owned by this block, if any

  Eigen::Index side() const { return constant.rows(); }
  MatrixXcd value(const Eigen::VectorXd& values) const;
  void add_coeff(VarId id, const MatrixXcd& m);  // accumulates on repeat ids
};

// Real-embedded counterpart; Frobenius inner products and traces against the
// embedded matrices are trace_scale times the complex ones.
struct RealLmiBlock {
  MatrixXd constant;
  std::vector<std::pair<VarId, MatrixXd>> coeffs;
  VarId multiplier = -1;
  double trace_scale = 2.0;

  Eigen::Index side() const { return constant.rows(); }
  MatrixXd value(const Eigen::VectorXd& values) const;
};

// S-procedure: allocates a fresh multiplier in vars and returns the block
// [[A + lambda C, b], [b^H, c - lambda]].
LmiBlock s_procedure(const RobustQuadratic& rq, VariableSpace& vars,
                     const std::string& multiplier_name = "lambda");

// SINR block for user (i,k): the bordered quadratic of
// W_ik/gamma - sum_{l != k} W_il over the serving-cell error ellipsoid, with
// the intercell interference carried by slack variables (one per other cell)
// and fixed_noise = sigma^2 plus any constant interference.
//   [I; hbar^H] (W_ik/gamma - sum_{l!=k} W_il) [I, hbar] +
//   diag(lambda C, -sum t - fixed_noise - lambda) >= 0.
LmiBlock build_phi(const VectorXcd& nominal, double gamma,
                   const ErrorEllipsoid& ellipsoid,
                   const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                   int own_user, const std::vector<VarId>& slack_vars,
                   double fixed_noise, VariableSpace& vars,
                   const std::string& multiplier_name = "lambda");

// Leakage block for cross-cell link (j -> i,k): worst case of the total power
// BS j leaks onto the link's ellipsoid, bounded by the slack t:
//   [I; hbar^H] (-sum_l W_jl) [I, hbar] + diag(lambda C, t - lambda) >= 0.
LmiBlock build_psi(const VectorXcd& nominal, const ErrorEllipsoid& ellipsoid,
                   const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                   VarId slack_var, VariableSpace& vars,
                   const std::string& multiplier_name = "lambda");

// Same shape with a constant cap instead of a slack variable (single-cell
// designs, where the tolerable interference is fixed up front).
LmiBlock build_psi_capped(const VectorXcd& nominal, const ErrorEllipsoid& ellipsoid,
                          const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                          double cap, VariableSpace& vars,
                          const std::string& multiplier_name = "lambda");

// [[Re M, -Im M], [Im M, Re M]] applied to the constant and every
// coefficient; positive semidefiniteness is preserved both ways.
RealLmiBlock complex_to_real(const LmiBlock& block);

}  // namespace rcbf
