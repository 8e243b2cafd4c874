#include "rcbf/lmi.hpp"

#include <stdexcept>

#include "rcbf/linalg.hpp"

namespace rcbf {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Symmetrize with a deviation check; floating-point assembly must not leak
// asymmetry into the solver.
MatrixXcd hermitize(const MatrixXcd& m, const char* what) {
  require(m.rows() == m.cols(), "matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string("matrix is not Hermitian: ") + what);
  return 0.5 * (m + m.adjoint());
}

// [I; hbar^H] M [I, hbar] for an N_t x N_t M, yielding side N_t + 1.
MatrixXcd bordered(const MatrixXcd& m, const VectorXcd& hbar) {
  const Eigen::Index n = m.rows();
  MatrixXcd out(n + 1, n + 1);
  out.topLeftCorner(n, n) = m;
  out.topRightCorner(n, 1) = m * hbar;
  out.bottomLeftCorner(1, n) = out.topRightCorner(n, 1).adjoint();
  out(n, n) = std::real(hbar.dot(m * hbar));
  return out;
}

MatrixXcd corner_unit(Eigen::Index side, double value) {
  MatrixXcd m = MatrixXcd::Zero(side, side);
  m(side - 1, side - 1) = value;
  return m;
}

LmiBlock leakage_block(const VectorXcd& nominal, const ErrorEllipsoid& ellipsoid,
                       const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                       VarId slack_var, double cap, VariableSpace& vars,
                       const std::string& multiplier_name) {
  require(!cell_w_vars.empty(), "missing covariance variable ids");
  require(!ellipsoid.is_degenerate(),
          "leakage LMI requires a positive-definite ellipsoid");
  const int n = static_cast<int>(nominal.size());
  require(ellipsoid.dim() == n, "ellipsoid dimension mismatch");

  LmiBlock block;
  block.constant = corner_unit(n + 1, cap);
  for (const auto& wv : cell_w_vars) {
    require(wv.side == n, "covariance side mismatch");
    for (int c = 0; c < wv.count(); ++c)
      block.add_coeff(wv.first + c,
                      bordered(-VariableSpace::hermitian_basis(n, c), nominal));
  }
  if (slack_var >= 0) block.add_coeff(slack_var, corner_unit(n + 1, 1.0));
  block.multiplier = vars.add_scalar(multiplier_name, true);
  MatrixXcd lam_coeff = MatrixXcd::Zero(n + 1, n + 1);
  lam_coeff.topLeftCorner(n, n) = ellipsoid.shape_matrix();
  lam_coeff(n, n) = -1.0;
  block.add_coeff(block.multiplier, lam_coeff);
  return block;
}

}  // namespace

VarId VariableSpace::add_scalar(const std::string& name, bool nonnegative) {
  nonneg_.push_back(nonnegative);
  names_.push_back(name);
  return count() - 1;
}

VariableSpace::MatrixVar VariableSpace::add_hermitian(const std::string& name, int side) {
  require(side >= 1, "matrix variable side must be >= 1");
  MatrixVar var;
  var.first = count();
  var.side = side;
  for (int c = 0; c < var.count(); ++c)
    add_scalar(name + "[" + std::to_string(c) + "]", false);
  return var;
}

MatrixXcd VariableSpace::hermitian_basis(int side, int component) {
  require(side >= 1 && component >= 0 && component < side * side,
          "hermitian component out of range");
  MatrixXcd m = MatrixXcd::Zero(side, side);
  const int num_real = side * (side + 1) / 2;
  if (component < num_real) {
    int p = component;
    for (int j = 0; j < side; ++j)
      for (int i = 0; i <= j; ++i, --p)
        if (p == 0) {
          m(i, j) += 1.0;
          m(j, i) = std::conj(m(i, j));
          return m;
        }
  } else {
    int p = component - num_real;
    for (int j = 0; j < side; ++j)
      for (int i = 0; i < j; ++i, --p)
        if (p == 0) {
          m(i, j) = std::complex<double>(0.0, 1.0);
          m(j, i) = std::complex<double>(0.0, -1.0);
          return m;
        }
  }
  throw std::logic_error("hermitian_basis: unreachable");
}

MatrixXcd VariableSpace::hermitian_value(const MatrixVar& var,
                                         const Eigen::VectorXd& values) {
  require(var.first >= 0 && var.first + var.count() <= values.size(),
          "matrix variable slots out of range");
  MatrixXcd m = MatrixXcd::Zero(var.side, var.side);
  for (int c = 0; c < var.count(); ++c)
    m += values[var.first + c] * hermitian_basis(var.side, c);
  return m;
}

void VariableSpace::set_hermitian_components(const MatrixVar& var, const MatrixXcd& value,
                                             Eigen::VectorXd& values) {
  require(value.rows() == var.side && value.cols() == var.side,
          "matrix value dimension mismatch");
  require(var.first >= 0 && var.first + var.count() <= values.size(),
          "matrix variable slots out of range");
  int p = var.first;
  for (int j = 0; j < var.side; ++j)
    for (int i = 0; i <= j; ++i) values[p++] = value(i, j).real();
  for (int j = 0; j < var.side; ++j)
    for (int i = 0; i < j; ++i) values[p++] = value(i, j).imag();
}

void RobustQuadratic::validate() const {
  require(a_matrix.rows() == a_matrix.cols(), "A must be square");
  require(b_vector.size() == a_matrix.rows(), "b length mismatch");
  require(shape_matrix.rows() == a_matrix.rows() &&
              shape_matrix.cols() == a_matrix.cols(),
          "shape matrix dimension mismatch");
  require(std::isfinite(c_scalar), "c must be finite");
  hermitize(a_matrix, "A");
  const MatrixXcd c = hermitize(shape_matrix, "C");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(c, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > 0.0, "shape matrix must be positive definite");
}

MatrixXcd LmiBlock::value(const Eigen::VectorXd& values) const {
  MatrixXcd m = constant;
  for (const auto& [id, coeff] : coeffs) {
    require(id >= 0 && id < values.size(), "variable value missing for block");
    m += values[id] * coeff;
  }
  return m;
}

void LmiBlock::add_coeff(VarId id, const MatrixXcd& m) {
  const MatrixXcd h = hermitize(m, "LMI coefficient");
  for (auto& [existing, coeff] : coeffs)
    if (existing == id) {
      coeff += h;
      return;
    }
  coeffs.emplace_back(id, h);
}

MatrixXd RealLmiBlock::value(const Eigen::VectorXd& values) const {
  MatrixXd m = constant;
  for (const auto& [id, coeff] : coeffs) {
    require(id >= 0 && id < values.size(), "variable value missing for block");
    m += values[id] * coeff;
  }
  return m;
}

LmiBlock s_procedure(const RobustQuadratic& rq, VariableSpace& vars,
                     const std::string& multiplier_name) {
  rq.validate();
  const Eigen::Index n = rq.a_matrix.rows();
  LmiBlock block;
  block.constant = MatrixXcd::Zero(n + 1, n + 1);
  block.constant.topLeftCorner(n, n) = hermitize(rq.a_matrix, "A");
  block.constant.topRightCorner(n, 1) = rq.b_vector;
  block.constant.bottomLeftCorner(1, n) = rq.b_vector.adjoint();
  block.constant(n, n) = rq.c_scalar;
  block.multiplier = vars.add_scalar(multiplier_name, true);
  MatrixXcd lam_coeff = MatrixXcd::Zero(n + 1, n + 1);
  lam_coeff.topLeftCorner(n, n) = hermitize(rq.shape_matrix, "C");
  lam_coeff(n, n) = -1.0;
  block.add_coeff(block.multiplier, lam_coeff);
  return block;
}

LmiBlock build_phi(const VectorXcd& nominal, double gamma,
                   const ErrorEllipsoid& ellipsoid,
                   const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                   int own_user, const std::vector<VarId>& slack_vars,
                   double fixed_noise, VariableSpace& vars,
                   const std::string& multiplier_name) {
  require(gamma > 0 && std::isfinite(gamma), "SINR target must be positive and finite");
  require(own_user >= 0 && own_user < static_cast<int>(cell_w_vars.size()),
          "own-user index out of range");
  require(!ellipsoid.is_degenerate(), "SINR LMI requires a positive-definite ellipsoid");
  const int n = static_cast<int>(nominal.size());
  require(ellipsoid.dim() == n, "ellipsoid dimension mismatch");

  LmiBlock block;
  block.constant = corner_unit(n + 1, -fixed_noise);
  for (int l = 0; l < static_cast<int>(cell_w_vars.size()); ++l) {
    const auto& wv = cell_w_vars[l];
    require(wv.side == n, "covariance side mismatch");
    const double scale = (l == own_user) ? 1.0 / gamma : -1.0;
    for (int c = 0; c < wv.count(); ++c)
      block.add_coeff(wv.first + c,
                      bordered(scale * VariableSpace::hermitian_basis(n, c), nominal));
  }
  for (VarId t : slack_vars) {
    require(t >= 0, "missing slack variable id");
    block.add_coeff(t, corner_unit(n + 1, -1.0));
  }
  block.multiplier = vars.add_scalar(multiplier_name, true);
  MatrixXcd lam_coeff = MatrixXcd::Zero(n + 1, n + 1);
  lam_coeff.topLeftCorner(n, n) = ellipsoid.shape_matrix();
  lam_coeff(n, n) = -1.0;
  block.add_coeff(block.multiplier, lam_coeff);
  return block;
}

LmiBlock build_psi(const VectorXcd& nominal, const ErrorEllipsoid& ellipsoid,
                   const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                   VarId slack_var, VariableSpace& vars,
                   const std::string& multiplier_name) {
  require(slack_var >= 0, "missing slack variable id");
  return leakage_block(nominal, ellipsoid, cell_w_vars, slack_var, 0.0, vars,
                       multiplier_name);
}

LmiBlock build_psi_capped(const VectorXcd& nominal, const ErrorEllipsoid& ellipsoid,
                          const std::vector<VariableSpace::MatrixVar>& cell_w_vars,
                          double cap, VariableSpace& vars,
                          const std::string& multiplier_name) {
  require(cap > 0 && std::isfinite(cap), "interference cap must be positive and finite");
  return leakage_block(nominal, ellipsoid, cell_w_vars, -1, cap, vars, multiplier_name);
}

RealLmiBlock complex_to_real(const LmiBlock& block) {
  RealLmiBlock out;
  out.constant = complex_to_real(block.constant);
  out.coeffs.reserve(block.coeffs.size());
  for (const auto& [id, coeff] : block.coeffs)
    out.coeffs.emplace_back(id, complex_to_real(coeff));
  out.multiplier = block.multiplier;
  out.trace_scale = 2.0;
  return out;
}

}  // namespace rcbf
