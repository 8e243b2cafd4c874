#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

#include "rcbf/linalg.hpp"
#include "rcbf/solver.hpp"

using namespace rcbf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ConicProblem make_problem(const VectorXd& c, const MatrixXd& a, const VectorXd& b,
                          std::vector<ConeBlock> cones) {
  ConicProblem p;
  p.c = c;
  p.b = b;
  p.A = a.sparseView();
  p.cones = std::move(cones);
  return p;
}

}  // namespace

TEST_CASE("trivial LP equality") {
  // min x s.t. x = 3, x >= 0
  ConicProblem p = make_problem(VectorXd::Ones(1), MatrixXd::Ones(1, 1),
                                VectorXd::Constant(1, 3.0),
                                {{ConeKind::NonNeg, 1}});
  ConicSolution s = solve(p);
  CHECK(s.status == SolveStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(s.residuals.worst() <= 1e-7);
}

TEST_CASE("LP with inequality structure") {
  // min x1 + 2 x2 s.t. x1 + x2 = 2, x >= 0 -> x = (2, 0), value 2
  VectorXd c(2);
  c << 1, 2;
  MatrixXd a(1, 2);
  a << 1, 1;
  ConicProblem p = make_problem(c, a, VectorXd::Constant(1, 2.0),
                                {{ConeKind::NonNeg, 2}});
  ConicSolution s = solve(p);
  CHECK(s.status == SolveStatus::Optimal);
  CHECK(s.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(s.x[1] == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("min trace X subject to X - I PSD") {
  // variables (svec X, svec S), constraint X - S = I, minimize tr X -> 2.
  const Eigen::Index len = svec_size(2);
  VectorXd c(2 * len);
  c << svec(MatrixXd::Identity(2, 2)), VectorXd::Zero(len);
  MatrixXd a(len, 2 * len);
  a << MatrixXd::Identity(len, len), -MatrixXd::Identity(len, len);
  VectorXd b = svec(MatrixXd::Identity(2, 2));
  ConicProblem p =
      make_problem(c, a, b, {{ConeKind::Psd, 2}, {ConeKind::Psd, 2}});
  ConicSolution s = solve(p);
  CHECK(s.status == SolveStatus::Optimal);
  CHECK(s.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
  MatrixXd x = smat(VectorXd(s.x.head(len)));
  CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(x(1, 1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(x(0, 1) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("free variable on the dual side: min x with [[x,1],[1,x]] PSD") {
  // y free, z = c - A^T y must be PSD; c = svec([[0,1],[1,0]]),
  // A row = -svec(I), b = -1.  Design optimum x = -b^T y = ... = 1.
  const Eigen::Index len = svec_size(2);
  MatrixXd offdiag(2, 2);
  offdiag << 0, 1, 1, 0;
  VectorXd c = svec(offdiag);
  MatrixXd a(1, len);
  a = -svec(MatrixXd::Identity(2, 2)).transpose();
  VectorXd b = VectorXd::Constant(1, -1.0);
  ConicProblem p = make_problem(c, a, b, {{ConeKind::Psd, 2}});
  ConicSolution s = solve(p);
  CHECK(s.status == SolveStatus::Optimal);
  CHECK(s.y[0] == doctest::Approx(1.0).epsilon(1e-6));
  // the dual slack reconstructs [[1,1],[1,1]], the boundary certificate
  MatrixXd z = smat(VectorXd(s.z));
  CHECK(z(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(z(0, 1) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("primal infeasible LP yields a validated certificate") {
  // x >= 0 with x = -1 is infeasible.
  ConicProblem p = make_problem(VectorXd::Ones(1), MatrixXd::Ones(1, 1),
                                VectorXd::Constant(1, -1.0),
                                {{ConeKind::NonNeg, 1}});
  ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::PrimalInfeasible);
  // certificate: A^T y + z = 0, z in K*, b^T y > 0
  CHECK(p.b.dot(s.y) > 0);
  CHECK((p.A.transpose() * s.y + s.z).norm() <= 1e-7 * (1 + s.y.norm()));
  CHECK(s.z.minCoeff() >= -1e-9);
}

TEST_CASE("dual infeasible (unbounded) problem is detected") {
  // min -x1 s.t. x1 - x2 = 0, x >= 0: x1 = x2 = t, objective -t unbounded.
  VectorXd c(2);
  c << -1, 0;
  MatrixXd a(1, 2);
  a << 1, -1;
  ConicProblem p = make_problem(c, a, VectorXd::Zero(1), {{ConeKind::NonNeg, 2}});
  ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::DualInfeasible);
  // certificate: A x = 0, x in K, c^T x < 0
  CHECK(p.c.dot(s.x) < 0);
  CHECK((p.A * s.x).norm() <= 1e-7 * (1 + s.x.norm()));
  CHECK(s.x.minCoeff() >= -1e-9);
}

TEST_CASE("constructed strictly complementary SDP instance") {
  // Plant a primal-dual optimal pair (X*, x*) / (y*, S*, s*) with X* S* = 0
  // and X* + S* > 0, then recover the planted objective value.
  Eigen::Matrix3d q;
  // orthonormal basis from a fixed rotation
  q = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 2).normalized()).toRotationMatrix();
  const Eigen::Matrix3d xs = q * Eigen::Vector3d(2, 1, 0).asDiagonal() * q.transpose();
  const Eigen::Matrix3d ss = q * Eigen::Vector3d(0, 0, 3).asDiagonal() * q.transpose();
  const Eigen::Index len = svec_size(3);

  VectorXd xstar(len + 2), sstar(len + 2);
  xstar << svec(MatrixXd(xs)), 1.0, 0.0;
  sstar << svec(MatrixXd(ss)), 0.0, 2.0;

  MatrixXd a(3, len + 2);
  a << 1, 0.5, -1, 2, 0, 1, 1, -1,
      0, 2, 1, -0.5, 1, 0, -2, 1,
      -1, 1, 0, 1, -1, 2, 0.5, 0;
  VectorXd ystar(3);
  ystar << 1.0, -2.0, 0.5;
  const VectorXd b = a * xstar;
  const VectorXd c = a.transpose() * ystar + sstar;

  ConicProblem p = make_problem(c, a, b, {{ConeKind::Psd, 3}, {ConeKind::NonNeg, 2}});
  ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  const double planted = c.dot(xstar);
  CHECK(s.primal_objective == doctest::Approx(planted).epsilon(1e-6));
  CHECK(s.dual_objective == doctest::Approx(planted).epsilon(1e-6));
  CHECK(s.residuals.worst() <= 1e-7);
  // primal block must be PSD up to tolerance
  MatrixXd xblk = smat(VectorXd(s.x.head(len)));
  CHECK(min_eigenvalue(xblk) >= -1e-8);
}

TEST_CASE("redundant rows are presolved away") {
  // duplicate equality rows: consistent duplicates solve fine
  VectorXd c(2);
  c << 1, 1;
  MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  VectorXd b(2);
  b << 2, 2;
  ConicProblem p = make_problem(c, a, b, {{ConeKind::NonNeg, 2}});
  ConicSolution s = solve(p);
  CHECK(s.status == SolveStatus::Optimal);
  CHECK(s.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.y.size() == 2);  // dual lifted back to original row count
}

TEST_CASE("inconsistent duplicate rows yield an exact Farkas certificate") {
  VectorXd c(2);
  c << 1, 1;
  MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  VectorXd b(2);
  b << 2, 3;
  ConicProblem p = make_problem(c, a, b, {{ConeKind::NonNeg, 2}});
  ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::PrimalInfeasible);
  CHECK(p.b.dot(s.y) > 0);
  CHECK((p.A.transpose() * s.y + s.z).norm() <= 1e-9);
}

TEST_CASE("iteration limit reported") {
  ConicProblem p = make_problem(VectorXd::Ones(1), MatrixXd::Ones(1, 1),
                                VectorXd::Constant(1, 3.0),
                                {{ConeKind::NonNeg, 1}});
  SolverOptions opts;
  opts.max_iter = 1;
  ConicSolution s = solve(p, opts);
  CHECK(s.status == SolveStatus::IterationLimit);
}

TEST_CASE("validate rejects malformed problems") {
  ConicProblem p = make_problem(VectorXd::Ones(2), MatrixXd::Ones(1, 2),
                                VectorXd::Ones(1), {{ConeKind::NonNeg, 1}});
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // cone sizes mismatch
}

TEST_CASE("dump format round trips the dimensions") {
  VectorXd c(2);
  c << 1, 2;
  MatrixXd a(1, 2);
  a << 1, 1;
  ConicProblem p = make_problem(c, a, VectorXd::Constant(1, 2.0),
                                {{ConeKind::NonNeg, 2}});
  std::ostringstream os;
  dump_problem(p, os);
  const std::string text = os.str();
  CHECK(text.find("conic-problem v1") != std::string::npos);
  CHECK(text.find("nonneg") != std::string::npos);
}

TEST_CASE("residuals of the returned optimum match the reported ones") {
  VectorXd c(2);
  c << 1, 2;
  MatrixXd a(1, 2);
  a << 1, 1;
  ConicProblem p = make_problem(c, a, VectorXd::Constant(1, 2.0),
                                {{ConeKind::NonNeg, 2}});
  ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  Residuals r = residuals(p, s);
  CHECK(r.primal == doctest::Approx(s.residuals.primal).epsilon(1e-12));
  CHECK(r.dual == doctest::Approx(s.residuals.dual).epsilon(1e-12));
  CHECK(r.gap == doctest::Approx(s.residuals.gap).epsilon(1e-12));
}
