#include "rcbf/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rcbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kRt2 = std::sqrt(2.0);
const double kInvRt2 = 1.0 / std::sqrt(2.0);

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// svec segment -> symmetric matrix (upper column-major, off-diagonals /sqrt2).
void unpack(const double* v, Eigen::Index side, Eigen::MatrixXd& m) {
  m.resize(side, side);
  Eigen::Index p = 0;
  for (Eigen::Index j = 0; j < side; ++j)
    for (Eigen::Index i = 0; i <= j; ++i, ++p) {
      if (i == j) {
        m(i, j) = v[p];
      } else {
        m(i, j) = kInvRt2 * v[p];
        m(j, i) = m(i, j);
      }
    }
}

// symmetric matrix -> svec segment (reads the upper triangle).
void pack(const Eigen::MatrixXd& m, double* v) {
  const Eigen::Index side = m.rows();
  Eigen::Index p = 0;
  for (Eigen::Index j = 0; j < side; ++j)
    for (Eigen::Index i = 0; i <= j; ++i, ++p)
      v[p] = (i == j) ? m(i, j) : kRt2 * m(i, j);
}

struct BlockRef {
  ConeKind kind;
  Eigen::Index side;    // NonNeg: count
  Eigen::Index offset;  // into the scalarized variable vector
  Eigen::Index len;     // scalar_size
};

std::vector<BlockRef> make_refs(const ConicProblem& p) {
  std::vector<BlockRef> refs;
  Eigen::Index off = 0;
  for (const auto& cone : p.cones) {
    refs.push_back({cone.kind, cone.size, off, cone.scalar_size()});
    off += cone.scalar_size();
  }
  return refs;
}

// Dense per-block slice of A^T: for block r, At(:, t) holds the coefficients
// of constraint rows[t] on the block's scalar coordinates.  Products with A,
// A^T, and the scaled Schur complement all run over these slices.
struct BlockCols {
  std::vector<int> rows;
  Eigen::MatrixXd At;  // len x rows.size()
};

std::vector<BlockCols> make_block_cols(const ConicProblem& p,
                                       const std::vector<BlockRef>& refs) {
  const Eigen::Index m = p.num_constraints();
  std::vector<BlockCols> bc(refs.size());
  Eigen::SparseMatrix<double, Eigen::RowMajor> ar(p.A);

  std::vector<std::vector<char>> seen(refs.size());
  for (auto& s : seen) s.assign(static_cast<size_t>(m), 0);
  for (Eigen::Index row = 0; row < m; ++row)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, row); it;
         ++it) {
      size_t blk = 0;
      while (it.col() >= refs[blk].offset + refs[blk].len) ++blk;
      if (!seen[blk][row]) {
        seen[blk][row] = 1;
        bc[blk].rows.push_back(static_cast<int>(row));
      }
    }
  for (size_t r = 0; r < refs.size(); ++r)
    bc[r].At = Eigen::MatrixXd::Zero(refs[r].len, static_cast<Eigen::Index>(bc[r].rows.size()));

  std::vector<std::vector<int>> pos(refs.size());
  for (size_t r = 0; r < refs.size(); ++r) {
    pos[r].assign(static_cast<size_t>(m), -1);
    for (size_t t = 0; t < bc[r].rows.size(); ++t) pos[r][bc[r].rows[t]] = static_cast<int>(t);
  }
  for (Eigen::Index row = 0; row < m; ++row)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, row); it;
         ++it) {
      size_t blk = 0;
      while (it.col() >= refs[blk].offset + refs[blk].len) ++blk;
      bc[blk].At(it.col() - refs[blk].offset, pos[blk][row]) = it.value();
    }
  return bc;
}

struct BlockScaling {
  // NonNeg: diagonal data
  Eigen::VectorXd lam;   // sqrt(x z)
  Eigen::VectorXd finv;  // x / z
  Eigen::VectorXd fwd;   // z / x
  Eigen::VectorXd winv;  // sqrt(z / x)
  // Psd
  Eigen::MatrixXd R, Rinv, T, Tinv;
  Eigen::VectorXd sigma;  // NT spectrum (scaled point)
};

struct PresolveOutcome {
  bool infeasible = false;
  Eigen::VectorXd cert_y;  // original-m Farkas certificate (b^T y = 1)
  bool reduced = false;
  std::vector<int> kept;
  ConicProblem problem;  // valid when reduced
};

// Ruiz equilibration: row scaling plus one positive scalar per cone block
// (block-uniform column scaling keeps the cones invariant).  Mixed physical
// scales otherwise leave the Schur complement too ill-conditioned for the
// Newton system to damp the residuals at the nominal rate.
struct Equilibration {
  Eigen::VectorXd row;  // m
  Eigen::VectorXd col;  // n, constant within each cone block
  ConicProblem problem;
};

Equilibration equilibrate(const ConicProblem& p, const std::vector<BlockRef>& refs) {
  const Eigen::Index m = p.num_constraints();
  const Eigen::Index n = p.num_vars();
  Equilibration eq;
  eq.row = Eigen::VectorXd::Ones(m);
  eq.col = Eigen::VectorXd::Ones(n);

  std::vector<size_t> col_block(static_cast<size_t>(n));
  for (size_t r = 0; r < refs.size(); ++r)
    for (Eigen::Index t = 0; t < refs[r].len; ++t)
      col_block[static_cast<size_t>(refs[r].offset + t)] = r;

  Eigen::VectorXd blk = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(refs.size()));
  for (int pass = 0; pass < 4; ++pass) {
    Eigen::VectorXd rmax = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd bmax = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(refs.size()));
    for (int k = 0; k < p.A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, k); it; ++it) {
        const double v =
            std::abs(it.value()) * eq.row[it.row()] * blk[col_block[it.col()]];
        rmax[it.row()] = std::max(rmax[it.row()], v);
        bmax[col_block[it.col()]] = std::max(bmax[col_block[it.col()]], v);
      }
    for (Eigen::Index i = 0; i < m; ++i)
      if (rmax[i] > 0) eq.row[i] /= std::sqrt(rmax[i]);
    for (Eigen::Index r = 0; r < bmax.size(); ++r)
      if (bmax[r] > 0) blk[r] /= std::sqrt(bmax[r]);
  }
  for (Eigen::Index j = 0; j < n; ++j) eq.col[j] = blk[col_block[j]];

  eq.problem.cones = p.cones;
  eq.problem.cone_names = p.cone_names;
  eq.problem.b = eq.row.cwiseProduct(p.b);
  eq.problem.c = eq.col.cwiseProduct(p.c);
  eq.problem.A = eq.row.asDiagonal() * p.A * eq.col.asDiagonal();
  return eq;
}

class HsdSolver {
 public:
  // Iterates on `p` (typically equilibrated); convergence tests and the
  // returned solution are expressed against `natural` via x = dc x', y = dr
  // y', z = z' / dc.
  HsdSolver(const ConicProblem& p, const ConicProblem& natural,
            Eigen::VectorXd dr, Eigen::VectorXd dc, const SolverOptions& opts)
      : p_(p),
        nat_(natural),
        dr_(std::move(dr)),
        dc_(std::move(dc)),
        opts_(opts),
        refs_(make_refs(p)),
        bc_(make_block_cols(p, refs_)),
        n_(p.num_vars()),
        m_(p.num_constraints()) {
    nu_ = 0;
    for (const auto& cone : p.cones) nu_ += cone.degree();
    scal_.resize(refs_.size());
  }

  HsdSolver(const ConicProblem& p, const SolverOptions& opts)
      : HsdSolver(p, p, Eigen::VectorXd::Ones(p.num_constraints()),
                  Eigen::VectorXd::Ones(p.num_vars()), opts) {}

  // Schur complement A Finv A^T; with identity = true the NT scaling is
  // ignored (used by the presolve rank check as plain A A^T).
  Eigen::MatrixXd build_schur(bool identity) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m_, m_);
    Eigen::MatrixXd B, H, G;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& cols = bc_[r];
      const Eigen::Index nr = static_cast<Eigen::Index>(cols.rows.size());
      if (nr == 0) continue;
      if (identity) {
        B = cols.At;
      } else if (refs_[r].kind == ConeKind::NonNeg) {
        B = scal_[r].finv.asDiagonal() * cols.At;
      } else {
        B.resize(refs_[r].len, nr);
        for (Eigen::Index t = 0; t < nr; ++t) {
          unpack(cols.At.col(t).data(), refs_[r].side, H);
          G.noalias() = scal_[r].T * H * scal_[r].T;
          pack(G, B.col(t).data());
        }
      }
      Eigen::MatrixXd Mr = cols.At.transpose() * B;
      for (Eigen::Index a = 0; a < nr; ++a)
        for (Eigen::Index t = 0; t < nr; ++t) M(cols.rows[a], cols.rows[t]) += Mr(a, t);
    }
    return 0.5 * (M + M.transpose());
  }

  Eigen::VectorXd A_mul(const Eigen::VectorXd& f) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& cols = bc_[r];
      if (cols.rows.empty()) continue;
      Eigen::VectorXd t = cols.At.transpose() * f.segment(refs_[r].offset, refs_[r].len);
      for (size_t a = 0; a < cols.rows.size(); ++a) out[cols.rows[a]] += t[a];
    }
    return out;
  }

  Eigen::VectorXd At_mul(const Eigen::VectorXd& w) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& cols = bc_[r];
      if (cols.rows.empty()) continue;
      Eigen::VectorXd local(cols.rows.size());
      for (size_t a = 0; a < cols.rows.size(); ++a) local[a] = w[cols.rows[a]];
      out.segment(refs_[r].offset, refs_[r].len).noalias() = cols.At * local;
    }
    return out;
  }

  Eigen::VectorXd Finv_apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(n_);
    Eigen::MatrixXd H, G;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      if (ref.kind == ConeKind::NonNeg) {
        out.segment(ref.offset, ref.len) =
            scal_[r].finv.cwiseProduct(v.segment(ref.offset, ref.len));
      } else {
        unpack(v.data() + ref.offset, ref.side, H);
        G.noalias() = scal_[r].T * H * scal_[r].T;
        pack(G, out.data() + ref.offset);
      }
    }
    return out;
  }

  Eigen::VectorXd F_apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(n_);
    Eigen::MatrixXd H, G;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      if (ref.kind == ConeKind::NonNeg) {
        out.segment(ref.offset, ref.len) =
            scal_[r].fwd.cwiseProduct(v.segment(ref.offset, ref.len));
      } else {
        unpack(v.data() + ref.offset, ref.side, H);
        G.noalias() = scal_[r].Tinv * H * scal_[r].Tinv;
        pack(G, out.data() + ref.offset);
      }
    }
    return out;
  }

  // |W^{-T} v|^2, accumulated block by block so it stays nonnegative under
  // roundoff even when the scaling is severely ill-conditioned.
  double winvt_sqnorm(const Eigen::VectorXd& v) const {
    double out = 0;
    Eigen::MatrixXd H, G;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      if (ref.kind == ConeKind::NonNeg) {
        out += scal_[r].winv.cwiseProduct(v.segment(ref.offset, ref.len)).squaredNorm();
      } else {
        unpack(v.data() + ref.offset, ref.side, H);
        G.noalias() = scal_[r].Rinv * H * scal_[r].Rinv.transpose();
        out += G.squaredNorm();
      }
    }
    return out;
  }

  // Solves F u - A^T v = rf, A u = ra by Schur elimination, then one
  // refinement sweep against the true operators: the elimination alone
  // leaves a residue that grows like the squared NT conditioning and would
  // put a floor under the primal residual.
  void sub_solve(const Eigen::VectorXd& rf, const Eigen::VectorXd& ra,
                 Eigen::VectorXd& u, Eigen::VectorXd& v) const {
    v = schur_solve(ra - A_mul(Finv_apply(rf)));
    u = Finv_apply(rf + At_mul(v));
    double best = kInf;
    Eigen::VectorXd bu, bv;
    for (int sweep = 0; sweep < 4; ++sweep) {
      Eigen::VectorXd ef = rf - F_apply(u) + At_mul(v);
      Eigen::VectorXd ea = ra - A_mul(u);
      const double err = ef.norm() / (1.0 + rf.norm()) + ea.norm() / (1.0 + ra.norm());
      if (err >= best) break;  // refinement stopped paying off
      best = err;
      bu = u;
      bv = v;
      if (err <= 1e-14) break;
      Eigen::VectorXd dv = schur_solve(ea - A_mul(Finv_apply(ef)));
      u += Finv_apply(ef + At_mul(dv));
      v += dv;
    }
    u = std::move(bu);
    v = std::move(bv);
  }

  // Nesterov-Todd scaling from the current (x, z); false on loss of cone
  // interiority beyond floating-point rescue.
  // Iterates are inside the cone by construction, so a Cholesky failure here
  // is boundary roundoff; an epsilon-relative diagonal bump recovers a valid
  // (slightly perturbed) factor.
  static bool chol_jitter(const Eigen::MatrixXd& H, Eigen::LLT<Eigen::MatrixXd>& llt) {
    llt.compute(H);
    if (llt.info() == Eigen::Success) return true;
    const double scale = H.diagonal().cwiseAbs().maxCoeff() +
                         std::numeric_limits<double>::min();
    Eigen::MatrixXd Hj;
    for (double bump = 1e-15; bump <= 1.1e-9; bump *= 100) {
      Hj = H;
      Hj.diagonal().array() += bump * scale;
      llt.compute(Hj);
      if (llt.info() == Eigen::Success) return true;
    }
    return false;
  }

  bool update_scaling() {
    Eigen::MatrixXd X, Z;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      auto& s = scal_[r];
      if (ref.kind == ConeKind::NonNeg) {
        auto xs = x_.segment(ref.offset, ref.len);
        auto zs = z_.segment(ref.offset, ref.len);
        if ((xs.array() <= 0).any() || (zs.array() <= 0).any()) return false;
        s.lam = (xs.array() * zs.array()).sqrt();
        s.finv = xs.array() / zs.array();
        s.fwd = zs.array() / xs.array();
        s.winv = s.fwd.cwiseSqrt();
      } else {
        unpack(x_.data() + ref.offset, ref.side, X);
        unpack(z_.data() + ref.offset, ref.side, Z);
        Eigen::LLT<Eigen::MatrixXd> lx, lz;
        if (!chol_jitter(X, lx) || !chol_jitter(Z, lz)) return false;
        Eigen::MatrixXd Lx = lx.matrixL();
        Eigen::MatrixXd Lz = lz.matrixL();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Lx,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        s.sigma = svd.singularValues();
        if (s.sigma.minCoeff() <= 0) return false;
        Eigen::VectorXd si = s.sigma.cwiseSqrt().cwiseInverse();
        s.R.noalias() = Lx * svd.matrixV() * si.asDiagonal();
        s.Rinv.noalias() = si.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
        s.T.noalias() = s.R * s.R.transpose();
        s.Tinv.noalias() = s.Rinv.transpose() * s.Rinv;
      }
    }
    return true;
  }

  // lam o u = d solved in the scaled frame, then mapped by W^{-1}: returns
  // W^{-1}(Lambda^{-1} d) needed in the z-elimination.
  Eigen::VectorXd winv_lamsolve(const Eigen::VectorXd& d) const {
    Eigen::VectorXd out(n_);
    Eigen::MatrixXd D, G;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      const auto& s = scal_[r];
      if (ref.kind == ConeKind::NonNeg) {
        out.segment(ref.offset, ref.len) =
            s.winv.cwiseProduct(d.segment(ref.offset, ref.len).cwiseQuotient(s.lam));
      } else {
        unpack(d.data() + ref.offset, ref.side, D);
        for (Eigen::Index j = 0; j < ref.side; ++j)
          for (Eigen::Index i = 0; i < ref.side; ++i)
            D(i, j) = 2.0 * D(i, j) / (s.sigma[i] + s.sigma[j]);
        G.noalias() = s.Rinv.transpose() * D * s.Rinv;
        G = 0.5 * (G + G.transpose()).eval();
        pack(G, out.data() + ref.offset);
      }
    }
    return out;
  }

  // Scaled directions W^{-T} dx and W dz per PSD block, needed by both the
  // step-to-boundary rule and the Mehrotra correction.
  void scaled_dirs(const Eigen::VectorXd& dx, const Eigen::VectorXd& dz,
                   std::vector<Eigen::MatrixXd>& P, std::vector<Eigen::MatrixXd>& Q) const {
    P.assign(refs_.size(), Eigen::MatrixXd());
    Q.assign(refs_.size(), Eigen::MatrixXd());
    Eigen::MatrixXd H;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      if (ref.kind != ConeKind::Psd) continue;
      const auto& s = scal_[r];
      unpack(dx.data() + ref.offset, ref.side, H);
      P[r].noalias() = s.Rinv * H * s.Rinv.transpose();
      P[r] = 0.5 * (P[r] + P[r].transpose()).eval();
      unpack(dz.data() + ref.offset, ref.side, H);
      Q[r].noalias() = s.R.transpose() * H * s.R;
      Q[r] = 0.5 * (Q[r] + Q[r].transpose()).eval();
    }
  }

  struct Direction {
    Eigen::VectorXd dx, dy, dz;
    double dtau = 0, dkappa = 0;
  };

  // Smallest complementarity eigenvalue of the candidate iterate along with
  // its mu.  In NT-scaled coordinates the current point of every block is
  // diag(sigma) (resp. lam), so candidates are cheap to form from the scaled
  // directions already computed for the line search.
  double pair_floor(double alpha, const Direction& dir,
                    const std::vector<Eigen::MatrixXd>& P,
                    const std::vector<Eigen::MatrixXd>& Q, double& mu_plus) const {
    const double tk = (tau_ + alpha * dir.dtau) * (kappa_ + alpha * dir.dkappa);
    double floor = tk;
    double dot = tk;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      const auto& s = scal_[r];
      if (ref.kind == ConeKind::NonNeg) {
        // The orthant scaling is diagonal, so scaled and natural products agree.
        Eigen::VectorXd xp = x_.segment(ref.offset, ref.len) +
                             alpha * dir.dx.segment(ref.offset, ref.len);
        Eigen::VectorXd zp = z_.segment(ref.offset, ref.len) +
                             alpha * dir.dz.segment(ref.offset, ref.len);
        floor = std::min(floor, (xp.array() * zp.array()).minCoeff());
        dot += xp.dot(zp);
      } else {
        Eigen::MatrixXd U = alpha * P[r];
        U.diagonal() += s.sigma;
        Eigen::MatrixXd V = alpha * Q[r];
        V.diagonal() += s.sigma;
        dot += (U.array() * V.array()).sum();
        Eigen::LLT<Eigen::MatrixXd> lu(U);
        if (lu.info() != Eigen::Success) {
          mu_plus = 0;
          return -1;
        }
        Eigen::MatrixXd L = lu.matrixL();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.transpose() * V * L,
                                                          Eigen::EigenvaluesOnly);
        floor = std::min(floor, es.eigenvalues().minCoeff());
      }
    }
    mu_plus = dot / static_cast<double>(nu_ + 1);
    return floor;
  }

  double step_to_boundary(const Eigen::VectorXd& dx, const Eigen::VectorXd& dz,
                          double dtau, double dkappa,
                          const std::vector<Eigen::MatrixXd>& P,
                          const std::vector<Eigen::MatrixXd>& Q) const {
    double alpha = kInf;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      const auto& s = scal_[r];
      if (ref.kind == ConeKind::NonNeg) {
        for (Eigen::Index i = 0; i < ref.len; ++i) {
          const double xv = x_[ref.offset + i], dv = dx[ref.offset + i];
          if (dv < 0) alpha = std::min(alpha, -xv / dv);
          const double zv = z_[ref.offset + i], dw = dz[ref.offset + i];
          if (dw < 0) alpha = std::min(alpha, -zv / dw);
        }
      } else {
        Eigen::VectorXd si = s.sigma.cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd Ps = si.asDiagonal() * P[r] * si.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esx(Ps, Eigen::EigenvaluesOnly);
        if (esx.eigenvalues().minCoeff() < 0)
          alpha = std::min(alpha, -1.0 / esx.eigenvalues().minCoeff());
        Eigen::MatrixXd Qs = si.asDiagonal() * Q[r] * si.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esz(Qs, Eigen::EigenvaluesOnly);
        if (esz.eigenvalues().minCoeff() < 0)
          alpha = std::min(alpha, -1.0 / esz.eigenvalues().minCoeff());
      }
    }
    if (dtau < 0) alpha = std::min(alpha, -tau_ / dtau);
    if (dkappa < 0) alpha = std::min(alpha, -kappa_ / dkappa);
    return alpha;
  }

  // The Schur complement squares the NT conditioning, past 1/eps(double) in
  // the endgame; an extended-precision factor keeps the inner refinement
  // contracting there at a cost small next to assembling M itself.
  using Matrix80 = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector80 = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

  bool factor_schur() {
    M_ = build_schur(false);
    Matrix80 M80 = M_.cast<long double>();
    for (double reg : {opts_.static_reg, opts_.retry_reg}) {
      Matrix80 Mr = M80;
      Mr.diagonal().array() += static_cast<long double>(reg);
      llt_.compute(Mr);
      if (llt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  Eigen::VectorXd schur_solve(const Eigen::VectorXd& rhs) const {
    Vector80 w = llt_.solve(rhs.cast<long double>());
    // One refinement sweep against the unregularized M.
    Eigen::VectorXd r = rhs - M_ * w.cast<double>();
    w += llt_.solve(r.cast<long double>());
    return w.cast<double>();
  }

  // Newton direction for residual damping eta = 1 - sigma and scaled
  // complementarity targets ds (x layout) and dk.
  bool direction(double eta, const Eigen::VectorXd& ds, double dk,
                 const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, double r3,
                 const Eigen::VectorXd& u2, const Eigen::VectorXd& v2, Direction& out) {
    // Solve the residual and complementarity parts separately: wig blows up
    // near the boundary, and a combined solve would let refinement settle for
    // an absolute error proportional to |wig| in every equation.  Split, each
    // part is refined relative to its own right-hand side, so the primal and
    // dual residual equations keep near-machine accuracy.
    Eigen::VectorXd wig = winv_lamsolve(ds);
    Eigen::VectorXd u1, v1;
    sub_solve(wig, Eigen::VectorXd::Zero(p_.b.size()), u1, v1);
    if (eta != 0) {
      Eigen::VectorXd ur, vr;
      sub_solve(eta * r2, -eta * r1, ur, vr);
      u1 += ur;
      v1 += vr;
    }
    const double d3 = -eta * r3 - dk / tau_;
    // c.u2 - b.v2 equals -|W^{-T} u2|^2 analytically; evaluate it as an
    // explicit sum of squares, which keeps its sign where the difference of
    // two near-equal dot products (or the quadratic form through F) does not.
    const double denom = -winvt_sqnorm(u2) - kappa_ / tau_;
    if (!(denom < 0)) return false;
    const double dtau = (d3 - p_.c.dot(u1) + p_.b.dot(v1)) / denom;
    out.dx = u1 + dtau * u2;
    out.dy = v1 + dtau * v2;
    // Recover dz from the dual equation itself rather than as wig - F dx:
    // near the boundary F is squared-ill-conditioned and the elimination
    // residual would leak into dual feasibility instead of the (benign)
    // complementarity target.
    out.dz = -eta * r2 - At_mul(out.dy) + p_.c * dtau;
    out.dtau = dtau;
    out.dkappa = (dk - kappa_ * dtau) / tau_;
    return true;
  }

  void record_trace(int iter, double step, std::vector<IterateInfo>& trace) const {
    if (!opts_.collect_trace) return;
    IterateInfo info;
    info.iter = iter;
    info.mu = mu_;
    info.step = step;
    info.tau = tau_;
    info.kappa = kappa_;
    double mx = kInf, mz = kInf;
    Eigen::MatrixXd H;
    for (size_t r = 0; r < refs_.size(); ++r) {
      const auto& ref = refs_[r];
      if (ref.kind == ConeKind::NonNeg) {
        mx = std::min(mx, x_.segment(ref.offset, ref.len).minCoeff());
        mz = std::min(mz, z_.segment(ref.offset, ref.len).minCoeff());
      } else {
        unpack(x_.data() + ref.offset, ref.side, H);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(H, Eigen::EigenvaluesOnly);
        mx = std::min(mx, ex.eigenvalues().minCoeff());
        unpack(z_.data() + ref.offset, ref.side, H);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ez(H, Eigen::EigenvaluesOnly);
        mz = std::min(mz, ez.eigenvalues().minCoeff());
      }
    }
    info.min_x_margin = mx;
    info.min_z_margin = mz;
    trace.push_back(info);
  }

  // Clip a point onto its cones: negative orthant entries and negative PSD
  // eigenvalues go to zero.
  void clip_to_cones(Eigen::VectorXd& v) const {
    Eigen::MatrixXd H;
    for (const auto& ref : refs_) {
      if (ref.kind == ConeKind::NonNeg) {
        v.segment(ref.offset, ref.len) =
            v.segment(ref.offset, ref.len).cwiseMax(0.0);
      } else {
        unpack(v.data() + ref.offset, ref.side, H);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.eigenvalues().minCoeff() >= 0) continue;
        H = es.eigenvectors() *
            es.eigenvalues().cwiseMax(0.0).asDiagonal() *
            es.eigenvectors().transpose();
        pack(H, v.data() + ref.offset);
      }
    }
  }

  // Late-stage polish: elimination roundoff leaves small primal and dual
  // residual floors on hard instances even though the iterate is essentially
  // optimal.  Alternate between the affine manifolds (primal equalities; the
  // dual equation with a least-squares y refit) and the cones, then accept
  // only if the re-measured residuals meet the tolerance.
  bool polish(int iter, const std::vector<IterateInfo>& trace, ConicSolution& out,
              int max_rounds) const {
    if (!have_aat_ || !(tau_ > 0)) return false;
    Eigen::VectorXd xp = x_, yp = y_, zp = z_;
    Eigen::VectorXd bx, by, bz;
    Residuals res, best;
    best.primal = best.dual = best.gap = kInf;
    int since_gain = 0;
    for (int round = 0; round < max_rounds; ++round) {
      Vector80 rr = (A_mul(xp) - p_.b * tau_).cast<long double>();
      Vector80 w = aat_llt_.solve(rr);
      w += aat_llt_.solve(rr - aat_ * w);
      xp -= At_mul(w.cast<double>());
      clip_to_cones(xp);
      Vector80 rhs = A_mul(p_.c * tau_ - zp).cast<long double>();
      Vector80 wy = aat_llt_.solve(rhs);
      wy += aat_llt_.solve(rhs - aat_ * wy);
      yp = wy.cast<double>();
      zp = p_.c * tau_ - At_mul(yp);
      clip_to_cones(zp);
      res = residuals(nat_, dc_.cwiseProduct(xp) / tau_, dr_.cwiseProduct(yp) / tau_,
                      zp.cwiseQuotient(dc_) / tau_);
      if (res.worst() < best.worst()) {
        since_gain = res.worst() > 0.9 * best.worst() ? since_gain + 1 : 0;
        best = res;
        bx = xp;
        by = yp;
        bz = zp;
        if (best.worst() <= opts_.tol) break;
      } else if (++since_gain >= 3) {
        break;  // the alternation has hit its floor
      }
    }
    res = best;
    if (std::getenv("RCBF_DEBUG"))
      std::fprintf(stderr, "  [polish] res %.3e %.3e %.3e\n", res.primal, res.dual,
                   res.gap);
    if (res.worst() > opts_.tol) return false;
    Eigen::VectorXd xn = dc_.cwiseProduct(bx) / tau_;
    Eigen::VectorXd yn = dr_.cwiseProduct(by) / tau_;
    Eigen::VectorXd zn = bz.cwiseQuotient(dc_) / tau_;
    out.status = SolveStatus::Optimal;
    out.iterations = iter;
    out.trace = trace;
    out.tau = tau_;
    out.kappa = kappa_;
    out.x = std::move(xn);
    out.y = std::move(yn);
    out.z = std::move(zn);
    out.residuals = res;
    out.primal_objective = nat_.c.dot(out.x);
    out.dual_objective = nat_.b.dot(out.y);
    return true;
  }

  ConicSolution finish(SolveStatus status, int iterations,
                       std::vector<IterateInfo> trace) const {
    ConicSolution sol;
    sol.status = status;
    sol.iterations = iterations;
    sol.trace = std::move(trace);
    sol.tau = tau_;
    sol.kappa = kappa_;
    Eigen::VectorXd xn = dc_.cwiseProduct(x_);
    Eigen::VectorXd yn = dr_.cwiseProduct(y_);
    Eigen::VectorXd zn = z_.cwiseQuotient(dc_);
    if (status == SolveStatus::PrimalInfeasible) {
      const double by = nat_.b.dot(yn);
      sol.x = std::move(xn);
      sol.y = yn / by;
      sol.z = zn / by;
    } else if (status == SolveStatus::DualInfeasible) {
      const double cx = -nat_.c.dot(xn);
      sol.x = xn / cx;
      sol.y = std::move(yn);
      sol.z = std::move(zn);
    } else if (tau_ > 0) {
      sol.x = xn / tau_;
      sol.y = yn / tau_;
      sol.z = zn / tau_;
    } else {
      sol.x = std::move(xn);
      sol.y = std::move(yn);
      sol.z = std::move(zn);
    }
    sol.residuals = residuals(nat_, sol.x, sol.y, sol.z);
    sol.primal_objective = nat_.c.dot(sol.x);
    sol.dual_objective = nat_.b.dot(sol.y);
    return sol;
  }

  ConicSolution run() {
    // Interior start: identity in every cone.
    x_ = Eigen::VectorXd::Zero(n_);
    z_ = Eigen::VectorXd::Zero(n_);
    for (const auto& ref : refs_) {
      if (ref.kind == ConeKind::NonNeg) {
        x_.segment(ref.offset, ref.len).setOnes();
        z_.segment(ref.offset, ref.len).setOnes();
      } else {
        Eigen::Index p = ref.offset;
        for (Eigen::Index j = 0; j < ref.side; ++j)
          for (Eigen::Index i = 0; i <= j; ++i, ++p)
            if (i == j) {
              x_[p] = 1.0;
              z_[p] = 1.0;
            }
      }
    }
    y_ = Eigen::VectorXd::Zero(m_);
    tau_ = 1.0;
    kappa_ = 1.0;
    mu_ = (x_.dot(z_) + tau_ * kappa_) / static_cast<double>(nu_ + 1);

    std::vector<IterateInfo> trace;
    record_trace(0, 0.0, trace);

    // Constant across iterations; used by the terminal polish projection.
    aat_ = build_schur(true).cast<long double>();
    aat_llt_.compute(aat_);
    have_aat_ = aat_llt_.info() == Eigen::Success;

    int stall_count = 0;
    int tiny_count = 0;
    // Failure exits get one deep polish attempt first: a stalled iterate is
    // often optimal to all but the last digit, and the projections close it.
    auto concede = [&](SolveStatus st, int it) {
      ConicSolution psol;
      if (polish(it, trace, psol, 64)) return psol;
      return finish(st, it, trace);
    };
    for (int iter = 1; iter <= opts_.max_iter; ++iter) {
      // Residuals of the homogeneous model.
      Eigen::VectorXd r1 = A_mul(x_) - p_.b * tau_;
      Eigen::VectorXd r2 = At_mul(y_) + z_ - p_.c * tau_;
      const double r3 = p_.c.dot(x_) - p_.b.dot(y_) + kappa_;
      mu_ = (x_.dot(z_) + tau_ * kappa_) / static_cast<double>(nu_ + 1);

      // Convergence and certificate tests run in natural units so the
      // reported statuses are meaningful for the problem as given.
      Eigen::VectorXd xn = dc_.cwiseProduct(x_);
      Eigen::VectorXd yn = dr_.cwiseProduct(y_);
      Eigen::VectorXd zn = z_.cwiseQuotient(dc_);
      if (tau_ > 0) {
        Residuals res = residuals(nat_, xn / tau_, yn / tau_, zn / tau_);
        if (std::getenv("RCBF_DEBUG"))
          std::fprintf(stderr, "  [it %d] rp=%.3e rd=%.3e gap=%.3e |r1|=%.3e |r2|=%.3e mu=%.3e\n",
                       iter, res.primal, res.dual, res.gap, r1.norm(), r2.norm(), mu_);
        if (res.worst() <= opts_.tol) return finish(SolveStatus::Optimal, iter - 1, trace);
        ConicSolution psol;
        if (res.worst() <= 1e-3 && polish(iter - 1, trace, psol, 8)) return psol;
      }
      if (iter > 1) {
        const double by = nat_.b.dot(yn);
        if (by > 0 && (nat_.A.transpose() * yn + zn).norm() <=
                          opts_.infeas_tol * by * (1.0 + yn.norm() / by))
          return finish(SolveStatus::PrimalInfeasible, iter - 1, trace);
        const double cx = nat_.c.dot(xn);
        if (cx < 0 && (nat_.A * xn).norm() <=
                          opts_.infeas_tol * (-cx) * (1.0 + xn.norm() / (-cx)))
          return finish(SolveStatus::DualInfeasible, iter - 1, trace);
      }

      if (!update_scaling()) {
        if (std::getenv("RCBF_DEBUG")) std::fprintf(stderr, "  [exit] update_scaling it %d\n", iter);
        return finish(SolveStatus::NumericalFailure, iter - 1, trace);
      }
      if (!factor_schur()) {
        if (std::getenv("RCBF_DEBUG")) std::fprintf(stderr, "  [exit] factor_schur it %d\n", iter);
        return finish(SolveStatus::NumericalFailure, iter - 1, trace);
      }

      // The tau-column system depends only on (c, b, F): shared by both steps.
      Eigen::VectorXd u2, v2;
      sub_solve(-p_.c, p_.b, u2, v2);

      // Predictor: full residual damping, plain complementarity target.
      Eigen::VectorXd ds(n_);
      for (size_t r = 0; r < refs_.size(); ++r) {
        const auto& ref = refs_[r];
        if (ref.kind == ConeKind::NonNeg) {
          ds.segment(ref.offset, ref.len) =
              -scal_[r].lam.cwiseProduct(scal_[r].lam);
        } else {
          ds.segment(ref.offset, ref.len).setZero();
          Eigen::Index p = ref.offset;
          for (Eigen::Index j = 0; j < ref.side; ++j)
            for (Eigen::Index i = 0; i <= j; ++i, ++p)
              if (i == j) ds[p] = -scal_[r].sigma[j] * scal_[r].sigma[j];
        }
      }
      Direction aff;
      if (!direction(1.0, ds, -tau_ * kappa_, r1, r2, r3, u2, v2, aff)) {
        if (std::getenv("RCBF_DEBUG")) std::fprintf(stderr, "  [exit] aff direction it %d\n", iter);
        return finish(SolveStatus::NumericalFailure, iter - 1, trace);
      }

      std::vector<Eigen::MatrixXd> Pa, Qa;
      scaled_dirs(aff.dx, aff.dz, Pa, Qa);
      const double alpha_aff =
          std::min(1.0, step_to_boundary(aff.dx, aff.dz, aff.dtau, aff.dkappa, Pa, Qa));
      const double mu_aff = ((x_ + alpha_aff * aff.dx).dot(z_ + alpha_aff * aff.dz) +
                             (tau_ + alpha_aff * aff.dtau) * (kappa_ + alpha_aff * aff.dkappa)) /
                            static_cast<double>(nu_ + 1);
      double sigma = std::pow(std::max(0.0, mu_aff / mu_), 3.0);
      sigma = std::min(1.0, sigma);

      // Corrector: recenters to sigma*mu and subtracts the second-order
      // Mehrotra term formed from the scaled affine directions.
      for (size_t r = 0; r < refs_.size(); ++r) {
        const auto& ref = refs_[r];
        if (ref.kind == ConeKind::NonNeg) {
          // (W^{-T}dx)_i (W dz)_i = dx_i dz_i for the orthant.
          auto seg = ds.segment(ref.offset, ref.len);
          seg.array() += sigma * mu_;
          seg -= aff.dx.segment(ref.offset, ref.len)
                     .cwiseProduct(aff.dz.segment(ref.offset, ref.len));
        } else {
          Eigen::MatrixXd corr = 0.5 * (Pa[r] * Qa[r] + Qa[r] * Pa[r]);
          Eigen::Index p = ref.offset;
          for (Eigen::Index j = 0; j < ref.side; ++j)
            for (Eigen::Index i = 0; i <= j; ++i, ++p) {
              ds[p] -= (i == j) ? corr(i, j) : kRt2 * corr(i, j);
              if (i == j) ds[p] += sigma * mu_;
            }
        }
      }
      Direction dir;
      if (!direction(1.0 - sigma, ds, -tau_ * kappa_ + sigma * mu_ - aff.dtau * aff.dkappa,
                     r1, r2, r3, u2, v2, dir)) {
        if (std::getenv("RCBF_DEBUG")) std::fprintf(stderr, "  [exit] comb direction it %d\n", iter);
        return finish(SolveStatus::NumericalFailure, iter - 1, trace);
      }

      std::vector<Eigen::MatrixXd> P, Q;
      scaled_dirs(dir.dx, dir.dz, P, Q);
      const double alpha_max = step_to_boundary(dir.dx, dir.dz, dir.dtau, dir.dkappa, P, Q);
      double alpha = std::min(1.0, opts_.step_fraction * alpha_max);
      // Keep the iterate inside a wide centrality neighborhood: Mehrotra
      // steps can otherwise land on points whose smallest complementarity
      // eigenvalue collapses many orders below mu, after which the scaling
      // factorization dies before the residuals reach tolerance.
      for (int bt = 0; bt < 20; ++bt) {
        double mu_plus;
        const double floor = pair_floor(alpha, dir, P, Q, mu_plus);
        if (floor >= 1e-3 * mu_plus) break;
        alpha *= 0.8;
      }
      if (alpha < opts_.stall_step) {
        if (++stall_count >= 2) {
          if (std::getenv("RCBF_DEBUG")) std::fprintf(stderr, "  [exit] stall it %d\n", iter);
          return finish(SolveStatus::NumericalFailure, iter, trace);
        }
      } else {
        stall_count = 0;
      }
      // A healthy run never strings together near-zero steps; cut the loss
      // instead of polishing a numerically dead iterate.
      if (alpha < 1e-6) {
        if (++tiny_count >= 6) {
          if (std::getenv("RCBF_DEBUG")) std::fprintf(stderr, "  [exit] tiny it %d\n", iter);
          return finish(SolveStatus::NumericalFailure, iter, trace);
        }
      } else {
        tiny_count = 0;
      }

      x_ += alpha * dir.dx;
      y_ += alpha * dir.dy;
      z_ += alpha * dir.dz;
      tau_ += alpha * dir.dtau;
      kappa_ += alpha * dir.dkappa;
      mu_ = (x_.dot(z_) + tau_ * kappa_) / static_cast<double>(nu_ + 1);
      record_trace(iter, alpha, trace);
    }
    return finish(SolveStatus::IterationLimit, opts_.max_iter, trace);
  }

 private:
  const ConicProblem& p_;
  const ConicProblem& nat_;
  Eigen::VectorXd dr_, dc_;
  Matrix80 aat_;
  Eigen::LLT<Matrix80> aat_llt_;
  bool have_aat_ = false;
  SolverOptions opts_;
  std::vector<BlockRef> refs_;
  std::vector<BlockCols> bc_;
  Eigen::Index n_, m_;
  Eigen::Index nu_ = 0;
  Eigen::VectorXd x_, y_, z_;
  double tau_ = 1.0, kappa_ = 1.0, mu_ = 1.0;
  std::vector<BlockScaling> scal_;
  Eigen::MatrixXd M_;
  Eigen::LLT<Matrix80> llt_;
};

// Removes linearly dependent constraint rows.  A dependent row whose rhs is
// inconsistent with the rows it depends on yields an exact Farkas
// certificate (A^T y = 0, b^T y = 1 with z = 0).
PresolveOutcome presolve_rank(const ConicProblem& p, const SolverOptions& opts) {
  (void)opts;
  PresolveOutcome out;
  const Eigen::Index m = p.num_constraints();
  HsdSolver probe(p, SolverOptions{});
  Eigen::MatrixXd M0 = probe.build_schur(true);

  Eigen::VectorXd d = M0.diagonal().cwiseMax(0.0).cwiseSqrt();
  bool suspicious = false;
  for (Eigen::Index i = 0; i < m; ++i)
    if (d[i] <= 1e-14) suspicious = true;
  if (!suspicious) {
    Eigen::MatrixXd Mn = d.cwiseInverse().asDiagonal() * M0 * d.cwiseInverse().asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Mn);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-13)
      suspicious = true;
  }
  if (!suspicious) return out;

  Eigen::MatrixXd At = Eigen::MatrixXd(p.A).transpose();  // n x m
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  if (rank == m) return out;

  std::vector<int> kept(qr.colsPermutation().indices().data(),
                        qr.colsPermutation().indices().data() + rank);
  std::sort(kept.begin(), kept.end());
  std::vector<char> is_kept(m, 0);
  for (int r : kept) is_kept[r] = 1;

  Eigen::MatrixXd At_kept(At.rows(), rank);
  Eigen::VectorXd b_kept(rank);
  for (Eigen::Index t = 0; t < rank; ++t) {
    At_kept.col(t) = At.col(kept[t]);
    b_kept[t] = p.b[kept[t]];
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr2(At_kept);
  bool any_removed = false;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (is_kept[r]) continue;
    Eigen::VectorXd combo = qr2.solve(At.col(r));
    const double row_res = (At_kept * combo - At.col(r)).norm();
    const double rhs_res = std::abs(b_kept.dot(combo) - p.b[r]);
    if (row_res > 1e-8 * (1.0 + At.col(r).norm())) {
      // Dependence not confirmed at this tolerance; keep the row.
      kept.push_back(static_cast<int>(r));
      is_kept[r] = 1;
      continue;
    }
    if (rhs_res > 1e-8 * (1.0 + std::abs(p.b[r]))) {
      out.infeasible = true;
      out.cert_y = Eigen::VectorXd::Zero(m);
      for (Eigen::Index t = 0; t < rank; ++t) out.cert_y[kept[t]] = combo[t];
      out.cert_y[r] = -1.0;
      out.cert_y /= out.cert_y.dot(p.b);  // b^T y = 1
      return out;
    }
    any_removed = true;
  }
  if (!any_removed) return out;
  std::sort(kept.begin(), kept.end());

  out.reduced = true;
  out.kept = kept;
  out.problem.c = p.c;
  out.problem.b.resize(static_cast<Eigen::Index>(kept.size()));
  out.problem.cones = p.cones;
  out.problem.cone_names = p.cone_names;
  Eigen::SparseMatrix<double, Eigen::RowMajor> ar(p.A);
  std::vector<Eigen::Triplet<double>> trips;
  for (size_t t = 0; t < kept.size(); ++t) {
    out.problem.b[static_cast<Eigen::Index>(t)] = p.b[kept[t]];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, kept[t]); it;
         ++it)
      trips.emplace_back(static_cast<int>(t), static_cast<int>(it.col()), it.value());
  }
  out.problem.A.resize(static_cast<Eigen::Index>(kept.size()), p.num_vars());
  out.problem.A.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

void ConicProblem::validate() const {
  require(!cones.empty(), "cone specification must be nonempty");
  Eigen::Index total = 0;
  for (const auto& cone : cones) {
    require(cone.size >= 1, "cone block sizes must be >= 1");
    total += cone.scalar_size();
  }
  require(c.size() == total, "objective length must match the cone scalar size");
  require(A.cols() == total, "A column count must match the cone scalar size");
  require(A.rows() == b.size(), "A row count must match b");
  require(b.size() >= 1, "problem must have at least one constraint");
  require(c.allFinite() && b.allFinite(), "problem data must be finite");
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      require(std::isfinite(it.value()), "problem data must be finite");
  require(cone_names.empty() || cone_names.size() == cones.size(),
          "cone_names must be empty or match the cone count");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

Residuals residuals(const ConicProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  Residuals res;
  res.primal = (problem.A * x - problem.b).norm() / (1.0 + problem.b.norm());
  res.dual = (problem.A.transpose() * y + z - problem.c).norm() / (1.0 + problem.c.norm());
  const double cx = problem.c.dot(x), by = problem.b.dot(y);
  res.gap = std::abs(cx - by) / (1.0 + std::abs(cx) + std::abs(by));
  return res;
}

Residuals residuals(const ConicProblem& problem, const ConicSolution& sol) {
  return residuals(problem, sol.x, sol.y, sol.z);
}

ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts) {
  problem.validate();
  PresolveOutcome pre = presolve_rank(problem, opts);
  if (pre.infeasible) {
    ConicSolution sol;
    sol.status = SolveStatus::PrimalInfeasible;
    sol.x = Eigen::VectorXd::Zero(problem.num_vars());
    sol.y = pre.cert_y;
    sol.z = Eigen::VectorXd::Zero(problem.num_vars());
    sol.residuals = residuals(problem, sol);
    sol.primal_objective = 0.0;
    sol.dual_objective = problem.b.dot(sol.y);
    return sol;
  }
  const ConicProblem& p = pre.reduced ? pre.problem : problem;
  Equilibration eq = equilibrate(p, make_refs(p));
  HsdSolver solver(eq.problem, p, eq.row, eq.col, opts);
  ConicSolution sol = solver.run();
  // An aggressive step fraction occasionally drives a borderline instance
  // into a corner of the cone it cannot back out of; a shorter step traces a
  // different trajectory and usually converges.  Retry before giving up.
  for (double sf : {0.95, 0.85}) {
    if (sol.status != SolveStatus::NumericalFailure &&
        sol.status != SolveStatus::IterationLimit)
      break;
    if (opts.step_fraction < sf) continue;
    SolverOptions safer = opts;
    safer.step_fraction = sf;
    HsdSolver again(eq.problem, p, eq.row, eq.col, safer);
    ConicSolution alt = again.run();
    if (alt.status == SolveStatus::Optimal ||
        alt.status == SolveStatus::PrimalInfeasible ||
        alt.status == SolveStatus::DualInfeasible ||
        alt.residuals.worst() < sol.residuals.worst())
      sol = std::move(alt);
  }
  if (pre.reduced) {
    Eigen::VectorXd y_full = Eigen::VectorXd::Zero(problem.num_constraints());
    for (size_t t = 0; t < pre.kept.size(); ++t) y_full[pre.kept[t]] = sol.y[t];
    sol.y = y_full;
    sol.residuals = residuals(problem, sol);
  }
  return sol;
}

void dump_problem(const ConicProblem& problem, std::ostream& os) {
  problem.validate();
  os << "conic-problem v1\n";
  os << "vars " << problem.num_vars() << "\n";
  os << "rows " << problem.num_constraints() << "\n";
  os << "cones " << problem.cones.size() << "\n";
  for (size_t r = 0; r < problem.cones.size(); ++r) {
    const auto& cone = problem.cones[r];
    os << "cone " << r << " " << (cone.kind == ConeKind::NonNeg ? "nonneg" : "psd") << " "
       << cone.size;
    if (!problem.cone_names.empty()) os << " " << problem.cone_names[r];
    os << "\n";
  }
  os.precision(17);
  os << "c";
  for (Eigen::Index i = 0; i < problem.c.size(); ++i) os << " " << problem.c[i];
  os << "\nb";
  for (Eigen::Index i = 0; i < problem.b.size(); ++i) os << " " << problem.b[i];
  os << "\nA " << problem.A.nonZeros() << "\n";
  for (int k = 0; k < problem.A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(problem.A, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace rcbf
