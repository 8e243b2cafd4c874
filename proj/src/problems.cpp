#include "rcbf/problems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rcbf/linalg.hpp"

namespace rcbf {
namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string tag(int i, int k) {
  return "[" + std::to_string(i) + "," + std::to_string(k) + "]";
}
std::string tag(int j, int i, int k) {
  return "[" + std::to_string(j) + "->" + std::to_string(i) + "," +
         std::to_string(k) + "]";
}

// Error set of the scaled channel c*h: {c*e} = {f : f^H (C/c^2) f <= 1}.
ErrorEllipsoid scale_ellipsoid(const ErrorEllipsoid& e, double c) {
  if (e.is_spherical()) return ErrorEllipsoid::spherical(e.radius() * c, e.dim());
  return ErrorEllipsoid::general(e.shape_matrix() / (c * c));
}

// Flat component index of diagonal entry (d, d) within a Hermitian variable.
int diag_component(int d) { return d * (d + 3) / 2; }

// Coefficients q with sum_c q[c] * v[c] = h^H W(v) h for a Hermitian variable
// of the given side, in basis component order.
Eigen::VectorXd quad_coeffs(const VectorXcd& h, int side) {
  Eigen::VectorXd q(side * side);
  for (int c = 0; c < side * side; ++c) {
    MatrixXcd basis = VariableSpace::hermitian_basis(side, c);
    q[c] = std::real(h.dot(basis * h));
  }
  return q;
}

int status_rank(SolveStatus s) {
  switch (s) {
    case SolveStatus::PrimalInfeasible: return 4;
    case SolveStatus::DualInfeasible: return 3;
    case SolveStatus::NumericalFailure: return 2;
    case SolveStatus::IterationLimit: return 1;
    case SolveStatus::Optimal: return 0;
  }
  return 2;
}

}  // namespace

const char* to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::NominalMcbf: return "nominal_mcbf";
    case DesignKind::NominalSbf: return "nominal_sbf";
    case DesignKind::RobustMcbf: return "robust_mcbf";
    case DesignKind::RobustSbf: return "robust_sbf";
  }
  return "unknown";
}

bool parse_design_kind(const std::string& text, DesignKind& out) {
  if (text == "nominal_mcbf" || text == "NominalMcbf") out = DesignKind::NominalMcbf;
  else if (text == "nominal_sbf" || text == "NominalSbf") out = DesignKind::NominalSbf;
  else if (text == "robust_mcbf" || text == "RobustMcbf") out = DesignKind::RobustMcbf;
  else if (text == "robust_sbf" || text == "RobustSbf") out = DesignKind::RobustSbf;
  else return false;
  return true;
}

double ScalarConstraint::value(const Eigen::VectorXd& values) const {
  double v = constant;
  for (const auto& t : terms) v += t.coeff * values[t.var];
  return v;
}

SdpDesign make_design(DesignKind kind, const ChannelSet& channels,
                      const SystemConfig& cfg, int cell) {
  cfg.validate();
  channels.validate();
  require(channels.num_cells == cfg.num_cells &&
              channels.users_per_cell == cfg.users_per_cell &&
              channels.num_antennas == cfg.num_antennas,
          "channel set and system config dimensions differ");
  const int nc = cfg.num_cells, nk = cfg.users_per_cell, nt = cfg.num_antennas;
  const bool robust = is_robust(kind);
  const bool single = is_single_cell(kind);
  require(cell >= -1 && cell < nc, "cell index out of range");
  require(single || cell == -1, "cell restriction only applies to single-cell kinds");

  std::vector<int> cells;
  if (single && cell >= 0) {
    cells.push_back(cell);
  } else {
    cells.resize(nc);
    std::iota(cells.begin(), cells.end(), 0);
  }

  SdpDesign d;
  d.kind = kind;

  std::vector<VariableSpace::MatrixVar> w_all(nc * nk);
  for (int i : cells)
    for (int k = 0; k < nk; ++k) {
      auto var = d.vars.add_hermitian("W" + tag(i, k), nt);
      w_all[cfg.user_index(i, k)] = var;
      d.w_vars.push_back(var);
      d.w_cell.push_back(i);
      d.w_user.push_back(k);
    }

  // Interference slacks, robust MCBF only, in cap-index order.
  std::vector<VarId> t_all(nc * (nc - 1) * nk, -1);
  if (kind == DesignKind::RobustMcbf) {
    for (int j = 0; j < nc; ++j)
      for (int i = 0; i < nc; ++i) {
        if (i == j) continue;
        for (int k = 0; k < nk; ++k) {
          const VarId id = d.vars.add_scalar("t" + tag(j, i, k), true);
          t_all[cfg.cap_index(j, i, k)] = id;
          d.scalar_info.push_back({"slack", j, i, k, id});
        }
      }
  }

  std::vector<std::pair<VarId, double>> unscale_entries;
  auto cell_w = [&](int i) {
    std::vector<VariableSpace::MatrixVar> vars(nk);
    for (int k = 0; k < nk; ++k) vars[k] = w_all[cfg.user_index(i, k)];
    return vars;
  };

  // Per-user channel normalization plus one global power unit keep every
  // scaled quantity near 1; noise-relative units alone would leave the
  // quadratic coefficients at the physical SNR scale and wreck the cone
  // conditioning.  SINR targets are ratios and survive unchanged.
  Eigen::VectorXd cnorm(nc * nk);
  for (int i = 0; i < nc; ++i)
    for (int k = 0; k < nk; ++k) {
      const int u = cfg.user_index(i, k);
      const double hn = channels.nominal[channels.link_index(i, i, k)].norm();
      cnorm[u] = hn > 0 ? 1.0 / hn : 1.0 / std::sqrt(cfg.noise_powers[u]);
    }
  double scaled_noise_sum = 0.0;
  for (int u = 0; u < nc * nk; ++u)
    scaled_noise_sum += cnorm[u] * cnorm[u] * cfg.noise_powers[u];
  const double pscale = static_cast<double>(nc * nk) / scaled_noise_sum;

  // SINR constraints, one per user of the selected cells.
  for (int i : cells) {
    auto own_w = cell_w(i);
    for (int k = 0; k < nk; ++k) {
      const int u = cfg.user_index(i, k);
      const double c = cnorm[u];
      const double gamma = cfg.sinr_targets[u];
      const int own_link = channels.link_index(i, i, k);
      const VectorXcd hbar = c * channels.nominal[own_link];
      const ErrorEllipsoid ell = scale_ellipsoid(channels.ellipsoids[own_link], c);

      double fixed_noise = pscale * c * c * cfg.noise_powers[u];
      std::vector<VarId> slacks;
      if (kind == DesignKind::RobustMcbf) {
        for (int j = 0; j < nc; ++j)
          if (j != i) slacks.push_back(t_all[cfg.cap_index(j, i, k)]);
      } else if (single) {
        for (int j = 0; j < nc; ++j)
          if (j != i)
            fixed_noise += pscale * c * c * cfg.interference_caps[cfg.cap_index(j, i, k)];
      }

      if (robust && !ell.is_degenerate()) {
        LmiBlock phi = build_phi(hbar, gamma, ell, own_w, k, slacks, fixed_noise,
                                 d.vars, "lambda" + tag(i, i, k));
        d.scalar_info.push_back({"lambda_sinr", i, i, k, phi.multiplier});
        unscale_entries.emplace_back(phi.multiplier, 1.0 / (pscale * c * c));
        d.blocks.push_back(complex_to_real(phi));
        d.block_names.push_back("Phi" + tag(i, k));
      } else {
        ScalarConstraint sc;
        sc.name = "sinr" + tag(i, k);
        sc.constant = -fixed_noise;
        for (int l = 0; l < nk; ++l) {
          const double s = (l == k) ? 1.0 / gamma : -1.0;
          Eigen::VectorXd q = s * quad_coeffs(hbar, nt);
          for (int comp = 0; comp < nt * nt; ++comp)
            if (q[comp] != 0.0) sc.terms.push_back({own_w[l].first + comp, q[comp]});
        }
        if (kind == DesignKind::NominalMcbf) {
          for (int j = 0; j < nc; ++j) {
            if (j == i) continue;
            const VectorXcd hj = c * channels.nominal[channels.link_index(j, i, k)];
            Eigen::VectorXd q = -quad_coeffs(hj, nt);
            auto other_w = cell_w(j);
            for (int l = 0; l < nk; ++l)
              for (int comp = 0; comp < nt * nt; ++comp)
                if (q[comp] != 0.0) sc.terms.push_back({other_w[l].first + comp, q[comp]});
          }
        }
        for (VarId t : slacks) sc.terms.push_back({t, -1.0});
        d.scalar_constraints.push_back(std::move(sc));
      }
    }
  }

  // Leakage constraints.
  if (kind == DesignKind::RobustMcbf) {
    // One per cap (j -> i,k): BS j's worst-case power onto user (i,k)'s
    // serving-channel error set, bounded by the slack.
    for (int i = 0; i < nc; ++i)
      for (int k = 0; k < nk; ++k) {
        const int u = cfg.user_index(i, k);
        const double c = cnorm[u];
        for (int j = 0; j < nc; ++j) {
          if (j == i) continue;
          const int link = channels.link_index(j, i, k);
          const VectorXcd hbar = c * channels.nominal[link];
          const ErrorEllipsoid ell = scale_ellipsoid(channels.ellipsoids[link], c);
          const VarId t = t_all[cfg.cap_index(j, i, k)];
          if (!ell.is_degenerate()) {
            LmiBlock psi = build_psi(hbar, ell, cell_w(j), t, d.vars,
                                     "lambda" + tag(j, i, k));
            d.scalar_info.push_back({"lambda_leak", j, i, k, psi.multiplier});
            unscale_entries.emplace_back(psi.multiplier, 1.0 / (pscale * c * c));
            d.blocks.push_back(complex_to_real(psi));
            d.block_names.push_back("Psi" + tag(j, i, k));
          } else {
            ScalarConstraint sc;
            sc.name = "leak" + tag(j, i, k);
            sc.terms.push_back({t, 1.0});
            Eigen::VectorXd q = -quad_coeffs(hbar, nt);
            auto src_w = cell_w(j);
            for (int l = 0; l < nk; ++l)
              for (int comp = 0; comp < nt * nt; ++comp)
                if (q[comp] != 0.0) sc.terms.push_back({src_w[l].first + comp, q[comp]});
            d.scalar_constraints.push_back(std::move(sc));
          }
        }
      }
  } else if (single) {
    // Per selected cell i: cap the power it radiates toward every other-cell
    // user (j, l) at the configured constant.
    for (int i : cells) {
      auto src_w = cell_w(i);
      for (int j = 0; j < nc; ++j) {
        if (j == i) continue;
        for (int l = 0; l < nk; ++l) {
          const int v = cfg.user_index(j, l);
          const double c = cnorm[v];
          const int link = channels.link_index(i, j, l);
          const VectorXcd hbar = c * channels.nominal[link];
          const ErrorEllipsoid ell = scale_ellipsoid(channels.ellipsoids[link], c);
          const double cap = pscale * c * c * cfg.interference_caps[cfg.cap_index(i, j, l)];
          if (robust && !ell.is_degenerate()) {
            LmiBlock psi = build_psi_capped(hbar, ell, src_w, cap, d.vars,
                                            "lambda" + tag(i, j, l));
            d.scalar_info.push_back({"lambda_leak", i, j, l, psi.multiplier});
            unscale_entries.emplace_back(psi.multiplier, 1.0 / (pscale * c * c));
            d.blocks.push_back(complex_to_real(psi));
            d.block_names.push_back("Leak" + tag(i, j, l));
          } else {
            ScalarConstraint sc;
            sc.name = "leak" + tag(i, j, l);
            sc.constant = cap;
            Eigen::VectorXd q = -quad_coeffs(hbar, nt);
            for (int k = 0; k < nk; ++k)
              for (int comp = 0; comp < nt * nt; ++comp)
                if (q[comp] != 0.0) sc.terms.push_back({src_w[k].first + comp, q[comp]});
            d.scalar_constraints.push_back(std::move(sc));
          }
        }
      }
    }
  }

  // Covariance cone membership, ahead of the constraint blocks.
  std::vector<RealLmiBlock> blocks;
  std::vector<std::string> names;
  for (size_t n = 0; n < d.w_vars.size(); ++n) {
    LmiBlock blk;
    blk.constant = MatrixXcd::Zero(nt, nt);
    for (int comp = 0; comp < nt * nt; ++comp)
      blk.coeffs.emplace_back(d.w_vars[n].first + comp,
                              VariableSpace::hermitian_basis(nt, comp));
    blocks.push_back(complex_to_real(blk));
    names.push_back("W" + tag(d.w_cell[n], d.w_user[n]));
  }
  for (size_t n = 0; n < d.blocks.size(); ++n) {
    blocks.push_back(std::move(d.blocks[n]));
    names.push_back(std::move(d.block_names[n]));
  }
  d.blocks = std::move(blocks);
  d.block_names = std::move(names);

  d.objective = Eigen::VectorXd::Zero(d.vars.count());
  for (size_t n = 0; n < d.w_vars.size(); ++n) {
    const double alpha = cfg.power_weights[d.w_cell[n]];
    for (int dd = 0; dd < nt; ++dd)
      d.objective[d.w_vars[n].first + diag_component(dd)] = alpha;
  }

  d.unscale = Eigen::VectorXd::Ones(d.vars.count());
  for (const auto& [id, s] : unscale_entries) d.unscale[id] = s;
  for (const auto& var : d.w_vars)
    for (int comp = 0; comp < nt * nt; ++comp) d.unscale[var.first + comp] = 1.0 / pscale;
  if (kind == DesignKind::RobustMcbf) {
    for (int i = 0; i < nc; ++i)
      for (int k = 0; k < nk; ++k) {
        const int u = cfg.user_index(i, k);
        for (int j = 0; j < nc; ++j)
          if (j != i)
            d.unscale[t_all[cfg.cap_index(j, i, k)]] =
                1.0 / (pscale * cnorm[u] * cnorm[u]);
      }
  }
  return d;
}

ConicProblem to_conic(const SdpDesign& d) {
  const int m = d.vars.count();
  ConicProblem p;
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> cvals;
  Eigen::Index col = 0;

  std::vector<VarId> nonneg_vars;
  for (VarId v = 0; v < m; ++v)
    if (d.vars.nonnegative(v)) nonneg_vars.push_back(v);
  const Eigen::Index nn =
      static_cast<Eigen::Index>(nonneg_vars.size() + d.scalar_constraints.size());
  if (nn > 0) {
    p.cones.push_back({ConeKind::NonNeg, nn});
    p.cone_names.push_back("nonneg");
    for (VarId v : nonneg_vars) {
      cvals.push_back(0.0);
      trips.emplace_back(v, col, -1.0);
      ++col;
    }
    for (const auto& sc : d.scalar_constraints) {
      cvals.push_back(sc.constant);
      for (const auto& t : sc.terms) trips.emplace_back(t.var, col, -t.coeff);
      ++col;
    }
  }
  for (size_t n = 0; n < d.blocks.size(); ++n) {
    const RealLmiBlock& blk = d.blocks[n];
    const Eigen::Index side = blk.side();
    const Eigen::Index len = svec_size(side);
    p.cones.push_back({ConeKind::Psd, side});
    p.cone_names.push_back(n < d.block_names.size() ? d.block_names[n] : "block");
    Eigen::VectorXd sc = svec(blk.constant);
    for (Eigen::Index t = 0; t < len; ++t) cvals.push_back(sc[t]);
    for (const auto& [id, coef] : blk.coeffs) {
      Eigen::VectorXd sv = svec(coef);
      for (Eigen::Index t = 0; t < len; ++t)
        if (sv[t] != 0.0) trips.emplace_back(id, col + t, -sv[t]);
    }
    col += len;
  }

  p.c = Eigen::Map<Eigen::VectorXd>(cvals.data(), static_cast<Eigen::Index>(cvals.size()));
  p.b = -d.objective;
  p.A.resize(m, col);
  p.A.setFromTriplets(trips.begin(), trips.end());
  p.A.makeCompressed();
  p.validate();
  return p;
}

ConicProblem build_robust_mcbf(const ChannelSet& channels, const SystemConfig& cfg) {
  return to_conic(make_design(DesignKind::RobustMcbf, channels, cfg));
}

ConicProblem build_robust_sbf(const ChannelSet& channels, const SystemConfig& cfg,
                              int cell) {
  require(cell >= 0, "build_robust_sbf requires an explicit cell");
  return to_conic(make_design(DesignKind::RobustSbf, channels, cfg, cell));
}

ConicProblem build_nominal(DesignKind kind, const ChannelSet& channels,
                           const SystemConfig& cfg) {
  require(kind == DesignKind::NominalMcbf || kind == DesignKind::NominalSbf,
          "build_nominal expects a nominal kind");
  return to_conic(make_design(kind, channels, cfg));
}

namespace {

// Solve one structured design and fold its variables into `out`.
void solve_into(const SdpDesign& d, const SystemConfig& cfg,
                const SolverOptions& opts, SdrSolution& out) {
  ConicProblem p = to_conic(d);
  ConicSolution cs = solve(p, opts);

  SolveStatus mapped = cs.status;
  if (cs.status == SolveStatus::DualInfeasible) mapped = SolveStatus::PrimalInfeasible;
  else if (cs.status == SolveStatus::PrimalInfeasible) mapped = SolveStatus::DualInfeasible;

  if (mapped == SolveStatus::PrimalInfeasible && is_single_cell(d.kind) &&
      !d.w_cell.empty())
    out.infeasible_cells.push_back(d.w_cell.front());

  // Keep the worst status across merged single-cell solves.
  if (status_rank(mapped) > status_rank(out.status)) out.status = mapped;

  out.iterations += cs.iterations;
  out.residuals.primal = std::max(out.residuals.primal, cs.residuals.primal);
  out.residuals.dual = std::max(out.residuals.dual, cs.residuals.dual);
  out.residuals.gap = std::max(out.residuals.gap, cs.residuals.gap);

  if (mapped == SolveStatus::PrimalInfeasible && !out.certificate.present) {
    out.certificate.present = true;
    out.certificate.objective = p.c.dot(cs.x);
    out.certificate.residual = (p.A * cs.x).norm();
    out.certificate.detail =
        "Farkas ray: cone-feasible combination of the constraints with negative "
        "constant part; no design point satisfies them";
  } else if (mapped == SolveStatus::DualInfeasible && !out.certificate.present) {
    out.certificate.present = true;
    out.certificate.objective = p.b.dot(cs.y);
    out.certificate.residual = (p.A.transpose() * cs.y + cs.z).norm();
    out.certificate.detail = "improving ray: the design objective is unbounded below";
  }

  if (mapped != SolveStatus::Optimal) return;

  Eigen::VectorXd natural = cs.y.cwiseProduct(d.unscale);
  for (size_t n = 0; n < d.w_vars.size(); ++n) {
    const int u = cfg.user_index(d.w_cell[n], d.w_user[n]);
    out.covariances[u] = VariableSpace::hermitian_value(d.w_vars[n], natural);
  }
  for (const auto& info : d.scalar_info) {
    const double v = natural[info.id];
    if (info.role == "lambda_sinr")
      out.lambda_sinr[cfg.user_index(info.cell, info.user)] = v;
    else if (info.role == "lambda_leak")
      out.lambda_leak[cfg.cap_index(info.src_cell, info.cell, info.user)] = v;
    else if (info.role == "slack")
      out.slacks[cfg.cap_index(info.src_cell, info.cell, info.user)] = v;
  }
}

}  // namespace

SdrSolution solve_design(DesignKind kind, const ChannelSet& channels,
                         const SystemConfig& cfg, const SolverOptions& opts) {
  SdrSolution out;
  out.kind = kind;
  out.status = SolveStatus::Optimal;
  const int users = cfg.num_users();
  const int caps = cfg.num_cells * (cfg.num_cells - 1) * cfg.users_per_cell;
  out.covariances.assign(users, MatrixXcd());
  if (is_robust(kind)) {
    out.lambda_sinr = Eigen::VectorXd::Zero(users);
    out.lambda_leak = Eigen::VectorXd::Zero(caps);
  }
  if (kind == DesignKind::RobustMcbf) out.slacks = Eigen::VectorXd::Zero(caps);

  if (is_single_cell(kind)) {
    for (int i = 0; i < cfg.num_cells; ++i)
      solve_into(make_design(kind, channels, cfg, i), cfg, opts, out);
  } else {
    solve_into(make_design(kind, channels, cfg), cfg, opts, out);
  }

  if (out.status != SolveStatus::Optimal) {
    out.covariances.clear();
    out.objective = 0.0;
    return out;
  }

  out.objective = 0.0;
  out.rank_one_gap = Eigen::VectorXd::Zero(users);
  for (int i = 0; i < cfg.num_cells; ++i)
    for (int k = 0; k < cfg.users_per_cell; ++k) {
      const int u = cfg.user_index(i, k);
      const MatrixXcd& w = out.covariances[u];
      out.objective += cfg.power_weights[i] * w.trace().real();
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(w);
      const auto& ev = es.eigenvalues();
      const int n = static_cast<int>(ev.size());
      const double top = std::max(ev[n - 1], 0.0);
      const double second = n > 1 ? std::max(ev[n - 2], 0.0) : 0.0;
      out.rank_one_gap[u] = second / std::max(top, 1e-300);
    }
  return out;
}

ExtractionResult extract_beamformers(const SdrSolution& sol, const ChannelSet& channels,
                                     const SystemConfig& cfg,
                                     const ExtractionOptions& opts) {
  require(sol.status == SolveStatus::Optimal, "extraction requires an optimal solution");
  cfg.validate();
  channels.validate();
  require(static_cast<int>(sol.covariances.size()) == cfg.num_users(),
          "solution does not cover every user");
  require(opts.randomization_trials >= 1 && opts.rescale_samples >= 1,
          "extraction options must be positive");

  const int nc = cfg.num_cells, nk = cfg.users_per_cell, nt = cfg.num_antennas;
  const int users = cfg.num_users();

  ExtractionResult res;
  res.beams.num_cells = nc;
  res.beams.users_per_cell = nk;
  res.beams.num_antennas = nt;
  res.beams.vectors.assign(users, VectorXcd::Zero(nt));

  bool all_rank_one = sol.rank_one_gap.size() == users;
  for (int u = 0; all_rank_one && u < users; ++u)
    if (!(sol.rank_one_gap[u] <= kRankOneThreshold)) all_rank_one = false;

  if (all_rank_one) {
    for (int u = 0; u < users; ++u) {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sol.covariances[u]);
      const double top = std::max(es.eigenvalues()[nt - 1], 0.0);
      VectorXcd v = es.eigenvectors().col(nt - 1);
      for (int r = 0; r < nt; ++r)
        if (std::abs(v[r]) > 1e-12) {
          v *= std::conj(v[r]) / std::abs(v[r]);
          break;
        }
      res.beams.vectors[u] = std::sqrt(top) * v;
    }
    res.success = true;
    res.randomization_used = false;
    res.sampled_feasible_only = false;
  } else {
    // Gaussian randomization: w ~ CN(0, W) per user, joint rescale to the
    // smallest common factor meeting every target on every error sample,
    // lowest-power candidate wins.
    Rng rng(opts.seed);
    std::vector<MatrixXcd> roots(users);
    // Tolerance commensurate with the solver's: a solved W may carry
    // negative eigenvalues up to roughly the optimality residual.
    for (int u = 0; u < users; ++u) roots[u] = sqrt_psd(sol.covariances[u], 1e-6);

    const bool robust = is_robust(sol.kind);
    const int num_sets = robust ? opts.rescale_samples : 1;
    std::vector<std::vector<VectorXcd>> realized(num_sets);
    {
      std::vector<VectorXcd> zeros(channels.num_links(), VectorXcd::Zero(nt));
      realized[0] = perturb(channels, zeros);
      for (int s = 1; s < num_sets; ++s)
        realized[s] = perturb(channels, draw_error_set(channels, rng));
    }

    double best_power = std::numeric_limits<double>::infinity();
    std::vector<VectorXcd> best;
    for (int trial = 0; trial < opts.randomization_trials; ++trial) {
      std::vector<VectorXcd> cand(users);
      for (int u = 0; u < users; ++u) cand[u] = roots[u] * rng.cnormal_vector(nt);

      // SINR under joint scale s: s^2*sig / (s^2*intf + sigma^2) is increasing
      // in s, so the minimal workable s^2 is the max over users and samples of
      // gamma*sigma^2 / (sig - gamma*intf), defined only when sig > gamma*intf.
      double needed = 0.0;
      bool feasible = true;
      for (int s = 0; feasible && s < num_sets; ++s) {
        for (int i = 0; feasible && i < nc; ++i)
          for (int k = 0; k < nk; ++k) {
            const int u = cfg.user_index(i, k);
            double sig = 0.0, intf = 0.0;
            for (int j = 0; j < nc; ++j) {
              const VectorXcd& h = realized[s][channels.link_index(j, i, k)];
              for (int l = 0; l < nk; ++l) {
                const double pwr = std::norm(h.dot(cand[cfg.user_index(j, l)]));
                if (j == i && l == k) sig = pwr;
                else intf += pwr;
              }
            }
            const double denom = sig - cfg.sinr_targets[u] * intf;
            if (denom <= 0.0) { feasible = false; break; }
            needed = std::max(needed,
                              cfg.sinr_targets[u] * cfg.noise_powers[u] / denom);
          }
      }
      if (!feasible) continue;
      const double scale = std::sqrt(needed);
      double power = 0.0;
      for (int i = 0; i < nc; ++i)
        for (int k = 0; k < nk; ++k)
          power += cfg.power_weights[i] * needed *
                   cand[cfg.user_index(i, k)].squaredNorm();
      if (power < best_power) {
        best_power = power;
        best = cand;
        for (auto& w : best) w *= scale;
      }
    }

    if (best.empty()) {
      res.success = false;
      res.randomization_used = true;
      return res;
    }
    res.beams.vectors = std::move(best);
    res.success = true;
    res.randomization_used = true;
    res.sampled_feasible_only = robust;
  }

  res.power = res.beams.weighted_power(cfg.power_weights);
  res.power_ratio = res.power / std::max(sol.objective, 1e-300);
  return res;
}

}  // namespace rcbf
