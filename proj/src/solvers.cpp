#include "gglr/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace gglr {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

CgResult cg_solve(const LinOp& op, std::span<const double> b, int max_iters,
                  double tol) {
  const size_t n = b.size();
  CgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> p = r;
  std::vector<double> mp(n, 0.0);
  double rr = dot(r, r);
  for (int t = 0; t < max_iters; ++t) {
    if (std::sqrt(rr) <= tol * bnorm) break;
    op(p, mp);
    const double pmp = dot(p, mp);
    if (pmp <= 0.0) throw SolverError("cg_solve: operator is not positive semi-definite");
    const double alpha = rr / pmp;
    for (size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * mp[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    ++res.iterations;
    if (std::sqrt(rr) <= tol * bnorm) break;
    for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  res.rel_residual = std::sqrt(rr) / bnorm;
  res.converged = res.rel_residual <= tol;
  return res;
}

CgResult cg_solve_from(const LinOp& op, std::span<const double> b,
                       std::span<const double> x0, int max_iters, double tol) {
  const size_t n = b.size();
  std::vector<double> mb(n, 0.0);
  op(x0, mb);
  std::vector<double> resid(n);
  for (size_t i = 0; i < n; ++i) resid[i] = b[i] - mb[i];
  CgResult res = cg_solve(op, resid, max_iters, tol);
  for (size_t i = 0; i < n; ++i) res.x[i] += x0[i];
  return res;
}

// --------------------------------------------------------------------------
// ADMM family.
// --------------------------------------------------------------------------

AdmmSolver::AdmmSolver(const FormationModel& m, std::span<const double> y,
                       const GngPrior& prior, const AdmmConfig& cfg)
    : model_(&m), cfg_(cfg), prior_(prior) {
  if (static_cast<int>(y.size()) != m.output_dim())
    throw std::invalid_argument("AdmmSolver: observation dimension mismatch");
  std::vector<double> aty = m.adjoint(y);
  aty2_.resize(aty.size());
  for (size_t i = 0; i < aty.size(); ++i) aty2_[i] = 2.0 * aty[i];
  x_ = aty;  // z^(0) = A^T y, multipliers start at zero
  rebuild_terms();
  z_.assign(terms_.size(), aty);
  lambda_.assign(terms_.size(), std::vector<double>(aty.size(), 0.0));
}

const SparseSym& AdmmSolver::lap(int idx) const {
  switch (idx) {
    case 0:
      return prior_.L_inline;
    case 1:
      return prior_.L_cross;
    default:
      return prior_.component_terms[idx - 2];
  }
}

void AdmmSolver::rebuild_terms() {
  terms_.clear();
  switch (cfg_.family) {
    case SolverFamily::Direct:
      break;
    case SolverFamily::Aux1:
      terms_.push_back({{{0, 2.0 * prior_.mu / cfg_.rho}, {1, 2.0 * prior_.mu_tilde / cfg_.rho}},
                        cfg_.rho});
      break;
    case SolverFamily::Aux2:
      terms_.push_back({{{0, 2.0 * prior_.mu / cfg_.rho}}, cfg_.rho});
      terms_.push_back({{{1, 2.0 * prior_.mu_tilde / cfg_.rho_tilde}}, cfg_.rho_tilde});
      break;
    case SolverFamily::Aux4:
      if (!prior_.has_components())
        throw std::invalid_argument("AdmmSolver: Aux4 requires a prior built with component terms");
      terms_.push_back({{{2, 2.0 * prior_.mu / cfg_.rho}}, cfg_.rho});
      terms_.push_back({{{3, 2.0 * prior_.mu / cfg_.rho}}, cfg_.rho});
      terms_.push_back({{{4, 2.0 * prior_.mu_tilde / cfg_.rho_tilde}}, cfg_.rho_tilde});
      terms_.push_back({{{5, 2.0 * prior_.mu_tilde / cfg_.rho_tilde}}, cfg_.rho_tilde});
      break;
  }
  rho_total_ = 0.0;
  for (const AuxTerm& t : terms_) rho_total_ += t.rho;
}

void AdmmSolver::set_prior(GngPrior prior) {
  prior_ = std::move(prior);
  rebuild_terms();
}

void AdmmSolver::step() {
  const size_t n = x_.size();
  std::vector<double> buf(n);

  if (cfg_.family == SolverFamily::Direct) {
    // One warm-started CG pass on (A^T A + mu L + mu~ L~) x = A^T y.
    LinOp op = [this, &buf](std::span<const double> v, std::span<double> out) {
      std::vector<double> g = model_->gram_apply(v);
      std::copy(g.begin(), g.end(), out.begin());
      if (prior_.mu != 0.0) {
        prior_.L_inline.matvec(v, buf);
        for (size_t i = 0; i < out.size(); ++i) out[i] += prior_.mu * buf[i];
      }
      if (prior_.mu_tilde != 0.0) {
        prior_.L_cross.matvec(v, buf);
        for (size_t i = 0; i < out.size(); ++i) out[i] += prior_.mu_tilde * buf[i];
      }
    };
    std::vector<double> rhs(n);
    for (size_t i = 0; i < n; ++i) rhs[i] = 0.5 * aty2_[i];
    x_ = cg_solve_from(op, rhs, x_, cfg_.cg_iters, cfg_.cg_tol).x;
    ++layers_run_;
    residual_history_.push_back(0.0);
    return;
  }

  // x-update: (2 A^T A + sum_a rho_a I) x = 2 A^T y + sum_a rho_a (z_a - lambda_a).
  {
    LinOp op = [this](std::span<const double> v, std::span<double> out) {
      std::vector<double> g = model_->gram_apply(v);
      for (size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * g[i] + rho_total_ * v[i];
    };
    std::vector<double> rhs = aty2_;
    for (size_t a = 0; a < terms_.size(); ++a)
      for (size_t i = 0; i < n; ++i) rhs[i] += terms_[a].rho * (z_[a][i] - lambda_[a][i]);
    x_ = cg_solve_from(op, rhs, x_, cfg_.cg_iters, cfg_.cg_tol).x;
  }

  // z-updates: (I + sum_j c_j L_j) z_a = x + lambda_a.
  for (size_t a = 0; a < terms_.size(); ++a) {
    const AuxTerm& term = terms_[a];
    LinOp op = [this, &term, &buf](std::span<const double> v, std::span<double> out) {
      std::copy(v.begin(), v.end(), out.begin());
      for (const auto& [idx, c] : term.parts) {
        if (c == 0.0) continue;
        lap(idx).matvec(v, buf);
        for (size_t i = 0; i < out.size(); ++i) out[i] += c * buf[i];
      }
    };
    std::vector<double> rhs(n);
    for (size_t i = 0; i < n; ++i) rhs[i] = x_[i] + lambda_[a][i];
    z_[a] = cg_solve_from(op, rhs, z_[a], cfg_.cg_iters, cfg_.cg_tol).x;
  }

  // Multiplier updates and primal residual.
  double resid = 0.0;
  for (size_t a = 0; a < terms_.size(); ++a) {
    for (size_t i = 0; i < n; ++i) {
      const double d = x_[i] - z_[a][i];
      lambda_[a][i] += d;
      resid = std::max(resid, std::abs(d));
    }
  }
  ++layers_run_;
  residual_history_.push_back(resid);
}

std::vector<double> AdmmSolver::relearn_source() const {
  if (z_.empty()) return x_;
  std::vector<double> s(x_.size(), 0.0);
  for (const auto& z : z_)
    for (size_t i = 0; i < s.size(); ++i) s[i] += z[i];
  const double inv = 1.0 / static_cast<double>(z_.size());
  for (double& v : s) v *= inv;
  return s;
}

AdmmState AdmmSolver::state() const {
  AdmmState st;
  st.x = x_;
  st.aux = z_;
  st.multipliers = lambda_;
  st.layers_run = layers_run_;
  st.residual_history = residual_history_;
  return st;
}

namespace {

std::vector<double> run_admm(SolverFamily family, std::span<const double> y,
                             const FormationModel& m, const GngPrior& prior,
                             AdmmConfig cfg, const PriorBuilder& relearn,
                             AdmmState* state) {
  cfg.family = family;
  AdmmSolver solver(m, y, prior, cfg);
  for (int k = 0; k < cfg.outer_layers; ++k) {
    solver.step();
    if (cfg.relearn_graphs && relearn && k + 1 < cfg.outer_layers)
      solver.set_prior(relearn(solver.relearn_source()));
  }
  if (state) *state = solver.state();
  return solver.x();
}

}  // namespace

std::vector<double> admm_aux1(std::span<const double> y, const FormationModel& m,
                              const GngPrior& prior, const AdmmConfig& cfg,
                              const PriorBuilder& relearn, AdmmState* state) {
  return run_admm(SolverFamily::Aux1, y, m, prior, cfg, relearn, state);
}

std::vector<double> admm_aux2(std::span<const double> y, const FormationModel& m,
                              const GngPrior& prior, const AdmmConfig& cfg,
                              const PriorBuilder& relearn, AdmmState* state) {
  return run_admm(SolverFamily::Aux2, y, m, prior, cfg, relearn, state);
}

std::vector<double> admm_aux4(std::span<const double> y, const FormationModel& m,
                              const GngPrior& prior, const AdmmConfig& cfg,
                              const PriorBuilder& relearn, AdmmState* state) {
  return run_admm(SolverFamily::Aux4, y, m, prior, cfg, relearn, state);
}

std::vector<double> assemble_xhat(const std::vector<std::vector<double>>& aux,
                                  const std::vector<std::vector<double>>& multipliers) {
  if (aux.empty() || aux.size() != multipliers.size())
    throw std::invalid_argument("assemble_xhat: mismatched auxiliaries and multipliers");
  std::vector<double> xhat(aux[0].size(), 0.0);
  for (size_t a = 0; a < aux.size(); ++a)
    for (size_t i = 0; i < xhat.size(); ++i) xhat[i] += aux[a][i] - multipliers[a][i];
  return xhat;
}

std::vector<double> direct_solve(const GngPrior& prior, const FormationModel& m,
                                 std::span<const double> y, double cg_tol) {
  const int n = m.input_dim();
  std::vector<double> buf(n);
  LinOp op = [&prior, &m, &buf](std::span<const double> v, std::span<double> out) {
    std::vector<double> g = m.gram_apply(v);
    std::copy(g.begin(), g.end(), out.begin());
    if (prior.mu != 0.0) {
      prior.L_inline.matvec(v, buf);
      for (size_t i = 0; i < out.size(); ++i) out[i] += prior.mu * buf[i];
    }
    if (prior.mu_tilde != 0.0) {
      prior.L_cross.matvec(v, buf);
      for (size_t i = 0; i < out.size(); ++i) out[i] += prior.mu_tilde * buf[i];
    }
  };
  const std::vector<double> rhs = m.adjoint(y);
  CgResult res = cg_solve(op, rhs, 5 * n, cg_tol);
  if (!res.converged)
    throw SolverError("direct_solve: no convergence within iteration cap (near-singular system)");
  return res.x;
}

std::vector<double> glr_iterative_filter(std::span<const double> y, int side,
                                         const FeatureField& features,
                                         const KernelParams& p, double mu,
                                         int iters) {
  if (static_cast<int>(y.size()) != side * side)
    throw std::invalid_argument("glr_iterative_filter: length must be side^2");
  std::vector<double> x(y.begin(), y.end());
  if (mu == 0.0 || iters <= 0) return x;
  const double scale = 1.0 / ((1.0 + mu) * (1.0 + mu));
  std::vector<double> lx(x.size());
  for (int t = 0; t < iters; ++t) {
    const SparseSym L = build_glr_prior(x, side, features, p);
    const SparseSym Lrw = random_walk_laplacian(L);
    Lrw.matvec(x, lx);
    for (size_t i = 0; i < x.size(); ++i)
      x[i] = scale * ((1.0 + 2.0 * mu) * x[i] - mu * lx[i]);
  }
  return x;
}

}  // namespace gglr
