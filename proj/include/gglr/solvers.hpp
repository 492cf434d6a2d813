#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gglr/formation.hpp"
#include "gglr/gradient_prior.hpp"

namespace gglr {

// Thrown when an iterative solve fails to reach its tolerance within the
// iteration cap (near-singular system) or the operator is not PSD.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --------------------------------------------------------------------------
// Conjugate gradient.
// --------------------------------------------------------------------------

using LinOp = std::function<void(std::span<const double>, std::span<double>)>;

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Exact CG recursion from x0 = 0, r0 = p0 = b:
//   alpha_t = r^T r / p^T M p,  beta_t = r+^T r+ / r^T r.
// Stops after max_iters iterations or when |r| / |b| <= tol. Throws
// SolverError if p^T M p <= 0 (operator not PSD).
CgResult cg_solve(const LinOp& op, std::span<const double> b, int max_iters,
                  double tol);

// Warm-started variant: solves for x with initial guess x0 by running
// cg_solve on the residual system.
CgResult cg_solve_from(const LinOp& op, std::span<const double> b,
                       std::span<const double> x0, int max_iters, double tol);

// --------------------------------------------------------------------------
// Solver family.
// --------------------------------------------------------------------------

enum class SolverFamily { Direct, Aux1, Aux2, Aux4 };

struct AdmmConfig {
  SolverFamily family = SolverFamily::Aux1;
  double rho = 1.0;
  double rho_tilde = 1.0;
  int outer_layers = 10;  // K
  int cg_iters = 10;      // L
  double cg_tol = 1e-8;
  bool relearn_graphs = true;
};

struct AdmmState {
  std::vector<double> x;
  std::vector<std::vector<double>> aux;          // z variables, one per auxiliary
  std::vector<std::vector<double>> multipliers;  // scaled multipliers, start at 0
  int layers_run = 0;
  std::vector<double> residual_history;  // max_a |x - z_a|_inf per layer
};

// Rebuilds the prior from the current estimate when graph re-learning is on.
using PriorBuilder = std::function<GngPrior(const std::vector<double>&)>;

// Layer-stepped solver shared by the whole family. Each layer runs the
// x-update, the z-update(s) and the multiplier update(s), every linear
// system solved by warm-started CG with cfg.cg_iters iterations. For the
// Direct family a layer is one warm-started CG pass on the combined system.
class AdmmSolver {
 public:
  AdmmSolver(const FormationModel& m, std::span<const double> y,
             const GngPrior& prior, const AdmmConfig& cfg);

  void step();
  void set_prior(GngPrior prior);

  const std::vector<double>& x() const { return x_; }
  // The auxiliary used as the graph re-learning source (mean of the z's;
  // x itself for the Direct family).
  std::vector<double> relearn_source() const;
  AdmmState state() const;

 private:
  struct AuxTerm {
    std::vector<std::pair<int, double>> parts;  // (laplacian index, 2*mu/rho)
    double rho = 0.0;
  };

  void rebuild_terms();
  const SparseSym& lap(int idx) const;

  const FormationModel* model_;
  AdmmConfig cfg_;
  GngPrior prior_;
  std::vector<double> aty2_;  // 2 A^T y
  std::vector<double> x_;
  std::vector<std::vector<double>> z_;
  std::vector<std::vector<double>> lambda_;
  std::vector<AuxTerm> terms_;
  double rho_total_ = 0.0;
  int layers_run_ = 0;
  std::vector<double> residual_history_;
};

// One-shot solve of (A^T A + mu L + mu~ L~) x = A^T y to cg_tol, iteration
// cap 5 * dim. Throws SolverError on non-convergence.
std::vector<double> direct_solve(const GngPrior& prior, const FormationModel& m,
                                 std::span<const double> y, double cg_tol = 1e-8);

// K-layer ADMM drivers. `relearn` is consulted only when
// cfg.relearn_graphs is set; `state` (optional) receives the final iterates
// and residual history.
std::vector<double> admm_aux1(std::span<const double> y, const FormationModel& m,
                              const GngPrior& prior, const AdmmConfig& cfg,
                              const PriorBuilder& relearn = {},
                              AdmmState* state = nullptr);
std::vector<double> admm_aux2(std::span<const double> y, const FormationModel& m,
                              const GngPrior& prior, const AdmmConfig& cfg,
                              const PriorBuilder& relearn = {},
                              AdmmState* state = nullptr);
std::vector<double> admm_aux4(std::span<const double> y, const FormationModel& m,
                              const GngPrior& prior, const AdmmConfig& cfg,
                              const PriorBuilder& relearn = {},
                              AdmmState* state = nullptr);

// Equal-penalty aggregate sum_a (z_a - lambda_a) feeding the x-update.
std::vector<double> assemble_xhat(const std::vector<std::vector<double>>& aux,
                                  const std::vector<std::vector<double>>& multipliers);

// Iterative low-pass filtering with the truncated-TSE approximation of
// (I + mu L_rw)^{-1} on a 4-connected pixel graph whose intensity-mode
// weights are recomputed from the current signal every iteration; a
// discrete anisotropic diffusion. Features stay fixed.
std::vector<double> glr_iterative_filter(std::span<const double> y, int side,
                                         const FeatureField& features,
                                         const KernelParams& p, double mu,
                                         int iters);

}  // namespace gglr
