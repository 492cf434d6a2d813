#pragma once

#include <span>
#include <vector>

#include "gglr/features.hpp"
#include "gglr/graph.hpp"
#include "gglr/patch.hpp"

namespace gglr {

// --------------------------------------------------------------------------
// Gradient operators and sampling matrices (all indices k are 1-based,
// matching the usual row/column numbering).
// --------------------------------------------------------------------------

// (n-1) x n forward-difference operator: row i is e_i - e_{i+1}. F 1 = 0 and
// F has full row rank.
RectSparse grad_op(int n);

// n x 2n interleaved difference operator: row i differences the i-th
// (odd, even) entry pair of an interleaved vector.
RectSparse interleave_grad_op(int n);

// H_k / G_k: n x n^2 binary samplers extracting the k-th row (left to right)
// or k-th column (top to bottom) of a row-major vectorized n x n patch.
RectSparse row_selector(int n, int k);
RectSparse col_selector(int n, int k);

// J_k / K_k: 2n x n^2 samplers interleaving columns (rows) k and k+1,
// scanned row by row: odd outputs from k, even outputs from k+1.
// Valid for 1 <= k <= n-1.
RectSparse col_pair_selector(int n, int k);
RectSparse row_pair_selector(int n, int k);

// Gradient-induced nodal-graph Laplacian F^T Lbar F; PSD, annihilates
// signals whose gradient lies in the null space of Lbar.
SparseSym gng_laplacian(const SparseSym& Lbar, const RectSparse& Fop);

// --------------------------------------------------------------------------
// Aggregate patch prior.
// --------------------------------------------------------------------------

enum class Normalization { Combinatorial, RandomWalk };

// Aggregate GNG Laplacians over an N x N patch:
//   L_inline = sum_k H_k^T L_k H_k + G_k^T L_k G_k     (inline terms)
//   L_cross  = sum_k J_k^T L_k J_k + K_k^T L_k K_k     (cross terms)
// Both PSD; every planar patch a*r + b*c + d lies in the joint null space.
struct GngPrior {
  SparseSym L_inline;
  SparseSym L_cross;
  double mu = 0.5;
  double mu_tilde = 0.5;
  // When retained (for the 4-auxiliary solver): the H-, G-, J-, K-partial
  // sums, in that order. L_inline = [0] + [1], L_cross = [2] + [3].
  std::vector<SparseSym> component_terms;

  bool has_components() const { return component_terms.size() == 4; }
};

struct PriorOptions {
  double mu = 0.5;
  double mu_tilde = 0.5;
  Normalization normalization = Normalization::Combinatorial;
  bool with_components = false;
  // Gradient-graph connectivity per line: each gradient connects to
  // neighbors up to this many steps away. 1 is the default path graph.
  int neighbor_radius = 1;
};

// Builds the signal-dependent GGLR prior from the current estimate: per
// pixel row/column, gradients via F feed a path-shaped gradient graph with
// gradient-mode edge weights; per row/column pair, interleaved gradients via
// F~ do the same for the cross terms. Under random-walk normalization each
// per-line term uses L~^T L~ in place of Lbar. Requires side >= 3.
GngPrior build_prior(const std::vector<double>& x_est, int side,
                     const FeatureField& features, const KernelParams& p,
                     const PriorOptions& opts = {});
GngPrior build_prior(const Patch& x_est, const FeatureField& features,
                     const KernelParams& p, const PriorOptions& opts = {});

// mu * x^T L x + mu~ * x^T L~ x
double gglr(const GngPrior& prior, std::span<const double> x);

// GLR baseline: combinatorial Laplacian of the 4-connected pixel graph with
// intensity-mode weights. Drop-in replacement prior for the same solvers.
SparseSym build_glr_prior(const std::vector<double>& x_est, int side,
                          const FeatureField& features, const KernelParams& p);

// GLR baseline packaged as a GngPrior (L_cross = 0). Component terms, when
// requested, split the pixel graph into horizontal- and vertical-edge parts.
GngPrior build_glr_gng_prior(const std::vector<double>& x_est, int side,
                             const FeatureField& features, const KernelParams& p,
                             double mu, bool with_components = false);

}  // namespace gglr
