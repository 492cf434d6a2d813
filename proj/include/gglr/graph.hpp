#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gglr {

// --------------------------------------------------------------------------
// Basic graph and sparse-matrix containers.
// --------------------------------------------------------------------------

struct Edge {
  int i = 0;
  int j = 0;
  double w = 0.0;
};

// Undirected weighted graph; each unordered pair stored once, i != j.
// Gradient graphs built by this library carry strictly positive weights.
struct Graph {
  int node_count = 0;
  std::vector<Edge> edges;
};

struct Triplet {
  int i = 0;
  int j = 0;
  double v = 0.0;
};

// Square sparse matrix in compressed-row layout. `symmetric` asserts
// structural symmetry: entry (i,j) present iff (j,i) present with equal
// value. Laplacians of positive graphs are PSD.
struct SparseSym {
  int dim = 0;
  std::vector<int> row_offsets;  // size dim + 1
  // from_triplets emits ascending columns; the Laplacian builders move the
  // diagonal entry to the end of each row so that row folds cancel exactly.
  std::vector<int> cols;
  std::vector<double> vals;
  bool symmetric = true;

  static SparseSym zero(int dim);
  static SparseSym identity(int dim);
  // Sums duplicate entries; drops exact zeros produced by cancellation only
  // when `prune` is set.
  static SparseSym from_triplets(int dim, std::vector<Triplet> entries,
                                 bool symmetric, bool prune = false);

  int nnz() const { return static_cast<int>(vals.size()); }
  double entry(int i, int j) const;

  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> matvec(std::span<const double> x) const;
  void matvec_transpose(std::span<const double> x, std::span<double> y) const;

  // x^T M x
  double quad(std::span<const double> x) const;

  // Dense row-major copy, dim*dim entries.
  std::vector<double> dense() const;

  // this + c * other (matching dims required).
  SparseSym plus(const SparseSym& other, double c) const;
  SparseSym scaled(double c) const;
};

// Rectangular sparse operator in compressed-row layout; used for gradient
// operators and the row/column sampling matrices.
struct RectSparse {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_offsets;
  std::vector<int> col_idx;
  std::vector<double> vals;

  std::vector<double> apply(std::span<const double> x) const;          // F x
  std::vector<double> apply_transpose(std::span<const double> y) const;  // F^T y
  std::vector<double> dense() const;  // row-major rows*cols
};

// --------------------------------------------------------------------------
// Edge-weight kernels.
// --------------------------------------------------------------------------

// Bandwidths of the exponential edge-weight kernels. sigma_x scales
// intensity differences, sigma_a gradient differences. The defaults are
// starting points for tuning, not calibrated values.
struct KernelParams {
  double sigma_f = 1.0;
  double sigma_x = 0.2;
  double sigma_a = 0.2;
};

enum class WeightMode { Intensity, Gradient };

// Weights are floored here so that gradient-graph degrees stay strictly
// positive and the random-walk normalization is always defined.
inline constexpr double kEdgeWeightFloor = 1e-12;

// w = exp(-|f_i - f_j|^2 / sigma_f^2 - |s_i - s_j|^2 / sigma^2), where sigma
// is sigma_x in intensity mode and sigma_a in gradient mode.
double edge_weight(std::span<const double> f_i, std::span<const double> f_j,
                   double s_i, double s_j, const KernelParams& p,
                   WeightMode mode);

// Softmax over negative squared distances: w_j = exp(-d_j) / sum_l exp(-d_l).
// Stabilized by subtracting the minimum distance before exponentiation.
std::vector<double> normalized_weights(std::span<const double> sq_dists);

// --------------------------------------------------------------------------
// Laplacians and spectral utilities.
// --------------------------------------------------------------------------

// Combinatorial Laplacian L = diag(W 1) - W. Row sums are exactly zero.
SparseSym laplacian(const Graph& g);

// x^T L x; equals sum_(i,j) w_ij (x_i - x_j)^2 for a combinatorial L.
double glr(const SparseSym& L, std::span<const double> x);

// Random-walk Laplacian D^{-1} L. Rows of isolated nodes (zero degree) are
// zeroed so the node drops out of the prior. Result is asymmetric.
SparseSym random_walk_laplacian(const SparseSym& Lbar);

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

inline constexpr int kDenseEigCap = 4096;

// k smallest eigenpairs of a symmetric L, eigenvalues ascending and
// eigenvectors unit norm. Dense solve; dim must not exceed `dense_cap`.
std::vector<EigenPair> spectrum(const SparseSym& L, int k,
                                int dense_cap = kDenseEigCap);

// Graph Fourier transform V^T x with V the full eigenvector basis of L.
std::vector<double> gft(const SparseSym& L, std::span<const double> x);

// Small dense row-major matrix, just enough for filter diagnostics.
struct DenseMat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  DenseMat() = default;
  DenseMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

// First-order truncated Taylor approximation of (I + mu L_rw)^{-1}:
//   (1 + mu)^{-2} ((1 + 2 mu) I - mu L_rw).
// mu = 0 returns the identity exactly; mu < 0 is rejected.
DenseMat tse_filter(const SparseSym& L_rw, double mu);

}  // namespace gglr
