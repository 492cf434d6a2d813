#include "gglr/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gglr {

namespace {

// Move each diagonal entry to the end of its row and set it to the exact
// negative of the in-order fold of the off-diagonal entries. Row folds
// against the all-ones vector then cancel bit-exactly (float negation is
// sign-symmetric), so L 1 = 0 holds without tolerance.
void zero_row_sums(SparseSym& m) {
  for (int i = 0; i < m.dim; ++i) {
    const int lo = m.row_offsets[i], hi = m.row_offsets[i + 1];
    int diag_pos = -1;
    for (int p = lo; p < hi; ++p) {
      if (m.cols[p] == i) {
        diag_pos = p;
        break;
      }
    }
    if (diag_pos < 0) continue;
    std::rotate(m.cols.begin() + diag_pos, m.cols.begin() + diag_pos + 1, m.cols.begin() + hi);
    std::rotate(m.vals.begin() + diag_pos, m.vals.begin() + diag_pos + 1, m.vals.begin() + hi);
    double s = 0.0;
    for (int p = lo; p < hi - 1; ++p) s += m.vals[p];
    m.vals[hi - 1] = -s;
  }
}

}  // namespace

SparseSym SparseSym::zero(int dim) {
  SparseSym m;
  m.dim = dim;
  m.row_offsets.assign(static_cast<size_t>(dim) + 1, 0);
  m.symmetric = true;
  return m;
}

SparseSym SparseSym::identity(int dim) {
  SparseSym m;
  m.dim = dim;
  m.row_offsets.resize(static_cast<size_t>(dim) + 1);
  m.cols.resize(dim);
  m.vals.assign(dim, 1.0);
  for (int i = 0; i <= dim; ++i) m.row_offsets[i] = i;
  for (int i = 0; i < dim; ++i) m.cols[i] = i;
  return m;
}

SparseSym SparseSym::from_triplets(int dim, std::vector<Triplet> entries,
                                   bool symmetric, bool prune) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  SparseSym m;
  m.dim = dim;
  m.symmetric = symmetric;
  m.row_offsets.assign(static_cast<size_t>(dim) + 1, 0);
  size_t n = entries.size();
  m.cols.reserve(n);
  m.vals.reserve(n);
  size_t p = 0;
  for (int i = 0; i < dim; ++i) {
    while (p < n && entries[p].i == i) {
      int j = entries[p].j;
      if (j < 0 || j >= dim || entries[p].i < 0)
        throw std::invalid_argument("SparseSym::from_triplets: index out of range");
      double v = entries[p].v;
      ++p;
      while (p < n && entries[p].i == i && entries[p].j == j) {
        v += entries[p].v;
        ++p;
      }
      if (prune && v == 0.0) continue;
      m.cols.push_back(j);
      m.vals.push_back(v);
    }
    m.row_offsets[i + 1] = static_cast<int>(m.cols.size());
  }
  if (p != n) throw std::invalid_argument("SparseSym::from_triplets: row index out of range");
  return m;
}

double SparseSym::entry(int i, int j) const {
  for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p)
    if (cols[p] == j) return vals[p];
  return 0.0;
}

void SparseSym::matvec(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != dim || static_cast<int>(y.size()) != dim)
    throw std::invalid_argument("SparseSym::matvec: dimension mismatch");
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p) s += vals[p] * x[cols[p]];
    y[i] = s;
  }
}

std::vector<double> SparseSym::matvec(std::span<const double> x) const {
  std::vector<double> y(dim);
  matvec(x, y);
  return y;
}

void SparseSym::matvec_transpose(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != dim || static_cast<int>(y.size()) != dim)
    throw std::invalid_argument("SparseSym::matvec_transpose: dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < dim; ++i)
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p) y[cols[p]] += vals[p] * x[i];
}

double SparseSym::quad(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument("SparseSym::quad: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p) row += vals[p] * x[cols[p]];
    s += x[i] * row;
  }
  return s;
}

std::vector<double> SparseSym::dense() const {
  std::vector<double> d(static_cast<size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p)
      d[static_cast<size_t>(i) * dim + cols[p]] = vals[p];
  return d;
}

SparseSym SparseSym::plus(const SparseSym& other, double c) const {
  if (dim != other.dim) throw std::invalid_argument("SparseSym::plus: dimension mismatch");
  std::vector<Triplet> t;
  t.reserve(vals.size() + other.vals.size());
  for (int i = 0; i < dim; ++i)
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p)
      t.push_back({i, cols[p], vals[p]});
  for (int i = 0; i < dim; ++i)
    for (int p = other.row_offsets[i]; p < other.row_offsets[i + 1]; ++p)
      t.push_back({i, other.cols[p], c * other.vals[p]});
  return from_triplets(dim, std::move(t), symmetric && other.symmetric);
}

SparseSym SparseSym::scaled(double c) const {
  SparseSym m = *this;
  for (double& v : m.vals) v *= c;
  return m;
}

std::vector<double> RectSparse::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols)
    throw std::invalid_argument("RectSparse::apply: dimension mismatch");
  std::vector<double> y(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p) s += vals[p] * x[col_idx[p]];
    y[i] = s;
  }
  return y;
}

std::vector<double> RectSparse::apply_transpose(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != rows)
    throw std::invalid_argument("RectSparse::apply_transpose: dimension mismatch");
  std::vector<double> x(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p) x[col_idx[p]] += vals[p] * y[i];
  return x;
}

std::vector<double> RectSparse::dense() const {
  std::vector<double> d(static_cast<size_t>(rows) * cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p)
      d[static_cast<size_t>(i) * cols + col_idx[p]] = vals[p];
  return d;
}

double edge_weight(std::span<const double> f_i, std::span<const double> f_j,
                   double s_i, double s_j, const KernelParams& p,
                   WeightMode mode) {
  if (f_i.size() != f_j.size())
    throw std::invalid_argument("edge_weight: feature dimension mismatch");
  double df = 0.0;
  for (size_t k = 0; k < f_i.size(); ++k) {
    const double d = f_i[k] - f_j[k];
    df += d * d;
  }
  const double sigma = mode == WeightMode::Intensity ? p.sigma_x : p.sigma_a;
  const double ds = s_i - s_j;
  const double w = std::exp(-df / (p.sigma_f * p.sigma_f) - ds * ds / (sigma * sigma));
  return std::max(w, kEdgeWeightFloor);
}

std::vector<double> normalized_weights(std::span<const double> sq_dists) {
  if (sq_dists.empty()) throw std::invalid_argument("normalized_weights: empty neighbor set");
  const double dmin = *std::min_element(sq_dists.begin(), sq_dists.end());
  std::vector<double> w(sq_dists.size());
  double total = 0.0;
  for (size_t k = 0; k < sq_dists.size(); ++k) {
    w[k] = std::exp(-(sq_dists[k] - dmin));
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

SparseSym laplacian(const Graph& g) {
  std::vector<Triplet> t;
  t.reserve(g.edges.size() * 4 + g.node_count);
  for (int i = 0; i < g.node_count; ++i) t.push_back({i, i, 0.0});
  for (const Edge& e : g.edges) {
    if (e.i == e.j || e.i < 0 || e.j < 0 || e.i >= g.node_count || e.j >= g.node_count)
      throw std::invalid_argument("laplacian: invalid edge");
    t.push_back({e.i, e.i, e.w});
    t.push_back({e.j, e.j, e.w});
    t.push_back({e.i, e.j, -e.w});
    t.push_back({e.j, e.i, -e.w});
  }
  SparseSym L = SparseSym::from_triplets(g.node_count, std::move(t), true);
  zero_row_sums(L);
  return L;
}

double glr(const SparseSym& L, std::span<const double> x) { return L.quad(x); }

SparseSym random_walk_laplacian(const SparseSym& Lbar) {
  SparseSym L = Lbar;
  L.symmetric = false;
  for (int i = 0; i < L.dim; ++i) {
    const double deg = Lbar.entry(i, i);
    for (int p = L.row_offsets[i]; p < L.row_offsets[i + 1]; ++p)
      L.vals[p] = deg > 0.0 ? L.vals[p] / deg : 0.0;
  }
  zero_row_sums(L);
  return L;
}

std::vector<EigenPair> spectrum(const SparseSym& L, int k, int dense_cap) {
  if (L.dim > dense_cap)
    throw std::invalid_argument("spectrum: dimension exceeds dense eigensolver cap");
  if (k > L.dim || k < 1) throw std::invalid_argument("spectrum: invalid eigenpair count");
  Eigen::MatrixXd M(L.dim, L.dim);
  M.setZero();
  for (int i = 0; i < L.dim; ++i)
    for (int p = L.row_offsets[i]; p < L.row_offsets[i + 1]; ++p)
      M(i, L.cols[p]) = L.vals[p];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
  std::vector<EigenPair> pairs(k);
  for (int q = 0; q < k; ++q) {
    pairs[q].value = es.eigenvalues()(q);
    pairs[q].vector.resize(L.dim);
    for (int i = 0; i < L.dim; ++i) pairs[q].vector[i] = es.eigenvectors()(i, q);
  }
  return pairs;
}

std::vector<double> gft(const SparseSym& L, std::span<const double> x) {
  if (static_cast<int>(x.size()) != L.dim)
    throw std::invalid_argument("gft: dimension mismatch");
  const auto pairs = spectrum(L, L.dim);
  std::vector<double> coeffs(L.dim, 0.0);
  for (int q = 0; q < L.dim; ++q) {
    double s = 0.0;
    for (int i = 0; i < L.dim; ++i) s += pairs[q].vector[i] * x[i];
    coeffs[q] = s;
  }
  return coeffs;
}

DenseMat tse_filter(const SparseSym& L_rw, double mu) {
  if (mu < 0.0) throw std::invalid_argument("tse_filter: mu must be nonnegative");
  const int n = L_rw.dim;
  DenseMat f(n, n);
  if (mu == 0.0) {
    for (int i = 0; i < n; ++i) f.at(i, i) = 1.0;
    return f;
  }
  const double scale = 1.0 / ((1.0 + mu) * (1.0 + mu));
  for (int i = 0; i < n; ++i) f.at(i, i) = scale * (1.0 + 2.0 * mu);
  for (int i = 0; i < n; ++i)
    for (int p = L_rw.row_offsets[i]; p < L_rw.row_offsets[i + 1]; ++p)
      f.at(i, L_rw.cols[p]) -= scale * mu * L_rw.vals[p];
  return f;
}

}  // namespace gglr
