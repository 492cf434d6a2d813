#include "gglr/gradient_prior.hpp"

#include <cmath>
#include <stdexcept>

namespace gglr {

namespace {

RectSparse unit_selector(int rows, int cols, const std::vector<int>& pick) {
  RectSparse s;
  s.rows = rows;
  s.cols = cols;
  s.row_offsets.resize(rows + 1);
  s.col_idx = pick;
  s.vals.assign(rows, 1.0);
  for (int i = 0; i <= rows; ++i) s.row_offsets[i] = i;
  return s;
}

}  // namespace

RectSparse grad_op(int n) {
  if (n < 2) throw std::invalid_argument("grad_op: need at least 2 samples");
  RectSparse f;
  f.rows = n - 1;
  f.cols = n;
  f.row_offsets.resize(n);
  for (int i = 0; i < n - 1; ++i) {
    f.row_offsets[i] = 2 * i;
    f.col_idx.push_back(i);
    f.vals.push_back(1.0);
    f.col_idx.push_back(i + 1);
    f.vals.push_back(-1.0);
  }
  f.row_offsets[n - 1] = 2 * (n - 1);
  return f;
}

RectSparse interleave_grad_op(int n) {
  if (n < 1) throw std::invalid_argument("interleave_grad_op: need n >= 1");
  RectSparse f;
  f.rows = n;
  f.cols = 2 * n;
  f.row_offsets.resize(n + 1);
  for (int i = 0; i < n; ++i) {
    f.row_offsets[i] = 2 * i;
    f.col_idx.push_back(2 * i);
    f.vals.push_back(1.0);
    f.col_idx.push_back(2 * i + 1);
    f.vals.push_back(-1.0);
  }
  f.row_offsets[n] = 2 * n;
  return f;
}

RectSparse row_selector(int n, int k) {
  if (k < 1 || k > n) throw std::invalid_argument("row_selector: k out of range");
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = (k - 1) * n + i;
  return unit_selector(n, n * n, pick);
}

RectSparse col_selector(int n, int k) {
  if (k < 1 || k > n) throw std::invalid_argument("col_selector: k out of range");
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i * n + (k - 1);
  return unit_selector(n, n * n, pick);
}

RectSparse col_pair_selector(int n, int k) {
  if (k < 1 || k > n - 1) throw std::invalid_argument("col_pair_selector: k out of range");
  std::vector<int> pick(2 * n);
  for (int r = 0; r < n; ++r) {
    pick[2 * r] = r * n + (k - 1);
    pick[2 * r + 1] = r * n + k;
  }
  return unit_selector(2 * n, n * n, pick);
}

RectSparse row_pair_selector(int n, int k) {
  if (k < 1 || k > n - 1) throw std::invalid_argument("row_pair_selector: k out of range");
  std::vector<int> pick(2 * n);
  for (int c = 0; c < n; ++c) {
    pick[2 * c] = (k - 1) * n + c;
    pick[2 * c + 1] = k * n + c;
  }
  return unit_selector(2 * n, n * n, pick);
}

SparseSym gng_laplacian(const SparseSym& Lbar, const RectSparse& Fop) {
  if (Lbar.dim != Fop.rows)
    throw std::invalid_argument("gng_laplacian: operator/Laplacian dimension mismatch");
  std::vector<Triplet> t;
  for (int a = 0; a < Lbar.dim; ++a) {
    for (int p = Lbar.row_offsets[a]; p < Lbar.row_offsets[a + 1]; ++p) {
      const int b = Lbar.cols[p];
      const double v = Lbar.vals[p];
      for (int pa = Fop.row_offsets[a]; pa < Fop.row_offsets[a + 1]; ++pa)
        for (int pb = Fop.row_offsets[b]; pb < Fop.row_offsets[b + 1]; ++pb)
          t.push_back({Fop.col_idx[pa], Fop.col_idx[pb], v * Fop.vals[pa] * Fop.vals[pb]});
    }
  }
  return SparseSym::from_triplets(Fop.cols, std::move(t), Lbar.symmetric);
}

namespace {

// One gradient line over the patch: gradient g equals x[plus[g]] - x[minus[g]],
// consecutive gradients are joined by a path edge. Gradient g inherits the
// feature of pixel plus[g] (its left/top pixel).
struct LineSpec {
  std::vector<int> plus;
  std::vector<int> minus;
};

void accumulate_line(const LineSpec& line, const std::vector<double>& x,
                     const FeatureField& f, const KernelParams& p,
                     Normalization norm, int radius, std::vector<Triplet>& out) {
  const int m = static_cast<int>(line.plus.size());
  std::vector<double> alpha(m);
  for (int g = 0; g < m; ++g) alpha[g] = x[line.plus[g]] - x[line.minus[g]];

  struct GradEdge {
    int a, b;
    double w;
  };
  std::vector<GradEdge> edges;
  edges.reserve(static_cast<size_t>(m) * radius);
  for (int g = 0; g < m; ++g)
    for (int r = 1; r <= radius && g + r < m; ++r)
      edges.push_back({g, g + r,
                       edge_weight(f.feature(line.plus[g]), f.feature(line.plus[g + r]),
                                   alpha[g], alpha[g + r], p, WeightMode::Gradient)});

  if (norm == Normalization::Combinatorial) {
    // F^T Lbar F = sum over gradient edges of w u u^T with
    // u = (e_plus[a] - e_minus[a]) - (e_plus[b] - e_minus[b]).
    int idx[4];
    double val[4];
    for (const GradEdge& e : edges) {
      idx[0] = line.plus[e.a];
      val[0] = 1.0;
      idx[1] = line.minus[e.a];
      val[1] = -1.0;
      idx[2] = line.plus[e.b];
      val[2] = -1.0;
      idx[3] = line.minus[e.b];
      val[3] = 1.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          out.push_back({idx[a], idx[b], e.w * val[a] * val[b]});
    }
    return;
  }

  // Random-walk variant: F^T L~^T L~ F with L~ = D^{-1} Lbar, accumulated
  // as a sum over gradient nodes of the squared normalized rows.
  std::vector<double> deg(m, 0.0);
  std::vector<std::vector<std::pair<int, double>>> neighbors(m);
  for (const GradEdge& e : edges) {
    deg[e.a] += e.w;
    deg[e.b] += e.w;
    neighbors[e.a].push_back({e.b, e.w});
    neighbors[e.b].push_back({e.a, e.w});
  }
  std::vector<int> idx;
  std::vector<double> val;
  for (int g = 0; g < m; ++g) {
    // Row g of L~ in gradient space, mapped to pixels through F^T.
    idx.clear();
    val.clear();
    idx.push_back(line.plus[g]);
    val.push_back(1.0);
    idx.push_back(line.minus[g]);
    val.push_back(-1.0);
    for (const auto& [h, w] : neighbors[g]) {
      const double c = -w / deg[g];
      idx.push_back(line.plus[h]);
      val.push_back(c);
      idx.push_back(line.minus[h]);
      val.push_back(-c);
    }
    for (size_t a = 0; a < idx.size(); ++a)
      for (size_t b = 0; b < idx.size(); ++b)
        out.push_back({idx[a], idx[b], val[a] * val[b]});
  }
}

LineSpec inline_row(int n, int k) {
  LineSpec s;
  s.plus.resize(n - 1);
  s.minus.resize(n - 1);
  for (int g = 0; g < n - 1; ++g) {
    s.plus[g] = k * n + g;
    s.minus[g] = k * n + g + 1;
  }
  return s;
}

LineSpec inline_col(int n, int k) {
  LineSpec s;
  s.plus.resize(n - 1);
  s.minus.resize(n - 1);
  for (int g = 0; g < n - 1; ++g) {
    s.plus[g] = g * n + k;
    s.minus[g] = (g + 1) * n + k;
  }
  return s;
}

LineSpec cross_cols(int n, int k) {
  LineSpec s;
  s.plus.resize(n);
  s.minus.resize(n);
  for (int g = 0; g < n; ++g) {
    s.plus[g] = g * n + k;
    s.minus[g] = g * n + k + 1;
  }
  return s;
}

LineSpec cross_rows(int n, int k) {
  LineSpec s;
  s.plus.resize(n);
  s.minus.resize(n);
  for (int g = 0; g < n; ++g) {
    s.plus[g] = k * n + g;
    s.minus[g] = (k + 1) * n + g;
  }
  return s;
}

}  // namespace

GngPrior build_prior(const std::vector<double>& x_est, int side,
                     const FeatureField& features, const KernelParams& p,
                     const PriorOptions& opts) {
  if (side < 3) throw std::invalid_argument("build_prior: degenerate patch, need side >= 3");
  const int n2 = side * side;
  if (static_cast<int>(x_est.size()) != n2)
    throw std::invalid_argument("build_prior: estimate length must be side^2");
  if (features.side != side)
    throw std::invalid_argument("build_prior: feature field geometry mismatch");

  if (opts.neighbor_radius < 1)
    throw std::invalid_argument("build_prior: neighbor radius must be positive");
  std::vector<Triplet> t_h, t_g, t_j, t_k;
  for (int k = 0; k < side; ++k) {
    accumulate_line(inline_row(side, k), x_est, features, p, opts.normalization,
                    opts.neighbor_radius, t_h);
    accumulate_line(inline_col(side, k), x_est, features, p, opts.normalization,
                    opts.neighbor_radius, t_g);
  }
  for (int k = 0; k + 1 < side; ++k) {
    accumulate_line(cross_cols(side, k), x_est, features, p, opts.normalization,
                    opts.neighbor_radius, t_j);
    accumulate_line(cross_rows(side, k), x_est, features, p, opts.normalization,
                    opts.neighbor_radius, t_k);
  }

  GngPrior prior;
  prior.mu = opts.mu;
  prior.mu_tilde = opts.mu_tilde;
  {
    std::vector<Triplet> inline_all = t_h;
    inline_all.insert(inline_all.end(), t_g.begin(), t_g.end());
    prior.L_inline = SparseSym::from_triplets(n2, std::move(inline_all), true);
    std::vector<Triplet> cross_all = t_j;
    cross_all.insert(cross_all.end(), t_k.begin(), t_k.end());
    prior.L_cross = SparseSym::from_triplets(n2, std::move(cross_all), true);
  }
  if (opts.with_components) {
    prior.component_terms.reserve(4);
    prior.component_terms.push_back(SparseSym::from_triplets(n2, std::move(t_h), true));
    prior.component_terms.push_back(SparseSym::from_triplets(n2, std::move(t_g), true));
    prior.component_terms.push_back(SparseSym::from_triplets(n2, std::move(t_j), true));
    prior.component_terms.push_back(SparseSym::from_triplets(n2, std::move(t_k), true));
  }
  return prior;
}

GngPrior build_prior(const Patch& x_est, const FeatureField& features,
                     const KernelParams& p, const PriorOptions& opts) {
  return build_prior(luminance(x_est), x_est.side, features, p, opts);
}

double gglr(const GngPrior& prior, std::span<const double> x) {
  if (static_cast<int>(x.size()) != prior.L_inline.dim)
    throw std::invalid_argument("gglr: dimension mismatch");
  double v = 0.0;
  if (prior.mu != 0.0) v += prior.mu * prior.L_inline.quad(x);
  if (prior.mu_tilde != 0.0) v += prior.mu_tilde * prior.L_cross.quad(x);
  return v;
}

namespace {

Graph glr_pixel_graph(const std::vector<double>& x_est, int side,
                      const FeatureField& features, const KernelParams& p,
                      bool horizontal, bool vertical) {
  Graph g;
  g.node_count = side * side;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int i = r * side + c;
      if (horizontal && c + 1 < side) {
        const int j = i + 1;
        g.edges.push_back({i, j,
                           edge_weight(features.feature(i), features.feature(j), x_est[i],
                                       x_est[j], p, WeightMode::Intensity)});
      }
      if (vertical && r + 1 < side) {
        const int j = i + side;
        g.edges.push_back({i, j,
                           edge_weight(features.feature(i), features.feature(j), x_est[i],
                                       x_est[j], p, WeightMode::Intensity)});
      }
    }
  }
  return g;
}

}  // namespace

SparseSym build_glr_prior(const std::vector<double>& x_est, int side,
                          const FeatureField& features, const KernelParams& p) {
  if (side < 2) throw std::invalid_argument("build_glr_prior: need side >= 2");
  if (static_cast<int>(x_est.size()) != side * side)
    throw std::invalid_argument("build_glr_prior: estimate length must be side^2");
  return laplacian(glr_pixel_graph(x_est, side, features, p, true, true));
}

GngPrior build_glr_gng_prior(const std::vector<double>& x_est, int side,
                             const FeatureField& features, const KernelParams& p,
                             double mu, bool with_components) {
  GngPrior prior;
  prior.mu = mu;
  prior.mu_tilde = 0.0;
  prior.L_inline = build_glr_prior(x_est, side, features, p);
  prior.L_cross = SparseSym::zero(side * side);
  if (with_components) {
    prior.component_terms.reserve(4);
    prior.component_terms.push_back(
        laplacian(glr_pixel_graph(x_est, side, features, p, true, false)));
    prior.component_terms.push_back(
        laplacian(glr_pixel_graph(x_est, side, features, p, false, true)));
    prior.component_terms.push_back(SparseSym::zero(side * side));
    prior.component_terms.push_back(SparseSym::zero(side * side));
  }
  return prior;
}

}  // namespace gglr
