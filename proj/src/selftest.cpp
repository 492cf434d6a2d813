#include "gglr/selftest.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gglr/gradient_prior.hpp"
#include "gglr/image_io.hpp"
#include "gglr/pipeline.hpp"
#include "gglr/rng.hpp"
#include "gglr/solvers.hpp"

namespace gglr {

namespace {

struct Suite {
  std::string failure;
  int checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failure.empty()) failure = what;
  }
  bool passed() const { return failure.empty(); }
};

Graph random_line_graph(int nodes, Rng& rng, double lo = 0.1, double hi = 2.0) {
  Graph g;
  g.node_count = nodes;
  for (int i = 0; i + 1 < nodes; ++i) g.edges.push_back({i, i + 1, rng.uniform(lo, hi)});
  return g;
}

Graph random_graph(int nodes, Rng& rng) {
  Graph g;
  g.node_count = nodes;
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j)
      if (rng.uniform() < 0.3) g.edges.push_back({i, j, rng.uniform(0.05, 2.0)});
  return g;
}

Eigen::MatrixXd to_eigen(const SparseSym& m) {
  Eigen::MatrixXd d(m.dim, m.dim);
  d.setZero();
  for (int i = 0; i < m.dim; ++i)
    for (int p = m.row_offsets[i]; p < m.row_offsets[i + 1]; ++p)
      d(i, m.cols[p]) = m.vals[p];
  return d;
}

std::vector<double> random_vec(int n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

void suite_graphcore(Suite& s) {
  Rng rng(11);

  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.integer(48));
    const Graph g = random_graph(n, rng);
    const SparseSym L = laplacian(g);
    const std::vector<double> ones(n, 1.0);
    const auto r = L.matvec(ones);
    for (double v : r) s.expect(v == 0.0, "laplacian row sums not exactly zero");

    // GLR equals the explicit edge sum.
    const auto x = random_vec(n, rng);
    double direct = 0.0;
    for (const Edge& e : g.edges) {
      const double d = x[e.i] - x[e.j];
      direct += e.w * d * d;
    }
    s.expect(std::abs(glr(L, x) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)),
             "glr mismatch with brute-force edge sum");
    s.expect(glr(L, x) >= -1e-12, "glr negative");
    s.expect(glr(L, ones) == 0.0, "glr of constant not zero");
  }

  {
    std::vector<double> d = {0.7, 0.1, 2.0, 0.4};
    auto w = normalized_weights(d);
    double total = 0.0;
    for (double v : w) total += v;
    s.expect(std::abs(total - 1.0) <= 1e-12, "normalized weights do not sum to 1");
    std::vector<double> d2 = {2.0, 0.4, 0.7, 0.1};  // permuted
    auto w2 = normalized_weights(d2);
    s.expect(std::abs(w[0] - w2[2]) <= 1e-15 && std::abs(w[2] - w2[0]) <= 1e-15,
             "normalized weights not permutation-equivariant");
  }

  {
    Rng r2(5);
    const Graph g = random_line_graph(6, r2);
    const SparseSym L = laplacian(g);
    const SparseSym Lrw = random_walk_laplacian(L);
    const std::vector<double> ones(6, 1.0);
    for (double v : Lrw.matvec(ones)) s.expect(v == 0.0, "rw laplacian row sum nonzero");
    Graph gs = g;
    for (Edge& e : gs.edges) e.w *= 7.5;
    const SparseSym Lrw2 = random_walk_laplacian(laplacian(gs));
    const auto x = random_vec(6, r2);
    const auto a = Lrw.matvec(x);
    const auto b = Lrw2.matvec(x);
    for (int i = 0; i < 6; ++i)
      s.expect(std::abs(a[i] - b[i]) <= 1e-12, "rw laplacian not scale-invariant");
  }

  {
    Rng r2(7);
    const Graph g = random_graph(12, r2);
    const SparseSym L = laplacian(g);
    const auto pairs = spectrum(L, L.dim);
    for (size_t q = 1; q < pairs.size(); ++q)
      s.expect(pairs[q].value >= pairs[q - 1].value, "spectrum not ascending");
    Eigen::MatrixXd V(L.dim, L.dim);
    Eigen::VectorXd lam(L.dim);
    for (int q = 0; q < L.dim; ++q) {
      lam(q) = pairs[q].value;
      for (int i = 0; i < L.dim; ++i) V(i, q) = pairs[q].vector[i];
    }
    const Eigen::MatrixXd rec = V * lam.asDiagonal() * V.transpose();
    s.expect((rec - to_eigen(L)).cwiseAbs().maxCoeff() <= 1e-8,
             "spectrum does not reconstruct L");
    const auto x = random_vec(L.dim, r2);
    const auto xt = gft(L, x);
    double nx = 0, nt = 0;
    for (int i = 0; i < L.dim; ++i) {
      nx += x[i] * x[i];
      nt += xt[i] * xt[i];
    }
    s.expect(std::abs(std::sqrt(nx) - std::sqrt(nt)) <= 1e-10, "gft violates Parseval");
  }

  {
    Rng r2(9);
    for (int trial = 0; trial < 5; ++trial) {
      const Graph g = random_line_graph(8, r2, 0.5, 2.0);
      const SparseSym Lrw = random_walk_laplacian(laplacian(g));
      const Eigen::MatrixXd D = to_eigen(Lrw);
      auto err = [&](double mu) {
        const DenseMat f = tse_filter(Lrw, mu);
        Eigen::MatrixXd F(f.rows, f.cols);
        for (int i = 0; i < f.rows; ++i)
          for (int j = 0; j < f.cols; ++j) F(i, j) = f.at(i, j);
        const Eigen::MatrixXd inv =
            (Eigen::MatrixXd::Identity(8, 8) + mu * D).inverse();
        return Eigen::JacobiSVD<Eigen::MatrixXd>(F - inv).singularValues()(0);
      };
      for (double mu : {0.2, 0.1, 0.05})
        s.expect(err(mu / 2) / err(mu) <= 0.35, "tse filter error not quadratic in mu");
    }
  }
}

void suite_gradient_prior(Suite& s) {
  Rng rng(21);

  // Selector algebra: every pixel picked exactly once per direction.
  for (int n : {3, 5}) {
    std::vector<double> accum_h(n * n, 0.0), accum_g(n * n, 0.0);
    const auto x = random_vec(n * n, rng);
    for (int k = 1; k <= n; ++k) {
      const auto h = row_selector(n, k);
      const auto g = col_selector(n, k);
      const auto hx = h.apply_transpose(h.apply(x));
      const auto gx = g.apply_transpose(g.apply(x));
      for (int i = 0; i < n * n; ++i) {
        accum_h[i] += hx[i];
        accum_g[i] += gx[i];
      }
    }
    for (int i = 0; i < n * n; ++i) {
      s.expect(accum_h[i] == x[i], "sum_k H_k^T H_k is not the identity");
      s.expect(accum_g[i] == x[i], "sum_k G_k^T G_k is not the identity");
    }
  }

  // Line GNG Laplacian null space: {constant, ramp}, dimension exactly 2.
  for (int n = 3; n <= 8; ++n) {
    Graph gbar;
    gbar.node_count = n - 1;
    for (int i = 0; i + 2 < n; ++i) gbar.edges.push_back({i, i + 1, rng.uniform(0.1, 2.0)});
    const SparseSym Lgng = gng_laplacian(laplacian(gbar), grad_op(n));
    const auto pairs = spectrum(Lgng, n);
    s.expect(pairs[0].value < 1e-9 && pairs[1].value < 1e-9,
             "line GNG should have two near-zero eigenvalues");
    s.expect(pairs[2].value > 1e-6, "line GNG third eigenvalue too small");
    std::vector<double> ramp(n);
    for (int i = 0; i < n; ++i) ramp[i] = i;
    const std::vector<double> ones_n(n, 1.0);
    s.expect(Lgng.quad(ones_n) <= 1e-9, "constant not annihilated");
    s.expect(Lgng.quad(ramp) <= 1e-9, "ramp not annihilated");
  }

  // Planar patches lie in the joint null space; GGLR is plane-shift invariant.
  for (int n : {4, 6}) {
    const auto est = random_vec(n * n, rng, 0.0, 1.0);
    const FeatureField f = compute_features(est, n);
    for (auto norm : {Normalization::Combinatorial, Normalization::RandomWalk}) {
      PriorOptions opts;
      opts.normalization = norm;
      const GngPrior prior = build_prior(est, n, f, KernelParams{}, opts);
      std::vector<double> plane(n * n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) plane[r * n + c] = 2.0 * r + 3.0 * c + 1.0;
      s.expect(prior.L_inline.quad(plane) <= 1e-9, "plane not in inline null space");
      s.expect(prior.L_cross.quad(plane) <= 1e-9, "plane not in cross null space");
      const auto x = random_vec(n * n, rng);
      std::vector<double> shifted(x);
      for (int i = 0; i < n * n; ++i) shifted[i] += plane[i];
      s.expect(std::abs(gglr(prior, x) - gglr(prior, shifted)) <= 1e-9,
               "gglr not invariant to adding a plane");
    }
  }

  // Non-planar patch with linear rows and columns: inline prior blind, cross prior not.
  {
    const std::vector<double> x = {1, 0, -1, 0, 0, 0, -1, 0, 1};
    const FeatureField f = compute_features(x, 3);
    KernelParams p;
    p.sigma_f = 10.0;
    p.sigma_a = 2.0;
    const GngPrior prior = build_prior(x, 3, f, p);
    s.expect(prior.L_inline.quad(x) <= 1e-12, "counterexample has nonzero inline term");
    s.expect(prior.L_cross.quad(x) >= 1e-6, "counterexample not flagged by cross term");
  }

  // Sparse assembly equals the dense selector-matrix route.
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 4 + static_cast<int>(rng.integer(3));
    const auto est = random_vec(n * n, rng, 0.0, 1.0);
    const FeatureField f = compute_features(est, n);
    const KernelParams p;
    const GngPrior prior = build_prior(est, n, f, p);

    Eigen::MatrixXd Li = Eigen::MatrixXd::Zero(n * n, n * n);
    Eigen::MatrixXd Lc = Eigen::MatrixXd::Zero(n * n, n * n);
    auto dense_of = [](const RectSparse& r) {
      Eigen::MatrixXd d(r.rows, r.cols);
      d.setZero();
      for (int i = 0; i < r.rows; ++i)
        for (int q = r.row_offsets[i]; q < r.row_offsets[i + 1]; ++q)
          d(i, r.col_idx[q]) = r.vals[q];
      return d;
    };
    auto line_lap = [&](const std::vector<double>& line_vals,
                        const std::vector<int>& feat_idx) {
      const int m = static_cast<int>(line_vals.size());
      Graph g;
      g.node_count = m;
      for (int e = 0; e + 1 < m; ++e)
        g.edges.push_back({e, e + 1,
                           edge_weight(f.feature(feat_idx[e]), f.feature(feat_idx[e + 1]),
                                       line_vals[e], line_vals[e + 1], p,
                                       WeightMode::Gradient)});
      return to_eigen(laplacian(g));
    };
    const Eigen::MatrixXd Fd = dense_of(grad_op(n));
    const Eigen::MatrixXd Ft = dense_of(interleave_grad_op(n));
    Eigen::Map<const Eigen::VectorXd> xv(est.data(), n * n);
    for (int k = 1; k <= n; ++k) {
      for (bool row : {true, false}) {
        const RectSparse sel = row ? row_selector(n, k) : col_selector(n, k);
        const Eigen::MatrixXd S = dense_of(sel);
        const Eigen::VectorXd line = S * xv;
        const Eigen::VectorXd alpha = Fd * line;
        std::vector<double> av(alpha.data(), alpha.data() + alpha.size());
        std::vector<int> fidx(n - 1);
        for (int gidx = 0; gidx < n - 1; ++gidx) fidx[gidx] = sel.col_idx[gidx];
        Li += S.transpose() * Fd.transpose() * line_lap(av, fidx) * Fd * S;
      }
    }
    for (int k = 1; k <= n - 1; ++k) {
      for (bool colpair : {true, false}) {
        const RectSparse sel = colpair ? col_pair_selector(n, k) : row_pair_selector(n, k);
        const Eigen::MatrixXd S = dense_of(sel);
        const Eigen::VectorXd alpha = Ft * (S * xv);
        std::vector<double> av(alpha.data(), alpha.data() + alpha.size());
        std::vector<int> fidx(n);
        for (int gidx = 0; gidx < n; ++gidx) fidx[gidx] = sel.col_idx[2 * gidx];
        Lc += S.transpose() * Ft.transpose() * line_lap(av, fidx) * Ft * S;
      }
    }
    s.expect((to_eigen(prior.L_inline) - Li).cwiseAbs().maxCoeff() <= 1e-10,
             "inline aggregate differs from dense selector oracle");
    s.expect((to_eigen(prior.L_cross) - Lc).cwiseAbs().maxCoeff() <= 1e-10,
             "cross aggregate differs from dense selector oracle");
  }

  // Normalized per-line terms annihilate constant gradients.
  {
    const int n = 5;
    std::vector<double> x(n * n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) x[r * n + c] = 0.3 * r - 0.2 * c;
    const FeatureField f = compute_features(x, n);
    PriorOptions opts;
    opts.normalization = Normalization::RandomWalk;
    const GngPrior prior = build_prior(x, n, f, KernelParams{}, opts);
    s.expect(gglr(prior, x) <= 1e-9, "normalized prior penalizes a linear patch");
  }
}

void suite_formation(Suite& s) {
  Rng rng(31);
  const int side = 6, n2 = side * side;
  std::vector<FormationModel> models;
  models.push_back(FormationModel::identity(n2));
  models.push_back(FormationModel::mask(make_mask(n2, 0.5, 3)));
  models.push_back(FormationModel::blur(side, side, make_gaussian_kernel(3, 1.0)));

  for (const auto& m : models) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_vec(m.input_dim(), rng);
      const auto y = random_vec(m.output_dim(), rng);
      const auto ax = m.apply(x);
      const auto aty = m.adjoint(y);
      double lhs = 0, rhs = 0;
      for (int i = 0; i < m.output_dim(); ++i) lhs += ax[i] * y[i];
      for (int i = 0; i < m.input_dim(); ++i) rhs += x[i] * aty[i];
      s.expect(std::abs(lhs - rhs) <= 1e-10, "adjoint identity violated");
    }
    const auto x = random_vec(m.input_dim(), rng);
    const auto z = random_vec(m.input_dim(), rng);
    const auto gx = m.gram_apply(x);
    const auto gz = m.gram_apply(z);
    double xx = 0, xz = 0, zx = 0;
    for (int i = 0; i < m.input_dim(); ++i) {
      xx += gx[i] * x[i];
      xz += gx[i] * z[i];
      zx += x[i] * gz[i];
    }
    s.expect(xx >= -1e-12, "gram operator not PSD");
    s.expect(std::abs(xz - zx) <= 1e-10, "gram operator not symmetric");
  }

  const auto keep = make_mask(100, 0.3, 9);
  int ones = 0;
  for (auto k : keep) ones += k;
  s.expect(ones == 30, "mask does not have round(fraction*n) ones");

  const auto x = random_vec(64, rng, 0.0, 1.0);
  const auto y1 = add_awgn(x, {12.0, 77});
  const auto y2 = add_awgn(x, {12.0, 77});
  s.expect(y1 == y2, "awgn not deterministic per seed");
  s.expect(add_awgn(x, {0.0, 1}) == x, "awgn sigma=0 changed the signal");

  const Stencil k = make_gaussian_kernel(19, 2.0);
  double total = 0;
  for (double v : k.vals) total += v;
  s.expect(std::abs(total - 1.0) <= 1e-12, "gaussian kernel not normalized");
}

void suite_solvers(Suite& s) {
  Rng rng(41);

  {  // scaled identity in one iteration
    LinOp op = [](std::span<const double> v, std::span<double> out) {
      for (size_t i = 0; i < v.size(); ++i) out[i] = 2.0 * v[i];
    };
    const std::vector<double> b = {2.0, 4.0};
    const CgResult r = cg_solve(op, b, 10, 1e-12);
    s.expect(r.iterations == 1 && std::abs(r.x[0] - 1.0) <= 1e-14 &&
                 std::abs(r.x[1] - 2.0) <= 1e-14,
             "cg failed on scaled identity");
    const std::vector<double> zero2(2, 0.0);
    const CgResult z = cg_solve(op, zero2, 10, 1e-12);
    s.expect(z.x == zero2 && z.converged, "cg b=0 not handled");
  }

  {  // random SPD vs dense factorization
    const int n = 40;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd M = B.transpose() * B;
    M += (M.trace() / n) * Eigen::MatrixXd::Identity(n, n);
    LinOp op = [&](std::span<const double> v, std::span<double> out) {
      Eigen::Map<const Eigen::VectorXd> vv(v.data(), n);
      Eigen::VectorXd r = M * vv;
      for (int i = 0; i < n; ++i) out[i] = r(i);
    };
    const auto b = random_vec(n, rng);
    const CgResult r = cg_solve(op, b, n, 1e-10);
    Eigen::Map<const Eigen::VectorXd> bb(b.data(), n);
    const Eigen::VectorXd exact = M.ldlt().solve(bb);
    double err = 0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(r.x[i] - exact(i)));
    s.expect(err <= 1e-8 * exact.norm(), "cg disagrees with dense factorization");
  }

  // Family equivalence against the one-shot solve, fixed graphs.
  const int side = 6, n2 = side * side;
  for (int kind = 0; kind < 2; ++kind) {
    const FormationModel m = kind == 0 ? FormationModel::identity(n2)
                                       : FormationModel::mask(make_mask(n2, 0.5, 17));
    std::vector<double> clean(n2);
    const double pa = rng.uniform(-0.05, 0.05), pb = rng.uniform(-0.05, 0.05);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        clean[r * side + c] = pa * r + pb * c + 0.5 + 0.1 * rng.uniform(-1.0, 1.0);
    const auto y = m.apply(clean);
    const FeatureField f = compute_features(clean, side);
    KernelParams kp;
    kp.sigma_a = kp.sigma_x = 1.0;
    PriorOptions opts;
    opts.mu = 0.4;
    opts.mu_tilde = 0.3;
    opts.with_components = true;
    const GngPrior prior = build_prior(clean, side, f, kp, opts);
    const auto direct = direct_solve(prior, m, y, 1e-12);
    double dnorm = 0;
    for (double v : direct) dnorm += v * v;
    dnorm = std::sqrt(dnorm);
    AdmmConfig cfg;
    cfg.relearn_graphs = false;
    cfg.outer_layers = 200;
    cfg.cg_iters = n2;
    cfg.cg_tol = 1e-12;
    cfg.rho = cfg.rho_tilde = 0.5;
    AdmmState state;
    for (auto family : {SolverFamily::Aux1, SolverFamily::Aux2, SolverFamily::Aux4}) {
      cfg.family = family;
      const auto x = family == SolverFamily::Aux1   ? admm_aux1(y, m, prior, cfg, {}, &state)
                     : family == SolverFamily::Aux2 ? admm_aux2(y, m, prior, cfg, {}, &state)
                                                    : admm_aux4(y, m, prior, cfg, {}, &state);
      double err = 0;
      for (int i = 0; i < n2; ++i) err += (x[i] - direct[i]) * (x[i] - direct[i]);
      s.expect(std::sqrt(err) / dnorm <= 1e-4, "ADMM family disagrees with direct solve");
      s.expect(state.residual_history.back() <= 1e-4, "multiplier feasibility violated");
    }
  }

  // Planar fixed point under the identity model.
  {
    std::vector<double> plane(n2);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) plane[r * side + c] = 0.02 * r + 0.03 * c + 0.1;
    const FormationModel m = FormationModel::identity(n2);
    const FeatureField f = compute_features(plane, side);
    PriorOptions opts;
    opts.mu = 3.0;
    opts.mu_tilde = 2.0;
    opts.with_components = true;
    const GngPrior prior = build_prior(plane, side, f, KernelParams{}, opts);
    AdmmConfig cfg;
    cfg.relearn_graphs = false;
    cfg.outer_layers = 60;
    cfg.cg_iters = n2;
    for (auto family : {SolverFamily::Aux1, SolverFamily::Aux2, SolverFamily::Aux4}) {
      cfg.family = family;
      const auto x = family == SolverFamily::Aux1   ? admm_aux1(plane, m, prior, cfg)
                     : family == SolverFamily::Aux2 ? admm_aux2(plane, m, prior, cfg)
                                                    : admm_aux4(plane, m, prior, cfg);
      double err = 0;
      for (int i = 0; i < n2; ++i) err = std::max(err, std::abs(x[i] - plane[i]));
      s.expect(err <= 1e-6, "planar observation is not a solver fixed point");
    }
  }

  {  // diffusion filter basics
    const auto y = random_vec(25, rng, 0.0, 1.0);
    const FeatureField f = compute_features(y, 5);
    s.expect(glr_iterative_filter(y, 5, f, KernelParams{}, 0.0, 5) == y,
             "filter with mu=0 is not the identity");
    const std::vector<double> c(25, 0.4);
    const FeatureField fc = compute_features(c, 5);
    const double mu = 0.2;
    const auto out = glr_iterative_filter(c, 5, fc, KernelParams{}, mu, 1);
    const double mode = (1.0 + 2.0 * mu) / ((1.0 + mu) * (1.0 + mu));
    for (double v : out)
      s.expect(std::abs(v / mode - 0.4) <= 1e-12, "constant signal null-mode scaling wrong");
  }
}

void suite_pipeline(Suite& s) {
  Rng rng(51);
  Image img(68, 68, 1);
  for (double& v : img.data) v = rng.uniform();

  const auto patches = patchify(img, 36, 32);
  s.expect(patches.size() == 4, "68x68 should produce 4 windows");
  const Image back = aggregate(patches, img.width, img.height, 1);
  s.expect(back.data == img.data, "patchify/aggregate round trip not exact");
  const Image back2 = aggregate(patchify(img, 36, 20), img.width, img.height, 1);
  s.expect(back2.data == img.data, "round trip not exact for stride 20");

  s.expect(psnr(img, img) == 99.0, "psnr cap");
  s.expect(std::abs(ssim(img, img) - 1.0) <= 1e-12, "ssim of identical images");
  Image off = img;
  for (double& v : off.data) v += 0.1;
  s.expect(std::abs(psnr(img, off) - 20.0) <= 1e-9, "psnr of uniform offset");

  const auto tmp = std::filesystem::temp_directory_path() / "gglr_selftest.pgm";
  write_image(tmp.string(), img);
  const Image rt = read_image(tmp.string());
  bool same = rt.width == img.width && rt.height == img.height;
  if (same)
    for (size_t i = 0; i < rt.data.size(); ++i)
      same = same && rt.data[i] == std::lround(255.0 * img.data[i]) / 255.0;
  s.expect(same, "pgm round trip not exact");
  std::filesystem::remove(tmp);

  Image small(40, 40, 1);
  for (double& v : small.data) v = rng.uniform();
  const FormationModel m = FormationModel::identity(small.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 3;
  cfg.cg_iters = 5;
  RestoreParams params;
  params.patch_size = 24;
  params.stride = 16;
  params.threads = 2;
  auto [r1, rep1] = restore(small, TaskKind::Denoise, m, cfg, params);
  auto [r2, rep2] = restore(small, TaskKind::Denoise, m, cfg, params);
  s.expect(r1.data == r2.data, "restore not deterministic");
}

}  // namespace

int run_selftest(std::ostream& out) {
  const std::vector<std::pair<std::string, std::function<void(Suite&)>>> suites = {
      {"graphcore", suite_graphcore},
      {"gradient_prior", suite_gradient_prior},
      {"formation", suite_formation},
      {"solvers", suite_solvers},
      {"pipeline", suite_pipeline},
  };
  int failures = 0;
  for (const auto& [name, fn] : suites) {
    Suite s;
    try {
      fn(s);
    } catch (const std::exception& e) {
      s.expect(false, std::string("exception: ") + e.what());
    }
    if (s.passed()) {
      out << "suite " << name << ": PASS (" << s.checks << " checks)\n";
    } else {
      out << "suite " << name << ": FAIL - " << s.failure << "\n";
      ++failures;
    }
  }
  return failures;
}

}  // namespace gglr
