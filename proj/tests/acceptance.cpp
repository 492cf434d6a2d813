// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "gglr/gradient_prior.hpp"
#include "gglr/image_io.hpp"
#include "gglr/pipeline.hpp"
#include "gglr/rng.hpp"
#include "gglr/solvers.hpp"
#include "gglr/tune.hpp"

using namespace gglr;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void require(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
  void note(const std::string& text) {
    if (detail.empty()) detail = text;
  }
};

Eigen::MatrixXd dense_of(const SparseSym& m) {
  Eigen::MatrixXd d(m.dim, m.dim);
  d.setZero();
  for (int i = 0; i < m.dim; ++i)
    for (int p = m.row_offsets[i]; p < m.row_offsets[i + 1]; ++p)
      d(i, m.cols[p]) = m.vals[p];
  return d;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

Image piecewise_planar_image(int n) {
  Image img(n, n, 1);
  const int half = n / 2;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double v;
      if (y < half && x < half)
        v = 0.2 + 0.004 * y + 0.002 * x;
      else if (y < half)
        v = 0.7 - 0.003 * y + 0.002 * (x - half);
      else if (x < half)
        v = 0.45 + 0.005 * (y - half) - 0.002 * x;
      else
        v = 0.85 - 0.004 * (y - half) - 0.004 * (x - half);
      img.at(0, y, x) = std::min(std::max(v, 0.0), 1.0);
    }
  }
  return img;
}

// ------------------------------------------------------------------ 1
void criterion_null_space(Check& c) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 6;  // 3..8
    Graph gbar;
    gbar.node_count = n - 1;
    for (int i = 0; i + 2 < n; ++i) gbar.edges.push_back({i, i + 1, rng.uniform(0.1, 2.0)});
    const SparseSym L = gng_laplacian(laplacian(gbar), grad_op(n));
    const auto pairs = spectrum(L, n);
    c.require(pairs[0].value < 1e-9 && pairs[1].value < 1e-9,
              "first two eigenvalues not below 1e-9");
    c.require(pairs[2].value > 1e-6, "third eigenvalue not above 1e-6");

    // principal angle between span{v1, v2} and span{1, ramp}
    Eigen::MatrixXd A(n, 2), B(n, 2);
    for (int i = 0; i < n; ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = i;
      B(i, 0) = pairs[0].vector[i];
      B(i, 1) = pairs[1].vector[i];
    }
    const Eigen::MatrixXd Qa = Eigen::HouseholderQR<Eigen::MatrixXd>(A)
                                   .householderQ() * Eigen::MatrixXd::Identity(n, 2);
    const Eigen::MatrixXd Qb = Eigen::HouseholderQR<Eigen::MatrixXd>(B)
                                   .householderQ() * Eigen::MatrixXd::Identity(n, 2);
    const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Qa.transpose() * Qb).singularValues();
    const double angle = std::acos(std::min(1.0, sv(1)));
    c.require(angle < 1e-6, "null space not aligned with {constant, ramp}");
  }
}

// ------------------------------------------------------------------ 2
void criterion_psd(Check& c) {
  Rng rng(2);
  AdmmConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const int side = 4 + trial % 3;  // 4..6
    const int n2 = side * side;
    std::vector<double> est(n2);
    for (double& v : est) v = rng.uniform(0.0, 1.0);
    const FeatureField f = compute_features(est, side);
    KernelParams kp;
    if (trial % 2) kp.sigma_a = kp.sigma_x = 1.0;  // both weight regimes
    PriorOptions opts;
    opts.mu = 0.5;
    opts.mu_tilde = 0.5;
    opts.with_components = true;
    const GngPrior prior = build_prior(est, side, f, kp, opts);

    auto min_eig = [](const Eigen::MatrixXd& m) {
      return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues()(0);
    };
    const Eigen::MatrixXd Li = dense_of(prior.L_inline);
    const Eigen::MatrixXd Lc = dense_of(prior.L_cross);
    c.require(min_eig(Li) >= -1e-10, "inline aggregate not PSD");
    c.require(min_eig(Lc) >= -1e-10, "cross aggregate not PSD");

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n2, n2);
    // Aux1 z-operator
    c.require(min_eig(I + (2 * prior.mu / cfg.rho) * Li +
                      (2 * prior.mu_tilde / cfg.rho) * Lc) >= -1e-10,
              "Aux1 z-operator not PSD");
    // Aux2 z-operators
    c.require(min_eig(I + (2 * prior.mu / cfg.rho) * Li) >= -1e-10,
              "Aux2 z-operator not PSD");
    c.require(min_eig(I + (2 * prior.mu_tilde / cfg.rho_tilde) * Lc) >= -1e-10,
              "Aux2 z~-operator not PSD");
    // Aux4 z-operators
    for (int part = 0; part < 4; ++part) {
      const double coeff =
          part < 2 ? 2 * prior.mu / cfg.rho : 2 * prior.mu_tilde / cfg.rho_tilde;
      c.require(min_eig(I + coeff * dense_of(prior.component_terms[part])) >= -1e-10,
                "Aux4 z-operator not PSD");
    }
  }
}

// ------------------------------------------------------------------ 3
void criterion_solver_equivalence(Check& c) {
  const int side = 6, n2 = side * side;
  double worst = 0.0;
  for (int model_kind = 0; model_kind < 3; ++model_kind) {
    for (int inst = 0; inst < 20; ++inst) {
      Rng rng(300 + 20 * model_kind + inst);
      FormationModel m = FormationModel::identity(n2);
      if (model_kind == 1) m = FormationModel::mask(make_mask(n2, 0.5, 50 + inst));
      if (model_kind == 2) m = FormationModel::blur(side, side, make_gaussian_kernel(3, 1.0));

      std::vector<double> clean(n2);
      const double pa = rng.uniform(-0.05, 0.05), pb = rng.uniform(-0.05, 0.05);
      for (int r = 0; r < side; ++r)
        for (int col = 0; col < side; ++col)
          clean[r * side + col] = pa * r + pb * col + 0.5 + 0.1 * rng.uniform(-1.0, 1.0);
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

      AdmmConfig cfg;
      cfg.relearn_graphs = false;
      cfg.outer_layers = 200;
      cfg.cg_iters = n2;
      cfg.cg_tol = 1e-12;
      cfg.rho = cfg.rho_tilde = 0.5;
      const double e1 = rel_l2(admm_aux1(y, m, prior, cfg), direct);
      const double e2 = rel_l2(admm_aux2(y, m, prior, cfg), direct);
      const double e4 = rel_l2(admm_aux4(y, m, prior, cfg), direct);
      worst = std::max({worst, e1, e2, e4});
      c.require(e1 <= 1e-4 && e2 <= 1e-4 && e4 <= 1e-4,
                "family disagrees with direct solve beyond 1e-4");
    }
  }
  std::ostringstream ss;
  ss << "worst relative error " << worst;
  c.note(ss.str());
}

// ------------------------------------------------------------------ 4
void criterion_cg(Check& c) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20 + static_cast<int>(rng.integer(181));  // 20..200
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd M = B.transpose() * B;
    M += (M.trace() / n) * Eigen::MatrixXd::Identity(n, n);
    LinOp op = [&](std::span<const double> v, std::span<double> out) {
      Eigen::Map<const Eigen::VectorXd> vv(v.data(), n);
      const Eigen::VectorXd r = M * vv;
      for (int i = 0; i < n; ++i) out[i] = r(i);
    };
    std::vector<double> b(n);
    for (double& v : b) v = rng.uniform(-1.0, 1.0);
    const CgResult res = cg_solve(op, b, n, 1e-10);
    Eigen::Map<const Eigen::VectorXd> bb(b.data(), n);
    const Eigen::VectorXd exact = M.ldlt().solve(bb);
    std::vector<double> ex(exact.data(), exact.data() + n);
    c.require(rel_l2(res.x, ex) <= 1e-8, "CG further than 1e-8 from the factorization oracle");
  }
  // scaled-identity systems finish in one iteration
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.integer(64));
    const double scale = rng.uniform(0.5, 4.0);
    LinOp op = [scale](std::span<const double> v, std::span<double> out) {
      for (size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i];
    };
    std::vector<double> b(n);
    for (double& v : b) v = rng.uniform(-1.0, 1.0);
    const CgResult res = cg_solve(op, b, n, 1e-12);
    c.require(res.iterations == 1, "scaled-identity system took more than one iteration");
  }
}

// ------------------------------------------------------------------ 5
void criterion_planar_recovery(Check& c) {
  Image plane(36, 36, 1);
  for (int y = 0; y < 36; ++y)
    for (int x = 0; x < 36; ++x) plane.at(0, y, x) = 0.004 * y + 0.007 * x + 0.15;
  const auto keep = make_mask(plane.pixels(), 0.5, 11);
  Image observed = plane;
  for (int i = 0; i < plane.pixels(); ++i)
    if (!keep[i]) observed.data[i] = 0.0;

  AdmmConfig cfg;
  cfg.family = SolverFamily::Aux4;
  cfg.rho = cfg.rho_tilde = 0.5;
  cfg.outer_layers = 200;
  cfg.cg_iters = 36;
  RestoreParams params;
  params.threads = 1;
  auto [out, report] =
      restore(observed, TaskKind::Interpolate, FormationModel::mask(keep), cfg, params);
  double err = 0.0;
  for (int i = 0; i < plane.pixels(); ++i)
    err = std::max(err, std::abs(out.data[i] - plane.data[i]));
  std::ostringstream ss;
  ss << "max abs error " << err;
  c.note(ss.str());
  c.require(err < 1e-3, "planar reconstruction error at least 1e-3");
}

// ------------------------------------------------------------------ 6
void criterion_counterexample(Check& c) {
  const std::vector<double> x = {1, 0, -1, 0, 0, 0, -1, 0, 1};
  const FeatureField f = compute_features(x, 3);
  KernelParams p;
  p.sigma_f = 10.0;
  p.sigma_a = 2.0;
  const GngPrior prior = build_prior(x, 3, f, p);
  const double inline_term = prior.L_inline.quad(x);
  const double cross_term = prior.L_cross.quad(x);
  c.require(inline_term <= 1e-12, "inline prior sees the non-planar patch");
  c.require(cross_term >= 1e-6, "cross prior misses the non-planar patch");

  // dense-oracle confirmation through the explicit selector matrices
  Eigen::MatrixXd Lc = Eigen::MatrixXd::Zero(9, 9);
  const RectSparse Ft = interleave_grad_op(3);
  Eigen::MatrixXd Ftd(Ft.rows, Ft.cols);
  Ftd.setZero();
  for (int i = 0; i < Ft.rows; ++i)
    for (int q = Ft.row_offsets[i]; q < Ft.row_offsets[i + 1]; ++q)
      Ftd(i, Ft.col_idx[q]) = Ft.vals[q];
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), 9);
  for (int k = 1; k <= 2; ++k) {
    for (bool colpair : {true, false}) {
      const RectSparse sel = colpair ? col_pair_selector(3, k) : row_pair_selector(3, k);
      Eigen::MatrixXd S(sel.rows, sel.cols);
      S.setZero();
      for (int i = 0; i < sel.rows; ++i)
        for (int q = sel.row_offsets[i]; q < sel.row_offsets[i + 1]; ++q)
          S(i, sel.col_idx[q]) = sel.vals[q];
      const Eigen::VectorXd alpha = Ftd * S * xv;
      Graph g;
      g.node_count = 3;
      for (int e = 0; e + 1 < 3; ++e) {
        const int fa = sel.col_idx[2 * e], fb = sel.col_idx[2 * (e + 1)];
        g.edges.push_back({e, e + 1,
                           edge_weight(f.feature(fa), f.feature(fb), alpha(e), alpha(e + 1),
                                       p, WeightMode::Gradient)});
      }
      Lc += S.transpose() * Ftd.transpose() * dense_of(laplacian(g)) * Ftd * S;
    }
  }
  c.require(xv.dot(Lc * xv) >= 1e-6, "dense oracle disagrees on the cross term");
}

// ------------------------------------------------------------------ 7 and 8
struct DenoiseSetup {
  Image clean;
  Image noisy;
  double noisy_psnr = 0.0;
};

DenoiseSetup make_denoise_setup() {
  DenoiseSetup s;
  s.clean = piecewise_planar_image(128);
  s.noisy = s.clean;
  s.noisy.data = add_awgn(s.clean.data, {25.0, 7});
  for (double& v : s.noisy.data) v = std::min(std::max(v, 0.0), 1.0);
  s.noisy_psnr = psnr(s.noisy, s.clean);
  return s;
}

// Best PSNR for a (family, prior) combination after coordinate descent over
// the shared desk-scale grids, the same protocol for every contender.
double tuned_denoise_psnr(const DenoiseSetup& s, SolverFamily family, PriorKind prior) {
  AdmmConfig cfg;
  cfg.family = family;
  cfg.outer_layers = 10;
  cfg.cg_iters = 10;
  RestoreParams base;
  base.prior = prior;
  base.threads = 0;  // hardware

  SearchSpace space;
  space.mu = {0.3, 1.0, 3.0, 10.0, 30.0};
  space.mu_tilde = prior == PriorKind::Glr ? std::vector<double>{0.0}
                                           : std::vector<double>{0.3, 1.0, 3.0, 10.0, 30.0};
  space.rho = {0.5, 1.0};
  space.rho_tilde = {0.5, 1.0};
  space.sigma_x = {0.1, 0.3, 1.0};
  space.sigma_a = {0.1, 0.3, 1.0};
  const FormationModel m = FormationModel::identity(0);  // restricted per patch
  const std::vector<std::pair<Image, Image>> pairs = {{s.clean, s.noisy}};
  const TunedParams t = tune_params(pairs, TaskKind::Denoise, m, cfg, base, space);
  return t.psnr;
}

void criterion_denoising_gain(Check& c, const DenoiseSetup& s, double* gglr_psnr_out) {
  const double gglr_psnr = tuned_denoise_psnr(s, SolverFamily::Aux1, PriorKind::Gglr);
  const double glr_psnr = tuned_denoise_psnr(s, SolverFamily::Aux1, PriorKind::Glr);
  *gglr_psnr_out = gglr_psnr;
  std::ostringstream ss;
  ss << "noisy " << s.noisy_psnr << " dB, GGLR " << gglr_psnr << " dB, GLR " << glr_psnr
     << " dB";
  c.note(ss.str());
  c.require(gglr_psnr >= s.noisy_psnr + 3.0, "tuned GGLR gain below 3 dB");
  c.require(gglr_psnr >= glr_psnr, "GGLR prior lost to the GLR baseline");
}

void criterion_aux_ordering(Check& c, const DenoiseSetup& s, double aux1_psnr) {
  const double aux2_psnr = tuned_denoise_psnr(s, SolverFamily::Aux2, PriorKind::Gglr);
  const double aux4_psnr = tuned_denoise_psnr(s, SolverFamily::Aux4, PriorKind::Gglr);
  std::ostringstream ss;
  ss << "mean PSNR: Aux1 " << aux1_psnr << " dB, Aux2 " << aux2_psnr << " dB, Aux4 "
     << aux4_psnr << " dB; ordering "
     << ((aux4_psnr >= aux2_psnr && aux2_psnr >= aux1_psnr - 0.1) ? "holds" : "does not hold")
     << " (reported, not asserted)";
  c.note(ss.str());
}

// ------------------------------------------------------------------ 9
void criterion_tse_decay(Check& c) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g;
    g.node_count = 10;
    for (int i = 0; i + 1 < 10; ++i) g.edges.push_back({i, i + 1, rng.uniform(0.5, 2.0)});
    const SparseSym rw = random_walk_laplacian(laplacian(g));
    const Eigen::MatrixXd D = dense_of(rw);
    auto err = [&](double mu) {
      const DenseMat f = tse_filter(rw, mu);
      Eigen::MatrixXd F(10, 10);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) F(i, j) = f.at(i, j);
      const Eigen::MatrixXd inv =
          (Eigen::MatrixXd::Identity(10, 10) + mu * D).inverse();
      return Eigen::JacobiSVD<Eigen::MatrixXd>(F - inv).singularValues()(0);
    };
    for (double mu : {0.2, 0.1})
      c.require(err(mu / 2) / err(mu) <= 0.35, "TSE error ratio above 0.35");
  }
}

// ------------------------------------------------------------------ 10
int run_cli(const std::string& args) {
  const std::string cmd = std::string(GGLR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_round_trips(Check& c) {
  Rng rng(10);
  Image img(68, 59, 1);
  for (double& v : img.data) v = rng.uniform();
  const Image back = aggregate(patchify(img, 36, 32), img.width, img.height, 1);
  c.require(back.data == img.data, "patchify/aggregate round trip not bit-exact");

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gglr_acceptance";
  fs::create_directories(dir);
  const std::string src = (dir / "src.pgm").string();
  write_image(src, img);
  const Image loaded = read_image(src);
  bool exact = true;
  for (size_t i = 0; i < img.data.size(); ++i)
    exact = exact && loaded.data[i] == std::lround(255.0 * img.data[i]) / 255.0;
  c.require(exact, "PGM write/read round trip not exact");
  const std::string copy = (dir / "copy.pgm").string();
  write_image(copy, loaded);
  c.require(slurp(src) == slurp(copy), "PGM re-encode changed bytes");

  const std::string in = (dir / "in.pgm").string();
  write_image(in, piecewise_planar_image(64));
  c.require(run_cli("degrade --awgn 25 --seed 3 " + in + " " + (dir / "d1.pgm").string()) == 0,
            "degrade failed");
  c.require(run_cli("degrade --awgn 25 --seed 3 " + in + " " + (dir / "d2.pgm").string()) == 0,
            "degrade failed");
  c.require(slurp((dir / "d1.pgm").string()) == slurp((dir / "d2.pgm").string()),
            "same-seed degrade outputs differ");
  const std::string restore_args =
      "denoise --sigma 15 --seed 4 --layers 4 --cg-iters 6 --threads 2 " + in + " ";
  c.require(run_cli(restore_args + (dir / "r1.pgm").string()) == 0, "denoise failed");
  c.require(run_cli(restore_args + (dir / "r2.pgm").string()) == 0, "denoise failed");
  c.require(slurp((dir / "r1.pgm").string()) == slurp((dir / "r2.pgm").string()),
            "same-seed CLI restorations differ");
}

}  // namespace

int main() {
  struct Entry {
    int id;
    std::string name;
    double budget_s;
    std::function<void(Check&)> fn;
  };

  DenoiseSetup setup;
  double aux1_psnr = 0.0;

  const std::vector<Entry> entries = {
      {1, "line GNG null space is {constant, ramp}", 5.0, criterion_null_space},
      {2, "priors and z-subproblem operators are PSD", 10.0, criterion_psd},
      {3, "Aux1/Aux2/Aux4 match the direct solve", 60.0, criterion_solver_equivalence},
      {4, "CG matches the factorization oracle", 10.0, criterion_cg},
      {5, "planar recovery from a 50% mask", 10.0, criterion_planar_recovery},
      {6, "non-planar 3x3 counterexample split", 1.0, criterion_counterexample},
      {7, "tuned denoising gain and GGLR vs GLR", 300.0,
       [&](Check& c) {
         setup = make_denoise_setup();
         criterion_denoising_gain(c, setup, &aux1_psnr);
       }},
      {8, "auxiliary-count ordering (reported)", 300.0,
       [&](Check& c) { criterion_aux_ordering(c, setup, aux1_psnr); }},
      {9, "TSE filter error decays quadratically", 2.0, criterion_tse_decay},
      {10, "round trips and seeded determinism", 5.0, criterion_round_trips},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      entry.fn(c);
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > entry.budget_s) c.fail("runtime budget exceeded");
    std::printf("[%s] criterion %2d: %s%s%s [%.2fs]\n", c.pass ? "PASS" : "FAIL", entry.id,
                entry.name.c_str(), c.detail.empty() ? "" : " - ", c.detail.c_str(), secs);
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
