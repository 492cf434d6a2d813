#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gglr/pipeline.hpp"
#include "gglr/rng.hpp"
#include "gglr/tune.hpp"

using namespace gglr;

namespace {

Image random_image(int w, int h, int ch, std::uint64_t seed) {
  Image img(w, h, ch);
  Rng rng(seed);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

Image planar_image(int w, int h, double a, double b, double d) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(0, y, x) = a * y + b * x + d;
  return img;
}

// Four planar quadrants with different slopes.
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
      img.at(0, y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace

TEST_CASE("patchify window counts and edge anchoring") {
  const Image exact = random_image(36, 36, 1, 1);
  CHECK(patchify(exact, 36, 32).size() == 1);

  const Image img = random_image(68, 68, 1, 2);
  const auto patches = patchify(img, 36, 32);
  CHECK(patches.size() == 4);
  CHECK(patches[0].first.x == 0);
  CHECK(patches[1].first.x == 32);
  CHECK(patches[2].first.y == 32);

  const Image tiny = random_image(20, 20, 1, 3);
  CHECK_THROWS_AS((void)patchify(tiny, 36, 32), std::invalid_argument);
}

TEST_CASE("patchify then aggregate is the identity") {
  for (int stride : {32, 20, 7}) {
    const Image img = random_image(68, 59, 1, 10 + stride);
    const Image back = aggregate(patchify(img, 36, stride), img.width, img.height, 1);
    CHECK(back.data == img.data);
  }
  // multi-channel round trip
  const Image rgb = random_image(50, 41, 3, 77);
  const Image back = aggregate(patchify(rgb, 24, 16), rgb.width, rgb.height, 3);
  CHECK(back.data == rgb.data);
}

TEST_CASE("aggregate averages overlaps") {
  Patch a(2, 1), b(2, 1);
  for (int i = 0; i < 4; ++i) {
    a.data[0][i] = 0.25;
    b.data[0][i] = 0.75;
  }
  // non-overlapping tiling -> direct copy
  const Image tiled = aggregate({{{0, 0}, a}, {{2, 0}, b}}, 4, 2, 1);
  CHECK(tiled.at(0, 0, 0) == 0.25);
  CHECK(tiled.at(0, 0, 3) == 0.75);

  // identical overlapping values -> that value
  const Image same = aggregate({{{0, 0}, a}, {{0, 0}, a}}, 2, 2, 1);
  CHECK(same.at(0, 1, 1) == 0.25);

  // overlap of a and b -> the midpoint
  const Image mixed = aggregate({{{0, 0}, a}, {{0, 0}, b}}, 2, 2, 1);
  CHECK(mixed.at(0, 0, 0) == doctest::Approx(0.5));

  // uncovered pixels are an error
  CHECK_THROWS_AS((void)aggregate({{{0, 0}, a}}, 4, 2, 1), std::invalid_argument);
}

TEST_CASE("psnr values") {
  const Image img = random_image(16, 16, 1, 5);
  CHECK(psnr(img, img) == 99.0);

  Image zero(8, 8, 1), one(8, 8, 1);
  for (double& v : one.data) v = 1.0;
  CHECK(psnr(zero, one) == doctest::Approx(0.0));

  Image off = img;
  for (double& v : off.data) v += 0.1;
  CHECK(psnr(img, off) == doctest::Approx(20.0).epsilon(1e-9));

  const Image other = random_image(8, 16, 1, 6);
  CHECK_THROWS_AS((void)psnr(img, other), std::invalid_argument);
}

TEST_CASE("ssim values") {
  const Image img = random_image(32, 32, 1, 7);
  CHECK(ssim(img, img) == doctest::Approx(1.0));
  Image noisy = img;
  Rng rng(8);
  for (double& v : noisy.data) v = std::clamp(v + 0.2 * rng.uniform(-1.0, 1.0), 0.0, 1.0);
  const double s = ssim(img, noisy);
  CHECK(s < 1.0);
  CHECK(s >= -1.0);
}

TEST_CASE("noise-free denoising with a weak prior is near-identity") {
  const Image img = piecewise_planar_image(40);
  const FormationModel m = FormationModel::identity(img.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 10;
  cfg.cg_iters = 10;
  RestoreParams params;
  params.mu = 1e-6;
  params.mu_tilde = 1e-6;
  params.patch_size = 24;
  params.stride = 16;
  params.threads = 1;
  auto [out, report] = restore(img, TaskKind::Denoise, m, cfg, params, &img);
  CHECK(report.psnr_db >= 60.0);
  CHECK(report.patch_count == 4);
}

TEST_CASE("restore is deterministic, also with multiple worker threads") {
  const Image clean = piecewise_planar_image(40);
  Image noisy = clean;
  std::vector<double> flat = noisy.data;
  flat = add_awgn(flat, {15.0, 99});
  noisy.data = flat;
  const FormationModel m = FormationModel::identity(clean.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 4;
  cfg.cg_iters = 6;
  RestoreParams params;
  params.patch_size = 24;
  params.stride = 16;
  params.threads = 3;
  auto [a, ra] = restore(noisy, TaskKind::Denoise, m, cfg, params);
  auto [b, rb] = restore(noisy, TaskKind::Denoise, m, cfg, params);
  CHECK(a.data == b.data);
  params.threads = 1;
  auto [c, rc] = restore(noisy, TaskKind::Denoise, m, cfg, params);
  CHECK(a.data == c.data);
}

TEST_CASE("interpolation reproduces observed pixels when the prior vanishes") {
  const Image img = random_image(36, 36, 1, 21);
  const auto keep = make_mask(img.pixels(), 0.5, 4);
  const FormationModel m = FormationModel::mask(keep);
  AdmmConfig cfg;
  cfg.family = SolverFamily::Direct;
  cfg.outer_layers = 2;
  cfg.cg_iters = 600;
  RestoreParams params;
  params.mu = 1e-12;
  params.mu_tilde = 1e-12;
  params.threads = 1;
  auto [out, report] = restore(img, TaskKind::Interpolate, m, cfg, params);
  for (int i = 0; i < img.pixels(); ++i)
    if (keep[i]) CHECK(std::abs(out.data[i] - img.data[i]) <= 1e-6);
}

TEST_CASE("planar image is recovered exactly from half its pixels") {
  const Image plane = planar_image(36, 36, 0.004, 0.007, 0.15);
  const auto keep = make_mask(plane.pixels(), 0.5, 11);
  const FormationModel m = FormationModel::mask(keep);
  Image observed = plane;
  for (int i = 0; i < plane.pixels(); ++i)
    if (!keep[i]) observed.data[i] = 0.0;

  AdmmConfig cfg;
  cfg.family = SolverFamily::Aux4;
  cfg.rho = cfg.rho_tilde = 0.5;
  cfg.outer_layers = 220;
  cfg.cg_iters = 40;
  RestoreParams params;
  params.threads = 1;
  auto [out, report] = restore(observed, TaskKind::Interpolate, m, cfg, params);
  double err = 0.0;
  for (int i = 0; i < plane.pixels(); ++i)
    err = std::max(err, std::abs(out.data[i] - plane.data[i]));
  CHECK(err < 1e-3);
}

TEST_CASE("denoising improves PSNR on a piecewise-planar image") {
  const Image clean = piecewise_planar_image(64);
  Image noisy = clean;
  noisy.data = add_awgn(clean.data, {25.0, 123});
  for (double& v : noisy.data) v = std::clamp(v, 0.0, 1.0);
  const FormationModel m = FormationModel::identity(clean.pixels());

  AdmmConfig cfg;
  cfg.outer_layers = 10;
  cfg.cg_iters = 10;
  RestoreParams params;
  params.mu = 1.0;
  params.mu_tilde = 1.0;
  params.kernel.sigma_x = 0.5;
  params.kernel.sigma_a = 0.5;
  params.threads = 2;
  auto [out, report] = restore(noisy, TaskKind::Denoise, m, cfg, params, &clean);
  const double noisy_psnr = psnr(noisy, clean);
  CHECK(report.psnr_db >= noisy_psnr + 1.0);

  // GLR baseline runs through the same solver
  RestoreParams glr_params = params;
  glr_params.prior = PriorKind::Glr;
  auto [out_glr, report_glr] = restore(noisy, TaskKind::Denoise, m, cfg, glr_params, &clean);
  CHECK(report_glr.psnr_db > noisy_psnr);
}

TEST_CASE("random-walk normalized prior runs end to end") {
  const Image clean = piecewise_planar_image(48);
  Image noisy = clean;
  noisy.data = add_awgn(clean.data, {25.0, 17});
  for (double& v : noisy.data) v = std::clamp(v, 0.0, 1.0);
  const FormationModel m = FormationModel::identity(clean.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 10;
  cfg.cg_iters = 10;
  RestoreParams params;
  params.normalization = Normalization::RandomWalk;
  params.mu = params.mu_tilde = 1.0;
  params.kernel.sigma_x = params.kernel.sigma_a = 0.5;
  params.patch_size = 36;
  params.stride = 32;
  params.threads = 1;
  auto [out, report] = restore(noisy, TaskKind::Denoise, m, cfg, params, &clean);
  CHECK(report.psnr_db > psnr(noisy, clean));
}

TEST_CASE("rgb restore shares the luminance graph across channels") {
  const int n = 32;
  Image clean(n, n, 3);
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        clean.at(ch, y, x) = std::clamp(0.2 + 0.1 * ch + 0.004 * y + (x < n / 2 ? 0.0 : 0.3), 0.0, 1.0);
  Image noisy = clean;
  noisy.data = add_awgn(clean.data, {20.0, 31});
  for (double& v : noisy.data) v = std::clamp(v, 0.0, 1.0);

  const FormationModel m = FormationModel::identity(clean.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 8;
  cfg.cg_iters = 8;
  RestoreParams params;
  params.mu = params.mu_tilde = 1.0;
  params.kernel.sigma_x = params.kernel.sigma_a = 0.5;
  params.patch_size = 24;
  params.stride = 16;
  params.threads = 2;
  auto [out, report] = restore(noisy, TaskKind::Denoise, m, cfg, params, &clean);
  CHECK(out.channels == 3);
  CHECK(report.psnr_db > psnr(noisy, clean));

  auto [out2, report2] = restore(noisy, TaskKind::Denoise, m, cfg, params, &clean);
  CHECK(out.data == out2.data);
}

TEST_CASE("tune_params obeys its grid") {
  const Image clean = piecewise_planar_image(24);
  const FormationModel m = FormationModel::identity(clean.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 6;
  cfg.cg_iters = 8;
  RestoreParams base;
  base.patch_size = 24;
  base.threads = 1;

  // singleton grids: the single point is echoed back
  SearchSpace one;
  one.rho = {1.25};
  one.rho_tilde = {0.75};
  one.mu = {0.33};
  one.mu_tilde = {0.11};
  one.sigma_f = {2.0};
  one.sigma_x = {0.3};
  one.sigma_a = {0.4};
  std::vector<std::pair<Image, Image>> pairs = {{clean, clean}};
  const TunedParams t1 = tune_params(pairs, TaskKind::Denoise, m, cfg, base, one);
  CHECK(t1.rho == 1.25);
  CHECK(t1.mu == 0.33);
  CHECK(t1.sigma_a == 0.4);

  // noiseless pair: fidelity dominates, smallest prior weights win
  SearchSpace grid;
  grid.mu = {1e-6, 1e-2, 1.0};
  grid.mu_tilde = {1e-6, 1e-2, 1.0};
  const TunedParams t2 = tune_params(pairs, TaskKind::Denoise, m, cfg, base, grid);
  CHECK(t2.mu == 1e-6);
  CHECK(t2.mu_tilde == 1e-6);

  CHECK_THROWS_AS((void)tune_params({}, TaskKind::Denoise, m, cfg, base, grid),
                  std::invalid_argument);
}

TEST_CASE("tune_params returns a grid-local optimum that beats the start point") {
  const Image clean = piecewise_planar_image(24);
  Image noisy = clean;
  noisy.data = add_awgn(clean.data, {25.0, 5});
  for (double& v : noisy.data) v = std::clamp(v, 0.0, 1.0);
  const FormationModel m = FormationModel::identity(clean.pixels());
  AdmmConfig cfg;
  cfg.outer_layers = 6;
  cfg.cg_iters = 8;
  RestoreParams base;
  base.patch_size = 24;
  base.threads = 1;

  SearchSpace grid;
  grid.mu = {0.1, 0.5, 2.0};
  grid.sigma_a = {0.2, 1.0};
  std::vector<std::pair<Image, Image>> pairs = {{clean, noisy}};
  const TunedParams t = tune_params(pairs, TaskKind::Denoise, m, cfg, base, grid);

  auto eval = [&](double mu, double sigma_a) {
    AdmmConfig c = cfg;
    c.rho = t.rho;
    c.rho_tilde = t.rho_tilde;
    RestoreParams p = base;
    p.mu = mu;
    p.mu_tilde = t.mu_tilde;
    p.kernel.sigma_f = t.sigma_f;
    p.kernel.sigma_x = t.sigma_x;
    p.kernel.sigma_a = sigma_a;
    auto [out, rep] = restore(noisy, TaskKind::Denoise, m, c, p, &clean);
    return rep.psnr_db;
  };
  const double at_opt = eval(t.mu, t.sigma_a);
  CHECK(t.psnr == doctest::Approx(at_opt).epsilon(1e-9));
  for (double mu : grid.mu) CHECK(at_opt >= eval(mu, t.sigma_a) - 1e-9);
  for (double sa : grid.sigma_a) CHECK(at_opt >= eval(t.mu, sa) - 1e-9);

  // the default start point is in the candidate set, so tuning cannot lose
  RestoreParams def = base;
  auto [dout, drep] = restore(noisy, TaskKind::Denoise, m, cfg, def, &clean);
  CHECK(t.psnr >= drep.psnr_db - 1e-9);
}
