// Command-line front end: restoration jobs, degradation synthesis, spectral
// diagnostics, parameter tuning, and the self-test suite.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid flags, 3 solver
// non-convergence.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gglr/gradient_prior.hpp"
#include "gglr/image_io.hpp"
#include "gglr/pipeline.hpp"
#include "gglr/rng.hpp"
#include "gglr/selftest.hpp"
#include "gglr/solvers.hpp"
#include "gglr/tune.hpp"

namespace {

using namespace gglr;

struct CommonOpts {
  int aux = 1;  // 0 = direct solve
  int layers = 10;
  int cg_iters = 10;
  double cg_tol = 1e-8;
  double mu = 0.5;
  double mu_tilde = 0.5;
  double rho = 1.0;
  double rho_tilde = 1.0;
  double sigma_f = 1.0;
  double sigma_x = 0.2;
  double sigma_a = 0.2;
  bool normalized = false;
  bool no_relearn = false;
  std::string prior = "gglr";
  int patch = 0;
  int stride = 0;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string ref;
  double feat_spatial = 1.0;
  double feat_luma = 1.0;
  double feat_grad = 1.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--aux", o.aux, "Auxiliary variables: 0 (direct), 1, 2 or 4")
      ->check(CLI::IsMember({0, 1, 2, 4}));
  cmd->add_option("--layers", o.layers, "Outer solver layers K")->check(CLI::PositiveNumber);
  cmd->add_option("--cg-iters", o.cg_iters, "CG iterations per linear solve L")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cg-tol", o.cg_tol, "CG relative residual tolerance");
  cmd->add_option("--mu", o.mu, "Inline prior weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mu-tilde", o.mu_tilde, "Cross prior weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--rho", o.rho, "ADMM penalty")->check(CLI::PositiveNumber);
  cmd->add_option("--rho-tilde", o.rho_tilde, "ADMM penalty for the cross split")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-f", o.sigma_f, "Feature bandwidth")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-x", o.sigma_x, "Intensity bandwidth")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-a", o.sigma_a, "Gradient bandwidth")->check(CLI::PositiveNumber);
  cmd->add_flag("--normalized", o.normalized, "Random-walk normalized prior");
  cmd->add_flag("--no-relearn", o.no_relearn, "Disable per-layer graph re-learning");
  cmd->add_option("--prior", o.prior, "Signal prior")->check(CLI::IsMember({"gglr", "glr"}));
  cmd->add_option("--patch", o.patch, "Patch size (0 = task default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--stride", o.stride, "Patch stride (0 = default 32)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)")
      ->envname("GGLR_THREADS")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--ref", o.ref, "Reference image for metrics");
  cmd->add_option("--feat-spatial", o.feat_spatial, "Spatial feature weight");
  cmd->add_option("--feat-luma", o.feat_luma, "Luminance feature weight");
  cmd->add_option("--feat-grad", o.feat_grad, "Gradient-magnitude feature weight");
  std::string dummy;
  cmd->add_option("--config", dummy, "Read options from a key=value file (flags override it)");
}

// Splice `key = value` config entries into the argument list right after the
// subcommand token; explicit flags appear later and win under the take-last
// policy.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string config_path;
  for (size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
    } else {
      ++i;
    }
  }
  if (config_path.empty() || args.empty()) return args;
  std::vector<std::string> expanded;
  expanded.push_back(args[0]);
  for (const auto& [key, value] : read_config(config_path))
    expanded.push_back("--" + key + "=" + value);
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

AdmmConfig to_admm_config(const CommonOpts& o) {
  AdmmConfig cfg;
  switch (o.aux) {
    case 0:
      cfg.family = SolverFamily::Direct;
      break;
    case 1:
      cfg.family = SolverFamily::Aux1;
      break;
    case 2:
      cfg.family = SolverFamily::Aux2;
      break;
    default:
      cfg.family = SolverFamily::Aux4;
      break;
  }
  cfg.rho = o.rho;
  cfg.rho_tilde = o.rho_tilde;
  cfg.outer_layers = o.layers;
  cfg.cg_iters = o.cg_iters;
  cfg.cg_tol = o.cg_tol;
  cfg.relearn_graphs = !o.no_relearn;
  return cfg;
}

RestoreParams to_restore_params(const CommonOpts& o) {
  RestoreParams p;
  p.kernel.sigma_f = o.sigma_f;
  p.kernel.sigma_x = o.sigma_x;
  p.kernel.sigma_a = o.sigma_a;
  p.features.spatial_weight = o.feat_spatial;
  p.features.luminance_weight = o.feat_luma;
  p.features.gradient_weight = o.feat_grad;
  p.mu = o.mu;
  p.mu_tilde = o.mu_tilde;
  p.normalization = o.normalized ? Normalization::RandomWalk : Normalization::Combinatorial;
  p.prior = o.prior == "glr" ? PriorKind::Glr : PriorKind::Gglr;
  p.patch_size = o.patch;
  p.stride = o.stride;
  p.threads = o.threads;
  return p;
}

const char* task_name(TaskKind task) {
  switch (task) {
    case TaskKind::Denoise:
      return "denoise";
    case TaskKind::Interpolate:
      return "interpolate";
    default:
      return "deblur";
  }
}

int run_restore(TaskKind task, const FormationModel& m, const Image& input,
                const std::string& out_path, const CommonOpts& o) {
  const AdmmConfig cfg = to_admm_config(o);
  const RestoreParams params = to_restore_params(o);
  Image ref;
  const bool have_ref = !o.ref.empty();
  if (have_ref) ref = read_image(o.ref);
  auto [restored, report] = restore(input, task, m, cfg, params, have_ref ? &ref : nullptr);
  write_image(out_path, restored);
  if (have_ref) {
    std::printf("%s,%d,%d,%d,%.4f,%.4f,%.3f\n", task_name(task), o.aux, o.layers,
                o.cg_iters, report.psnr_db, report.ssim, report.seconds);
  }
  return 0;
}

// Shared task-specific state for the restoration subcommands.
struct TaskArgs {
  std::string input;
  std::string output;
  double sigma = 0.0;           // denoise: AWGN added to the input first
  double keep = 0.0;            // interpolate: synthesized mask fraction
  std::string mask_file;        // interpolate: mask from file
  std::string kernel_file;      // deblur: stencil path
  int gauss_size = 0;           // deblur: synthesized kernel
  double gauss_std = 2.0;
};

Stencil load_kernel(const TaskArgs& t) {
  if (!t.kernel_file.empty()) return read_stencil(t.kernel_file);
  if (t.gauss_size > 0) return make_gaussian_kernel(t.gauss_size, t.gauss_std);
  throw CLI::ValidationError("deblur", "need --kernel FILE or --gauss-size N");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug-and-play GGLR image restoration"};
  app.option_defaults()->take_last();
  app.require_subcommand(1);

  CommonOpts common;
  TaskArgs task;

  CLI::App* denoise = app.add_subcommand("denoise", "AWGN denoising (identity model)");
  denoise->add_option("input", task.input, "Observed image (PGM/PPM)")->required();
  denoise->add_option("output", task.output, "Restored image")->required();
  denoise->add_option("--sigma", task.sigma,
                      "Add AWGN of this level (0-255 scale) to the input first")
      ->check(CLI::NonNegativeNumber);
  add_common(denoise, common);

  CLI::App* interpolate = app.add_subcommand("interpolate", "Missing-pixel interpolation");
  interpolate->add_option("input", task.input, "Observed image")->required();
  interpolate->add_option("output", task.output, "Restored image")->required();
  interpolate->add_option("--keep", task.keep, "Synthesize a mask keeping this fraction")
      ->check(CLI::Range(0.0, 1.0));
  interpolate->add_option("--mask-file", task.mask_file, "Mask image (255 = kept)");
  add_common(interpolate, common);

  CLI::App* deblur = app.add_subcommand("deblur", "Non-blind deblurring");
  deblur->add_option("input", task.input, "Blurred image")->required();
  deblur->add_option("output", task.output, "Restored image")->required();
  deblur->add_option("--kernel", task.kernel_file, "Blur stencil file");
  deblur->add_option("--gauss-size", task.gauss_size, "Synthesized Gaussian kernel size");
  deblur->add_option("--gauss-std", task.gauss_std, "Synthesized Gaussian kernel std");
  add_common(deblur, common);

  CLI::App* degrade = app.add_subcommand("degrade", "Synthesize y = A x + n");
  double deg_awgn = 0.0, deg_mask = 0.0;
  std::string deg_blur;
  int deg_gauss_size = 0;
  double deg_gauss_std = 2.0;
  std::uint64_t deg_seed = 0;
  std::string deg_in, deg_out, deg_mask_out;
  degrade->add_option("input", deg_in, "Clean image")->required();
  degrade->add_option("output", deg_out, "Degraded image")->required();
  degrade->add_option("--awgn", deg_awgn, "AWGN level on the 0-255 scale")
      ->check(CLI::NonNegativeNumber);
  degrade->add_option("--mask", deg_mask, "Keep fraction; zeroes missing pixels")
      ->check(CLI::Range(0.0, 1.0));
  degrade->add_option("--blur", deg_blur, "Blur stencil file");
  degrade->add_option("--gauss-size", deg_gauss_size, "Synthesized Gaussian kernel size");
  degrade->add_option("--gauss-std", deg_gauss_std, "Synthesized Gaussian kernel std");
  degrade->add_option("--seed", deg_seed, "Random seed");
  degrade->add_option("--mask-out", deg_mask_out, "Mask output path (default <output>.mask.pgm)");

  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "Line GNG Laplacian diagnostics");
  int spec_n = 8;
  int spec_k = 0;
  double spec_wbar = 0.0;
  std::uint64_t spec_seed = 0;
  bool spec_normalized = false;
  spectrum_cmd->add_option("--n", spec_n, "Line length in pixels (3..64)")
      ->check(CLI::Range(3, 64));
  spectrum_cmd->add_option("--k", spec_k, "Eigenvalues to print (0 = all)")
      ->check(CLI::NonNegativeNumber);
  spectrum_cmd->add_option("--wbar", spec_wbar, "Uniform gradient-edge weight (0 = random)")
      ->check(CLI::NonNegativeNumber);
  spectrum_cmd->add_option("--seed", spec_seed, "Random seed for edge weights");
  spectrum_cmd->add_flag("--normalized", spec_normalized,
                         "Also report the random-walk constant-gradient value");

  CLI::App* tune_cmd = app.add_subcommand("tune", "Grid-tune parameters on (clean, degraded) pairs");
  std::string tune_dir, tune_out = "tuned.conf", tune_task = "denoise";
  std::vector<double> grid_mu{0.1, 0.3, 1.0, 3.0};
  std::vector<double> grid_mu_tilde{0.1, 0.3, 1.0, 3.0};
  std::vector<double> grid_rho{1.0};
  std::vector<double> grid_rho_tilde{1.0};
  std::vector<double> grid_sigma_f{1.0};
  std::vector<double> grid_sigma_x{0.1, 0.3, 1.0};
  std::vector<double> grid_sigma_a{0.1, 0.3, 1.0};
  tune_cmd->add_option("dir", tune_dir, "Directory of X.clean.pgm / X.degraded.pgm pairs")
      ->required();
  tune_cmd->add_option("--out", tune_out, "Config file to write");
  tune_cmd->add_option("--task", tune_task, "Task the pairs represent")
      ->check(CLI::IsMember({"denoise", "deblur"}));
  tune_cmd->add_option("--kernel", task.kernel_file, "Blur stencil (deblur task)");
  tune_cmd->add_option("--gauss-size", task.gauss_size, "Synthesized kernel size (deblur)");
  tune_cmd->add_option("--gauss-std", task.gauss_std, "Synthesized kernel std (deblur)");
  tune_cmd->add_option("--grid-mu", grid_mu, "Candidate mu values");
  tune_cmd->add_option("--grid-mu-tilde", grid_mu_tilde, "Candidate mu~ values");
  tune_cmd->add_option("--grid-rho", grid_rho, "Candidate rho values");
  tune_cmd->add_option("--grid-rho-tilde", grid_rho_tilde, "Candidate rho~ values");
  tune_cmd->add_option("--grid-sigma-f", grid_sigma_f, "Candidate sigma_f values");
  tune_cmd->add_option("--grid-sigma-x", grid_sigma_x, "Candidate sigma_x values");
  tune_cmd->add_option("--grid-sigma-a", grid_sigma_a, "Candidate sigma_a values");
  add_common(tune_cmd, common);

  CLI::App* selftest_cmd = app.add_subcommand("selftest", "Run the property suites");
  (void)selftest_cmd;

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::vector<const char*> ptrs;
    ptrs.push_back(argv[0]);
    for (const auto& a : args) ptrs.push_back(a.c_str());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {  // unreadable or malformed config file
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    if (app.got_subcommand(denoise)) {
      Image input = read_image(task.input);
      if (task.sigma > 0.0) {
        input.data = add_awgn(input.data, {task.sigma, common.seed});
        for (double& v : input.data) v = std::clamp(v, 0.0, 1.0);
      }
      const FormationModel m = FormationModel::identity(input.pixels());
      return run_restore(TaskKind::Denoise, m, input, task.output, common);
    }

    if (app.got_subcommand(interpolate)) {
      Image input = read_image(task.input);
      std::vector<std::uint8_t> keep;
      if (!task.mask_file.empty())
        keep = image_to_mask(read_image(task.mask_file));
      else if (task.keep > 0.0)
        keep = make_mask(input.pixels(), task.keep, common.seed);
      else
        throw CLI::ValidationError("interpolate", "need --keep FRACTION or --mask-file FILE");
      if (static_cast<int>(keep.size()) != input.pixels())
        throw CLI::ValidationError("interpolate", "mask size does not match the image");
      const FormationModel m = FormationModel::mask(std::move(keep));
      return run_restore(TaskKind::Interpolate, m, input, task.output, common);
    }

    if (app.got_subcommand(deblur)) {
      const Image input = read_image(task.input);
      const Stencil k = load_kernel(task);
      const FormationModel m = FormationModel::blur(input.height, input.width, k);
      return run_restore(TaskKind::Deblur, m, input, task.output, common);
    }

    if (app.got_subcommand(degrade)) {
      Image img = read_image(deg_in);
      if (!deg_blur.empty() || deg_gauss_size > 0) {
        const Stencil k = deg_blur.empty() ? make_gaussian_kernel(deg_gauss_size, deg_gauss_std)
                                           : read_stencil(deg_blur);
        const FormationModel m = FormationModel::blur(img.height, img.width, k);
        for (int ch = 0; ch < img.channels; ++ch) {
          std::vector<double> plane(img.pixels());
          for (int i = 0; i < img.pixels(); ++i) plane[i] = img.data[ch * img.pixels() + i];
          plane = m.apply(plane);
          for (int i = 0; i < img.pixels(); ++i) img.data[ch * img.pixels() + i] = plane[i];
        }
      }
      if (deg_mask > 0.0) {
        const auto keep = make_mask(img.pixels(), deg_mask, deg_seed);
        for (int ch = 0; ch < img.channels; ++ch)
          for (int i = 0; i < img.pixels(); ++i)
            if (!keep[i]) img.data[ch * img.pixels() + i] = 0.0;
        const std::string mask_path =
            deg_mask_out.empty() ? deg_out + ".mask.pgm" : deg_mask_out;
        write_image(mask_path, mask_to_image(keep, img.width, img.height));
      }
      if (deg_awgn > 0.0) {
        img.data = add_awgn(img.data, {deg_awgn, deg_seed});
        for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
      }
      write_image(deg_out, img);
      return 0;
    }

    if (app.got_subcommand(spectrum_cmd)) {
      Graph gbar;
      gbar.node_count = spec_n - 1;
      Rng rng(spec_seed);
      for (int i = 0; i + 2 < spec_n; ++i)
        gbar.edges.push_back(
            {i, i + 1, spec_wbar > 0.0 ? spec_wbar : rng.uniform(0.1, 2.0)});
      const SparseSym Lbar = laplacian(gbar);
      const SparseSym Lgng = gng_laplacian(Lbar, grad_op(spec_n));
      const int k = spec_k > 0 ? std::min(spec_k, spec_n) : spec_n;
      const auto pairs = spectrum(Lgng, k);
      int null_dim = 0;
      std::printf("eigenvalues:");
      for (const auto& [value, vec] : pairs) {
        std::printf(" %.6g", value);
        if (value < 1e-9) ++null_dim;
      }
      std::printf("\nnull-space dimension (threshold 1e-9): %d\n", null_dim);
      if (spec_normalized) {
        const SparseSym Lrw = random_walk_laplacian(Lbar);
        const std::vector<double> ones(Lrw.dim, 1.0);
        const auto t = Lrw.matvec(ones);
        double value = 0.0;
        for (double v : t) value += v * v;
        std::printf("constant-gradient random-walk value: %.17g\n", value);
      }
      return 0;
    }

    if (app.got_subcommand(tune_cmd)) {
      namespace fs = std::filesystem;
      std::vector<std::pair<Image, Image>> pairs;
      std::vector<fs::path> clean_files;
      for (const auto& entry : fs::directory_iterator(tune_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.find(".clean.") != std::string::npos) clean_files.push_back(entry.path());
      }
      std::sort(clean_files.begin(), clean_files.end());
      for (const auto& clean_path : clean_files) {
        std::string degraded = clean_path.string();
        const auto pos = degraded.find(".clean.");
        degraded.replace(pos, 7, ".degraded.");
        if (!fs::exists(degraded)) continue;
        pairs.emplace_back(read_image(clean_path.string()), read_image(degraded));
      }
      if (pairs.empty()) throw std::runtime_error("no (clean, degraded) pairs found in " + tune_dir);

      TaskKind kind = TaskKind::Denoise;
      FormationModel m = FormationModel::identity(pairs.front().first.pixels());
      if (tune_task == "deblur") {
        kind = TaskKind::Deblur;
        const Stencil k = load_kernel(task);
        m = FormationModel::blur(pairs.front().first.height, pairs.front().first.width, k);
      }

      SearchSpace space;
      space.mu = grid_mu;
      space.mu_tilde = grid_mu_tilde;
      space.rho = grid_rho;
      space.rho_tilde = grid_rho_tilde;
      space.sigma_f = grid_sigma_f;
      space.sigma_x = grid_sigma_x;
      space.sigma_a = grid_sigma_a;
      const TunedParams best = tune_params(pairs, kind, m, to_admm_config(common),
                                           to_restore_params(common), space);
      std::map<std::string, std::string> conf;
      auto put = [&conf](const std::string& key, double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        conf[key] = buf;
      };
      put("mu", best.mu);
      put("mu-tilde", best.mu_tilde);
      put("rho", best.rho);
      put("rho-tilde", best.rho_tilde);
      put("sigma-f", best.sigma_f);
      put("sigma-x", best.sigma_x);
      put("sigma-a", best.sigma_a);
      write_config(tune_out, conf);
      std::printf("tuned: mu=%g mu-tilde=%g rho=%g rho-tilde=%g sigma-f=%g sigma-x=%g "
                  "sigma-a=%g psnr=%.4f\n",
                  best.mu, best.mu_tilde, best.rho, best.rho_tilde, best.sigma_f,
                  best.sigma_x, best.sigma_a, best.psnr);
      return 0;
    }

    if (app.got_subcommand(selftest_cmd)) {
      return run_selftest(std::cout) == 0 ? 0 : 4;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
