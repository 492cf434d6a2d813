#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gglr/formation.hpp"
#include "gglr/patch.hpp"
#include "gglr/solvers.hpp"

namespace gglr {

// Intensities live in [0,1], row-major, channel-planar. The solver works on
// unclamped values; restore() clamps only when producing its output image.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int ch)
      : width(w), height(h), channels(ch),
        data(static_cast<size_t>(w) * h * ch, 0.0) {}

  double& at(int ch, int y, int x) {
    return data[(static_cast<size_t>(ch) * height + y) * width + x];
  }
  double at(int ch, int y, int x) const {
    return data[(static_cast<size_t>(ch) * height + y) * width + x];
  }
  int pixels() const { return width * height; }
};

struct PatchOrigin {
  int x = 0;
  int y = 0;
};

// Sliding-window extraction; the final row/column windows are anchored to
// the image edge so every pixel is covered.
std::vector<std::pair<PatchOrigin, Patch>> patchify(const Image& img,
                                                    int size = 36,
                                                    int stride = 32);

// Per-pixel average of all overlapping patch values. Exact for identical
// contributions; throws on uncovered pixels.
Image aggregate(const std::vector<std::pair<PatchOrigin, Patch>>& patches,
                int width, int height, int channels);

// PSNR in dB on the [0,1] scale, capped at 99 dB for identical images.
double psnr(const Image& a, const Image& b);

// Mean SSIM over sliding 8x8 uniform windows, C1 = 0.01^2, C2 = 0.03^2.
double ssim(const Image& a, const Image& b);

enum class TaskKind { Denoise, Interpolate, Deblur };

enum class PriorKind { Gglr, Glr };

struct RestoreParams {
  KernelParams kernel;
  FeatureConfig features;
  double mu = 0.5;
  double mu_tilde = 0.5;
  Normalization normalization = Normalization::Combinatorial;
  PriorKind prior = PriorKind::Gglr;
  int patch_size = 0;  // 0 = task default (36; 64 for blur kernels wider than radius 4)
  int stride = 0;      // 0 = default 32
  int threads = 0;     // 0 = hardware concurrency
};

struct RestoreReport {
  int patch_count = 0;
  double seconds = 0.0;
  double psnr_db = -1.0;  // set when a reference is supplied
  double ssim = -1.0;
  std::vector<std::vector<double>> patch_residuals;
};

// Whole-image restoration: patchify the degraded image, per patch build
// features and prior from the observation (z^(0) = A^T y), run the selected
// solver, and average overlapping patches. Graphs are built once per patch
// from luminance and shared across channels; with graph re-learning on they
// are rebuilt each layer from the luminance of the current auxiliaries, with
// all channels advanced in lockstep.
std::pair<Image, RestoreReport> restore(const Image& img, TaskKind task,
                                        const FormationModel& m,
                                        const AdmmConfig& cfg,
                                        const RestoreParams& params,
                                        const Image* reference = nullptr);

// One multi-channel patch solve as used by restore(); exposed for tests.
// y_channels holds the per-channel observed vectors in the patch model's
// output space. Returns per-channel restored vectors.
std::vector<std::vector<double>> solve_patch(
    const std::vector<std::vector<double>>& y_channels,
    const FormationModel& patch_model, int side, const AdmmConfig& cfg,
    const RestoreParams& params, std::vector<double>* residual_history = nullptr);

}  // namespace gglr
