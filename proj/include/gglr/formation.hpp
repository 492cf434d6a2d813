#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gglr {

// 2-D convolution stencil, row-major.
struct Stencil {
  int rows = 0;
  int cols = 0;
  std::vector<double> vals;

  double at(int r, int c) const { return vals[static_cast<size_t>(r) * cols + c]; }
};

enum class FormationKind { Identity, Mask, Blur };

// Linear image-formation operator A in y = A x + n.
//   Identity          denoising
//   Mask(keep)        interpolation; y is the compacted observed subvector,
//                     the adjoint zero-fills
//   Blur(stencil)     non-blind deblurring; convolution with symmetric
//                     (reflective) padding, the adjoint is the exact
//                     transpose (correlation with folded borders)
// Immutable after construction; apply/adjoint are pure.
class FormationModel {
 public:
  static FormationModel identity(int n);
  static FormationModel mask(std::vector<std::uint8_t> keep);
  static FormationModel blur(int rows, int cols, Stencil kernel);

  FormationKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<std::uint8_t>& keep() const { return keep_; }
  const Stencil& kernel() const { return kernel_; }

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> adjoint(std::span<const double> y) const;
  std::vector<double> gram_apply(std::span<const double> x) const;  // A^T A x

  // Restriction of a whole-image model to one square patch window.
  FormationModel restrict_to_patch(int img_w, int img_h, int ox, int oy,
                                   int patch) const;

 private:
  FormationKind kind_ = FormationKind::Identity;
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<std::uint8_t> keep_;
  Stencil kernel_;
  int grid_rows_ = 0;
  int grid_cols_ = 0;
};

// AWGN specification. sigma is on the 8-bit (0..255) intensity scale and is
// divided by 255 when noise is added to [0,1]-scaled signals.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Binary keep vector with exactly round(keep_fraction * n2) ones, placed
// uniformly by the seeded generator.
std::vector<std::uint8_t> make_mask(int n2, double keep_fraction, std::uint64_t seed);

// y = x + n with n ~ N(0, (sigma/255)^2) i.i.d.; deterministic per seed.
std::vector<double> add_awgn(std::span<const double> x, const NoiseSpec& spec);

// Normalized separable Gaussian stencil; size must be odd.
Stencil make_gaussian_kernel(int size, double std);

}  // namespace gglr
