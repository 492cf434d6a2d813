#pragma once

#include <span>
#include <vector>

#include "gglr/patch.hpp"

namespace gglr {

// Per-pixel feature field, one D-vector per pixel in patch scan order.
// Gradient nodes inherit the feature of their left/top pixel.
struct FeatureField {
  int side = 0;
  int dim = 0;
  std::vector<double> data;  // side^2 rows of `dim` entries

  std::span<const double> feature(int pixel) const {
    return {data.data() + static_cast<size_t>(pixel) * dim, static_cast<size_t>(dim)};
  }
};

// Component scales of the fixed feature map. The map is
//   f_i = (r/N, c/N, luminance_i, |grad|_i)
// with each component multiplied by its weight; a hand-crafted stand-in for
// a learned feature extractor in the bilateral-filter tradition.
struct FeatureConfig {
  double spatial_weight = 1.0;
  double luminance_weight = 1.0;
  double gradient_weight = 1.0;
};

FeatureField compute_features(const Patch& x_est, const FeatureConfig& cfg = {});

// Single-channel convenience overload.
FeatureField compute_features(const std::vector<double>& x_est, int side,
                              const FeatureConfig& cfg = {});

}  // namespace gglr
