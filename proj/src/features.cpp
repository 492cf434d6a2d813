#include "gglr/features.hpp"

#include <cmath>

namespace gglr {

std::vector<double> luminance(const Patch& p) {
  p.validate();
  if (p.channels == 1) return p.data[0];
  if (p.channels != 3)
    throw std::invalid_argument("luminance: expected 1 or 3 channels");
  const int n2 = p.pixels();
  std::vector<double> y(n2);
  for (int i = 0; i < n2; ++i)
    y[i] = 0.299 * p.data[0][i] + 0.587 * p.data[1][i] + 0.114 * p.data[2][i];
  return y;
}

FeatureField compute_features(const std::vector<double>& x_est, int side,
                              const FeatureConfig& cfg) {
  const int n2 = side * side;
  if (static_cast<int>(x_est.size()) != n2)
    throw std::invalid_argument("compute_features: length must be side^2");
  FeatureField f;
  f.side = side;
  f.dim = 4;
  f.data.resize(static_cast<size_t>(n2) * 4);

  // Central differences with clamped indices, divided by the actual index
  // span; exact for linear signals everywhere including the border.
  auto at = [&](int r, int c) { return x_est[static_cast<size_t>(r) * side + c]; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int rl = r > 0 ? r - 1 : 0, rh = r < side - 1 ? r + 1 : side - 1;
      const int cl = c > 0 ? c - 1 : 0, ch = c < side - 1 ? c + 1 : side - 1;
      const double gy = rh > rl ? (at(rh, c) - at(rl, c)) / (rh - rl) : 0.0;
      const double gx = ch > cl ? (at(r, ch) - at(r, cl)) / (ch - cl) : 0.0;
      double* out = f.data.data() + (static_cast<size_t>(r) * side + c) * 4;
      out[0] = cfg.spatial_weight * static_cast<double>(r) / side;
      out[1] = cfg.spatial_weight * static_cast<double>(c) / side;
      out[2] = cfg.luminance_weight * at(r, c);
      out[3] = cfg.gradient_weight * std::sqrt(gx * gx + gy * gy);
    }
  }
  return f;
}

FeatureField compute_features(const Patch& x_est, const FeatureConfig& cfg) {
  return compute_features(luminance(x_est), x_est.side, cfg);
}

}  // namespace gglr
