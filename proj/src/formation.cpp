#include "gglr/formation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gglr/rng.hpp"

namespace gglr {

namespace {

// Edge-inclusive mirror: ..., 2, 1, 0 | 0, 1, 2, ... | n-1, n-1, n-2, ...
int reflect(int t, int n) {
  while (t < 0 || t >= n) {
    if (t < 0) t = -t - 1;
    if (t >= n) t = 2 * n - 1 - t;
  }
  return t;
}

}  // namespace

FormationModel FormationModel::identity(int n) {
  FormationModel m;
  m.kind_ = FormationKind::Identity;
  m.input_dim_ = m.output_dim_ = n;
  return m;
}

FormationModel FormationModel::mask(std::vector<std::uint8_t> keep) {
  FormationModel m;
  m.kind_ = FormationKind::Mask;
  m.input_dim_ = static_cast<int>(keep.size());
  m.output_dim_ = 0;
  for (std::uint8_t k : keep) m.output_dim_ += k ? 1 : 0;
  m.keep_ = std::move(keep);
  return m;
}

FormationModel FormationModel::blur(int rows, int cols, Stencil kernel) {
  if (kernel.rows < 1 || kernel.cols < 1 ||
      static_cast<int>(kernel.vals.size()) != kernel.rows * kernel.cols)
    throw std::invalid_argument("FormationModel::blur: malformed stencil");
  if (kernel.rows > rows || kernel.cols > cols)
    throw std::invalid_argument("FormationModel::blur: kernel larger than patch");
  FormationModel m;
  m.kind_ = FormationKind::Blur;
  m.input_dim_ = m.output_dim_ = rows * cols;
  m.kernel_ = std::move(kernel);
  m.grid_rows_ = rows;
  m.grid_cols_ = cols;
  return m;
}

std::vector<double> FormationModel::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim_)
    throw std::invalid_argument("FormationModel::apply: dimension mismatch");
  switch (kind_) {
    case FormationKind::Identity:
      return {x.begin(), x.end()};
    case FormationKind::Mask: {
      std::vector<double> y;
      y.reserve(output_dim_);
      for (int i = 0; i < input_dim_; ++i)
        if (keep_[i]) y.push_back(x[i]);
      return y;
    }
    case FormationKind::Blur: {
      std::vector<double> y(input_dim_, 0.0);
      const int cr = kernel_.rows / 2, cc = kernel_.cols / 2;
      for (int r = 0; r < grid_rows_; ++r) {
        for (int c = 0; c < grid_cols_; ++c) {
          double s = 0.0;
          for (int a = 0; a < kernel_.rows; ++a) {
            const int sr = reflect(r + cr - a, grid_rows_);
            for (int b = 0; b < kernel_.cols; ++b) {
              const int sc = reflect(c + cc - b, grid_cols_);
              s += kernel_.at(a, b) * x[static_cast<size_t>(sr) * grid_cols_ + sc];
            }
          }
          y[static_cast<size_t>(r) * grid_cols_ + c] = s;
        }
      }
      return y;
    }
  }
  return {};
}

std::vector<double> FormationModel::adjoint(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != output_dim_)
    throw std::invalid_argument("FormationModel::adjoint: dimension mismatch");
  switch (kind_) {
    case FormationKind::Identity:
      return {y.begin(), y.end()};
    case FormationKind::Mask: {
      std::vector<double> x(input_dim_, 0.0);
      int j = 0;
      for (int i = 0; i < input_dim_; ++i)
        if (keep_[i]) x[i] = y[j++];
      return x;
    }
    case FormationKind::Blur: {
      // Exact transpose of apply: scatter each output tap back to the
      // reflected source pixel.
      std::vector<double> x(input_dim_, 0.0);
      const int cr = kernel_.rows / 2, cc = kernel_.cols / 2;
      for (int r = 0; r < grid_rows_; ++r) {
        for (int c = 0; c < grid_cols_; ++c) {
          const double v = y[static_cast<size_t>(r) * grid_cols_ + c];
          for (int a = 0; a < kernel_.rows; ++a) {
            const int sr = reflect(r + cr - a, grid_rows_);
            for (int b = 0; b < kernel_.cols; ++b) {
              const int sc = reflect(c + cc - b, grid_cols_);
              x[static_cast<size_t>(sr) * grid_cols_ + sc] += kernel_.at(a, b) * v;
            }
          }
        }
      }
      return x;
    }
  }
  return {};
}

std::vector<double> FormationModel::gram_apply(std::span<const double> x) const {
  switch (kind_) {
    case FormationKind::Identity:
      return {x.begin(), x.end()};
    case FormationKind::Mask: {
      if (static_cast<int>(x.size()) != input_dim_)
        throw std::invalid_argument("FormationModel::gram_apply: dimension mismatch");
      std::vector<double> y(x.begin(), x.end());
      for (int i = 0; i < input_dim_; ++i)
        if (!keep_[i]) y[i] = 0.0;
      return y;
    }
    case FormationKind::Blur:
      return adjoint(apply(x));
  }
  return {};
}

FormationModel FormationModel::restrict_to_patch(int img_w, int img_h, int ox,
                                                 int oy, int patch) const {
  if (ox < 0 || oy < 0 || ox + patch > img_w || oy + patch > img_h)
    throw std::invalid_argument("restrict_to_patch: window out of bounds");
  switch (kind_) {
    case FormationKind::Identity:
      return identity(patch * patch);
    case FormationKind::Mask: {
      std::vector<std::uint8_t> sub(static_cast<size_t>(patch) * patch);
      for (int r = 0; r < patch; ++r)
        for (int c = 0; c < patch; ++c)
          sub[static_cast<size_t>(r) * patch + c] =
              keep_[static_cast<size_t>(oy + r) * img_w + (ox + c)];
      return mask(std::move(sub));
    }
    case FormationKind::Blur:
      return blur(patch, patch, kernel_);
  }
  return identity(patch * patch);
}

std::vector<std::uint8_t> make_mask(int n2, double keep_fraction, std::uint64_t seed) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
    throw std::invalid_argument("make_mask: keep fraction must lie in (0, 1]");
  const int ones = static_cast<int>(std::llround(keep_fraction * n2));
  std::vector<int> idx(n2);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::vector<std::uint8_t> keep(n2, 0);
  for (int i = 0; i < ones; ++i) {
    const int j = i + static_cast<int>(rng.integer(static_cast<std::uint64_t>(n2 - i)));
    std::swap(idx[i], idx[j]);
    keep[idx[i]] = 1;
  }
  return keep;
}

std::vector<double> add_awgn(std::span<const double> x, const NoiseSpec& spec) {
  if (spec.sigma < 0.0) throw std::invalid_argument("add_awgn: sigma must be nonnegative");
  std::vector<double> y(x.begin(), x.end());
  if (spec.sigma == 0.0) return y;
  Rng rng(spec.seed);
  const double s = spec.sigma / 255.0;
  for (double& v : y) v += s * rng.normal();
  return y;
}

Stencil make_gaussian_kernel(int size, double std) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("make_gaussian_kernel: size must be odd and positive");
  Stencil k;
  k.rows = k.cols = size;
  k.vals.assign(static_cast<size_t>(size) * size, 0.0);
  if (size == 1) {
    k.vals[0] = 1.0;
    return k;
  }
  if (!(std > 0.0)) throw std::invalid_argument("make_gaussian_kernel: std must be positive");
  const int c = size / 2;
  double total = 0.0;
  for (int r = 0; r < size; ++r) {
    for (int q = 0; q < size; ++q) {
      const double d2 = static_cast<double>((r - c) * (r - c) + (q - c) * (q - c));
      const double v = std::exp(-d2 / (2.0 * std * std));
      k.vals[static_cast<size_t>(r) * size + q] = v;
      total += v;
    }
  }
  for (double& v : k.vals) v /= total;
  return k;
}

}  // namespace gglr
