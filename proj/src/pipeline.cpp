#include "gglr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gglr {

namespace {

std::vector<int> axis_origins(int dim, int size, int stride) {
  std::vector<int> o;
  for (int v = 0;; v += stride) {
    if (v + size >= dim) {
      o.push_back(dim - size);
      break;
    }
    o.push_back(v);
  }
  return o;
}

}  // namespace

std::vector<std::pair<PatchOrigin, Patch>> patchify(const Image& img, int size,
                                                    int stride) {
  if (size > img.width || size > img.height)
    throw std::invalid_argument("patchify: image smaller than patch");
  if (size < 1 || stride < 1) throw std::invalid_argument("patchify: bad window");
  const auto xs = axis_origins(img.width, size, stride);
  const auto ys = axis_origins(img.height, size, stride);
  std::vector<std::pair<PatchOrigin, Patch>> out;
  out.reserve(xs.size() * ys.size());
  for (int oy : ys) {
    for (int ox : xs) {
      Patch p(size, img.channels);
      for (int ch = 0; ch < img.channels; ++ch)
        for (int r = 0; r < size; ++r)
          for (int c = 0; c < size; ++c)
            p.data[ch][static_cast<size_t>(r) * size + c] = img.at(ch, oy + r, ox + c);
      out.emplace_back(PatchOrigin{ox, oy}, std::move(p));
    }
  }
  return out;
}

Image aggregate(const std::vector<std::pair<PatchOrigin, Patch>>& patches,
                int width, int height, int channels) {
  Image img(width, height, channels);
  // Centered accumulation: mean = first + sum(v - first) / count, so a pixel
  // whose contributions all agree reproduces the value bit-exactly.
  std::vector<double> first(img.data.size(), 0.0);
  std::vector<double> delta(img.data.size(), 0.0);
  std::vector<int> count(img.data.size(), 0);
  for (const auto& [origin, p] : patches) {
    p.validate();
    if (p.channels != channels)
      throw std::invalid_argument("aggregate: channel mismatch");
    for (int ch = 0; ch < channels; ++ch) {
      for (int r = 0; r < p.side; ++r) {
        for (int c = 0; c < p.side; ++c) {
          const int y = origin.y + r, x = origin.x + c;
          if (x < 0 || y < 0 || x >= width || y >= height)
            throw std::invalid_argument("aggregate: patch exceeds image bounds");
          const size_t idx = (static_cast<size_t>(ch) * height + y) * width + x;
          const double v = p.data[ch][static_cast<size_t>(r) * p.side + c];
          if (count[idx] == 0)
            first[idx] = v;
          else
            delta[idx] += v - first[idx];
          ++count[idx];
        }
      }
    }
  }
  for (size_t i = 0; i < img.data.size(); ++i) {
    if (count[i] == 0) throw std::invalid_argument("aggregate: uncovered pixel");
    img.data[i] = first[i] + delta[i] / count[i];
  }
  return img;
}

double psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw std::invalid_argument("psnr: dimension mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse <= 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw std::invalid_argument("ssim: dimension mismatch");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const int win = std::min({8, a.width, a.height});
  const int n = win * win;
  double total = 0.0;
  long windows = 0;
  for (int ch = 0; ch < a.channels; ++ch) {
    for (int y = 0; y + win <= a.height; ++y) {
      for (int x = 0; x + win <= a.width; ++x) {
        double ma = 0, mb = 0;
        for (int r = 0; r < win; ++r)
          for (int c = 0; c < win; ++c) {
            ma += a.at(ch, y + r, x + c);
            mb += b.at(ch, y + r, x + c);
          }
        ma /= n;
        mb /= n;
        double va = 0, vb = 0, cov = 0;
        for (int r = 0; r < win; ++r)
          for (int c = 0; c < win; ++c) {
            const double da = a.at(ch, y + r, x + c) - ma;
            const double db = b.at(ch, y + r, x + c) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= n - 1 > 0 ? n - 1 : 1;
        vb /= n - 1 > 0 ? n - 1 : 1;
        cov /= n - 1 > 0 ? n - 1 : 1;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++windows;
      }
    }
  }
  return windows ? total / windows : 1.0;
}

// --------------------------------------------------------------------------
// Restoration.
// --------------------------------------------------------------------------

namespace {

GngPrior build_patch_prior(const std::vector<double>& estimate, int side,
                           const RestoreParams& params, bool with_components) {
  const FeatureField f = compute_features(estimate, side, params.features);
  if (params.prior == PriorKind::Glr)
    return build_glr_gng_prior(estimate, side, f, params.kernel, params.mu,
                               with_components);
  PriorOptions opts;
  opts.mu = params.mu;
  opts.mu_tilde = params.mu_tilde;
  opts.normalization = params.normalization;
  opts.with_components = with_components;
  return build_prior(estimate, side, f, params.kernel, opts);
}

std::vector<double> channel_luminance(const std::vector<std::vector<double>>& chans,
                                      int side) {
  Patch p;
  p.side = side;
  p.channels = static_cast<int>(chans.size());
  p.data = chans;
  return luminance(p);
}

// Graph-learning source derived from the zero-filled observation: for mask
// models the holes are filled by Jacobi neighbor averaging first, otherwise
// the gradients at the holes are artefacts of the zero fill and every edge
// weight collapses to the floor.
std::vector<double> graph_source(const FormationModel& pm,
                                 const std::vector<double>& z0, int side) {
  if (pm.kind() != FormationKind::Mask) return z0;
  const auto& keep = pm.keep();
  std::vector<double> x = z0;
  std::vector<double> next = x;
  for (int pass = 0; pass < 60; ++pass) {
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const int i = r * side + c;
        if (keep[i]) continue;
        double sum = 0.0;
        int count = 0;
        if (r > 0) sum += x[i - side], ++count;
        if (r + 1 < side) sum += x[i + side], ++count;
        if (c > 0) sum += x[i - 1], ++count;
        if (c + 1 < side) sum += x[i + 1], ++count;
        next[i] = count ? sum / count : 0.0;
      }
    }
    std::swap(x, next);
  }
  return x;
}

}  // namespace

std::vector<std::vector<double>> solve_patch(
    const std::vector<std::vector<double>>& y_channels,
    const FormationModel& patch_model, int side, const AdmmConfig& cfg,
    const RestoreParams& params, std::vector<double>* residual_history) {
  const bool with_components = cfg.family == SolverFamily::Aux4;

  std::vector<std::vector<double>> z0(y_channels.size());
  for (size_t ch = 0; ch < y_channels.size(); ++ch)
    z0[ch] = graph_source(patch_model, patch_model.adjoint(y_channels[ch]), side);

  GngPrior prior =
      build_patch_prior(channel_luminance(z0, side), side, params, with_components);

  std::vector<AdmmSolver> solvers;
  solvers.reserve(y_channels.size());
  for (size_t ch = 0; ch < y_channels.size(); ++ch)
    solvers.emplace_back(patch_model, y_channels[ch], prior, cfg);

  if (residual_history) residual_history->clear();
  for (int k = 0; k < cfg.outer_layers; ++k) {
    double layer_resid = 0.0;
    for (auto& s : solvers) {
      s.step();
      const auto& hist = s.state().residual_history;
      if (!hist.empty()) layer_resid = std::max(layer_resid, hist.back());
    }
    if (residual_history) residual_history->push_back(layer_resid);
    if (cfg.relearn_graphs && k + 1 < cfg.outer_layers) {
      std::vector<std::vector<double>> sources(solvers.size());
      for (size_t ch = 0; ch < solvers.size(); ++ch)
        sources[ch] = solvers[ch].relearn_source();
      prior = build_patch_prior(channel_luminance(sources, side), side, params,
                                with_components);
      for (auto& s : solvers) s.set_prior(prior);
    }
  }

  std::vector<std::vector<double>> out(solvers.size());
  for (size_t ch = 0; ch < solvers.size(); ++ch) out[ch] = solvers[ch].x();
  return out;
}

std::pair<Image, RestoreReport> restore(const Image& img, TaskKind task,
                                        const FormationModel& m,
                                        const AdmmConfig& cfg,
                                        const RestoreParams& params,
                                        const Image* reference) {
  const auto t0 = std::chrono::steady_clock::now();

  int patch = params.patch_size;
  if (patch == 0) {
    patch = 36;
    if (task == TaskKind::Deblur && m.kind() == FormationKind::Blur) {
      const int radius = std::max(m.kernel().rows, m.kernel().cols) / 2;
      if (radius > 4) patch = 64;  // blur couples pixels across patch borders
    }
  }
  patch = std::min({patch, img.width, img.height});
  const int stride = params.stride > 0 ? std::min(params.stride, patch) : std::min(32, patch);

  const auto xs = axis_origins(img.width, patch, stride);
  const auto ys = axis_origins(img.height, patch, stride);
  std::vector<PatchOrigin> origins;
  for (int oy : ys)
    for (int ox : xs) origins.push_back({ox, oy});

  const int n_patches = static_cast<int>(origins.size());
  std::vector<std::pair<PatchOrigin, Patch>> results(n_patches);
  std::vector<std::vector<double>> residuals(n_patches);

  auto solve_one = [&](int idx) {
    const PatchOrigin o = origins[idx];
    const FormationModel pm =
        m.restrict_to_patch(img.width, img.height, o.x, o.y, patch);
    // Observation restricted to the window: pixel-space tasks copy the
    // window, the mask model compacts the kept pixels.
    std::vector<std::vector<double>> y_channels(img.channels);
    for (int ch = 0; ch < img.channels; ++ch) {
      std::vector<double> window(static_cast<size_t>(patch) * patch);
      for (int r = 0; r < patch; ++r)
        for (int c = 0; c < patch; ++c)
          window[static_cast<size_t>(r) * patch + c] = img.at(ch, o.y + r, o.x + c);
      if (pm.kind() == FormationKind::Mask) {
        std::vector<double> compact;
        compact.reserve(pm.output_dim());
        for (int i = 0; i < pm.input_dim(); ++i)
          if (pm.keep()[i]) compact.push_back(window[i]);
        y_channels[ch] = std::move(compact);
      } else {
        y_channels[ch] = std::move(window);
      }
    }
    const auto restored =
        solve_patch(y_channels, pm, patch, cfg, params, &residuals[idx]);
    Patch p(patch, img.channels);
    for (int ch = 0; ch < img.channels; ++ch) p.data[ch] = restored[ch];
    results[idx] = {o, std::move(p)};
  };

  int threads = params.threads > 0
                    ? params.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n_patches));
  if (threads == 1) {
    for (int i = 0; i < n_patches; ++i) solve_one(i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_patches) break;
        try {
          solve_one(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          break;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  Image out = aggregate(results, img.width, img.height, img.channels);
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);

  RestoreReport report;
  report.patch_count = n_patches;
  report.patch_residuals = std::move(residuals);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (reference) {
    report.psnr_db = psnr(out, *reference);
    report.ssim = ssim(out, *reference);
  }
  return {std::move(out), std::move(report)};
}

}  // namespace gglr
