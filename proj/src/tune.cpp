#include "gglr/tune.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gglr {

namespace {

struct Point {
  std::array<double, 7> v;  // rho, rho_tilde, mu, mu_tilde, sigma_f, sigma_x, sigma_a
  bool operator<(const Point& o) const { return v < o.v; }
};

}  // namespace

TunedParams tune_params(const std::vector<std::pair<Image, Image>>& train_pairs,
                        TaskKind task, const FormationModel& m,
                        const AdmmConfig& cfg, const RestoreParams& base,
                        const SearchSpace& space, int max_sweeps) {
  if (train_pairs.empty())
    throw std::invalid_argument("tune_params: empty training set");

  std::map<Point, double> cache;
  auto evaluate = [&](const Point& pt) {
    if (auto it = cache.find(pt); it != cache.end()) return it->second;
    AdmmConfig c = cfg;
    c.rho = pt.v[0];
    c.rho_tilde = pt.v[1];
    RestoreParams p = base;
    p.mu = pt.v[2];
    p.mu_tilde = pt.v[3];
    p.kernel.sigma_f = pt.v[4];
    p.kernel.sigma_x = pt.v[5];
    p.kernel.sigma_a = pt.v[6];
    double total = 0.0;
    for (const auto& [clean, degraded] : train_pairs) {
      auto [restored, report] = restore(degraded, task, m, c, p, &clean);
      total += report.psnr_db;
    }
    const double mean = total / static_cast<double>(train_pairs.size());
    cache.emplace(pt, mean);
    return mean;
  };

  const std::array<const std::vector<double>*, 7> grids = {
      &space.rho,     &space.rho_tilde, &space.mu,     &space.mu_tilde,
      &space.sigma_f, &space.sigma_x,   &space.sigma_a};

  // Snap the starting values onto the grids (nearest in log scale, ties to
  // the smaller value) so the search ranges over grid points only.
  auto snap = [](double current, const std::vector<double>& grid) {
    double best_v = grid.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (double g : grid) {
      const double d = (g > 0.0 && current > 0.0)
                           ? std::abs(std::log(g / current))
                           : std::abs(g - current);
      if (d < best_d - 1e-15 || (std::abs(d - best_d) <= 1e-15 && g < best_v)) {
        best_d = d;
        best_v = g;
      }
    }
    return best_v;
  };
  Point best{{cfg.rho, cfg.rho_tilde, base.mu, base.mu_tilde, base.kernel.sigma_f,
              base.kernel.sigma_x, base.kernel.sigma_a}};
  for (size_t coord = 0; coord < grids.size(); ++coord)
    best.v[coord] = snap(best.v[coord], *grids[coord]);
  double best_psnr = evaluate(best);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (size_t coord = 0; coord < grids.size(); ++coord) {
      for (double candidate : *grids[coord]) {
        Point pt = best;
        pt.v[coord] = candidate;
        const double score = evaluate(pt);
        const bool better = score > best_psnr + 1e-12;
        const bool tie_smaller =
            score >= best_psnr - 1e-12 && candidate < best.v[coord];
        if (better || tie_smaller) {
          if (pt.v[coord] != best.v[coord]) moved = true;
          best = pt;
          best_psnr = std::max(best_psnr, score);
        }
      }
    }
    if (!moved) break;
  }

  TunedParams out;
  out.rho = best.v[0];
  out.rho_tilde = best.v[1];
  out.mu = best.v[2];
  out.mu_tilde = best.v[3];
  out.sigma_f = best.v[4];
  out.sigma_x = best.v[5];
  out.sigma_a = best.v[6];
  out.psnr = best_psnr;
  return out;
}

}  // namespace gglr
