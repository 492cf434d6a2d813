#pragma once

#include <utility>
#include <vector>

#include "gglr/pipeline.hpp"

namespace gglr {

// Per-parameter candidate grids (typically log-spaced). Singleton grids pin
// a parameter.
struct SearchSpace {
  std::vector<double> rho{1.0};
  std::vector<double> rho_tilde{1.0};
  std::vector<double> mu{0.5};
  std::vector<double> mu_tilde{0.5};
  std::vector<double> sigma_f{1.0};
  std::vector<double> sigma_x{0.2};
  std::vector<double> sigma_a{0.2};
};

struct TunedParams {
  double rho = 1.0;
  double rho_tilde = 1.0;
  double mu = 0.5;
  double mu_tilde = 0.5;
  double sigma_f = 1.0;
  double sigma_x = 0.2;
  double sigma_a = 0.2;
  double psnr = 0.0;  // mean training PSNR at the returned point
};

// Coordinate descent over the grids, maximizing mean restored-vs-clean PSNR
// on the training pairs. Starts from the values in cfg/base (so the result
// never falls below the starting point), accepts a move only on strict
// improvement, and breaks ties toward the smaller parameter value.
// Deterministic given input order.
TunedParams tune_params(
    const std::vector<std::pair<Image, Image>>& train_pairs,  // (clean, degraded)
    TaskKind task, const FormationModel& m, const AdmmConfig& cfg,
    const RestoreParams& base, const SearchSpace& space, int max_sweeps = 3);

}  // namespace gglr
