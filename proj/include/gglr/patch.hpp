#pragma once

#include <stdexcept>
#include <vector>

namespace gglr {

// One N-by-N pixel block, vectorized row-major: pixel (r, c) lives at
// index r * N + c of each channel vector.
struct Patch {
  int side = 0;
  int channels = 1;
  std::vector<std::vector<double>> data;  // one vector of length side^2 per channel

  Patch() = default;
  Patch(int n, int ch) : side(n), channels(ch), data(ch, std::vector<double>(static_cast<size_t>(n) * n, 0.0)) {}
  explicit Patch(int n, std::vector<double> mono) : side(n), channels(1) {
    if (static_cast<int>(mono.size()) != n * n)
      throw std::invalid_argument("Patch: data length must be side^2");
    data.push_back(std::move(mono));
  }

  int pixels() const { return side * side; }
  void validate() const {
    if (side <= 0 || channels <= 0 || static_cast<int>(data.size()) != channels)
      throw std::invalid_argument("Patch: inconsistent geometry");
    for (const auto& ch : data)
      if (static_cast<int>(ch.size()) != pixels())
        throw std::invalid_argument("Patch: data length must be side^2");
  }
};

// ITU BT.601 luma weights; single-channel input passes through.
std::vector<double> luminance(const Patch& p);

}  // namespace gglr
