#pragma once

#include <map>
#include <string>

#include "gglr/formation.hpp"
#include "gglr/pipeline.hpp"

namespace gglr {

// Binary PGM (P5) / PPM (P6) with maxval 255. Intensities map to [0,1] by
// /255 on read and round(255 * clamp(x, 0, 1)) on write.
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

// Mask stored as a PGM: 255 = kept pixel, 0 = missing.
Image mask_to_image(const std::vector<std::uint8_t>& keep, int width, int height);
std::vector<std::uint8_t> image_to_mask(const Image& img);

// Kernel stencil file: first line "rows cols", then row-major reals.
Stencil read_stencil(const std::string& path);
void write_stencil(const std::string& path, const Stencil& k);

// Plain `key = value` configuration lines, `#` starts a comment.
std::map<std::string, std::string> read_config(const std::string& path);
void write_config(const std::string& path,
                  const std::map<std::string, std::string>& entries);

}  // namespace gglr
