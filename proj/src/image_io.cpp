#include "gglr/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gglr {

namespace {

// Next whitespace-delimited token, skipping `#` comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  const std::string magic = next_token(in);
  int channels;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw std::runtime_error("unsupported image format (want P5/P6): " + path);
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("bad image header: " + path);
  // single whitespace byte separates header from raster
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("truncated image: " + path);
  Image img(w, h, channels);
  // raster is interleaved; storage is channel-planar
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < channels; ++ch)
        img.at(ch, y, x) =
            raw[(static_cast<size_t>(y) * w + x) * channels + ch] / static_cast<double>(maxval);
  return img;
}

void write_image(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_image: expected 1 or 3 channels");
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(static_cast<size_t>(img.width) * img.height * img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int ch = 0; ch < img.channels; ++ch) {
        const double v = std::clamp(img.at(ch, y, x), 0.0, 1.0);
        raw[(static_cast<size_t>(y) * img.width + x) * img.channels + ch] =
            static_cast<unsigned char>(std::lround(255.0 * v));
      }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("failed writing image: " + path);
}

Image mask_to_image(const std::vector<std::uint8_t>& keep, int width, int height) {
  if (static_cast<int>(keep.size()) != width * height)
    throw std::invalid_argument("mask_to_image: size mismatch");
  Image img(width, height, 1);
  for (size_t i = 0; i < keep.size(); ++i) img.data[i] = keep[i] ? 1.0 : 0.0;
  return img;
}

std::vector<std::uint8_t> image_to_mask(const Image& img) {
  if (img.channels != 1) throw std::invalid_argument("image_to_mask: mask must be grayscale");
  std::vector<std::uint8_t> keep(img.data.size());
  for (size_t i = 0; i < keep.size(); ++i) keep[i] = img.data[i] > 0.5 ? 1 : 0;
  return keep;
}

Stencil read_stencil(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stencil: " + path);
  Stencil k;
  in >> k.rows >> k.cols;
  if (!in || k.rows < 1 || k.cols < 1)
    throw std::runtime_error("bad stencil header: " + path);
  k.vals.resize(static_cast<size_t>(k.rows) * k.cols);
  for (double& v : k.vals)
    if (!(in >> v)) throw std::runtime_error("truncated stencil: " + path);
  return k;
}

void write_stencil(const std::string& path, const Stencil& k) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stencil: " + path);
  out << k.rows << " " << k.cols << "\n";
  for (int r = 0; r < k.rows; ++r) {
    for (int c = 0; c < k.cols; ++c) {
      out << k.at(r, c);
      out << (c + 1 == k.cols ? '\n' : ' ');
    }
  }
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) entries[key] = val;
  }
  return entries;
}

void write_config(const std::string& path,
                  const std::map<std::string, std::string>& entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

}  // namespace gglr
