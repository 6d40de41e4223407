#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace smart_track {

/// Row-major metric depth frame. NaN or 0 marks a pixel with no return.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;
  double stamp = 0.0;

  static constexpr float kInvalid = std::numeric_limits<float>::quiet_NaN();
  static constexpr float kMaxDepth = 100.0F;

  DepthImage() = default;
  DepthImage(int w, int h, double t = 0.0, float fill = kInvalid)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill), stamp(t) {}

  static bool is_valid(float depth) { return depth > 0.0F && depth <= kMaxDepth; }

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }

  float at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }

  std::size_t valid_count() const;
};

/// Binary 16-bit PGM (P5, maxval 65535, big-endian), depth in millimetres,
/// 0 = invalid. Depths that do not fit in 16 bits are written as 0.
void write_pgm(std::ostream& out, const DepthImage& img);
void write_pgm(const std::string& path, const DepthImage& img);
DepthImage read_pgm(std::istream& in);
DepthImage read_pgm(const std::string& path);

/// Millimetre quantization applied by the PGM codec.
std::uint16_t depth_to_mm(float depth);

}  // namespace smart_track
