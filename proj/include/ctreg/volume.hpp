#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctreg {

using voxel_t = std::int16_t;

struct Index3 {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const Index3&, const Index3&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Dense 3D grid of signed integer intensities, voxel order x-fastest
/// (x varies first, then y, then z). Spacing is millimetres per voxel.
struct Volume3D {
  Index3 dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<voxel_t> voxels;

  Volume3D() : voxels(1, 0) {}

  Volume3D(Index3 d, Vec3 s, voxel_t fill = 0)
      : dims(d), spacing(s), voxels(checked_count(d, s), fill) {}

  Volume3D(Index3 d, Vec3 s, std::vector<voxel_t> data)
      : dims(d), spacing(s), voxels(std::move(data)) {
    if (voxels.size() != checked_count(d, s))
      throw std::invalid_argument("Volume3D: voxel count does not match dims");
  }

  int nx() const { return dims.x; }
  int ny() const { return dims.y; }
  int nz() const { return dims.z; }

  std::size_t size() const { return voxels.size(); }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(z) * dims.y * dims.x +
           static_cast<std::size_t>(y) * dims.x + static_cast<std::size_t>(x);
  }

  voxel_t at(int x, int y, int z) const { return voxels[index(x, y, z)]; }
  voxel_t& at(int x, int y, int z) { return voxels[index(x, y, z)]; }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < dims.x && y >= 0 && y < dims.y && z >= 0 && z < dims.z;
  }

  friend bool operator==(const Volume3D&, const Volume3D&) = default;

 private:
  static std::size_t checked_count(const Index3& d, const Vec3& s) {
    if (d.x < 1 || d.y < 1 || d.z < 1)
      throw std::invalid_argument("Volume3D: dims must be >= 1");
    if (!(s.x > 0.0) || !(s.y > 0.0) || !(s.z > 0.0))
      throw std::invalid_argument("Volume3D: spacing must be > 0");
    return static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y) *
           static_cast<std::size_t>(d.z);
  }
};

/// 2D matrix of intensities, row-major (index = y * nx + x).
struct Image2D {
  int nx = 0;
  int ny = 0;
  std::vector<voxel_t> pixels;

  Image2D() = default;

  Image2D(int w, int h, voxel_t fill = 0)
      : nx(w), ny(h), pixels(checked_count(w, h), fill) {}

  Image2D(int w, int h, std::vector<voxel_t> data)
      : nx(w), ny(h), pixels(std::move(data)) {
    if (pixels.size() != checked_count(w, h))
      throw std::invalid_argument("Image2D: pixel count does not match dims");
  }

  bool empty() const { return nx == 0 || ny == 0; }

  voxel_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * nx + x];
  }
  voxel_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * nx + x];
  }

  friend bool operator==(const Image2D&, const Image2D&) = default;

 private:
  static std::size_t checked_count(int w, int h) {
    if (w < 0 || h < 0) throw std::invalid_argument("Image2D: negative dims");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

/// Uniform binning of intensities into L discrete levels. Values outside
/// [min_intensity, max_intensity] are clamped before binning.
struct QuantizationSpec {
  int levels = 16;
  int min_intensity = -1024;
  int max_intensity = 3071;

  void validate() const {
    if (levels < 2)
      throw std::invalid_argument("QuantizationSpec: levels must be >= 2");
    if (min_intensity >= max_intensity)
      throw std::invalid_argument("QuantizationSpec: min must be < max");
  }

  // floor(L * (clamp(x) - min) / (max - min)), with x == max mapping to L-1.
  // All-integer arithmetic, exact.
  voxel_t level_of(int x) const {
    const std::int64_t lo = min_intensity;
    const std::int64_t hi = max_intensity;
    std::int64_t v = x;
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    std::int64_t lvl = static_cast<std::int64_t>(levels) * (v - lo) / (hi - lo);
    if (lvl == levels) lvl = levels - 1;
    return static_cast<voxel_t>(lvl);
  }
};

/// Bins every voxel into 0..L-1; dims and spacing are preserved.
inline Volume3D quantize(const Volume3D& v, const QuantizationSpec& q) {
  q.validate();
  Volume3D out(v.dims, v.spacing);
  for (std::size_t i = 0; i < v.voxels.size(); ++i)
    out.voxels[i] = q.level_of(v.voxels[i]);
  return out;
}

}  // namespace ctreg
