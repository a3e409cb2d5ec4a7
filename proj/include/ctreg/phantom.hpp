#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ctreg/volume.hpp"

namespace ctreg {

struct LesionSpec {
  Index3 center;
  double radius = 0.0;  // voxel units
  int intensity = 0;
};

/// Synthetic test volume: uniform background, spherical lesions, optional
/// uniform integer jitter. A fixed seed fully determines the output.
struct PhantomSpec {
  Index3 dims{16, 16, 16};
  Vec3 spacing{1.0, 1.0, 1.0};
  int background = 0;
  std::vector<LesionSpec> lesions;
  int noise_amplitude = 0;
  std::uint32_t seed = 0;

  void validate() const {
    if (noise_amplitude < 0)
      throw std::invalid_argument("PhantomSpec: noise amplitude must be >= 0");
    for (const auto& l : lesions) {
      if (l.radius < 0.0)
        throw std::invalid_argument("PhantomSpec: lesion radius must be >= 0");
      if (l.center.x < 0 || l.center.x >= dims.x || l.center.y < 0 ||
          l.center.y >= dims.y || l.center.z < 0 || l.center.z >= dims.z)
        throw std::invalid_argument("PhantomSpec: lesion center outside dims");
    }
  }
};

namespace detail {

inline voxel_t clamp_voxel(long v) {
  if (v < -32768) return -32768;
  if (v > 32767) return 32767;
  return static_cast<voxel_t>(v);
}

}  // namespace detail

// Voxels strictly inside a lesion sphere (Euclidean distance < radius) take
// the lesion intensity; later lesions overwrite earlier ones. Noise draws
// come straight from mt19937 words so output is identical on every platform.
inline Volume3D generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  Volume3D out(spec.dims, spec.spacing,
               detail::clamp_voxel(spec.background));

  for (const auto& l : spec.lesions) {
    const double r2 = l.radius * l.radius;
    for (int z = 0; z < spec.dims.z; ++z) {
      const double dz = z - static_cast<double>(l.center.z);
      for (int y = 0; y < spec.dims.y; ++y) {
        const double dy = y - static_cast<double>(l.center.y);
        for (int x = 0; x < spec.dims.x; ++x) {
          const double dx = x - static_cast<double>(l.center.x);
          if (dx * dx + dy * dy + dz * dz < r2)
            out.at(x, y, z) = detail::clamp_voxel(l.intensity);
        }
      }
    }
  }

  if (spec.noise_amplitude > 0) {
    std::mt19937 rng(spec.seed);
    const std::uint32_t span = 2u * static_cast<std::uint32_t>(spec.noise_amplitude) + 1u;
    for (auto& v : out.voxels) {
      const long jitter =
          static_cast<long>(rng() % span) - spec.noise_amplitude;
      v = detail::clamp_voxel(static_cast<long>(v) + jitter);
    }
  }

  return out;
}

}  // namespace ctreg
