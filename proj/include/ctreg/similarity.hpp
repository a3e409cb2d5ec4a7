#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "ctreg/volume.hpp"

// Lattice-sampled largest-common-patch similarity.
//
// For every anchor position in the first image/volume (subject to stride) we
// find the largest square/cubic patch anchored there that matches somewhere
// in the second image/volume. A match only compares elements on a sampling
// lattice: offsets at integer multiples of (dx, dy, dz) per axis, strictly
// below the patch side, offset 0 always included. The similarity is the mean
// matched area/volume, plus a normalized variant where each anchor's value is
// divided by the largest patch that could fit there (so identical inputs
// score exactly 1 and the range is [0, 1]).

namespace ctreg {

struct SimilarityParams {
  Index3 intervals{1, 1, 1};                 // dx, dy, dz (dz ignored in 2D)
  std::optional<int> neighborhood_radius{};  // L-inf radius; nullopt = whole image
  int anchor_stride = 1;
  std::optional<int> max_patch{};            // cap on patch side length

  void validate() const {
    if (intervals.x < 1 || intervals.y < 1 || intervals.z < 1)
      throw std::invalid_argument("SimilarityParams: intervals must be >= 1");
    if (neighborhood_radius && *neighborhood_radius < 0)
      throw std::invalid_argument("SimilarityParams: radius must be >= 0");
    if (anchor_stride < 1)
      throw std::invalid_argument("SimilarityParams: anchor_stride must be >= 1");
    if (max_patch && *max_patch < 1)
      throw std::invalid_argument("SimilarityParams: max_patch must be >= 1");
  }
};

struct SimilarityValue {
  double normalized = 0.0;   // in [0, 1]
  double raw_average = 0.0;  // mean largest-match area (2D) or volume (3D)
  long long anchors_evaluated = 0;
};

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

/// True iff the k-by-k patches anchored at pa in a and pb in b agree at every
/// lattice offset (rows stepping dy, columns stepping dx, origin included).
inline bool patch_match_2d(const Image2D& a, Index3 pa, const Image2D& b,
                           Index3 pb, int k, int dx, int dy) {
  if (k < 1 || dx < 1 || dy < 1)
    throw std::invalid_argument("patch_match_2d: k and intervals must be >= 1");
  if (pa.x < 0 || pa.y < 0 || pa.x + k > a.nx || pa.y + k > a.ny ||
      pb.x < 0 || pb.y < 0 || pb.x + k > b.nx || pb.y + k > b.ny)
    throw std::invalid_argument("patch_match_2d: patch out of bounds");

  for (int oy = 0; oy < k; oy += dy)
    for (int ox = 0; ox < k; ox += dx)
      if (a.at(pa.x + ox, pa.y + oy) != b.at(pb.x + ox, pb.y + oy)) return false;
  return true;
}

namespace detail {

// Unchecked lattice comparison, used from the search loops below.
inline bool lattice_equal_2d(const Image2D& a, int ax, int ay, const Image2D& b,
                             int bx, int by, int k, int dx, int dy) {
  for (int oy = 0; oy < k; oy += dy) {
    const voxel_t* pa = a.pixels.data() + static_cast<std::size_t>(ay + oy) * a.nx + ax;
    const voxel_t* pb = b.pixels.data() + static_cast<std::size_t>(by + oy) * b.nx + bx;
    for (int ox = 0; ox < k; ox += dx)
      if (pa[ox] != pb[ox]) return false;
  }
  return true;
}

inline int patch_cap_2d(const Image2D& a, Index3 pa, const SimilarityParams& p) {
  int cap = std::min(a.nx - pa.x, a.ny - pa.y);
  if (p.max_patch) cap = std::min(cap, *p.max_patch);
  return cap;
}

}  // namespace detail

/// Side length of the largest patch anchored at pa in a that matches inside b
/// (whole image, or within the neighborhood window when a radius is set).
/// Sizes are tried decreasing from the largest fit, stopping at the first
/// match; candidate anchors scan in (y, x) order. Returns 0 when even a
/// single element has no match. The matched anchor is reported through
/// `where` when given.
inline int largest_match_2d(const Image2D& a, Index3 pa, const Image2D& b,
                            const SimilarityParams& params,
                            Index3* where = nullptr) {
  params.validate();
  if (a.empty()) throw std::invalid_argument("largest_match_2d: empty image");
  if (pa.x < 0 || pa.y < 0 || pa.x >= a.nx || pa.y >= a.ny)
    throw std::invalid_argument("largest_match_2d: anchor out of bounds");

  const int dx = params.intervals.x;
  const int dy = params.intervals.y;

  for (int k = detail::patch_cap_2d(a, pa, params); k >= 1; --k) {
    int qx0 = 0, qx1 = b.nx - k, qy0 = 0, qy1 = b.ny - k;
    if (params.neighborhood_radius) {
      const int r = *params.neighborhood_radius;
      qx0 = std::max(qx0, pa.x - r);
      qx1 = std::min(qx1, pa.x + r);
      qy0 = std::max(qy0, pa.y - r);
      qy1 = std::min(qy1, pa.y + r);
    }
    for (int qy = qy0; qy <= qy1; ++qy)
      for (int qx = qx0; qx <= qx1; ++qx)
        if (detail::lattice_equal_2d(a, pa.x, pa.y, b, qx, qy, k, dx, dy)) {
          if (where) *where = {qx, qy, 0};
          return k;
        }
  }
  return 0;
}

/// Mean largest-match area over anchors of a (stepping by anchor_stride per
/// axis), with the normalized variant dividing each anchor's area by the
/// largest area that fits there. Asymmetric in (a, b) by construction.
inline SimilarityValue patch_similarity_2d(const Image2D& a, const Image2D& b,
                                           const SimilarityParams& params) {
  params.validate();
  if (a.empty() || b.empty())
    throw std::invalid_argument("patch_similarity_2d: empty image");

  double raw_sum = 0.0;
  double norm_sum = 0.0;
  long long anchors = 0;
  for (int y = 0; y < a.ny; y += params.anchor_stride)
    for (int x = 0; x < a.nx; x += params.anchor_stride) {
      const int k = largest_match_2d(a, {x, y, 0}, b, params);
      const int cap = detail::patch_cap_2d(a, {x, y, 0}, params);
      raw_sum += static_cast<double>(k) * k;
      norm_sum += (static_cast<double>(k) * k) / (static_cast<double>(cap) * cap);
      ++anchors;
    }
  return {norm_sum / anchors, raw_sum / anchors, anchors};
}

// ---------------------------------------------------------------------------
// 3D
// ---------------------------------------------------------------------------

/// 3D analogue of patch_match_2d: k-cubes compared on the (dx, dy, dz) lattice.
inline bool patch_match_3d(const Volume3D& a, Index3 pa, const Volume3D& b,
                           Index3 pb, int k, Index3 intervals) {
  if (k < 1 || intervals.x < 1 || intervals.y < 1 || intervals.z < 1)
    throw std::invalid_argument("patch_match_3d: k and intervals must be >= 1");
  if (pa.x < 0 || pa.y < 0 || pa.z < 0 || pa.x + k > a.nx() ||
      pa.y + k > a.ny() || pa.z + k > a.nz() || pb.x < 0 || pb.y < 0 ||
      pb.z < 0 || pb.x + k > b.nx() || pb.y + k > b.ny() || pb.z + k > b.nz())
    throw std::invalid_argument("patch_match_3d: cube out of bounds");

  for (int oz = 0; oz < k; oz += intervals.z)
    for (int oy = 0; oy < k; oy += intervals.y)
      for (int ox = 0; ox < k; ox += intervals.x)
        if (a.at(pa.x + ox, pa.y + oy, pa.z + oz) !=
            b.at(pb.x + ox, pb.y + oy, pb.z + oz))
          return false;
  return true;
}

namespace detail {

inline bool lattice_equal_3d(const Volume3D& a, Index3 pa, const Volume3D& b,
                             Index3 pb, int k, Index3 d) {
  const voxel_t* base_a = a.voxels.data();
  const voxel_t* base_b = b.voxels.data();
  const std::size_t ax_row = a.nx(), ax_slab = static_cast<std::size_t>(a.nx()) * a.ny();
  const std::size_t bx_row = b.nx(), bx_slab = static_cast<std::size_t>(b.nx()) * b.ny();
  for (int oz = 0; oz < k; oz += d.z) {
    const voxel_t* sa = base_a + (pa.z + oz) * ax_slab + pa.y * ax_row + pa.x;
    const voxel_t* sb = base_b + (pb.z + oz) * bx_slab + pb.y * bx_row + pb.x;
    for (int oy = 0; oy < k; oy += d.y) {
      const voxel_t* ra = sa + static_cast<std::size_t>(oy) * ax_row;
      const voxel_t* rb = sb + static_cast<std::size_t>(oy) * bx_row;
      for (int ox = 0; ox < k; ox += d.x)
        if (ra[ox] != rb[ox]) return false;
    }
  }
  return true;
}

inline int patch_cap_3d(const Volume3D& a, Index3 pa, const SimilarityParams& p) {
  int cap = std::min({a.nx() - pa.x, a.ny() - pa.y, a.nz() - pa.z});
  if (p.max_patch) cap = std::min(cap, *p.max_patch);
  return cap;
}

}  // namespace detail

/// Largest k whose k-cube at p in c1 lattice-matches a k-cube anchored at
/// some q in c2 with |q - p|_inf <= radius (whole volume when unbounded).
/// Sizes decrease from the largest fit with early exit on the first match;
/// candidates scan in (z, y, x) order, so `where` reports the first matching
/// anchor at the winning size.
inline int largest_match_3d(const Volume3D& c1, Index3 p, const Volume3D& c2,
                            const SimilarityParams& params,
                            Index3* where = nullptr) {
  params.validate();
  if (!c1.in_bounds(p.x, p.y, p.z))
    throw std::invalid_argument("largest_match_3d: anchor out of bounds");

  for (int k = detail::patch_cap_3d(c1, p, params); k >= 1; --k) {
    int qx0 = 0, qx1 = c2.nx() - k;
    int qy0 = 0, qy1 = c2.ny() - k;
    int qz0 = 0, qz1 = c2.nz() - k;
    if (params.neighborhood_radius) {
      const int r = *params.neighborhood_radius;
      qx0 = std::max(qx0, p.x - r);
      qx1 = std::min(qx1, p.x + r);
      qy0 = std::max(qy0, p.y - r);
      qy1 = std::min(qy1, p.y + r);
      qz0 = std::max(qz0, p.z - r);
      qz1 = std::min(qz1, p.z + r);
    }
    for (int qz = qz0; qz <= qz1; ++qz)
      for (int qy = qy0; qy <= qy1; ++qy)
        for (int qx = qx0; qx <= qx1; ++qx)
          if (detail::lattice_equal_3d(c1, p, c2, {qx, qy, qz}, k,
                                       params.intervals)) {
            if (where) *where = {qx, qy, qz};
            return k;
          }
  }
  return 0;
}

/// Mean largest-match volume over anchors of c1 (stride per axis), normalized
/// per anchor by the largest cube that fits there. Identical volumes score
/// exactly 1; inputs with no common level score 0. Inputs must already be
/// quantized to a common level set for equality to be meaningful.
inline SimilarityValue patch_similarity_3d(const Volume3D& c1, const Volume3D& c2,
                                           const SimilarityParams& params) {
  params.validate();
  if (c1.size() == 0 || c2.size() == 0)
    throw std::invalid_argument("patch_similarity_3d: empty volume");

  double raw_sum = 0.0;
  double norm_sum = 0.0;
  long long anchors = 0;
  for (int z = 0; z < c1.nz(); z += params.anchor_stride)
    for (int y = 0; y < c1.ny(); y += params.anchor_stride)
      for (int x = 0; x < c1.nx(); x += params.anchor_stride) {
        const int k = largest_match_3d(c1, {x, y, z}, c2, params);
        const int cap = detail::patch_cap_3d(c1, {x, y, z}, params);
        raw_sum += static_cast<double>(k) * k * k;
        norm_sum +=
            (static_cast<double>(k) * k * k) / (static_cast<double>(cap) * cap * cap);
        ++anchors;
      }
  return {norm_sum / anchors, raw_sum / anchors, anchors};
}

}  // namespace ctreg
