#pragma once

#include <algorithm>
#include <stdexcept>

#include "ctreg/similarity.hpp"
#include "ctreg/volume.hpp"

// Brute-force reference for the similarity kernels: every candidate size and
// every candidate anchor is visited, nothing is skipped. Kept deliberately
// separate from similarity.hpp's search loops; only the parameter/result
// types are shared. The reductions use the same expressions in the same
// order as the fast kernels so agreement is exact, not approximate.

namespace ctreg {

inline int largest_match_2d_oracle(const Image2D& a, Index3 pa, const Image2D& b,
                                   const SimilarityParams& params) {
  params.validate();
  if (a.empty()) throw std::invalid_argument("largest_match_2d_oracle: empty image");
  if (pa.x < 0 || pa.y < 0 || pa.x >= a.nx || pa.y >= a.ny)
    throw std::invalid_argument("largest_match_2d_oracle: anchor out of bounds");

  int fit = std::min(a.nx - pa.x, a.ny - pa.y);
  if (params.max_patch) fit = std::min(fit, *params.max_patch);

  int best = 0;
  for (int k = 1; k <= fit; ++k) {
    for (int qy = 0; qy + k <= b.ny; ++qy) {
      for (int qx = 0; qx + k <= b.nx; ++qx) {
        if (params.neighborhood_radius) {
          const int r = *params.neighborhood_radius;
          if (std::abs(qx - pa.x) > r || std::abs(qy - pa.y) > r) continue;
        }
        bool equal = true;
        for (int oy = 0; oy < k && equal; oy += params.intervals.y)
          for (int ox = 0; ox < k && equal; ox += params.intervals.x)
            if (a.at(pa.x + ox, pa.y + oy) != b.at(qx + ox, qy + oy))
              equal = false;
        if (equal && k > best) best = k;
      }
    }
  }
  return best;
}

inline SimilarityValue patch_similarity_2d_oracle(const Image2D& a, const Image2D& b,
                                                  const SimilarityParams& params) {
  params.validate();
  if (a.empty() || b.empty())
    throw std::invalid_argument("patch_similarity_2d_oracle: empty image");

  double raw_sum = 0.0;
  double norm_sum = 0.0;
  long long anchors = 0;
  for (int y = 0; y < a.ny; y += params.anchor_stride)
    for (int x = 0; x < a.nx; x += params.anchor_stride) {
      const int k = largest_match_2d_oracle(a, {x, y, 0}, b, params);
      int cap = std::min(a.nx - x, a.ny - y);
      if (params.max_patch) cap = std::min(cap, *params.max_patch);
      raw_sum += static_cast<double>(k) * k;
      norm_sum += (static_cast<double>(k) * k) / (static_cast<double>(cap) * cap);
      ++anchors;
    }
  return {norm_sum / anchors, raw_sum / anchors, anchors};
}

inline int largest_match_3d_oracle(const Volume3D& c1, Index3 p, const Volume3D& c2,
                                   const SimilarityParams& params) {
  params.validate();
  if (!c1.in_bounds(p.x, p.y, p.z))
    throw std::invalid_argument("largest_match_3d_oracle: anchor out of bounds");

  int fit = std::min({c1.nx() - p.x, c1.ny() - p.y, c1.nz() - p.z});
  if (params.max_patch) fit = std::min(fit, *params.max_patch);

  int best = 0;
  for (int k = 1; k <= fit; ++k) {
    for (int qz = 0; qz + k <= c2.nz(); ++qz) {
      for (int qy = 0; qy + k <= c2.ny(); ++qy) {
        for (int qx = 0; qx + k <= c2.nx(); ++qx) {
          if (params.neighborhood_radius) {
            const int r = *params.neighborhood_radius;
            if (std::abs(qx - p.x) > r || std::abs(qy - p.y) > r ||
                std::abs(qz - p.z) > r)
              continue;
          }
          bool equal = true;
          for (int oz = 0; oz < k && equal; oz += params.intervals.z)
            for (int oy = 0; oy < k && equal; oy += params.intervals.y)
              for (int ox = 0; ox < k && equal; ox += params.intervals.x)
                if (c1.at(p.x + ox, p.y + oy, p.z + oz) !=
                    c2.at(qx + ox, qy + oy, qz + oz))
                  equal = false;
          if (equal && k > best) best = k;
        }
      }
    }
  }
  return best;
}

inline SimilarityValue patch_similarity_3d_oracle(const Volume3D& c1,
                                                  const Volume3D& c2,
                                                  const SimilarityParams& params) {
  params.validate();
  if (c1.size() == 0 || c2.size() == 0)
    throw std::invalid_argument("patch_similarity_3d_oracle: empty volume");

  double raw_sum = 0.0;
  double norm_sum = 0.0;
  long long anchors = 0;
  for (int z = 0; z < c1.nz(); z += params.anchor_stride)
    for (int y = 0; y < c1.ny(); y += params.anchor_stride)
      for (int x = 0; x < c1.nx(); x += params.anchor_stride) {
        const int k = largest_match_3d_oracle(c1, {x, y, z}, c2, params);
        int cap = std::min({c1.nx() - x, c1.ny() - y, c1.nz() - z});
        if (params.max_patch) cap = std::min(cap, *params.max_patch);
        raw_sum += static_cast<double>(k) * k * k;
        norm_sum +=
            (static_cast<double>(k) * k * k) / (static_cast<double>(cap) * cap * cap);
        ++anchors;
      }
  return {norm_sum / anchors, raw_sum / anchors, anchors};
}

}  // namespace ctreg
