#pragma once

#include <cmath>
#include <stdexcept>

#include "ctreg/volume.hpp"

namespace ctreg {

/// Rigid transform parameters: Euler rotations (radians), translation in
/// voxel units, optional uniform scale. All zeros with scale 1 is identity.
struct RigidParams {
  double rx = 0.0, ry = 0.0, rz = 0.0;
  double tx = 0.0, ty = 0.0, tz = 0.0;
  double scale = 1.0;

  void validate() const {
    if (!(scale > 0.0))
      throw std::invalid_argument("RigidParams: scale must be > 0");
    if (!std::isfinite(rx) || !std::isfinite(ry) || !std::isfinite(rz) ||
        !std::isfinite(tx) || !std::isfinite(ty) || !std::isfinite(tz))
      throw std::invalid_argument("RigidParams: parameters must be finite");
  }
};

/// 3x3 linear block plus offset: y = W x + t.
struct AffineMap {
  double w[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  double t[3] = {0, 0, 0};

  Vec3 apply(const Vec3& p) const {
    return {w[0][0] * p.x + w[0][1] * p.y + w[0][2] * p.z + t[0],
            w[1][0] * p.x + w[1][1] * p.y + w[1][2] * p.z + t[1],
            w[2][0] * p.x + w[2][1] * p.y + w[2][2] * p.z + t[2]};
  }
};

/// Rotation about `center` (Euler order Rz*Ry*Rx), uniform scale, then
/// translation: map(x) = s*R*(x + t - center) + center.
inline AffineMap build_transform(const RigidParams& p, const Vec3& center) {
  p.validate();
  const double cx = std::cos(p.rx), sx = std::sin(p.rx);
  const double cy = std::cos(p.ry), sy = std::sin(p.ry);
  const double cz = std::cos(p.rz), sz = std::sin(p.rz);

  // R = Rz * Ry * Rx
  double r[3][3];
  r[0][0] = cz * cy;
  r[0][1] = cz * sy * sx - sz * cx;
  r[0][2] = cz * sy * cx + sz * sx;
  r[1][0] = sz * cy;
  r[1][1] = sz * sy * sx + cz * cx;
  r[1][2] = sz * sy * cx - cz * sx;
  r[2][0] = -sy;
  r[2][1] = cy * sx;
  r[2][2] = cy * cx;

  AffineMap m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.w[i][j] = p.scale * r[i][j];

  const double dx = p.tx - center.x;
  const double dy = p.ty - center.y;
  const double dz = p.tz - center.z;
  m.t[0] = m.w[0][0] * dx + m.w[0][1] * dy + m.w[0][2] * dz + center.x;
  m.t[1] = m.w[1][0] * dx + m.w[1][1] * dy + m.w[1][2] * dz + center.y;
  m.t[2] = m.w[2][0] * dx + m.w[2][1] * dy + m.w[2][2] * dz + center.z;
  return m;
}

inline double determinant(const AffineMap& m) {
  return m.w[0][0] * (m.w[1][1] * m.w[2][2] - m.w[1][2] * m.w[2][1]) -
         m.w[0][1] * (m.w[1][0] * m.w[2][2] - m.w[1][2] * m.w[2][0]) +
         m.w[0][2] * (m.w[1][0] * m.w[2][1] - m.w[1][1] * m.w[2][0]);
}

inline AffineMap invert(const AffineMap& m) {
  const double det = determinant(m);
  if (std::abs(det) < 1e-12)
    throw std::invalid_argument("invert: map is not invertible");
  AffineMap inv;
  inv.w[0][0] = (m.w[1][1] * m.w[2][2] - m.w[1][2] * m.w[2][1]) / det;
  inv.w[0][1] = (m.w[0][2] * m.w[2][1] - m.w[0][1] * m.w[2][2]) / det;
  inv.w[0][2] = (m.w[0][1] * m.w[1][2] - m.w[0][2] * m.w[1][1]) / det;
  inv.w[1][0] = (m.w[1][2] * m.w[2][0] - m.w[1][0] * m.w[2][2]) / det;
  inv.w[1][1] = (m.w[0][0] * m.w[2][2] - m.w[0][2] * m.w[2][0]) / det;
  inv.w[1][2] = (m.w[0][2] * m.w[1][0] - m.w[0][0] * m.w[1][2]) / det;
  inv.w[2][0] = (m.w[1][0] * m.w[2][1] - m.w[1][1] * m.w[2][0]) / det;
  inv.w[2][1] = (m.w[0][1] * m.w[2][0] - m.w[0][0] * m.w[2][1]) / det;
  inv.w[2][2] = (m.w[0][0] * m.w[1][1] - m.w[0][1] * m.w[1][0]) / det;
  for (int i = 0; i < 3; ++i)
    inv.t[i] = -(inv.w[i][0] * m.t[0] + inv.w[i][1] * m.t[1] + inv.w[i][2] * m.t[2]);
  return inv;
}

/// compose(a, b) applies b first, then a.
inline AffineMap compose(const AffineMap& a, const AffineMap& b) {
  AffineMap out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.w[i][j] =
          a.w[i][0] * b.w[0][j] + a.w[i][1] * b.w[1][j] + a.w[i][2] * b.w[2][j];
    }
    out.t[i] = a.w[i][0] * b.t[0] + a.w[i][1] * b.t[1] + a.w[i][2] * b.t[2] + a.t[i];
  }
  return out;
}

/// Geometric center of the voxel grid, the rotation center used throughout.
inline Vec3 volume_center(const Volume3D& v) {
  return {(v.nx() - 1) / 2.0, (v.ny() - 1) / 2.0, (v.nz() - 1) / 2.0};
}

enum class Interpolation { nearest, trilinear };

constexpr int kDefaultResampleBackground = -1024;  // air, in CT units

/// Inverse warp: each output voxel p takes b's value at map^-1(p). Output
/// keeps b's dims and spacing; positions falling outside b take `background`.
/// Trilinear results round to the nearest integer.
inline Volume3D resample(const Volume3D& b, const AffineMap& map,
                         Interpolation interp,
                         int background = kDefaultResampleBackground) {
  const AffineMap inv = invert(map);
  Volume3D out(b.dims, b.spacing);
  const voxel_t bg = static_cast<voxel_t>(background);

  std::size_t idx = 0;
  for (int z = 0; z < b.nz(); ++z) {
    for (int y = 0; y < b.ny(); ++y) {
      for (int x = 0; x < b.nx(); ++x, ++idx) {
        const Vec3 src = inv.apply({static_cast<double>(x), static_cast<double>(y),
                                    static_cast<double>(z)});
        if (interp == Interpolation::nearest) {
          const int ix = static_cast<int>(std::lround(src.x));
          const int iy = static_cast<int>(std::lround(src.y));
          const int iz = static_cast<int>(std::lround(src.z));
          out.voxels[idx] = b.in_bounds(ix, iy, iz) ? b.at(ix, iy, iz) : bg;
        } else {
          // Interpolable region is the closed box of voxel centers.
          if (src.x < 0.0 || src.y < 0.0 || src.z < 0.0 || src.x > b.nx() - 1 ||
              src.y > b.ny() - 1 || src.z > b.nz() - 1) {
            out.voxels[idx] = bg;
            continue;
          }
          int x0 = static_cast<int>(std::floor(src.x));
          int y0 = static_cast<int>(std::floor(src.y));
          int z0 = static_cast<int>(std::floor(src.z));
          double fx = src.x - x0, fy = src.y - y0, fz = src.z - z0;
          if (x0 >= b.nx() - 1) { x0 = b.nx() - 1; fx = 0.0; }
          if (y0 >= b.ny() - 1) { y0 = b.ny() - 1; fy = 0.0; }
          if (z0 >= b.nz() - 1) { z0 = b.nz() - 1; fz = 0.0; }
          const int x1 = x0 + 1 < b.nx() ? x0 + 1 : x0;
          const int y1 = y0 + 1 < b.ny() ? y0 + 1 : y0;
          const int z1 = z0 + 1 < b.nz() ? z0 + 1 : z0;
          const int xs[2] = {x0, x1}, ys[2] = {y0, y1}, zs[2] = {z0, z1};
          double acc = 0.0;
          for (int cz = 0; cz <= 1; ++cz)
            for (int cy = 0; cy <= 1; ++cy)
              for (int cx = 0; cx <= 1; ++cx) {
                const double wgt = (cx ? fx : 1.0 - fx) * (cy ? fy : 1.0 - fy) *
                                   (cz ? fz : 1.0 - fz);
                if (wgt != 0.0) acc += wgt * b.at(xs[cx], ys[cy], zs[cz]);
              }
          long v = std::lround(acc);
          if (v < -32768) v = -32768;
          if (v > 32767) v = 32767;
          out.voxels[idx] = static_cast<voxel_t>(v);
        }
      }
    }
  }
  return out;
}

}  // namespace ctreg
