#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctreg/volume.hpp"
#include "ctreg/volume_io.hpp"

namespace ctreg {

/// Signed per-voxel difference between two aligned volumes, on the original
/// (un-quantized) intensities.
struct DifferenceVolume {
  Index3 dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<std::int32_t> values;

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(z) * dims.y * dims.x +
           static_cast<std::size_t>(y) * dims.x + static_cast<std::size_t>(x);
  }
  std::int32_t at(int x, int y, int z) const { return values[index(x, y, z)]; }
};

struct ComponentInfo {
  long long size = 0;
  Index3 bbox_min;
  Index3 bbox_max;  // inclusive
};

/// Binary change mask |D| > t with summary statistics. Components use
/// 6-connectivity and are ordered by size descending, then by bounding-box
/// origin in (z, y, x) order.
struct ChangeMap {
  Index3 dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<std::uint8_t> mask;
  int threshold = 0;
  long long changed = 0;
  long long total = 0;
  std::vector<ComponentInfo> components;
};

inline DifferenceVolume difference(const Volume3D& a, const Volume3D& b_bar) {
  if (!(a.dims == b_bar.dims))
    throw std::invalid_argument("difference: dims mismatch");
  DifferenceVolume d;
  d.dims = a.dims;
  d.spacing = a.spacing;
  d.values.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    d.values[i] = static_cast<std::int32_t>(a.voxels[i]) -
                  static_cast<std::int32_t>(b_bar.voxels[i]);
  return d;
}

namespace detail {

inline void label_components(ChangeMap& m) {
  const int nx = m.dims.x, ny = m.dims.y, nz = m.dims.z;
  std::vector<std::uint8_t> seen(m.mask.size(), 0);
  std::vector<std::size_t> stack;

  for (std::size_t start = 0; start < m.mask.size(); ++start) {
    if (!m.mask[start] || seen[start]) continue;
    ComponentInfo comp;
    comp.bbox_min = {nx, ny, nz};
    comp.bbox_max = {-1, -1, -1};
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(idx % nx);
      const int y = static_cast<int>((idx / nx) % ny);
      const int z = static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny));
      ++comp.size;
      comp.bbox_min = {std::min(comp.bbox_min.x, x), std::min(comp.bbox_min.y, y),
                       std::min(comp.bbox_min.z, z)};
      comp.bbox_max = {std::max(comp.bbox_max.x, x), std::max(comp.bbox_max.y, y),
                       std::max(comp.bbox_max.z, z)};
      const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z},
                            {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny || n[2] < 0 ||
            n[2] >= nz)
          continue;
        const std::size_t nidx = static_cast<std::size_t>(n[2]) * ny * nx +
                                 static_cast<std::size_t>(n[1]) * nx + n[0];
        if (m.mask[nidx] && !seen[nidx]) {
          seen[nidx] = 1;
          stack.push_back(nidx);
        }
      }
    }
    m.components.push_back(comp);
  }

  std::sort(m.components.begin(), m.components.end(),
            [](const ComponentInfo& a, const ComponentInfo& b) {
              if (a.size != b.size) return a.size > b.size;
              if (a.bbox_min.z != b.bbox_min.z) return a.bbox_min.z < b.bbox_min.z;
              if (a.bbox_min.y != b.bbox_min.y) return a.bbox_min.y < b.bbox_min.y;
              return a.bbox_min.x < b.bbox_min.x;
            });
}

}  // namespace detail

/// Thresholds |D| > t (strict) into a binary mask and labels its components.
inline ChangeMap threshold_change_map(const DifferenceVolume& d, int t) {
  if (t < 0) throw std::invalid_argument("threshold_change_map: t must be >= 0");
  ChangeMap m;
  m.dims = d.dims;
  m.spacing = d.spacing;
  m.threshold = t;
  m.total = static_cast<long long>(d.values.size());
  m.mask.resize(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const bool on = std::abs(static_cast<long long>(d.values[i])) > t;
    m.mask[i] = on ? 1 : 0;
    if (on) ++m.changed;
  }
  detail::label_components(m);
  return m;
}

/// Drops components smaller than min_size voxels from mask and summary.
inline ChangeMap filter_min_component_size(const ChangeMap& m, long long min_size) {
  if (min_size <= 1) return m;
  ChangeMap out = m;
  out.components.clear();
  for (const auto& comp : m.components)
    if (comp.size >= min_size) out.components.push_back(comp);
  if (out.components.size() == m.components.size()) return m;

  out.mask.assign(m.mask.size(), 0);
  out.changed = 0;
  const int nx = m.dims.x, ny = m.dims.y, nz = m.dims.z;
  std::vector<std::uint8_t> seen(m.mask.size(), 0);
  std::vector<std::size_t> stack, voxels;
  for (std::size_t start = 0; start < m.mask.size(); ++start) {
    if (!m.mask[start] || seen[start]) continue;
    voxels.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      voxels.push_back(idx);
      const int x = static_cast<int>(idx % nx);
      const int y = static_cast<int>((idx / nx) % ny);
      const int z = static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny));
      const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z},
                            {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny || n[2] < 0 ||
            n[2] >= nz)
          continue;
        const std::size_t nidx = static_cast<std::size_t>(n[2]) * ny * nx +
                                 static_cast<std::size_t>(n[1]) * nx + n[0];
        if (m.mask[nidx] && !seen[nidx]) {
          seen[nidx] = 1;
          stack.push_back(nidx);
        }
      }
    }
    if (static_cast<long long>(voxels.size()) >= min_size) {
      for (std::size_t idx : voxels) out.mask[idx] = 1;
      out.changed += static_cast<long long>(voxels.size());
    }
  }
  return out;
}

inline Volume3D mask_as_volume(const ChangeMap& m) {
  Volume3D v(m.dims, m.spacing);
  for (std::size_t i = 0; i < m.mask.size(); ++i)
    v.voxels[i] = m.mask[i] ? 1 : 0;
  return v;
}

struct ChangeReportPaths {
  std::string mask_ctv;
  std::string slice_table;
  std::string component_summary;
};

/// Emits the mask as a CTV volume (0/1 voxels), a per-slice changed-voxel
/// count table and the component summary. Text files are one record per
/// line: "z count" for slices, "id size min_x min_y min_z max_x max_y max_z"
/// for components.
inline void write_change_report(const ChangeMap& m, const ChangeReportPaths& paths) {
  save_volume(mask_as_volume(m), paths.mask_ctv);

  {
    std::ofstream f(paths.slice_table, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + paths.slice_table);
    f << "# z changed\n";
    const std::size_t slab = static_cast<std::size_t>(m.dims.x) * m.dims.y;
    for (int z = 0; z < m.dims.z; ++z) {
      long long count = 0;
      for (std::size_t i = z * slab; i < (z + 1) * slab; ++i)
        if (m.mask[i]) ++count;
      f << z << " " << count << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + paths.slice_table);
  }

  {
    std::ofstream f(paths.component_summary, std::ios::trunc);
    if (!f)
      throw std::runtime_error("cannot open for writing: " + paths.component_summary);
    f << "# id size min_x min_y min_z max_x max_y max_z\n";
    for (std::size_t i = 0; i < m.components.size(); ++i) {
      const ComponentInfo& c = m.components[i];
      f << i << " " << c.size << " " << c.bbox_min.x << " " << c.bbox_min.y << " "
        << c.bbox_min.z << " " << c.bbox_max.x << " " << c.bbox_max.y << " "
        << c.bbox_max.z << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + paths.component_summary);
  }
}

}  // namespace ctreg
