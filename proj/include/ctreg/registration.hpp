#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctreg/parallel.hpp"
#include "ctreg/similarity.hpp"
#include "ctreg/transform.hpp"
#include "ctreg/volume.hpp"

namespace ctreg {

/// Deterministic coarse-to-fine grid search specification. Every bound is
/// symmetric about the identity (0 for rotations/translations, 1 for scale),
/// so the identity transform is always feasible. A scale_range of 0 keeps
/// scale fixed at 1; a translation/rotation range of 0 pins that axis.
struct SearchSpec {
  std::array<double, 3> translation_range{15.0, 15.0, 15.0};  // voxels
  std::array<double, 3> translation_step{3.0, 3.0, 3.0};
  std::array<double, 3> rotation_range{0.2, 0.2, 0.2};  // radians
  std::array<double, 3> rotation_step{0.05, 0.05, 0.05};
  double scale_range = 0.0;
  double scale_step = 0.02;
  int refinement_levels = 3;  // successive step-halvings around the incumbent
  int pyramid_levels = 0;     // 2x mean-pooled downsamplings (0 = full res only)
  SimilarityParams similarity = default_search_similarity();
  QuantizationSpec quantization{};
  // Fill for voxels mapped outside the target during candidate evaluation.
  // Match it to the data background (air for real CT) so the fill does not
  // penalize large translations by itself.
  int resample_background = kDefaultResampleBackground;

  // Restricted-neighborhood settings keep the default search tractable on
  // real volume sizes; the bare SimilarityParams defaults stay exhaustive.
  static SimilarityParams default_search_similarity() {
    SimilarityParams p;
    p.intervals = {2, 2, 2};
    p.neighborhood_radius = 2;
    p.anchor_stride = 2;
    p.max_patch = 8;
    return p;
  }

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (translation_range[i] < 0.0 || rotation_range[i] < 0.0)
        throw std::invalid_argument("SearchSpec: ranges must be >= 0");
      if (!(translation_step[i] > 0.0) || !(rotation_step[i] > 0.0))
        throw std::invalid_argument("SearchSpec: steps must be > 0 (empty grid)");
    }
    if (scale_range < 0.0)
      throw std::invalid_argument("SearchSpec: scale_range must be >= 0");
    if (!(scale_step > 0.0))
      throw std::invalid_argument("SearchSpec: scale_step must be > 0 (empty grid)");
    if (refinement_levels < 0)
      throw std::invalid_argument("SearchSpec: refinement_levels must be >= 0");
    if (pyramid_levels < 0)
      throw std::invalid_argument("SearchSpec: pyramid_levels must be >= 0");
    similarity.validate();
    quantization.validate();
  }
};

struct TraceEntry {
  RigidParams params;
  double similarity = 0.0;
  int pyramid_level = 0;  // 0 = full resolution
  int round = 0;          // 0 = coarse grid, then one per refinement
};

struct RegistrationResult {
  RigidParams best_params;
  SimilarityValue best_similarity;
  long long evaluations = 0;
  std::vector<TraceEntry> trace;
};

/// Similarity of a against b moved by `params` (Eq.-style inner evaluation):
/// resample with nearest interpolation, quantize both with the same spec,
/// then the 3D patch similarity. Pure and deterministic.
inline double evaluate_candidate(const Volume3D& a, const Volume3D& b,
                                 const QuantizationSpec& q,
                                 const RigidParams& params,
                                 const SimilarityParams& sim,
                                 int background = kDefaultResampleBackground) {
  q.validate();
  params.validate();
  const AffineMap map = build_transform(params, volume_center(b));
  const Volume3D moved = resample(b, map, Interpolation::nearest, background);
  return patch_similarity_3d(quantize(a, q), quantize(moved, q), sim).normalized;
}

/// 2x2x2 mean pooling (blocks clipped at the upper faces); values round to
/// the nearest integer, spacing grows by the true size ratio per axis.
inline Volume3D downsample_mean_2x(const Volume3D& v) {
  const Index3 od{std::max(1, v.nx() / 2), std::max(1, v.ny() / 2),
                  std::max(1, v.nz() / 2)};
  const Vec3 os{v.spacing.x * v.nx() / od.x, v.spacing.y * v.ny() / od.y,
                v.spacing.z * v.nz() / od.z};
  Volume3D out(od, os);
  for (int z = 0; z < od.z; ++z)
    for (int y = 0; y < od.y; ++y)
      for (int x = 0; x < od.x; ++x) {
        long long sum = 0;
        int cnt = 0;
        for (int sz = 2 * z; sz < std::min(2 * z + 2, v.nz()); ++sz)
          for (int sy = 2 * y; sy < std::min(2 * y + 2, v.ny()); ++sy)
            for (int sx = 2 * x; sx < std::min(2 * x + 2, v.nx()); ++sx) {
              sum += v.at(sx, sy, sz);
              ++cnt;
            }
        out.at(x, y, z) =
            static_cast<voxel_t>(std::llround(static_cast<double>(sum) / cnt));
      }
  return out;
}

namespace detail {

struct Axis {
  double center = 0.0;
  double step = 1.0;
  double range = 0.0;  // local half-range around center for this round
  double lo = 0.0;     // hard bounds for the whole level
  double hi = 0.0;
};

inline void axis_values(const Axis& ax, std::vector<double>& out) {
  out.clear();
  const int m = static_cast<int>(std::floor(ax.range / ax.step + 1e-9));
  for (int j = -m; j <= m; ++j) {
    const double v = ax.center + j * ax.step;
    if (v >= ax.lo - 1e-9 && v <= ax.hi + 1e-9) out.push_back(v);
  }
  if (out.empty()) out.push_back(ax.center);
}

inline double param_norm_sq(const RigidParams& p) {
  return p.rx * p.rx + p.ry * p.ry + p.rz * p.rz + p.tx * p.tx + p.ty * p.ty +
         p.tz * p.tz + (p.scale - 1.0) * (p.scale - 1.0);
}

inline bool params_equal(const RigidParams& a, const RigidParams& b) {
  return a.rx == b.rx && a.ry == b.ry && a.rz == b.rz && a.tx == b.tx &&
         a.ty == b.ty && a.tz == b.tz && a.scale == b.scale;
}

}  // namespace detail

/// Maximizes the 3D patch similarity between `a` and a rigid transformation
/// of `b` by deterministic grid search: a coarse pass over the bounds, then
/// refinement rounds that re-grid around the incumbent with halved steps.
/// With pyramid levels, the whole schedule runs at the coarsest scale first
/// and bounds recenter (translations doubling) at each finer scale. Inputs
/// are raw volumes; both are quantized internally with spec.quantization.
/// Ties resolve to the smallest parameter norm, then earliest evaluation.
inline RegistrationResult register_volumes(const Volume3D& a, const Volume3D& b,
                                           const SearchSpec& spec,
                                           unsigned workers = 1) {
  spec.validate();

  // Pyramid, full resolution first.
  std::vector<Volume3D> pyr_a{a}, pyr_b{b};
  for (int l = 1; l <= spec.pyramid_levels; ++l) {
    pyr_a.push_back(downsample_mean_2x(pyr_a.back()));
    pyr_b.push_back(downsample_mean_2x(pyr_b.back()));
  }

  // Quantize once per level; nearest resampling preserves levels, so moving
  // the quantized target equals quantizing the moved raw target as long as
  // the fill value is the quantized background.
  const voxel_t bg_level = spec.quantization.level_of(spec.resample_background);

  RegistrationResult result;
  RigidParams incumbent;  // identity
  SimilarityValue incumbent_value;
  double incumbent_norm = 0.0;

  for (int level = spec.pyramid_levels; level >= 0; --level) {
    const double down = static_cast<double>(1 << level);
    const Volume3D qa = quantize(pyr_a[level], spec.quantization);
    const Volume3D qb = quantize(pyr_b[level], spec.quantization);
    const Vec3 center = volume_center(qb);

    if (level < spec.pyramid_levels) {
      incumbent.tx *= 2.0;
      incumbent.ty *= 2.0;
      incumbent.tz *= 2.0;
    }
    const RigidParams level_seed = incumbent;
    bool have_best = false;  // values at different scales are not comparable

    for (int round = 0; round <= spec.refinement_levels; ++round) {
      const double shrink = static_cast<double>(1 << round);
      std::array<detail::Axis, 7> axes;
      const double seed_t[3] = {level_seed.tx, level_seed.ty, level_seed.tz};
      const double seed_r[3] = {level_seed.rx, level_seed.ry, level_seed.rz};
      const double cur_t[3] = {incumbent.tx, incumbent.ty, incumbent.tz};
      const double cur_r[3] = {incumbent.rx, incumbent.ry, incumbent.rz};
      for (int i = 0; i < 3; ++i) {
        const double range = spec.translation_range[i] / down;
        const double step = spec.translation_step[i] / down / shrink;
        axes[i] = {round == 0 ? seed_t[i] : cur_t[i], step,
                   round == 0 ? range : 2.0 * step, seed_t[i] - range,
                   seed_t[i] + range};
        const double rrange = spec.rotation_range[i];
        const double rstep = spec.rotation_step[i] / shrink;
        axes[3 + i] = {round == 0 ? seed_r[i] : cur_r[i], rstep,
                       round == 0 ? rrange : 2.0 * rstep, seed_r[i] - rrange,
                       seed_r[i] + rrange};
      }
      const double sstep = spec.scale_step / shrink;
      axes[6] = {round == 0 ? level_seed.scale : incumbent.scale, sstep,
                 round == 0 ? spec.scale_range : 2.0 * sstep,
                 level_seed.scale - spec.scale_range,
                 level_seed.scale + spec.scale_range};

      std::array<std::vector<double>, 7> values;
      for (int i = 0; i < 7; ++i) detail::axis_values(axes[i], values[i]);

      std::vector<RigidParams> candidates;
      for (double s : values[6])
        for (double rz : values[5])
          for (double ry : values[4])
            for (double rx : values[3])
              for (double tz : values[2])
                for (double ty : values[1])
                  for (double tx : values[0])
                    candidates.push_back({rx, ry, rz, tx, ty, tz, s});

      // The identity must always be a candidate at full resolution so the
      // result can never be worse than not transforming at all.
      if (level == 0 && round == 0) {
        const RigidParams identity;
        bool present = false;
        for (const auto& c : candidates)
          if (detail::params_equal(c, identity)) {
            present = true;
            break;
          }
        if (!present) candidates.push_back(identity);
      }

      std::vector<SimilarityValue> sims(candidates.size());
      parallel_for(candidates.size(), workers, [&](std::size_t i) {
        const AffineMap map = build_transform(candidates[i], center);
        const Volume3D moved =
            resample(qb, map, Interpolation::nearest, bg_level);
        sims[i] = patch_similarity_3d(qa, moved, spec.similarity);
      });

      for (std::size_t i = 0; i < candidates.size(); ++i) {
        result.trace.push_back({candidates[i], sims[i].normalized, level, round});
        const double norm = detail::param_norm_sq(candidates[i]);
        const bool better =
            !have_best || sims[i].normalized > incumbent_value.normalized ||
            (sims[i].normalized == incumbent_value.normalized &&
             norm < incumbent_norm);
        if (better) {
          have_best = true;
          incumbent = candidates[i];
          incumbent_value = sims[i];
          incumbent_norm = norm;
        }
      }
    }
  }

  result.best_params = incumbent;
  result.best_similarity = incumbent_value;
  result.evaluations = static_cast<long long>(result.trace.size());
  return result;
}

/// One row per evaluation, whitespace-separated: index, pyramid level,
/// round, the seven parameters, then the normalized similarity. The file is
/// byte-identical for identical inputs regardless of the worker count.
inline void write_trace(const RegistrationResult& r, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "# eval level round tx ty tz rx ry rz scale similarity\n";
  char buf[352];
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const TraceEntry& e = r.trace[i];
    std::snprintf(buf, sizeof(buf),
                  "%zu %d %d %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  i, e.pyramid_level, e.round, e.params.tx, e.params.ty,
                  e.params.tz, e.params.rx, e.params.ry, e.params.rz,
                  e.params.scale, e.similarity);
    f << buf;
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace ctreg
