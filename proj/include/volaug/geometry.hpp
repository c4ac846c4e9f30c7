// Copyright 2026 The volaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOLAUG_GEOMETRY_HPP
#define VOLAUG_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/intensity.hpp"
#include "volaug/parallel.hpp"
#include "volaug/random.hpp"
#include "volaug/resample.hpp"

namespace volaug {

/// Elastic control grid resolution per axis.
inline constexpr std::size_t kElasticNodes = 8;

/** Half-widths / bounds the geometric parameters are drawn from. */
struct GeomRanges {
  double translation = 20.0;  ///< voxels, symmetric
  double rotation = 0.35;     ///< radians, symmetric, per axis
  double scale_min = 0.8;
  double scale_max = 1.2;
  double elastic = 15.0;  ///< voxels, symmetric, per node and component

  /** Ranges that always produce the identity transform. */
  static constexpr GeomRanges none() { return {0.0, 0.0, 1.0, 1.0, 0.0}; }
};

using Vec3 = std::array<double, 3>;

struct GeomParams {
  Vec3 translation{0.0, 0.0, 0.0};
  Vec3 rotation{0.0, 0.0, 0.0};
  Vec3 scale{1.0, 1.0, 1.0};
  /// kElasticNodes^3 node displacements, x fastest.
  std::vector<Vec3> elastic_grid = std::vector<Vec3>(kElasticNodes * kElasticNodes * kElasticNodes, Vec3{});
};

/**
 * Draws every component uniformly from its range. Draw order: translation
 * (x, y, z), rotation, scale, then elastic nodes in linear order with three
 * components each.
 */
inline GeomParams sample_geom_params(Rng& rng, const GeomRanges& r = {}) {
  GeomParams p;
  for (auto& t : p.translation) t = rng.uniform(-r.translation, r.translation);
  for (auto& a : p.rotation) a = rng.uniform(-r.rotation, r.rotation);
  for (auto& s : p.scale) s = rng.uniform(r.scale_min, r.scale_max);
  for (auto& node : p.elastic_grid)
    for (auto& c : node) c = rng.uniform(-r.elastic, r.elastic);
  return p;
}

/** Per-voxel backward displacement: the source of voxel p is p + d(p), in voxels. */
class DisplacementField {
 public:
  DisplacementField(Dims dims, std::vector<std::array<float, 3>> d) : dims_(dims), d_(std::move(d)) {
    if (d_.size() != dims_.voxels()) throw InvalidArgument("displacement field length does not match dims");
    for (const auto& v : d_)
      for (float c : v)
        if (!std::isfinite(c)) throw DataError("displacement field contains non-finite values");
  }

  /** Field with the same displacement everywhere. */
  static DisplacementField constant(Dims dims, std::array<float, 3> v) {
    return DisplacementField(dims, std::vector<std::array<float, 3>>(dims.voxels(), v));
  }

  const Dims& dims() const { return dims_; }
  const std::array<float, 3>& operator[](std::size_t i) const { return d_[i]; }
  std::size_t size() const { return d_.size(); }

 private:
  Dims dims_;
  std::vector<std::array<float, 3>> d_;
};

namespace detail {

inline std::array<Vec3, 3> matmul(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b) {
  std::array<Vec3, 3> c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return c;
}

// Rz * Ry * Rx: the x rotation is applied first.
inline std::array<Vec3, 3> rotation_matrix(const Vec3& angles) {
  const double cx = std::cos(angles[0]), sx = std::sin(angles[0]);
  const double cy = std::cos(angles[1]), sy = std::sin(angles[1]);
  const double cz = std::cos(angles[2]), sz = std::sin(angles[2]);
  const std::array<Vec3, 3> rx{{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  const std::array<Vec3, 3> ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  const std::array<Vec3, 3> rz{{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  return matmul(rz, matmul(ry, rx));
}

}  // namespace detail

/**
 * Realizes `params` on a grid: an affine part (per-axis scale, then rotation
 * about x, y, z in that order, then translation, all about the grid center and
 * in physical units) plus the elastic node grid upsampled trilinearly. Node n
 * of an axis sits at voxel n * (dim - 1) / (kElasticNodes - 1).
 */
inline DisplacementField build_displacement_field(const GeomParams& params, Dims dims, Spacing spacing) {
  if (!dims.all_at_least(kElasticNodes))
    throw InvalidArgument("build_displacement_field: dims must be >= 8 per axis, got " + to_string(dims));
  if (params.elastic_grid.size() != kElasticNodes * kElasticNodes * kElasticNodes)
    throw InvalidArgument("build_displacement_field: elastic grid must have 8^3 nodes");

  // Physical-space linear part A = R * S, expressed in voxel units:
  // M_ij = A_ij * spacing_j / spacing_i. Only M - I is needed.
  const auto rot = detail::rotation_matrix(params.rotation);
  std::array<Vec3, 3> delta{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double a = rot[i][j] * params.scale[j];
      delta[i][j] = a * (spacing[j] / spacing[i]) - (i == j ? 1.0 : 0.0);
    }
  const Vec3 center{0.5 * static_cast<double>(dims.x - 1), 0.5 * static_cast<double>(dims.y - 1),
                    0.5 * static_cast<double>(dims.z - 1)};

  // Node coordinate lookups per axis.
  struct Tap {
    std::size_t i0;
    double t;
  };
  auto node_taps = [](std::size_t n) {
    std::vector<Tap> taps(n);
    const double step = static_cast<double>(kElasticNodes - 1) / static_cast<double>(n - 1);
    for (std::size_t p = 0; p < n; ++p) {
      const double g = static_cast<double>(p) * step;
      auto i0 = static_cast<std::size_t>(std::floor(g));
      if (i0 > kElasticNodes - 2) i0 = kElasticNodes - 2;
      taps[p] = {i0, g - static_cast<double>(i0)};
    }
    return taps;
  };
  const auto tx = node_taps(dims.x), ty = node_taps(dims.y), tz = node_taps(dims.z);
  const auto& grid = params.elastic_grid;
  auto node = [&](std::size_t i, std::size_t j, std::size_t k) -> const Vec3& {
    return grid[i + kElasticNodes * (j + kElasticNodes * k)];
  };

  std::vector<std::array<float, 3>> d(dims.voxels());
  parallel_for(dims.z, [&](std::size_t z) {
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const Vec3 rel{static_cast<double>(x) - center[0], static_cast<double>(y) - center[1],
                       static_cast<double>(z) - center[2]};
        Vec3 e{0.0, 0.0, 0.0};
        for (int dz = 0; dz < 2; ++dz) {
          const double wz = dz ? tz[z].t : 1.0 - tz[z].t;
          for (int dy = 0; dy < 2; ++dy) {
            const double wy = dy ? ty[y].t : 1.0 - ty[y].t;
            for (int dx = 0; dx < 2; ++dx) {
              const double w = (dx ? tx[x].t : 1.0 - tx[x].t) * wy * wz;
              if (w == 0.0) continue;
              const Vec3& n = node(tx[x].i0 + dx, ty[y].i0 + dy, tz[z].i0 + dz);
              for (int c = 0; c < 3; ++c) e[c] += w * n[c];
            }
          }
        }
        auto& out = d[dims.index(x, y, z)];
        for (int c = 0; c < 3; ++c) {
          const double affine = delta[c][0] * rel[0] + delta[c][1] * rel[1] + delta[c][2] * rel[2];
          out[c] = static_cast<float>(affine + params.translation[c] + e[c]);
        }
      }
  });
  return DisplacementField(dims, std::move(d));
}

namespace detail {
template <class Out, class Sample>
std::vector<Out> pull_warp(const Dims& dims, const DisplacementField& field, Sample sample) {
  std::vector<Out> out(dims.voxels());
  parallel_for(dims.z, [&](std::size_t z) {
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const std::size_t i = dims.index(x, y, z);
        const auto& v = field[i];
        out[i] = sample(static_cast<double>(x) + v[0], static_cast<double>(y) + v[1], static_cast<double>(z) + v[2]);
      }
  });
  return out;
}
}  // namespace detail

/** Backward warp with trilinear sampling; samples outside the volume read 0. */
inline Volume warp_volume(const Volume& vol, const DisplacementField& field) {
  if (vol.dims() != field.dims()) throw InvalidArgument("warp_volume: field dims do not match the volume");
  auto out = detail::pull_warp<float>(vol.dims(), field, [&](double x, double y, double z) {
    return static_cast<float>(sample_trilinear(vol, x, y, z));
  });
  return Volume(vol.dims(), vol.spacing(), std::move(out));
}

/** Backward warp with nearest-neighbour sampling; outside samples become background 0. */
inline LabelMap warp_labels(const LabelMap& labels, const DisplacementField& field) {
  if (labels.dims() != field.dims()) throw InvalidArgument("warp_labels: field dims do not match the labels");
  const Grid<std::uint16_t>& g = labels;
  auto out = detail::pull_warp<std::uint16_t>(labels.dims(), field, [&](double x, double y, double z) {
    return sample_nearest<std::uint16_t>(g, x, y, z, 0);
  });
  return LabelMap(labels.dims(), labels.spacing(), std::move(out));
}

struct JitterRanges {
  double shift = 0.2;
  double scale_ct_min = 0.8;
  double scale_ct_max = 1.2;
  double scale_mr_min = 0.6;
  double scale_mr_max = 1.4;
};

struct IntensityJitterParams {
  double shift = 0.0;
  double scale = 1.0;
};

/** Draws shift, then scale (from the modality's scale range). */
inline IntensityJitterParams sample_jitter(Rng& rng, Modality modality, const JitterRanges& r = {}) {
  IntensityJitterParams p;
  p.shift = rng.uniform(-r.shift, r.shift);
  p.scale = modality == Modality::CT ? rng.uniform(r.scale_ct_min, r.scale_ct_max)
                                     : rng.uniform(r.scale_mr_min, r.scale_mr_max);
  return p;
}

/** v * scale + shift, unclipped. */
inline Volume intensity_jitter(const Volume& vol, const IntensityJitterParams& p) {
  return map_voxels(vol, [=](float v) { return static_cast<float>(static_cast<double>(v) * p.scale + p.shift); });
}

}  // namespace volaug

#endif  // VOLAUG_GEOMETRY_HPP
