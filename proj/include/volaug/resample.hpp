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

#ifndef VOLAUG_RESAMPLE_HPP
#define VOLAUG_RESAMPLE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/parallel.hpp"

namespace volaug {

/**
 * Trilinear sample at continuous voxel coordinates. Neighbours outside the
 * grid contribute 0. At integer coordinates the stored value is returned
 * unchanged.
 */
template <class T>
double sample_trilinear(const Grid<T>& g, double x, double y, double z) {
  const Dims& d = g.dims();
  const double fx0 = std::floor(x), fy0 = std::floor(y), fz0 = std::floor(z);
  // Entirely outside the zero-padded support.
  if (fx0 < -1.0 || fy0 < -1.0 || fz0 < -1.0 || fx0 > static_cast<double>(d.x) - 1.0 ||
      fy0 > static_cast<double>(d.y) - 1.0 || fz0 > static_cast<double>(d.z) - 1.0)
    return 0.0;
  const auto x0 = static_cast<std::int64_t>(fx0);
  const auto y0 = static_cast<std::int64_t>(fy0);
  const auto z0 = static_cast<std::int64_t>(fz0);
  const double tx = x - fx0, ty = y - fy0, tz = z - fz0;
  auto inside = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    return i >= 0 && j >= 0 && k >= 0 && i < static_cast<std::int64_t>(d.x) && j < static_cast<std::int64_t>(d.y) &&
           k < static_cast<std::int64_t>(d.z);
  };
  if (tx == 0.0 && ty == 0.0 && tz == 0.0) {
    return inside(x0, y0, z0) ? static_cast<double>(g.at(x0, y0, z0)) : 0.0;
  }
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? tz : 1.0 - tz;
    if (wz == 0.0) continue;
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? ty : 1.0 - ty;
      if (wy == 0.0) continue;
      for (int dx = 0; dx < 2; ++dx) {
        const double wx = dx ? tx : 1.0 - tx;
        if (wx == 0.0) continue;
        const std::int64_t i = x0 + dx, j = y0 + dy, k = z0 + dz;
        if (inside(i, j, k)) acc += wx * wy * wz * static_cast<double>(g.at(i, j, k));
      }
    }
  }
  return acc;
}

/** Nearest-neighbour sample (ties round up); outside the grid returns `outside`. */
template <class T>
T sample_nearest(const Grid<T>& g, double x, double y, double z, T outside = T{}) {
  const Dims& d = g.dims();
  const double rx = std::floor(x + 0.5), ry = std::floor(y + 0.5), rz = std::floor(z + 0.5);
  if (rx < 0.0 || ry < 0.0 || rz < 0.0 || rx >= static_cast<double>(d.x) || ry >= static_cast<double>(d.y) ||
      rz >= static_cast<double>(d.z))
    return outside;
  return g.at(static_cast<std::size_t>(rx), static_cast<std::size_t>(ry), static_cast<std::size_t>(rz));
}

namespace detail {

// Source voxel coordinate of target voxel j along one axis. Coordinates within
// 1e-6 of an integer are snapped so identical grids resample bit-exactly.
inline double source_coordinate(double center, std::size_t j, std::size_t target_dim, double target_spacing,
                                double source_spacing) {
  const double offset = (static_cast<double>(j) - 0.5 * static_cast<double>(target_dim - 1)) * target_spacing;
  const double c = (center + offset) / source_spacing;
  const double r = std::round(c);
  return std::abs(c - r) < 1e-6 ? r : c;
}

template <class T, class Sampler>
Grid<T> resample_impl(const Grid<T>& src, Dims target_dims, Spacing target_spacing, Point3 center, Sampler sample) {
  if (target_dims.voxels() == 0) throw InvalidArgument("resample: target dims must be positive");
  for (double s : target_spacing)
    if (!(s > 0.0)) throw InvalidArgument("resample: target spacing must be positive");
  std::vector<double> cx(target_dims.x), cy(target_dims.y), cz(target_dims.z);
  for (std::size_t i = 0; i < target_dims.x; ++i)
    cx[i] = source_coordinate(center[0], i, target_dims.x, target_spacing[0], src.spacing()[0]);
  for (std::size_t j = 0; j < target_dims.y; ++j)
    cy[j] = source_coordinate(center[1], j, target_dims.y, target_spacing[1], src.spacing()[1]);
  for (std::size_t k = 0; k < target_dims.z; ++k)
    cz[k] = source_coordinate(center[2], k, target_dims.z, target_spacing[2], src.spacing()[2]);
  std::vector<T> out(target_dims.voxels());
  parallel_for(target_dims.z, [&](std::size_t k) {
    for (std::size_t j = 0; j < target_dims.y; ++j)
      for (std::size_t i = 0; i < target_dims.x; ++i) out[target_dims.index(i, j, k)] = sample(cx[i], cy[j], cz[k]);
  });
  return Grid<T>(target_dims, target_spacing, std::move(out));
}

}  // namespace detail

/** Physical center of a grid, (dims - 1) * spacing / 2 per axis. */
template <class T>
Point3 grid_center(const Grid<T>& g) {
  return {0.5 * static_cast<double>(g.dims().x - 1) * g.spacing()[0],
          0.5 * static_cast<double>(g.dims().y - 1) * g.spacing()[1],
          0.5 * static_cast<double>(g.dims().z - 1) * g.spacing()[2]};
}

/**
 * Trilinear resampling onto a grid of `target_dims` x `target_spacing` whose
 * middle lies at the physical point `center`. Samples outside the source read 0.
 */
inline Volume resample_to_grid(const Volume& vol, Dims target_dims, Spacing target_spacing, Point3 center) {
  return detail::resample_impl(vol, target_dims, target_spacing, center, [&](double x, double y, double z) {
    return static_cast<float>(sample_trilinear(vol, x, y, z));
  });
}

/** Nearest-neighbour variant for label maps; outside voxels become background 0. */
inline LabelMap resample_labels_to_grid(const LabelMap& labels, Dims target_dims, Spacing target_spacing,
                                        Point3 center) {
  const Grid<std::uint16_t>& g = labels;
  auto out = detail::resample_impl(g, target_dims, target_spacing, center, [&](double x, double y, double z) {
    return sample_nearest<std::uint16_t>(g, x, y, z, 0);
  });
  return LabelMap(out.dims(), out.spacing(), out.values());
}

}  // namespace volaug

#endif  // VOLAUG_RESAMPLE_HPP
