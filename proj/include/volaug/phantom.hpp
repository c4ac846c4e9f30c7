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

#ifndef VOLAUG_PHANTOM_HPP
#define VOLAUG_PHANTOM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/parallel.hpp"
#include "volaug/random.hpp"

namespace volaug {

enum class ShapeMode { NestedEllipsoids, Blobs };

struct TissueIntensity {
  double mean = 0.0;
  double noise_std = 0.0;
};

/** Recipe for a synthetic image/label pair. */
struct PhantomSpec {
  std::uint64_t seed = 0;
  Dims dims{32, 32, 32};
  Spacing spacing{1.0, 1.0, 1.0};
  int n_labels = 2;
  ShapeMode shape_mode = ShapeMode::NestedEllipsoids;
  std::vector<TissueIntensity> intensity_table;

  void validate() const {
    if (dims.voxels() == 0) throw InvalidArgument("phantom dims must be positive");
    for (double s : spacing)
      if (!(s > 0.0)) throw InvalidArgument("phantom spacing must be positive");
    if (n_labels < 2 || n_labels > 16) throw InvalidArgument("phantom n_labels must lie in [2, 16]");
    if (intensity_table.size() != static_cast<std::size_t>(n_labels))
      throw InvalidArgument("phantom intensity_table needs exactly n_labels entries");
    for (const auto& t : intensity_table)
      if (!std::isfinite(t.mean) || !(t.noise_std >= 0.0) || !std::isfinite(t.noise_std))
        throw InvalidArgument("phantom intensity_table entries need a finite mean and std >= 0");
  }
};

inline PhantomSpec phantom_spec_from_json(const nlohmann::json& j) {
  PhantomSpec s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& d = j.at("dims");
    if (!d.is_array() || d.size() != 3) throw ConfigError("phantom spec: dims must have 3 entries");
    for (const auto& v : d)
      if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
        throw ConfigError("phantom spec: dims must be positive integers");
    s.dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
    if (j.contains("spacing_mm")) {
      const auto& sp = j.at("spacing_mm");
      if (!sp.is_array() || sp.size() != 3) throw ConfigError("phantom spec: spacing_mm must have 3 entries");
      for (int a = 0; a < 3; ++a) s.spacing[a] = sp[a].get<double>();
    }
    s.n_labels = j.at("n_labels").get<int>();
    const std::string mode = j.value("shape_mode", std::string("nested-ellipsoids"));
    if (mode == "nested-ellipsoids") {
      s.shape_mode = ShapeMode::NestedEllipsoids;
    } else if (mode == "blobs") {
      s.shape_mode = ShapeMode::Blobs;
    } else {
      throw ConfigError("phantom spec: unknown shape_mode '" + mode + "'");
    }
    for (const auto& row : j.at("intensity_table"))
      s.intensity_table.push_back({row.at("mean").get<double>(), row.value("std", 0.0)});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("phantom spec: ") + e.what());
  }
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline nlohmann::json to_json(const PhantomSpec& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["dims"] = {s.dims.x, s.dims.y, s.dims.z};
  j["spacing_mm"] = {s.spacing[0], s.spacing[1], s.spacing[2]};
  j["n_labels"] = s.n_labels;
  j["shape_mode"] = s.shape_mode == ShapeMode::NestedEllipsoids ? "nested-ellipsoids" : "blobs";
  j["intensity_table"] = nlohmann::json::array();
  for (const auto& t : s.intensity_table) j["intensity_table"].push_back({{"mean", t.mean}, {"std", t.noise_std}});
  return j;
}

struct Phantom {
  Volume image;
  LabelMap labels;
};

namespace detail {

// Label n-1 is the innermost ellipsoid; shells between scale factors
// ((n-k)/(n-1))^(1/3) have equal volume.
inline std::vector<std::uint16_t> nested_ellipsoid_labels(const PhantomSpec& s, Rng& rng) {
  const Dims& d = s.dims;
  std::array<double, 3> center{}, semi{};
  for (std::size_t a = 0; a < 3; ++a) {
    const double n = static_cast<double>(d[a]);
    center[a] = 0.5 * (n - 1.0) + rng.uniform(-0.05, 0.05) * n;
    semi[a] = 0.42 * n * rng.uniform(0.9, 1.1);
  }
  const int n = s.n_labels;
  std::vector<double> scale(static_cast<std::size_t>(n));
  for (int k = 1; k < n; ++k) scale[k] = std::cbrt(static_cast<double>(n - k) / static_cast<double>(n - 1));
  std::vector<std::uint16_t> labels(d.voxels(), 0);
  parallel_for(d.z, [&](std::size_t z) {
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        const double qx = (static_cast<double>(x) - center[0]) / semi[0];
        const double qy = (static_cast<double>(y) - center[1]) / semi[1];
        const double qz = (static_cast<double>(z) - center[2]) / semi[2];
        const double r = std::sqrt(qx * qx + qy * qy + qz * qz);
        std::uint16_t label = 0;
        for (int k = 1; k < n && r <= scale[k]; ++k) label = static_cast<std::uint16_t>(k);
        labels[d.index(x, y, z)] = label;
      }
  });
  return labels;
}

// Spheres of equal radius; overlapping voxels go to the blob with the smallest
// normalized distance.
inline std::vector<std::uint16_t> blob_labels(const PhantomSpec& s, Rng& rng) {
  const Dims& d = s.dims;
  const int blobs = s.n_labels - 1;
  const double volume = static_cast<double>(d.voxels());
  const double radius = std::cbrt(0.6 * volume / (static_cast<double>(blobs) * 4.0 / 3.0 * std::numbers::pi));
  std::vector<std::array<double, 3>> centers(static_cast<std::size_t>(blobs));
  for (auto& c : centers)
    for (std::size_t a = 0; a < 3; ++a) {
      const double hi = static_cast<double>(d[a]) - 1.0;
      const double margin = std::min(radius * 0.8, 0.5 * hi);
      c[a] = rng.uniform(margin, hi - margin);
    }
  std::vector<std::uint16_t> labels(d.voxels(), 0);
  parallel_for(d.z, [&](std::size_t z) {
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        double best = 1.0;
        std::uint16_t label = 0;
        for (int b = 0; b < blobs; ++b) {
          const auto& c = centers[static_cast<std::size_t>(b)];
          const double dx = static_cast<double>(x) - c[0];
          const double dy = static_cast<double>(y) - c[1];
          const double dz = static_cast<double>(z) - c[2];
          const double r = std::sqrt(dx * dx + dy * dy + dz * dz) / radius;
          if (r <= best) {
            best = r;
            label = static_cast<std::uint16_t>(b + 1);
          }
        }
        labels[d.index(x, y, z)] = label;
      }
  });
  return labels;
}

inline bool meets_coverage(const std::vector<std::uint16_t>& labels, int n_labels) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_labels), 0);
  for (auto l : labels) ++counts[l];
  const auto needed = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(labels.size()))));
  return std::all_of(counts.begin(), counts.end(), [&](std::size_t c) { return c >= needed; });
}

}  // namespace detail

/**
 * Deterministic synthetic phantom. Geometry draws come from stream 0 of the
 * seed; the noise of slice z comes from stream z of stream 1, so the result
 * does not depend on the worker count. Every label must cover at least 1% of
 * the voxels, otherwise DataError is thrown.
 */
inline Phantom make_phantom(const PhantomSpec& spec) {
  spec.validate();
  Rng geometry = Rng::stream(spec.seed, 0);
  std::vector<std::uint16_t> labels;
  constexpr int kAttempts = 8;
  bool ok = false;
  for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
    labels = spec.shape_mode == ShapeMode::NestedEllipsoids ? detail::nested_ellipsoid_labels(spec, geometry)
                                                            : detail::blob_labels(spec, geometry);
    ok = detail::meets_coverage(labels, spec.n_labels);
  }
  if (!ok)
    throw DataError("phantom spec unsatisfiable: cannot give each of " + std::to_string(spec.n_labels) +
                    " labels 1% coverage on a " + to_string(spec.dims) + " grid");

  const Dims& d = spec.dims;
  const std::uint64_t noise_key = stream_key(spec.seed, 1);
  std::vector<float> image(d.voxels());
  const std::size_t slice = d.x * d.y;
  parallel_for(d.z, [&](std::size_t z) {
    Rng noise = Rng::stream(noise_key, z);
    for (std::size_t i = z * slice; i < (z + 1) * slice; ++i) {
      const auto& t = spec.intensity_table[labels[i]];
      const double v = t.noise_std > 0.0 ? t.mean + t.noise_std * noise.normal() : t.mean;
      image[i] = static_cast<float>(v);
    }
  });
  return {Volume(d, spec.spacing, std::move(image)), LabelMap(d, spec.spacing, std::move(labels))};
}

}  // namespace volaug

#endif  // VOLAUG_PHANTOM_HPP
