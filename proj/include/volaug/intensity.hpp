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

#ifndef VOLAUG_INTENSITY_HPP
#define VOLAUG_INTENSITY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/parallel.hpp"

namespace volaug {

enum class Modality { CT, MR };

inline std::string_view to_string(Modality m) { return m == Modality::CT ? "ct" : "mr"; }

inline Modality parse_modality(std::string_view s) {
  if (s == "ct" || s == "CT") return Modality::CT;
  if (s == "mr" || s == "MR") return Modality::MR;
  throw ConfigError("unknown modality '" + std::string(s) + "' (expected ct or mr)");
}

/// CT normalization divisor (HU per unit).
inline constexpr float kCtNormDivisor = 2048.0f;
/// CT clip range applied before source matching, in HU.
inline constexpr float kCtClipLo = -1023.0f;
inline constexpr float kCtClipHi = 1024.0f;
/// MR range applied before source matching.
inline constexpr float kMrClipHi = 2047.0f;

/**
 * Linear-interpolation quantile: rank h = (n-1)*q on the sorted values, with
 * linear interpolation between the two neighbouring order statistics.
 */
inline double quantile(std::span<const float> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::vector<float> v(values.begin(), values.end());
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double x_lo = v[lo];
  if (lo + 1 >= v.size()) return x_lo;
  const double x_hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return x_lo + (h - static_cast<double>(lo)) * (x_hi - x_lo);
}

/** Applies `f` voxelwise; f maps float -> float. */
template <class F>
Volume map_voxels(const Volume& vol, F f) {
  std::vector<float> out(vol.size());
  const std::size_t slice = vol.dims().x * vol.dims().y;
  parallel_for(vol.dims().z, [&](std::size_t k) {
    for (std::size_t i = k * slice; i < (k + 1) * slice; ++i) out[i] = f(vol[i]);
  });
  return Volume(vol.dims(), vol.spacing(), std::move(out));
}

/** HU -> clamp(v / 2048, -1, 1). */
inline Volume normalize_ct(const Volume& vol) {
  return map_voxels(vol, [](float v) { return std::clamp(v / kCtNormDivisor, -1.0f, 1.0f); });
}

/**
 * Affine map sending the 10th percentile to -1 and the 90th to +1. Values
 * outside that band are not clipped.
 */
inline Volume normalize_mr(const Volume& vol) {
  const double p10 = quantile(vol.data(), 0.10);
  const double p90 = quantile(vol.data(), 0.90);
  if (!(p90 > p10)) throw DataError("normalize_mr: degenerate intensity distribution (p10 == p90)");
  const double span = p90 - p10;
  return map_voxels(vol, [=](float v) { return static_cast<float>(-1.0 + 2.0 * (v - p10) / span); });
}

/** Clamp HU to [-1023, 1024]. */
inline Volume preclip_ct(const Volume& vol) {
  return map_voxels(vol, [](float v) { return std::clamp(v, kCtClipLo, kCtClipHi); });
}

/**
 * Shift so the minimum is 0, scale so the 0.9 quantile lands on 2047, then
 * clamp to [0, 2047].
 */
inline Volume preclip_mr(const Volume& vol) {
  const auto data = vol.data();
  const double lo = *std::min_element(data.begin(), data.end());
  const double p90 = quantile(data, 0.90);
  if (!(p90 > lo)) throw DataError("preclip_mr: degenerate intensity distribution (min == p90)");
  const double span = p90 - lo;
  return map_voxels(vol, [=](float v) {
    const double scaled = (v - lo) * static_cast<double>(kMrClipHi) / span;
    return static_cast<float>(std::clamp(scaled, 0.0, static_cast<double>(kMrClipHi)));
  });
}

inline Volume normalize(const Volume& vol, Modality m) { return m == Modality::CT ? normalize_ct(vol) : normalize_mr(vol); }
inline Volume preclip(const Volume& vol, Modality m) { return m == Modality::CT ? preclip_ct(vol) : preclip_mr(vol); }

}  // namespace volaug

#endif  // VOLAUG_INTENSITY_HPP
