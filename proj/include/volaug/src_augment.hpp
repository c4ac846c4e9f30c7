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

#ifndef VOLAUG_SRC_AUGMENT_HPP
#define VOLAUG_SRC_AUGMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "volaug/error.hpp"
#include "volaug/geometry.hpp"
#include "volaug/grid.hpp"
#include "volaug/intensity.hpp"
#include "volaug/parallel.hpp"
#include "volaug/random.hpp"
#include "volaug/random_conv.hpp"

namespace volaug {

/** Discrete isotropic Gaussian on a cubic support of `size` voxels, normalized to sum 1. */
struct GaussianKernelSpec {
  double sigma = 1.0;
  int size = 5;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("Gaussian kernel sigma must be positive");
    if (size < 1 || size % 2 == 0) throw InvalidArgument("Gaussian kernel size must be a positive odd number");
  }

  /** Normalized 1D taps; the 3D kernel is their outer product. */
  std::vector<double> taps() const {
    validate();
    const int r = size / 2;
    std::vector<double> t(static_cast<std::size_t>(size));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += t[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& v : t) v /= sum;
    return t;
  }

  /** Full size^3 kernel, x fastest. */
  std::vector<double> weights() const {
    const auto t = taps();
    std::vector<double> w;
    w.reserve(t.size() * t.size() * t.size());
    for (double wz : t)
      for (double wy : t)
        for (double wx : t) w.push_back(wz * wy * wx);
    return w;
  }
};

/** Per-label smooth weights m_c, a partition of unity over `labels`. */
struct BlendMaps {
  std::vector<std::uint16_t> labels;
  std::vector<Volume> maps;

  const Volume& map_for(std::uint16_t label) const {
    const auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) throw InvalidArgument("BlendMaps: no map for label " + std::to_string(label));
    return maps[static_cast<std::size_t>(it - labels.begin())];
  }
};

namespace detail {

// One separable pass along `axis` with zero padding.
inline std::vector<double> smooth_axis(const std::vector<double>& in, const Dims& d, int axis,
                                       const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size()) / 2;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? d.x : d.x * d.y;
  const auto n = static_cast<std::int64_t>(d[static_cast<std::size_t>(axis)]);
  std::vector<double> out(in.size());
  parallel_for(d.z, [&](std::size_t z) {
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        const std::size_t p = d.index(x, y, z);
        const auto pos = static_cast<std::int64_t>(axis == 0 ? x : axis == 1 ? y : z);
        double acc = 0.0;
        for (int t = -r; t <= r; ++t) {
          const std::int64_t q = pos + t;
          if (q < 0 || q >= n) continue;
          const double v = in[static_cast<std::size_t>(static_cast<std::int64_t>(p) + t * static_cast<std::int64_t>(stride))];
          if (v != 0.0) acc += taps[static_cast<std::size_t>(t + r)] * v;
        }
        out[p] = acc;
      }
  });
  return out;
}

}  // namespace detail

/**
 * m_c = (binary mask of c) * G for every label present, computed with zero
 * padding and then divided voxelwise by sum_c m_c, so the maps sum to one at
 * every voxel including the volume border.
 */
inline BlendMaps smooth_masks(const LabelMap& labels, const GaussianKernelSpec& kernel = {}) {
  const auto taps = kernel.taps();
  const Dims& d = labels.dims();
  std::vector<std::vector<double>> smoothed;
  for (std::uint16_t label : labels.label_set()) {
    std::vector<double> m(labels.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = labels[i] == label ? 1.0 : 0.0;
    if (taps.size() > 1)
      for (int axis = 0; axis < 3; ++axis) m = detail::smooth_axis(m, d, axis, taps);
    smoothed.push_back(std::move(m));
  }
  const std::size_t n_labels = smoothed.size();
  std::vector<std::vector<float>> out(n_labels, std::vector<float>(labels.size()));
  parallel_for(d.z, [&](std::size_t z) {
    const std::size_t slice = d.x * d.y;
    for (std::size_t p = z * slice; p < (z + 1) * slice; ++p) {
      double total = 0.0;
      for (std::size_t c = 0; c < n_labels; ++c) total += smoothed[c][p];
      for (std::size_t c = 0; c < n_labels; ++c) out[c][p] = static_cast<float>(smoothed[c][p] / total);
    }
  });
  BlendMaps maps;
  maps.labels = labels.label_set();
  for (auto& m : out) maps.maps.emplace_back(d, labels.spacing(), std::move(m));
  return maps;
}

/** One network per label. */
using NetsByLabel = std::map<std::uint16_t, RandConvNet>;

namespace detail {
inline const RandConvNet& net_for(const NetsByLabel& nets, std::uint16_t label) {
  const auto it = nets.find(label);
  if (it == nets.end()) throw InvalidArgument("missing random-convolution net for label " + std::to_string(label));
  return it->second;
}
}  // namespace detail

/** sum_c mbar_c * g(x, theta_c) with hard masks: each voxel takes its own label's output. */
inline Volume src_binary(const Volume& vol, const LabelMap& labels, const NetsByLabel& nets) {
  require_same_geometry(vol, labels, "src_binary", false);
  std::vector<float> out(vol.size(), 0.0f);
  for (std::uint16_t label : labels.label_set()) {
    const Volume g = apply_randconv(detail::net_for(nets, label), vol);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (labels[i] == label) out[i] = g[i];
  }
  return Volume(vol.dims(), vol.spacing(), std::move(out));
}

/**
 * sum_c m_c * g(x, theta_c). Terms are accumulated in double in ascending
 * label order, starting from the first term so a single label reproduces its
 * network output exactly.
 */
inline Volume src_blend(const Volume& vol, const BlendMaps& maps, const NetsByLabel& nets) {
  if (maps.labels.empty() || maps.labels.size() != maps.maps.size())
    throw InvalidArgument("src_blend: blend maps are empty or inconsistent");
  if (nets.size() != maps.labels.size()) throw InvalidArgument("src_blend: label sets of maps and nets differ");
  for (std::uint16_t label : maps.labels)
    if (!nets.contains(label)) throw InvalidArgument("src_blend: label sets of maps and nets differ");
  for (const auto& m : maps.maps)
    if (m.dims() != vol.dims()) throw InvalidArgument("src_blend: blend map dims do not match the volume");

  std::vector<double> acc(vol.size());
  for (std::size_t c = 0; c < maps.labels.size(); ++c) {
    const Volume g = apply_randconv(detail::net_for(nets, maps.labels[c]), vol);
    const Volume& m = maps.maps[c];
    if (c == 0) {
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = static_cast<double>(m[i]) * g[i];
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<double>(m[i]) * g[i];
    }
  }
  std::vector<float> out(acc.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(acc[i]);
  return Volume(vol.dims(), vol.spacing(), std::move(out));
}

/** alpha * aug + (1 - alpha) * orig. */
inline Volume mix_with_original(const Volume& aug, const Volume& orig, double alpha) {
  require_same_geometry(aug, orig, "mix_with_original", false);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("mix_with_original: alpha must lie in [0, 1]");
  std::vector<float> out(aug.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<float>(alpha * aug[i] + (1.0 - alpha) * orig[i]);
  return Volume(aug.dims(), aug.spacing(), std::move(out));
}

/** Frobenius norm; partial sums per z slice are combined in slice order. */
inline double frobenius_norm(const Volume& vol) {
  const Dims& d = vol.dims();
  const std::size_t slice = d.x * d.y;
  std::vector<double> partial(d.z, 0.0);
  parallel_for(d.z, [&](std::size_t z) {
    double s = 0.0;
    for (std::size_t i = z * slice; i < (z + 1) * slice; ++i) s += static_cast<double>(vol[i]) * vol[i];
    partial[z] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return std::sqrt(total);
}

/** Rescales x so its Frobenius norm equals that of `ref`. */
inline Volume renormalize_frobenius(const Volume& x, const Volume& ref) {
  require_same_geometry(x, ref, "renormalize_frobenius", false);
  const double nx = frobenius_norm(x);
  const double nr = frobenius_norm(ref);
  if (nx == 0.0) {
    if (nr == 0.0) return x;
    throw DataError("renormalize_frobenius: input has zero norm but the reference does not");
  }
  const double factor = nr / nx;
  return map_voxels(x, [=](float v) { return static_cast<float>(v * factor); });
}

enum class AlphaMode { Uniform, Fixed };

/** Parameters of augment_sample. Defaults follow the published CDA/SRC settings. */
struct AugmentConfig {
  Modality modality = Modality::CT;
  bool geometry_enabled = true;
  GeomRanges geometry{};
  bool jitter_enabled = true;
  JitterRanges jitter{};
  bool src_enabled = true;
  bool src_blend = true;  ///< false selects hard-mask (binary) SRC
  AlphaMode alpha_mode = AlphaMode::Uniform;
  double alpha = 1.0;  ///< used when alpha_mode == Fixed
  GaussianKernelSpec kernel{};
};

struct AugmentResult {
  Volume image;
  LabelMap labels;
  Volume post_cda;  ///< image after geometry and jitter, the SRC input
  double alpha = 0.0;
};

/**
 * One augmented pair: geometry (same field for image and labels), global
 * intensity jitter, then SRC (per-label nets, blend, alpha mixing with the
 * post-CDA image, Frobenius renormalization against it).
 *
 * A single draw from `rng` keys the sample; stages use child streams
 * (0 geometry, 1 jitter, 2 SRC) so toggling one stage leaves the others'
 * draws unchanged. Inside SRC, alpha uses child 0 and the net of label L uses
 * child L + 1.
 */
inline AugmentResult augment_sample(const Volume& image, const LabelMap& labels, Rng& rng, const AugmentConfig& cfg) {
  require_same_geometry(image, labels, "augment_sample");
  const Rng key(rng.next());

  Volume x = image;
  LabelMap y = labels;
  if (cfg.geometry_enabled) {
    Rng g = key.split(0);
    const GeomParams params = sample_geom_params(g, cfg.geometry);
    const DisplacementField field = build_displacement_field(params, image.dims(), image.spacing());
    x = warp_volume(image, field);
    y = warp_labels(labels, field);
  }
  if (cfg.jitter_enabled) {
    Rng j = key.split(1);
    x = intensity_jitter(x, sample_jitter(j, cfg.modality, cfg.jitter));
  }

  AugmentResult result{x, y, x, 0.0};
  if (!cfg.src_enabled) return result;

  const Rng s = key.split(2);
  NetsByLabel nets;
  for (std::uint16_t label : y.label_set()) {
    Rng n = s.split(static_cast<std::uint64_t>(label) + 1);
    nets.emplace(label, sample_randconv(n));
  }
  double alpha = cfg.alpha;
  if (cfg.alpha_mode == AlphaMode::Uniform) {
    Rng a = s.split(0);
    alpha = a.uniform01();
  }
  const Volume augmented = cfg.src_blend ? src_blend(x, smooth_masks(y, cfg.kernel), nets) : src_binary(x, y, nets);
  result.image = renormalize_frobenius(mix_with_original(augmented, x, alpha), x);
  result.alpha = alpha;
  return result;
}

}  // namespace volaug

#endif  // VOLAUG_SRC_AUGMENT_HPP
