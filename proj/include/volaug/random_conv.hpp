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

#ifndef VOLAUG_RANDOM_CONV_HPP
#define VOLAUG_RANDOM_CONV_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/parallel.hpp"
#include "volaug/random.hpp"

namespace volaug {

/// Channel plan (in, out) of the four layers.
inline constexpr std::array<std::pair<int, int>, 4> kRandConvChannels{{{1, 2}, {2, 2}, {2, 2}, {2, 1}}};
/// Negative slope of the leaky rectifier applied after every layer.
inline constexpr double kLeakySlope = 0.1;

/**
 * One bias-free 3D convolution with cubic kernel and dense channel mixing.
 * Weights are laid out [out][in][kz][ky][kx].
 */
struct ConvLayer {
  int kernel_size = 1;
  int in_channels = 1;
  int out_channels = 1;
  std::vector<double> weights;

  std::size_t taps() const { return static_cast<std::size_t>(kernel_size * kernel_size * kernel_size); }

  double weight(int out, int in, int kz, int ky, int kx) const {
    const std::size_t tap = static_cast<std::size_t>((kz * kernel_size + ky) * kernel_size + kx);
    return weights[(static_cast<std::size_t>(out) * static_cast<std::size_t>(in_channels) + static_cast<std::size_t>(in)) *
                       taps() +
                   tap];
  }
};

/**
 * Untrained 4-layer random convolution network. Construction validates the
 * channel plan, kernel sizes and weight counts, so externally supplied
 * weights can be injected for testing.
 */
class RandConvNet {
 public:
  explicit RandConvNet(std::array<ConvLayer, 4> layers) : layers_(std::move(layers)) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      if (layer.kernel_size != 1 && layer.kernel_size != 3)
        throw InvalidArgument("RandConvNet: kernel size must be 1 or 3");
      if (layer.in_channels != kRandConvChannels[l].first || layer.out_channels != kRandConvChannels[l].second)
        throw InvalidArgument("RandConvNet: layer " + std::to_string(l) + " violates the 1-2-2-2-1 channel plan");
      const std::size_t expected =
          static_cast<std::size_t>(layer.in_channels * layer.out_channels) * layer.taps();
      if (layer.weights.size() != expected)
        throw InvalidArgument("RandConvNet: layer " + std::to_string(l) + " has the wrong number of weights");
      for (double w : layer.weights)
        if (!std::isfinite(w)) throw InvalidArgument("RandConvNet: weights must be finite");
    }
  }

  const std::array<ConvLayer, 4>& layers() const { return layers_; }

  friend bool operator==(const RandConvNet& a, const RandConvNet& b) {
    for (std::size_t l = 0; l < 4; ++l)
      if (a.layers_[l].kernel_size != b.layers_[l].kernel_size || a.layers_[l].weights != b.layers_[l].weights)
        return false;
    return true;
  }

 private:
  std::array<ConvLayer, 4> layers_;
};

/**
 * Fresh network: per layer, a fair coin picks kernel size 1 or 3, then the
 * weights are drawn from N(0, 1) in layout order.
 */
inline RandConvNet sample_randconv(Rng& rng) {
  std::array<ConvLayer, 4> layers;
  for (std::size_t l = 0; l < 4; ++l) {
    auto& layer = layers[l];
    layer.kernel_size = rng.coin() ? 3 : 1;
    layer.in_channels = kRandConvChannels[l].first;
    layer.out_channels = kRandConvChannels[l].second;
    layer.weights.resize(static_cast<std::size_t>(layer.in_channels * layer.out_channels) * layer.taps());
    for (auto& w : layer.weights) w = rng.normal();
  }
  return RandConvNet(std::move(layers));
}

namespace detail {

using FeatureMaps = std::vector<std::vector<double>>;

// "Same" convolution with zero padding followed by the leaky rectifier.
inline FeatureMaps conv_leaky(const ConvLayer& layer, const FeatureMaps& in, const Dims& d) {
  const int r = layer.kernel_size / 2;
  FeatureMaps out(static_cast<std::size_t>(layer.out_channels), std::vector<double>(d.voxels()));
  const auto nx = static_cast<std::int64_t>(d.x), ny = static_cast<std::int64_t>(d.y), nz = static_cast<std::int64_t>(d.z);
  parallel_for(d.z, [&](std::size_t zi) {
    const auto z = static_cast<std::int64_t>(zi);
    for (std::int64_t y = 0; y < ny; ++y)
      for (std::int64_t x = 0; x < nx; ++x) {
        const std::size_t p = d.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y), zi);
        for (int o = 0; o < layer.out_channels; ++o) {
          double acc = 0.0;
          for (int c = 0; c < layer.in_channels; ++c) {
            const auto& src = in[static_cast<std::size_t>(c)];
            for (int kz = -r; kz <= r; ++kz) {
              const std::int64_t sz = z + kz;
              if (sz < 0 || sz >= nz) continue;
              for (int ky = -r; ky <= r; ++ky) {
                const std::int64_t sy = y + ky;
                if (sy < 0 || sy >= ny) continue;
                for (int kx = -r; kx <= r; ++kx) {
                  const std::int64_t sx = x + kx;
                  if (sx < 0 || sx >= nx) continue;
                  acc += layer.weight(o, c, kz + r, ky + r, kx + r) *
                         src[static_cast<std::size_t>(sx + nx * (sy + ny * sz))];
                }
              }
            }
          }
          out[static_cast<std::size_t>(o)][p] = acc >= 0.0 ? acc : kLeakySlope * acc;
        }
      }
  });
  return out;
}

}  // namespace detail

/** g(x, theta): four conv + leaky-rectifier passes, output the same size as the input. */
inline Volume apply_randconv(const RandConvNet& net, const Volume& vol) {
  if (!vol.dims().all_at_least(3))
    throw InvalidArgument("apply_randconv: dims must be >= 3 per axis, got " + to_string(vol.dims()));
  detail::FeatureMaps maps(1, std::vector<double>(vol.data().begin(), vol.data().end()));
  for (const auto& layer : net.layers()) maps = detail::conv_leaky(layer, maps, vol.dims());
  std::vector<float> out(vol.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(maps[0][i]);
  return Volume(vol.dims(), vol.spacing(), std::move(out));
}

}  // namespace volaug

#endif  // VOLAUG_RANDOM_CONV_HPP
