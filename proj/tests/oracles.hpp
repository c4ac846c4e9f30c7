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

#ifndef VOLAUG_TESTS_ORACLES_HPP
#define VOLAUG_TESTS_ORACLES_HPP

// Independent reference implementations. None of these call into the code
// paths they check; they only read plain data out of library types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "volaug/volaug.hpp"

namespace volaug::oracle {

/** Percentile by full sort with linear interpolation between order statistics. */
inline double percentile_sorted(std::vector<float> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return static_cast<double>(v[lo]) + (h - static_cast<double>(lo)) * (static_cast<double>(v[hi]) - v[lo]);
}

/** Direct convolution network evaluation: plain nested loops, zero padding, leaky rectifier. */
inline std::vector<double> randconv(const RandConvNet& net, const Volume& vol) {
  const long X = static_cast<long>(vol.dims().x), Y = static_cast<long>(vol.dims().y), Z = static_cast<long>(vol.dims().z);
  std::vector<std::vector<double>> act{std::vector<double>(vol.data().begin(), vol.data().end())};
  for (const ConvLayer& layer : net.layers()) {
    const int k = layer.kernel_size, r = k / 2;
    std::vector<std::vector<double>> next(static_cast<std::size_t>(layer.out_channels),
                                          std::vector<double>(static_cast<std::size_t>(X * Y * Z), 0.0));
    for (int o = 0; o < layer.out_channels; ++o)
      for (long z = 0; z < Z; ++z)
        for (long y = 0; y < Y; ++y)
          for (long x = 0; x < X; ++x) {
            double s = 0.0;
            for (int c = 0; c < layer.in_channels; ++c)
              for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                  for (int e = 0; e < k; ++e) {
                    const long zz = z + a - r, yy = y + b - r, xx = x + e - r;
                    if (zz < 0 || yy < 0 || xx < 0 || zz >= Z || yy >= Y || xx >= X) continue;
                    const double w = layer.weights[static_cast<std::size_t>(((o * layer.in_channels + c) * k + a) * k * k + b * k + e)];
                    s += w * act[static_cast<std::size_t>(c)][static_cast<std::size_t>((zz * Y + yy) * X + xx)];
                  }
            next[static_cast<std::size_t>(o)][static_cast<std::size_t>((z * Y + y) * X + x)] = s > 0 ? s : 0.1 * s;
          }
    act = std::move(next);
  }
  return act[0];
}

struct Voxel {
  long x, y, z;
};

/** Boundary voxels by explicit neighbour enumeration, linear index order. */
inline std::vector<Voxel> surface(const Mask& m) {
  const long X = static_cast<long>(m.dims().x), Y = static_cast<long>(m.dims().y), Z = static_cast<long>(m.dims().z);
  auto fg = [&](long x, long y, long z) {
    if (x < 0 || y < 0 || z < 0 || x >= X || y >= Y || z >= Z) return false;
    return m.values()[static_cast<std::size_t>((z * Y + y) * X + x)] != 0;
  };
  std::vector<Voxel> out;
  const long nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (long z = 0; z < Z; ++z)
    for (long y = 0; y < Y; ++y)
      for (long x = 0; x < X; ++x) {
        if (!fg(x, y, z)) continue;
        for (const auto& n : nb)
          if (!fg(x + n[0], y + n[1], z + n[2])) {
            out.push_back({x, y, z});
            break;
          }
      }
  return out;
}

/** Every directed nearest distance by exhaustive search; pred->gt then gt->pred. */
inline std::vector<double> pooled_distances(const Mask& a, const Mask& b) {
  const auto sa = surface(a), sb = surface(b);
  const Spacing sp = a.spacing();
  auto directed = [&](const std::vector<Voxel>& from, const std::vector<Voxel>& to, std::vector<double>& out) {
    for (const auto& p : from) {
      double best = INFINITY;
      for (const auto& q : to) {
        const double dx = static_cast<double>(p.x - q.x) * sp[0];
        const double dy = static_cast<double>(p.y - q.y) * sp[1];
        const double dz = static_cast<double>(p.z - q.z) * sp[2];
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
      out.push_back(best);
    }
  };
  std::vector<double> out;
  directed(sa, sb, out);
  directed(sb, sa, out);
  return out;
}

/** Mean of the pooled distances: per-direction totals, then their sum. */
inline double assd(const Mask& a, const Mask& b) {
  const auto d = pooled_distances(a, b);
  const std::size_t n_forward = surface(a).size();
  double forward = 0.0, backward = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (i < n_forward ? forward : backward) += d[i];
  return (forward + backward) / static_cast<double>(d.size());
}

inline double hd95(const Mask& a, const Mask& b) {
  auto d = pooled_distances(a, b);
  std::sort(d.begin(), d.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(d.size()) - 1e-9));
  return d[std::max<std::size_t>(rank, 1) - 1];
}

/** Number of 26-connected components of the voxels where pred(label) holds. */
inline int components26(const LabelMap& l, const std::function<bool(std::uint16_t)>& pred) {
  const Dims d = l.dims();
  std::vector<int> seen(d.voxels(), 0);
  int count = 0;
  for (std::size_t s = 0; s < d.voxels(); ++s) {
    if (seen[s] || !pred(l[s])) continue;
    ++count;
    std::deque<std::size_t> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const long x = static_cast<long>(p % d.x), y = static_cast<long>((p / d.x) % d.y), z = static_cast<long>(p / (d.x * d.y));
      for (long dz = -1; dz <= 1; ++dz)
        for (long dy = -1; dy <= 1; ++dy)
          for (long dx = -1; dx <= 1; ++dx) {
            const long nx = x + dx, ny = y + dy, nz = z + dz;
            if (nx < 0 || ny < 0 || nz < 0 || nx >= static_cast<long>(d.x) || ny >= static_cast<long>(d.y) ||
                nz >= static_cast<long>(d.z))
              continue;
            const std::size_t q = d.index(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), static_cast<std::size_t>(nz));
            if (!seen[q] && pred(l[q])) {
              seen[q] = 1;
              queue.push_back(q);
            }
          }
    }
  }
  return count;
}

/** Normalized 1D Gaussian taps straight from the density. */
inline std::vector<double> gaussian_taps(double sigma, int size) {
  std::vector<double> t;
  double s = 0.0;
  for (int i = -size / 2; i <= size / 2; ++i) {
    t.push_back(std::exp(-(i * i) / (2.0 * sigma * sigma)));
    s += t.back();
  }
  for (auto& v : t) v /= s;
  return t;
}

/**
 * Source matching by brute-force CDF composition: p = fraction of voxels whose
 * bin index is <= that of v (by sorting bin indices), then an exhaustive
 * squared-error argmin over the source cumulative values.
 */
inline std::vector<double> source_match(const std::vector<float>& values, const std::vector<double>& source_cdf,
                                        double lo, double hi) {
  const std::size_t n_bins = source_cdf.size();
  auto bin = [&](double v) {
    long b = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n_bins)));
    return std::clamp<long>(b, 0, static_cast<long>(n_bins) - 1);
  };
  std::vector<long> bins;
  for (float v : values) bins.push_back(bin(v));
  std::vector<long> sorted = bins;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  for (long b : bins) {
    const auto le = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), b) - sorted.begin());
    const double p = le / static_cast<double>(values.size());
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_bins; ++i)
      if ((source_cdf[i] - p) * (source_cdf[i] - p) < (source_cdf[best] - p) * (source_cdf[best] - p)) best = i;
    out.push_back(lo + (static_cast<double>(best) + 0.5) * (hi - lo) / static_cast<double>(n_bins));
  }
  return out;
}

/** Central finite-difference gradient of f at x with step h. */
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/** Direct evaluation of the generalized Dice loss from its definition. */
inline double generalized_dice(const std::vector<double>& s, std::size_t n_classes, const std::vector<std::uint16_t>& gt) {
  const std::size_t n = gt.size();
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    double g = 0.0;
    for (auto l : gt) g += (l == c);
    if (g == 0.0) continue;
    const double w = 1.0 / (g * g);
    double inter = 0.0, sq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double r = gt[p] == c ? 1.0 : 0.0;
      inter += r * s[c * n + p];
      sq += r + s[c * n + p] * s[c * n + p];
    }
    num += w * inter;
    den += w * sq;
  }
  return 1.0 - 2.0 * num / den;
}

}  // namespace volaug::oracle

#endif  // VOLAUG_TESTS_ORACLES_HPP
