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

#ifndef VOLAUG_SOURCE_MATCH_HPP
#define VOLAUG_SOURCE_MATCH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/intensity.hpp"
#include "volaug/parallel.hpp"

namespace volaug {

/// Default bin count for both modalities (unit-width bins over the clip ranges).
inline constexpr std::size_t kDefaultBins = 2048;

/** Binning used by source matching. */
struct SMConfig {
  Modality modality = Modality::CT;
  std::size_t n_bins = kDefaultBins;
  double range_lo = kCtClipLo;
  double range_hi = kCtClipHi;

  /** Default range for a modality: CT [-1023, 1024], MR [0, 2047]. */
  static SMConfig for_modality(Modality m, std::size_t n_bins = kDefaultBins) {
    if (m == Modality::CT) return {m, n_bins, kCtClipLo, kCtClipHi};
    return {m, n_bins, 0.0, kMrClipHi};
  }

  void validate() const {
    if (n_bins < 2) throw InvalidArgument("SMConfig: n_bins must be >= 2");
    if (!(range_lo < range_hi) || !std::isfinite(range_lo) || !std::isfinite(range_hi))
      throw InvalidArgument("SMConfig: range_lo must be below range_hi");
  }

  friend bool operator==(const SMConfig&, const SMConfig&) = default;
};

/**
 * Normalized cumulative histogram over uniform bins. Bin centers are derived:
 * c[i] = lo + (i + 0.5) * (hi - lo) / n_bins.
 */
class IntensityHistogram {
 public:
  IntensityHistogram(SMConfig config, std::vector<double> cumulative)
      : config_(config), cumulative_(std::move(cumulative)) {
    config_.validate();
    if (cumulative_.size() != config_.n_bins)
      throw DataError("histogram: cumulative has " + std::to_string(cumulative_.size()) + " entries, expected " +
                      std::to_string(config_.n_bins));
    for (std::size_t i = 0; i < cumulative_.size(); ++i) {
      const double h = cumulative_[i];
      if (!(h >= 0.0 && h <= 1.0)) throw DataError("histogram: cumulative values must lie in [0, 1]");
      if (i > 0 && h < cumulative_[i - 1]) throw DataError("histogram: cumulative values must be nondecreasing");
    }
    if (std::abs(cumulative_.back() - 1.0) > 1e-6) throw DataError("histogram: last cumulative value must be 1");
  }

  const SMConfig& config() const { return config_; }
  std::size_t n_bins() const { return config_.n_bins; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  double operator[](std::size_t i) const { return cumulative_[i]; }

  double bin_width() const { return (config_.range_hi - config_.range_lo) / static_cast<double>(config_.n_bins); }

  double bin_center(std::size_t i) const {
    return config_.range_lo + (static_cast<double>(i) + 0.5) * bin_width();
  }

  /** Bin holding v; values outside the range fall into the boundary bins. */
  std::size_t bin_index(double v) const { return bin_index(config_, v); }

  static std::size_t bin_index(const SMConfig& c, double v) {
    const double t = (v - c.range_lo) / (c.range_hi - c.range_lo) * static_cast<double>(c.n_bins);
    if (!(t > 0.0)) return 0;
    const double f = std::floor(t);
    if (f >= static_cast<double>(c.n_bins - 1)) return c.n_bins - 1;
    return static_cast<std::size_t>(f);
  }

 private:
  SMConfig config_;
  std::vector<double> cumulative_;
};

/** Per-bin counts of `values`. */
inline std::vector<std::uint64_t> bin_counts(std::span<const float> values, const SMConfig& config) {
  std::vector<std::uint64_t> counts(config.n_bins, 0);
  for (float v : values) ++counts[IntensityHistogram::bin_index(config, v)];
  return counts;
}

/** The image's own cumulative histogram C_T (piecewise constant per bin). */
inline IntensityHistogram compute_image_cdf(std::span<const float> values, const SMConfig& config) {
  config.validate();
  if (values.empty()) throw DataError("compute_image_cdf: empty image");
  const auto counts = bin_counts(values, config);
  const auto total = static_cast<double>(values.size());
  std::vector<double> h(config.n_bins);
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    running += counts[i];
    h[i] = static_cast<double>(running) / total;
  }
  return IntensityHistogram(config, std::move(h));
}

inline IntensityHistogram compute_image_cdf(const Volume& vol, const SMConfig& config) {
  return compute_image_cdf(vol.data(), config);
}

/**
 * Average cumulative histogram of the source images, each image weighted
 * equally. Per bin, the image values are summed in ascending order so the
 * result does not depend on the order of `volumes`.
 */
inline IntensityHistogram fit_source_histogram(std::span<const Volume> volumes, const SMConfig& config) {
  config.validate();
  if (volumes.empty()) throw InvalidArgument("fit_source_histogram: no source volumes");
  std::vector<IntensityHistogram> per_image;
  per_image.reserve(volumes.size());
  for (const auto& v : volumes) per_image.push_back(compute_image_cdf(v, config));
  std::vector<double> mean(config.n_bins);
  std::vector<double> column(volumes.size());
  for (std::size_t i = 0; i < config.n_bins; ++i) {
    for (std::size_t k = 0; k < per_image.size(); ++k) column[k] = per_image[k][i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    mean[i] = s / static_cast<double>(column.size());
    if (i > 0) mean[i] = std::max(mean[i], mean[i - 1]);
  }
  mean.back() = 1.0;
  return IntensityHistogram(config, std::move(mean));
}

/** i* = argmin_i (h[i] - p)^2, lowest index on ties. */
inline std::size_t inverse_quantile_index(const IntensityHistogram& hist, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("inverse_quantile: p must lie in [0, 1]");
  const auto& h = hist.cumulative();
  std::size_t best = 0;
  double best_err = (h[0] - p) * (h[0] - p);
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double err = (h[i] - p) * (h[i] - p);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  return best;
}

/** Source quantile function: the center of bin i*. */
inline double inverse_quantile(const IntensityHistogram& hist, double p) {
  return hist.bin_center(inverse_quantile_index(hist, p));
}

/**
 * Lookup table from target bin to matched intensity: entry j is
 * inverse_quantile(source, C_T[j]).
 */
inline std::vector<float> sm_lookup_table(const IntensityHistogram& target_cdf, const IntensityHistogram& source) {
  if (target_cdf.config() != source.config()) throw InvalidArgument("sm_lookup_table: histogram configs differ");
  std::vector<float> lut(target_cdf.n_bins());
  for (std::size_t j = 0; j < lut.size(); ++j)
    lut[j] = static_cast<float>(inverse_quantile(source, target_cdf[j]));
  return lut;
}

/**
 * SM(v) = C_S^-1(C_T(v)) per voxel, where C_T is the image's own cumulative
 * histogram evaluated at v's bin. `vol` should already be pre-clipped for the
 * modality and `source_hist` fitted with the same config.
 */
inline Volume apply_sm(const Volume& vol, const IntensityHistogram& source_hist, const SMConfig& config) {
  if (source_hist.config() != config)
    throw InvalidArgument("apply_sm: histogram config (modality/bins/range) does not match the requested config");
  const IntensityHistogram target = compute_image_cdf(vol, config);
  const auto lut = sm_lookup_table(target, source_hist);
  return map_voxels(vol, [&](float v) { return lut[IntensityHistogram::bin_index(config, v)]; });
}

// Histogram file: {"n_bins": int, "range": [lo, hi], "modality": "ct"|"mr", "cumulative": [...]}.

inline nlohmann::json to_json(const IntensityHistogram& h) {
  nlohmann::json j;
  j["n_bins"] = h.n_bins();
  j["range"] = {h.config().range_lo, h.config().range_hi};
  j["modality"] = std::string(to_string(h.config().modality));
  j["cumulative"] = h.cumulative();
  return j;
}

inline IntensityHistogram histogram_from_json(const nlohmann::json& j) {
  try {
    SMConfig c;
    c.n_bins = j.at("n_bins").get<std::size_t>();
    const auto& r = j.at("range");
    if (!r.is_array() || r.size() != 2) throw DataError("histogram: range must have two entries");
    c.range_lo = r[0].get<double>();
    c.range_hi = r[1].get<double>();
    const auto m = j.at("modality").get<std::string>();
    if (m != "ct" && m != "mr") throw DataError("histogram: modality must be ct or mr");
    c.modality = m == "ct" ? Modality::CT : Modality::MR;
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("histogram: ") + e.what());
    }
    return IntensityHistogram(c, j.at("cumulative").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("histogram: ") + e.what());
  }
}

inline void save_histogram(const IntensityHistogram& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write histogram " + path.string());
  out << to_json(h).dump(2) << '\n';
  if (!out) throw IoError("failed writing histogram " + path.string());
}

inline IntensityHistogram load_histogram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open histogram " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("histogram " + path.string() + " is not valid JSON: " + e.what());
  }
  return histogram_from_json(j);
}

}  // namespace volaug

#endif  // VOLAUG_SOURCE_MATCH_HPP
